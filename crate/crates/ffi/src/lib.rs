//! C ABI over the sector-relations pipeline.
//!
//! Databases travel as opaque handles; every fallible call returns an
//! [`SrStatus`] code and leaves a human-readable message for
//! [`sr_last_error_message`] on failure. Artifacts are exchanged through the
//! same files the CLI reads and writes, so bindings in other languages can
//! interoperate with it directly.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;

use sector_relations::cf::AlsConfig;
use sector_relations::dataset::{
    self, RecordFormat, SectorCountDistribution, SyntheticConfig, TransactionDatabase,
};
use sector_relations::engines::{extract_relations, Engine};
use sector_relations::eval::{self, RankedModel};
use sector_relations::fim::{self, MinSupport};
use sector_relations::io;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Failed = 5,
}

/// Opaque transaction database handle.
pub struct SrDatabase {
    inner: TransactionDatabase,
}

/// Scoring engine selector for [`sr_extract_to_file`].
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SrEngine {
    Fim = 0,
    Pearson = 1,
    Kendall = 2,
    Spearman = 3,
    Als = 4,
}

/// Extraction parameters. `min_support` of 0 selects the relative default
/// (0.0005 of the record count); the ALS fields are ignored by the other
/// engines.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SrExtractOptions {
    pub engine: SrEngine,
    pub k: u64,
    pub min_support: u64,
    pub latent_dim: u64,
    pub lambda: f64,
    pub iterations: u64,
    pub seed: u64,
}

/// Corpus statistics of a loaded database.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SrStats {
    pub n_companies: u64,
    pub n_sectors: u64,
    pub mean_sectors_per_company: f64,
    pub sd_sectors_per_company: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: SrStatus, message: impl std::fmt::Display) -> SrStatus {
    let rendered = CString::new(message.to_string())
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = rendered);
    status
}

fn fail_lib(err: sector_relations::Error) -> SrStatus {
    let status = match &err {
        sector_relations::Error::Io { .. } => SrStatus::Io,
        _ => SrStatus::Failed,
    };
    fail(status, err)
}

/// Message of the last failing call on this thread. Valid until the next
/// failing call; never NULL.
#[no_mangle]
pub extern "C" fn sr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string or NULL.
unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, SrStatus> {
    if ptr.is_null() {
        return Err(fail(SrStatus::NullPointer, "path argument is NULL"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(e) => Err(fail(SrStatus::InvalidUtf8, e)),
    }
}

/// Loads a transaction database from a delimited records file in the
/// default layout (`company_id,"sector,ids",names`).
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the database and must be released with
/// [`sr_database_free`].
#[no_mangle]
pub unsafe extern "C" fn sr_database_load(
    path: *const c_char,
    out: *mut *mut SrDatabase,
) -> SrStatus {
    if out.is_null() {
        return fail(SrStatus::NullPointer, "out pointer is NULL");
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match dataset::load_records(&path, &RecordFormat::default()) {
        Ok(db) => {
            *out = Box::into_raw(Box::new(SrDatabase { inner: db }));
            SrStatus::Ok
        }
        Err(e) => fail_lib(e),
    }
}

/// Releases a database handle. NULL is a no-op.
///
/// # Safety
/// `db` must be NULL or a pointer returned by [`sr_database_load`] that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn sr_database_free(db: *mut SrDatabase) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// Number of companies, or 0 for NULL.
///
/// # Safety
/// `db` must be NULL or a live database handle.
#[no_mangle]
pub unsafe extern "C" fn sr_database_num_companies(db: *const SrDatabase) -> u64 {
    db.as_ref().map_or(0, |db| db.inner.num_companies() as u64)
}

/// Number of sectors, or 0 for NULL.
///
/// # Safety
/// `db` must be NULL or a live database handle.
#[no_mangle]
pub unsafe extern "C" fn sr_database_num_sectors(db: *const SrDatabase) -> u64 {
    db.as_ref().map_or(0, |db| db.inner.num_sectors() as u64)
}

/// Fills `out` with corpus statistics (population standard deviation).
///
/// # Safety
/// `db` must be a live database handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sr_database_stats(db: *const SrDatabase, out: *mut SrStats) -> SrStatus {
    let Some(db) = db.as_ref() else {
        return fail(SrStatus::NullPointer, "database handle is NULL");
    };
    if out.is_null() {
        return fail(SrStatus::NullPointer, "out pointer is NULL");
    }
    let stats = dataset::compute_stats(&db.inner);
    *out = SrStats {
        n_companies: stats.n_companies as u64,
        n_sectors: stats.n_sectors as u64,
        mean_sectors_per_company: stats.mean_sectors_per_company,
        sd_sectors_per_company: stats.sd_sectors_per_company,
    };
    SrStatus::Ok
}

/// Mines frequent itemsets and writes the itemset and pair-support files.
/// Either output path may be NULL to skip that artifact.
///
/// # Safety
/// `db` must be a live database handle; non-NULL paths must be valid
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn sr_mine_to_files(
    db: *const SrDatabase,
    min_support: u64,
    itemsets_path: *const c_char,
    pairs_path: *const c_char,
) -> SrStatus {
    let Some(db) = db.as_ref() else {
        return fail(SrStatus::NullPointer, "database handle is NULL");
    };
    let frequent = match fim::mine_frequent(&db.inner, min_support as usize) {
        Ok(f) => f,
        Err(e) => return fail_lib(e),
    };
    let header = [("min_support", min_support.to_string())];
    if !itemsets_path.is_null() {
        let path = match path_arg(itemsets_path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        if let Err(e) = io::write_itemsets(&path, &frequent, db.inner.catalog(), &header) {
            return fail_lib(e);
        }
    }
    if !pairs_path.is_null() {
        let path = match path_arg(pairs_path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let pairs = fim::pair_supports(&frequent);
        if let Err(e) = io::write_pair_supports(&path, &pairs, db.inner.catalog(), &header) {
            return fail_lib(e);
        }
    }
    SrStatus::Ok
}

/// Default extraction options: FIM engine, K = 10, relative min support,
/// ALS defaults (l = 32, lambda = 0.1, 15 iterations, seed 42).
#[no_mangle]
pub extern "C" fn sr_extract_options_default() -> SrExtractOptions {
    let als = AlsConfig::default();
    SrExtractOptions {
        engine: SrEngine::Fim,
        k: 10,
        min_support: 0,
        latent_dim: als.latent_dim as u64,
        lambda: als.lambda,
        iterations: als.iterations as u64,
        seed: 42,
    }
}

/// Extracts the directed top-K relation set and writes it in the
/// four-column ranked format.
///
/// # Safety
/// `db` must be a live database handle; `options` and `relations_path` must
/// be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sr_extract_to_file(
    db: *const SrDatabase,
    options: *const SrExtractOptions,
    relations_path: *const c_char,
) -> SrStatus {
    let Some(db) = db.as_ref() else {
        return fail(SrStatus::NullPointer, "database handle is NULL");
    };
    let Some(options) = options.as_ref() else {
        return fail(SrStatus::NullPointer, "options pointer is NULL");
    };
    let path = match path_arg(relations_path) {
        Ok(p) => p,
        Err(status) => return status,
    };

    let min_support = if options.min_support == 0 {
        MinSupport::Relative(0.0005)
    } else {
        MinSupport::Absolute(options.min_support as usize)
    };
    let engine = match options.engine {
        SrEngine::Fim => Engine::Fim { min_support },
        SrEngine::Pearson => Engine::Similarity {
            measure: sector_relations::cf::Measure::Pearson,
            kendall_tau_b: false,
        },
        SrEngine::Kendall => Engine::Similarity {
            measure: sector_relations::cf::Measure::Kendall,
            kendall_tau_b: false,
        },
        SrEngine::Spearman => Engine::Similarity {
            measure: sector_relations::cf::Measure::Spearman,
            kendall_tau_b: false,
        },
        SrEngine::Als => Engine::Als(AlsConfig {
            latent_dim: options.latent_dim as usize,
            lambda: options.lambda,
            iterations: options.iterations as usize,
            seed: options.seed,
        }),
    };

    let outcome = match extract_relations(&db.inner, &engine, options.k as usize) {
        Ok(o) => o,
        Err(e) => return fail_lib(e),
    };
    let header = [
        ("engine", engine.tag().to_string()),
        ("seed", options.seed.to_string()),
    ];
    match io::write_relations(&path, &outcome.relations, db.inner.catalog(), &header) {
        Ok(()) => SrStatus::Ok,
        Err(e) => fail_lib(e),
    }
}

/// Generates a planted-block synthetic corpus, writing the dataset and its
/// complete ground-truth label file.
///
/// # Safety
/// `dataset_path` and `labels_path` must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn sr_synthesize(
    blocks: u64,
    sectors_per_block: u64,
    companies: u64,
    min_sectors: u64,
    max_sectors: u64,
    noise: f64,
    seed: u64,
    dataset_path: *const c_char,
    labels_path: *const c_char,
) -> SrStatus {
    let dataset_path = match path_arg(dataset_path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let labels_path = match path_arg(labels_path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let config = SyntheticConfig {
        n_blocks: blocks as usize,
        sectors_per_block: sectors_per_block as usize,
        n_companies: companies as usize,
        sectors_per_company: if min_sectors == max_sectors {
            SectorCountDistribution::Fixed(min_sectors as usize)
        } else {
            SectorCountDistribution::Uniform {
                min: min_sectors as usize,
                max: max_sectors as usize,
            }
        },
        cross_block_noise: noise,
    };
    let (db, truth) = match dataset::generate_synthetic(&config, seed) {
        Ok(v) => v,
        Err(e) => return fail(SrStatus::InvalidArgument, e),
    };
    if let Err(e) = dataset::write_records(&db, &dataset_path, &RecordFormat::default()) {
        return fail_lib(e);
    }
    let mut labels = eval::GroundTruthLabels::new();
    for i in 0..db.num_sectors() {
        for j in 0..db.num_sectors() {
            if i != j {
                if let Err(e) =
                    labels.insert(db.catalog().id(i), db.catalog().id(j), truth.contains(i, j))
                {
                    return fail_lib(e);
                }
            }
        }
    }
    match io::write_labels(&labels_path, &labels, &[("seed", seed.to_string())]) {
        Ok(()) => SrStatus::Ok,
        Err(e) => fail_lib(e),
    }
}

/// Scores ranked relation files against a label file and writes the report
/// table plus, when `long_path` is non-NULL, the plot-ready long table.
///
/// # Safety
/// `model_names` and `model_paths` must point to `n_models` valid strings;
/// `ks` must point to `n_ks` values; the path arguments must be valid
/// NUL-terminated strings (`long_path` may be NULL).
#[no_mangle]
pub unsafe extern "C" fn sr_evaluate_files(
    model_names: *const *const c_char,
    model_paths: *const *const c_char,
    n_models: usize,
    labels_path: *const c_char,
    ks: *const u64,
    n_ks: usize,
    report_path: *const c_char,
    long_path: *const c_char,
) -> SrStatus {
    if n_models == 0 {
        return fail(SrStatus::InvalidArgument, "need at least one model");
    }
    if model_names.is_null() || model_paths.is_null() || ks.is_null() {
        return fail(SrStatus::NullPointer, "array argument is NULL");
    }
    let labels_path = match path_arg(labels_path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let report_path = match path_arg(report_path) {
        Ok(p) => p,
        Err(status) => return status,
    };

    let labels = match io::read_labels(&labels_path) {
        Ok(l) => l,
        Err(e) => return fail_lib(e),
    };
    let ks: Vec<usize> = std::slice::from_raw_parts(ks, n_ks)
        .iter()
        .map(|&k| k as usize)
        .collect();

    let names = std::slice::from_raw_parts(model_names, n_models);
    let paths = std::slice::from_raw_parts(model_paths, n_models);
    let mut models = Vec::with_capacity(n_models);
    for (&name_ptr, &path_ptr) in names.iter().zip(paths) {
        let name = match path_arg(name_ptr) {
            Ok(p) => p.display().to_string(),
            Err(status) => return status,
        };
        let path = match path_arg(path_ptr) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let ranked = match io::read_ranked(&path) {
            Ok(r) => r,
            Err(e) => return fail_lib(e),
        };
        models.push(RankedModel {
            name,
            rankings: ranked
                .into_iter()
                .map(|(s, ts)| (s, ts.into_iter().map(|(t, _)| t).collect()))
                .collect(),
        });
    }

    let report = match eval::evaluate(&models, &labels, &ks) {
        Ok(r) => r,
        Err(e) => return fail_lib(e),
    };
    if let Err(e) = io::write_text(&report_path, &report.render_table()) {
        return fail_lib(e);
    }
    if !long_path.is_null() {
        let long_path = match path_arg(long_path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        if let Err(e) = io::write_text(&long_path, &report.render_long()) {
            return fail_lib(e);
        }
    }
    SrStatus::Ok
}
