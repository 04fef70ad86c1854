//! Company/sector records: ingestion, statistics, singleton augmentation and
//! synthetic corpora.
//!
//! The input is one row per company: an opaque company id plus the list of
//! sector ids the company operates in. Sector ids are never interpreted
//! numerically; distinct strings are distinct sectors even when they only
//! differ in zero-padding.

mod synthetic;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::atomic_write_bytes;

pub use synthetic::{generate_synthetic, SectorCountDistribution, SyntheticConfig};

/// Company ids starting with this prefix are reserved for synthetic records
/// added by [`augment_with_singletons`]. [`load_records`] rejects real rows
/// that use it, so augmentation can never collide with loaded data.
pub const SYNTHETIC_COMPANY_PREFIX: &str = "synthetic::";

/// The ordered set of sector ids, each with a dense index and an optional
/// display name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SectorCatalog {
    entries: Vec<SectorEntry>,
    index: HashMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorEntry {
    pub id: String,
    pub name: Option<String>,
}

impl SectorCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the dense index for `id`, inserting it if unseen.
    pub fn insert(&mut self, id: &str) -> usize {
        if let Some(&idx) = self.index.get(id) {
            return idx;
        }
        let idx = self.entries.len();
        self.entries.push(SectorEntry {
            id: id.to_string(),
            name: None,
        });
        self.index.insert(id.to_string(), idx);
        idx
    }

    /// Records a display name for a sector. The first non-empty name wins.
    pub fn set_name(&mut self, idx: usize, name: &str) {
        if name.is_empty() {
            return;
        }
        if let Some(entry) = self.entries.get_mut(idx) {
            if entry.name.is_none() {
                entry.name = Some(name.to_string());
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, idx: usize) -> &str {
        &self.entries[idx].id
    }

    pub fn name(&self, idx: usize) -> Option<&str> {
        self.entries[idx].name.as_deref()
    }

    pub fn entries(&self) -> &[SectorEntry] {
        &self.entries
    }
}

/// One company and the set of sectors it operates in, as dense catalog
/// indices. The set is non-empty and duplicate-free by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompanyRecord {
    pub company_id: String,
    pub sectors: BTreeSet<usize>,
}

/// The transaction database: a sector catalog plus one record per company.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionDatabase {
    catalog: SectorCatalog,
    records: Vec<CompanyRecord>,
}

impl TransactionDatabase {
    /// Builds a database, validating the structural invariants: at least one
    /// record, unique company ids outside the reserved namespace, non-empty
    /// sector sets with in-range indices.
    pub fn new(catalog: SectorCatalog, records: Vec<CompanyRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidDatabase {
                msg: "no records".to_string(),
            });
        }
        let mut seen = HashSet::with_capacity(records.len());
        for record in &records {
            if record.company_id.starts_with(SYNTHETIC_COMPANY_PREFIX) {
                return Err(Error::InvalidDatabase {
                    msg: format!(
                        "company id {} lies in the reserved synthetic namespace",
                        record.company_id
                    ),
                });
            }
            if !seen.insert(record.company_id.as_str()) {
                return Err(Error::InvalidDatabase {
                    msg: format!("duplicate company id {}", record.company_id),
                });
            }
            if record.sectors.is_empty() {
                return Err(Error::InvalidDatabase {
                    msg: format!("company {} has no sectors", record.company_id),
                });
            }
            if let Some(&max) = record.sectors.iter().next_back() {
                if max >= catalog.len() {
                    return Err(Error::InvalidDatabase {
                        msg: format!(
                            "company {} references sector index {} outside catalog of {}",
                            record.company_id,
                            max,
                            catalog.len()
                        ),
                    });
                }
            }
        }
        Ok(Self { catalog, records })
    }

    pub fn catalog(&self) -> &SectorCatalog {
        &self.catalog
    }

    pub fn records(&self) -> &[CompanyRecord] {
        &self.records
    }

    /// N: number of companies.
    pub fn num_companies(&self) -> usize {
        self.records.len()
    }

    /// M: number of sectors in the catalog.
    pub fn num_sectors(&self) -> usize {
        self.catalog.len()
    }
}

/// How to pick the company id, sector list and optional names out of a
/// delimited text row. Defaults match the three-column layout
/// `company_id,"sector,ids","optional, names"`.
#[derive(Debug, Clone)]
pub struct RecordFormat {
    pub delimiter: u8,
    pub has_header: bool,
    pub company_column: usize,
    pub sectors_column: usize,
    pub names_column: Option<usize>,
    /// Separator inside the sector-id (and names) list cell.
    pub list_delimiter: char,
}

impl Default for RecordFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: false,
            company_column: 0,
            sectors_column: 1,
            names_column: Some(2),
            list_delimiter: ',',
        }
    }
}

/// Loads a transaction database from delimited text.
///
/// The catalog is built from the union of observed sector ids in row order;
/// duplicate ids within one row collapse to one set entry; rows with extra
/// columns are tolerated. Rejected with the offending row number: missing
/// fields, empty sector lists, duplicate company ids and ids inside the
/// reserved synthetic namespace.
pub fn load_records(path: impl AsRef<Path>, format: &RecordFormat) -> Result<TransactionDatabase> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(format.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| map_csv_error(path, e))?;

    let mut catalog = SectorCatalog::new();
    let mut records = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();

    for row in reader.records() {
        let row = row.map_err(|e| map_csv_error(path, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);

        let company_id = row
            .get(format.company_column)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::MalformedRow {
                row: line,
                msg: format!("missing company id in column {}", format.company_column),
            })?
            .to_string();
        if company_id.starts_with(SYNTHETIC_COMPANY_PREFIX) {
            return Err(Error::ReservedCompanyId {
                row: line,
                company: company_id,
            });
        }
        if !seen_ids.insert(company_id.clone()) {
            return Err(Error::DuplicateCompanyId {
                row: line,
                company: company_id,
            });
        }

        let sectors_cell = row.get(format.sectors_column).unwrap_or("");
        let tokens: Vec<&str> = sectors_cell
            .split(format.list_delimiter)
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(Error::EmptySectorList {
                row: line,
                company: company_id,
            });
        }

        let mut sectors = BTreeSet::new();
        for token in &tokens {
            sectors.insert(catalog.insert(token));
        }

        if let Some(col) = format.names_column {
            if let Some(cell) = row.get(col) {
                let names: Vec<&str> = cell.split(format.list_delimiter).map(str::trim).collect();
                // Names align 1:1 with the sector tokens of the row; on any
                // mismatch (for instance a name containing the delimiter)
                // the whole cell is ignored.
                if names.len() == tokens.len() {
                    for (token, name) in tokens.iter().zip(names) {
                        let idx = catalog.index_of(token).expect("token inserted above");
                        catalog.set_name(idx, name);
                    }
                }
            }
        }

        records.push(CompanyRecord {
            company_id,
            sectors,
        });
    }

    if records.is_empty() {
        return Err(Error::EmptyInput {
            path: path.to_path_buf(),
        });
    }
    TransactionDatabase::new(catalog, records)
}

fn map_csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::MalformedFile {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        }
    }
}

/// Writes a database back to the delimited layout accepted by
/// [`load_records`]. Sectors are emitted in catalog-index order, so loading
/// the output reproduces the database exactly as long as every catalog
/// sector occurs in at least one record.
pub fn write_records(
    db: &TransactionDatabase,
    path: impl AsRef<Path>,
    format: &RecordFormat,
) -> Result<()> {
    let path = path.as_ref();
    let into_io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let mut writer = csv::WriterBuilder::new()
        .delimiter(format.delimiter)
        .from_writer(Vec::new());
    if format.has_header {
        let mut header = vec!["company_id".to_string(), "sector_ids".to_string()];
        if format.names_column.is_some() {
            header.push("sector_names".to_string());
        }
        writer.write_record(&header).map_err(into_io)?;
    }
    let sep = format.list_delimiter.to_string();
    for record in &db.records {
        let ids: Vec<&str> = record.sectors.iter().map(|&s| db.catalog.id(s)).collect();
        let mut row = vec![record.company_id.clone(), ids.join(&sep)];
        if format.names_column.is_some() {
            let names: Vec<&str> = record
                .sectors
                .iter()
                .map(|&s| db.catalog.name(s).unwrap_or(""))
                .collect();
            row.push(names.join(&sep));
        }
        writer.write_record(&row).map_err(into_io)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    atomic_write_bytes(path, &bytes)
}

/// Corpus statistics over the per-company sector counts.
///
/// The standard deviation is the population form (divide by N), which is the
/// convention this crate reports everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_companies: usize,
    pub n_sectors: usize,
    pub mean_sectors_per_company: f64,
    pub sd_sectors_per_company: f64,
    pub sd_convention: String,
    /// sector count per company -> number of companies
    pub histogram: BTreeMap<usize, usize>,
}

pub fn compute_stats(db: &TransactionDatabase) -> DatasetStats {
    let n = db.records.len();
    let sizes: Vec<usize> = db.records.iter().map(|r| r.sectors.len()).collect();
    let mean = sizes.iter().map(|&k| k as f64).sum::<f64>() / n as f64;
    let var = sizes
        .iter()
        .map(|&k| {
            let d = k as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n as f64;
    let mut histogram = BTreeMap::new();
    for k in sizes {
        *histogram.entry(k).or_insert(0) += 1;
    }
    DatasetStats {
        n_companies: n,
        n_sectors: db.catalog.len(),
        mean_sectors_per_company: mean,
        sd_sectors_per_company: var.sqrt(),
        sd_convention: "population".to_string(),
        histogram,
    }
}

impl DatasetStats {
    /// JSON key/value report.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    /// Two-column table of the sector-count histogram, for plotting.
    pub fn histogram_table(&self) -> String {
        let mut out = String::from("sectors\tcompanies\n");
        for (k, count) in &self.histogram {
            out.push_str(&format!("{k}\t{count}\n"));
        }
        out
    }
}

/// Writes the JSON stats report.
pub fn write_stats_json(stats: &DatasetStats, path: impl AsRef<Path>) -> Result<()> {
    let mut contents = stats.to_json();
    contents.push('\n');
    atomic_write_bytes(path.as_ref(), contents.as_bytes())
}

/// Extends the database with one synthetic single-sector company per catalog
/// sector, unconditionally, and returns the sector index -> synthetic
/// company id mapping used to read recommendations back per sector.
///
/// The original records are untouched; synthetic ids live in the
/// [`SYNTHETIC_COMPANY_PREFIX`] namespace.
pub fn augment_with_singletons(
    db: &TransactionDatabase,
) -> (TransactionDatabase, BTreeMap<usize, String>) {
    let mut records = db.records.clone();
    let mut mapping = BTreeMap::new();
    for idx in 0..db.catalog.len() {
        let company_id = format!("{}{}", SYNTHETIC_COMPANY_PREFIX, db.catalog.id(idx));
        records.push(CompanyRecord {
            company_id: company_id.clone(),
            sectors: BTreeSet::from([idx]),
        });
        mapping.insert(idx, company_id);
    }
    let augmented = TransactionDatabase {
        catalog: db.catalog.clone(),
        records,
    };
    (augmented, mapping)
}

#[cfg(test)]
pub(crate) fn db_from_sets(sets: &[&[usize]]) -> TransactionDatabase {
    let max = sets.iter().flat_map(|s| s.iter()).max().copied().unwrap_or(0);
    let mut catalog = SectorCatalog::new();
    for i in 0..=max {
        catalog.insert(&format!("S{i:03}"));
    }
    let records = sets
        .iter()
        .enumerate()
        .map(|(i, s)| CompanyRecord {
            company_id: format!("c{i}"),
            sectors: s.iter().copied().collect(),
        })
        .collect();
    TransactionDatabase::new(catalog, records).expect("valid test db")
}
