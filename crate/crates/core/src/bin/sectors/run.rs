//! Subcommand implementations. Each resolves its parameters (flag, then
//! config file, then default), validates before writing anything, and emits
//! artifacts through the atomic writers in `sector_relations::io`.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use sector_relations::cf::{AlsConfig, Measure, SimilarityOptions};
use sector_relations::dataset::{
    self, generate_synthetic, RecordFormat, SectorCatalog, SyntheticConfig, TransactionDatabase,
};
use sector_relations::engines::{extract_relations, Engine};
use sector_relations::eval::{self, GroundTruthLabels, RankedModel};
use sector_relations::fim::{self, MinSupport};
use sector_relations::io;
use sector_relations::relations::{self, SimilarityScores, Symmetrize};

use crate::config::ConfigFile;
use crate::{AlsArgs, Command, InputArgs, MiningArgs, OutArgs};

const DEFAULT_SEED: u64 = 42;
const DEFAULT_K: usize = 10;
const DEFAULT_MIN_SUPPORT_FRAC: f64 = 0.0005;
const DEFAULT_THRESHOLD: f64 = 0.5;

pub fn dispatch(command: Command, cfg: &ConfigFile) -> Result<()> {
    match command {
        Command::Stats { input, out } => stats(&input, &out, cfg),
        Command::Mine { input, out, mining } => mine(&input, &out, &mining, cfg),
        Command::Similar {
            input,
            out,
            measure,
            tau_b,
        } => similar(&input, &out, measure, tau_b, cfg),
        Command::Als {
            input,
            out,
            als,
            augment,
        } => fit_als(&input, &out, &als, augment, cfg),
        Command::Extract {
            input,
            out,
            engine,
            k,
            mining,
            tau_b,
            als,
            symmetrize,
            scores_out,
        } => extract(
            &input, &out, engine, k, &mining, tau_b, &als, symmetrize, scores_out, cfg,
        ),
        Command::Candidates {
            out,
            scores,
            threshold,
        } => candidates(&out, &scores, threshold, cfg),
        Command::Evaluate {
            out,
            models,
            labels,
            ks,
            binarize_top,
        } => evaluate(&out, &models, labels, &ks, binarize_top, cfg),
        Command::Synth {
            out,
            blocks,
            sectors_per_block,
            companies,
            sectors_per_company,
            noise,
            seed,
        } => synth(
            &out,
            blocks,
            sectors_per_block,
            companies,
            sectors_per_company,
            noise,
            seed,
            cfg,
        ),
    }
}

fn record_format(args: &InputArgs, cfg: &ConfigFile) -> Result<RecordFormat> {
    let default = RecordFormat::default();
    let delimiter = cfg.pick(args.delimiter, "delimiter", default.delimiter as char)?;
    let names_col = match cfg.pick_opt(args.names_col.clone(), "names_col")? {
        None => default.names_column,
        Some(raw) if raw == "none" => None,
        Some(raw) => Some(raw.parse::<usize>().map_err(|_| {
            anyhow!("--names-col must be a column index or `none`, found {raw:?}")
        })?),
    };
    Ok(RecordFormat {
        delimiter: u8::try_from(delimiter).map_err(|_| anyhow!("--delimiter must be ASCII"))?,
        has_header: args.has_header || cfg.get("has_header")?.unwrap_or(false),
        company_column: cfg.pick(args.company_col, "company_col", default.company_column)?,
        sectors_column: cfg.pick(args.sectors_col, "sectors_col", default.sectors_column)?,
        names_column: names_col,
        list_delimiter: cfg.pick(None, "list_delimiter", default.list_delimiter)?,
    })
}

fn load_input(args: &InputArgs, cfg: &ConfigFile) -> Result<(TransactionDatabase, PathBuf)> {
    let input: PathBuf = cfg.require(args.input.clone(), "input")?;
    let format = record_format(args, cfg)?;
    let db = dataset::load_records(&input, &format)
        .with_context(|| format!("loading {}", input.display()))?;
    Ok((db, input))
}

fn out_dir(out: &OutArgs, cfg: &ConfigFile) -> Result<PathBuf> {
    let dir: PathBuf = cfg.pick(out.out_dir.clone(), "out_dir", PathBuf::from("."))?;
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn min_support_setting(mining: &MiningArgs, cfg: &ConfigFile) -> Result<MinSupport> {
    if let Some(abs) = cfg.pick_opt(mining.min_support, "min_support")? {
        return Ok(MinSupport::Absolute(abs));
    }
    Ok(MinSupport::Relative(cfg.pick(
        mining.min_support_frac,
        "min_support_frac",
        DEFAULT_MIN_SUPPORT_FRAC,
    )?))
}

fn als_config(als: &AlsArgs, cfg: &ConfigFile) -> Result<AlsConfig> {
    let default = AlsConfig::default();
    Ok(AlsConfig {
        latent_dim: cfg.pick(als.latent_dim, "latent_dim", default.latent_dim)?,
        lambda: cfg.pick(als.lambda, "lambda", default.lambda)?,
        iterations: cfg.pick(als.iterations, "iterations", default.iterations)?,
        seed: cfg.pick(als.seed, "seed", DEFAULT_SEED)?,
    })
}

fn stats(input: &InputArgs, out: &OutArgs, cfg: &ConfigFile) -> Result<()> {
    let (db, input_path) = load_input(input, cfg)?;
    let dir = out_dir(out, cfg)?;
    let stats = dataset::compute_stats(&db);
    dataset::write_stats_json(&stats, dir.join("stats.json"))?;
    let header = [
        ("tool", "sectors stats".to_string()),
        ("input", input_path.display().to_string()),
    ];
    io::write_text(
        dir.join("histogram.tsv"),
        &format!("{}{}", render(&header), stats.histogram_table()),
    )?;
    println!("{}", stats.to_json());
    Ok(())
}

fn render(pairs: &[(&str, String)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("# {k}: {v}\n"))
        .collect()
}

fn mine(input: &InputArgs, out: &OutArgs, mining: &MiningArgs, cfg: &ConfigFile) -> Result<()> {
    let (db, input_path) = load_input(input, cfg)?;
    let dir = out_dir(out, cfg)?;
    let setting = min_support_setting(mining, cfg)?;
    let min_support = setting.resolve(db.num_companies())?;
    let frequent = fim::mine_frequent(&db, min_support)?;
    let pairs = fim::pair_supports(&frequent);

    let header = [
        ("tool", "sectors mine".to_string()),
        ("input", input_path.display().to_string()),
        ("min_support", min_support.to_string()),
        ("itemsets", frequent.len().to_string()),
    ];
    io::write_itemsets(dir.join("itemsets.tsv"), &frequent, db.catalog(), &header)?;
    io::write_pair_supports(dir.join("pairs.tsv"), &pairs, db.catalog(), &header)?;
    println!(
        "mined {} itemsets ({} pairs) at min_support {min_support}",
        frequent.len(),
        pairs.len()
    );
    Ok(())
}

fn parse_measure(raw: &str) -> Result<Measure> {
    raw.parse::<Measure>().map_err(|e| anyhow!(e.to_string()))
}

fn similar(
    input: &InputArgs,
    out: &OutArgs,
    measure: Option<String>,
    tau_b: bool,
    cfg: &ConfigFile,
) -> Result<()> {
    let measure = parse_measure(&cfg.require(measure, "measure")?)?;
    let tau_b = tau_b || cfg.get("tau_b")?.unwrap_or(false);
    let (db, input_path) = load_input(input, cfg)?;
    let dir = out_dir(out, cfg)?;

    let ratings = sector_relations::cf::build_ratings(&db);
    let sim = sector_relations::cf::item_similarity_matrix_with(
        &ratings,
        measure,
        &SimilarityOptions {
            kendall_tau_b: tau_b,
        },
    );
    let tag = measure.as_str();
    let header = [
        ("tool", "sectors similar".to_string()),
        ("input", input_path.display().to_string()),
        ("measure", tag.to_string()),
        ("kendall_tau_b", tau_b.to_string()),
    ];
    io::write_similarity(
        dir.join(format!("similarity_{tag}.tsv")),
        &sim,
        db.catalog(),
        &header,
    )?;
    io::write_similarity_mask(
        dir.join(format!("similarity_{tag}_mask.tsv")),
        &sim,
        db.catalog(),
        &header,
    )?;
    println!("wrote similarity_{tag}.tsv and its defined mask");
    Ok(())
}

fn fit_als(
    input: &InputArgs,
    out: &OutArgs,
    als: &AlsArgs,
    augment: bool,
    cfg: &ConfigFile,
) -> Result<()> {
    let (db, input_path) = load_input(input, cfg)?;
    let dir = out_dir(out, cfg)?;
    let config = als_config(als, cfg)?;
    let augment = augment || cfg.get("augment")?.unwrap_or(false);

    let ratings = if augment {
        let (augmented, _) = dataset::augment_with_singletons(&db);
        sector_relations::cf::build_ratings(&augmented)
    } else {
        sector_relations::cf::build_ratings(&db)
    };
    let model = sector_relations::cf::als_factorize(&ratings, &config)?;
    let header = [
        ("tool", "sectors als".to_string()),
        ("input", input_path.display().to_string()),
        ("augmented", augment.to_string()),
        ("seed", config.seed.to_string()),
    ];
    io::write_factor_model(dir.join("factors.txt"), &model, &header)?;
    println!(
        "fitted l={} lambda={} iterations={} seed={}",
        config.latent_dim, config.lambda, config.iterations, config.seed
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn extract(
    input: &InputArgs,
    out: &OutArgs,
    engine: Option<String>,
    k: Option<usize>,
    mining: &MiningArgs,
    tau_b: bool,
    als: &AlsArgs,
    symmetrize_mode: Option<String>,
    scores_out: bool,
    cfg: &ConfigFile,
) -> Result<()> {
    let engine_name: String = cfg.require(engine, "engine")?;
    let k = cfg.pick(k, "k", DEFAULT_K)?;
    let tau_b = tau_b || cfg.get("tau_b")?.unwrap_or(false);
    let symmetrize_mode = match cfg.pick_opt(symmetrize_mode, "symmetrize")?.as_deref() {
        None => None,
        Some("union") => Some(Symmetrize::Union),
        Some("intersection") => Some(Symmetrize::Intersection),
        Some(other) => bail!("--symmetrize must be union or intersection, found {other:?}"),
    };
    let scores_out = scores_out || cfg.get("scores_out")?.unwrap_or(false);

    let engine = match engine_name.as_str() {
        "fim" => Engine::Fim {
            min_support: min_support_setting(mining, cfg)?,
        },
        "pearson" | "kendall" | "spearman" => Engine::Similarity {
            measure: parse_measure(&engine_name)?,
            kendall_tau_b: tau_b,
        },
        "als" => Engine::Als(als_config(als, cfg)?),
        other => bail!("unknown engine {other:?}"),
    };

    let (db, input_path) = load_input(input, cfg)?;
    let dir = out_dir(out, cfg)?;
    let outcome = extract_relations(&db, &engine, k)?;
    let relations = match symmetrize_mode {
        Some(mode) => relations::symmetrize(&outcome.relations, mode),
        None => outcome.relations.clone(),
    };

    let tag = engine.tag();
    let seed = match &engine {
        Engine::Als(config) => config.seed.to_string(),
        _ => "-".to_string(),
    };
    let header = [
        ("tool", "sectors extract".to_string()),
        ("input", input_path.display().to_string()),
        ("engine", tag.to_string()),
        ("seed", seed),
        (
            "symmetrize",
            match symmetrize_mode {
                None => "off".to_string(),
                Some(Symmetrize::Union) => "union".to_string(),
                Some(Symmetrize::Intersection) => "intersection".to_string(),
            },
        ),
    ];
    io::write_relations(
        dir.join(format!("relations_{tag}.tsv")),
        &relations,
        db.catalog(),
        &header,
    )?;
    if scores_out {
        io::write_scores(
            dir.join(format!("scores_{tag}.tsv")),
            &outcome.scores,
            db.catalog(),
            &header,
        )?;
    }
    println!(
        "extracted {} relations with engine {tag} at K={k}",
        relations.num_relations()
    );
    Ok(())
}

fn candidates(
    out: &OutArgs,
    scores: &[PathBuf],
    threshold: Option<f64>,
    cfg: &ConfigFile,
) -> Result<()> {
    let mut files: Vec<PathBuf> = scores.to_vec();
    if files.is_empty() {
        if let Some(joined) = cfg.get::<String>("scores")? {
            files = joined.split(',').map(PathBuf::from).collect();
        }
    }
    if files.is_empty() {
        bail!("missing required option --scores");
    }
    let threshold = cfg.pick(threshold, "threshold", DEFAULT_THRESHOLD)?;
    let dir = out_dir(out, cfg)?;

    // Build a shared id catalog over everything the score files mention,
    // then combine per-model normalized scores.
    let mut catalog = SectorCatalog::new();
    let mut models: Vec<SimilarityScores> = Vec::new();
    for file in &files {
        let ranked = io::read_ranked(file).with_context(|| format!("reading {}", file.display()))?;
        let mut model = SimilarityScores::new();
        for (source, targets) in &ranked {
            let source_idx = catalog.insert(source);
            for (target, score) in targets {
                let target_idx = catalog.insert(target);
                model
                    .add(source_idx, target_idx, *score)
                    .with_context(|| format!("score list {}", file.display()))?;
            }
        }
        models.push(model);
    }

    let pairs = relations::candidate_pairs_for_labeling(&models, threshold)?;
    let header = [
        ("tool", "sectors candidates".to_string()),
        (
            "models",
            files
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("threshold", threshold.to_string()),
        ("combine", "mean of per-model min-max normalized scores".to_string()),
    ];
    io::write_candidates(dir.join("candidates.tsv"), &pairs, &catalog, &header)?;
    println!(
        "kept {} candidate pairs above threshold {threshold}",
        pairs.len()
    );
    Ok(())
}

fn evaluate(
    out: &OutArgs,
    model_args: &[String],
    labels: Option<PathBuf>,
    ks: &[usize],
    binarize_top: Option<usize>,
    cfg: &ConfigFile,
) -> Result<()> {
    let mut model_specs: Vec<String> = model_args.to_vec();
    if model_specs.is_empty() {
        if let Some(joined) = cfg.get::<String>("models")? {
            model_specs = joined.split(',').map(str::to_string).collect();
        }
    }
    if model_specs.is_empty() {
        bail!("missing required option --model NAME=PATH");
    }
    let labels_path: PathBuf = cfg.require(labels, "labels")?;
    let ks: Vec<usize> = if ks.is_empty() {
        cfg.get::<String>("ks")?
            .map(|raw| {
                raw.split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .transpose()
            .map_err(|e| anyhow!("config ks: {e}"))?
            .unwrap_or_else(|| vec![5, 10])
    } else {
        ks.to_vec()
    };
    let binarize_top = cfg.pick_opt(binarize_top, "binarize_top")?;
    let dir = out_dir(out, cfg)?;

    let labels: GroundTruthLabels = io::read_labels(&labels_path)
        .with_context(|| format!("reading labels {}", labels_path.display()))?;

    let mut models = Vec::new();
    for spec in &model_specs {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("--model takes NAME=PATH, found {spec:?}"))?;
        let ranked = io::read_ranked(Path::new(path))
            .with_context(|| format!("reading model file {path}"))?;
        let mut rankings: eval::Rankings = ranked
            .into_iter()
            .map(|(source, targets)| (source, targets.into_iter().map(|(t, _)| t).collect()))
            .collect();
        if let Some(top) = binarize_top {
            rankings = eval::binarize_top_k(&rankings, top)?
                .into_iter()
                .map(|(source, flagged)| {
                    let kept = flagged
                        .into_iter()
                        .filter_map(|(target, flag)| (flag == 1).then_some(target))
                        .collect();
                    (source, kept)
                })
                .collect();
        }
        models.push(RankedModel {
            name: name.to_string(),
            rankings,
        });
    }

    let report = eval::evaluate(&models, &labels, &ks)?;
    let header = [
        ("tool", "sectors evaluate".to_string()),
        ("labels", labels_path.display().to_string()),
        (
            "binarize_top",
            binarize_top.map_or("off".to_string(), |v| v.to_string()),
        ),
    ];
    let table = format!("{}{}", render(&header), report.render_table());
    io::write_text(dir.join("report.txt"), &table)?;
    io::write_text(dir.join("metrics_long.tsv"), &report.render_long())?;
    print!("{table}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn synth(
    out: &OutArgs,
    blocks: Option<usize>,
    sectors_per_block: Option<usize>,
    companies: Option<usize>,
    sectors_per_company: Option<String>,
    noise: Option<f64>,
    seed: Option<u64>,
    cfg: &ConfigFile,
) -> Result<()> {
    let config = SyntheticConfig {
        n_blocks: cfg.pick(blocks, "blocks", 4)?,
        sectors_per_block: cfg.pick(sectors_per_block, "sectors_per_block", 5)?,
        n_companies: cfg.pick(companies, "companies", 2000)?,
        sectors_per_company: cfg
            .pick(
                sectors_per_company,
                "sectors_per_company",
                "uniform:2:4".to_string(),
            )?
            .parse()
            .map_err(|e: sector_relations::Error| anyhow!(e.to_string()))?,
        cross_block_noise: cfg.pick(noise, "noise", 0.05)?,
    };
    let seed = cfg.pick(seed, "seed", DEFAULT_SEED)?;
    let dir = out_dir(out, cfg)?;

    let (db, truth) = generate_synthetic(&config, seed)?;
    dataset::write_records(&db, dir.join("dataset.csv"), &RecordFormat::default())?;

    // complete labeling: every ordered pair gets 0 or 1
    let mut labels = GroundTruthLabels::new();
    for i in 0..db.num_sectors() {
        for j in 0..db.num_sectors() {
            if i == j {
                continue;
            }
            labels.insert(
                db.catalog().id(i),
                db.catalog().id(j),
                truth.contains(i, j),
            )?;
        }
    }
    let header = [
        ("tool", "sectors synth".to_string()),
        ("seed", seed.to_string()),
        ("blocks", config.n_blocks.to_string()),
        ("sectors_per_block", config.sectors_per_block.to_string()),
        ("companies", config.n_companies.to_string()),
        ("sectors_per_company", config.sectors_per_company.to_string()),
        ("noise", config.cross_block_noise.to_string()),
    ];
    io::write_labels(dir.join("labels.tsv"), &labels, &header)?;
    println!(
        "generated {} companies over {} sectors; {} planted relations",
        db.num_companies(),
        db.num_sectors(),
        truth.num_relations()
    );
    Ok(())
}
