mod config;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::ConfigFile;

/// Sector-relation mining pipeline: ingest company/sector records, mine or
/// learn sector similarity scores, extract directed top-K relations, combine
/// engines into labeling candidates, and evaluate against expert labels.
#[derive(Parser)]
#[command(name = "sectors", version)]
struct Cli {
    /// Config file with `key = value` defaults (flags win). Falls back to
    /// the SECTORS_CONFIG environment variable.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus statistics: company/sector counts, mean and (population) sd
    /// of sectors per company, and the sector-count histogram
    Stats {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Mine frequent itemsets (negFIN) and sector-pair supports
    Mine {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
        #[command(flatten)]
        mining: MiningArgs,
    },
    /// Item-item similarity matrix under one correlation measure
    Similar {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
        /// pearson | kendall | spearman
        #[arg(long)]
        measure: Option<String>,
        /// Tie-corrected tau-b instead of tau-a for Kendall entries
        #[arg(long)]
        tau_b: bool,
    },
    /// Fit an ALS factor model and export it
    Als {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
        #[command(flatten)]
        als: AlsArgs,
        /// Fit on the singleton-augmented database
        #[arg(long)]
        augment: bool,
    },
    /// Extract the directed top-K relation set with one engine
    Extract {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
        /// fim | pearson | kendall | spearman | als
        #[arg(long)]
        engine: Option<String>,
        /// Relations per source sector
        #[arg(short, long)]
        k: Option<usize>,
        #[command(flatten)]
        mining: MiningArgs,
        /// Tie-corrected tau-b instead of tau-a for Kendall entries
        #[arg(long)]
        tau_b: bool,
        #[command(flatten)]
        als: AlsArgs,
        /// Also derive a symmetric relation set: union | intersection
        #[arg(long)]
        symmetrize: Option<String>,
        /// Also write the full untruncated score lists
        #[arg(long)]
        scores_out: bool,
    },
    /// Combine exported score files into labeling candidates
    Candidates {
        #[command(flatten)]
        out: OutArgs,
        /// Score or relation files (the four-column ranked format)
        #[arg(long = "scores", value_name = "FILE", num_args = 1..)]
        scores: Vec<PathBuf>,
        /// Keep pairs with combined score strictly above this
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Score ranked relation files against ground-truth labels
    Evaluate {
        #[command(flatten)]
        out: OutArgs,
        /// Model files as NAME=PATH (repeatable)
        #[arg(long = "model", value_name = "NAME=PATH")]
        models: Vec<String>,
        /// Ground-truth label file (sector_i TAB sector_j TAB 0|1)
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Evaluation cutoffs, comma separated
        #[arg(long, value_delimiter = ',')]
        ks: Vec<usize>,
        /// Binarize each ranking to its top N entries before scoring
        #[arg(long)]
        binarize_top: Option<usize>,
    },
    /// Generate a planted-block synthetic corpus with ground truth
    Synth {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long)]
        sectors_per_block: Option<usize>,
        #[arg(long)]
        companies: Option<usize>,
        /// fixed:K or uniform:MIN:MAX
        #[arg(long)]
        sectors_per_company: Option<String>,
        /// Cross-block contamination probability
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Input records file (company_id, "sector,ids", optional names)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input field delimiter
    #[arg(long)]
    delimiter: Option<char>,
    /// Input has a header row
    #[arg(long)]
    has_header: bool,
    /// Column index of the company id
    #[arg(long)]
    company_col: Option<usize>,
    /// Column index of the sector-id list
    #[arg(long)]
    sectors_col: Option<usize>,
    /// Column index of the sector names, or `none`
    #[arg(long)]
    names_col: Option<String>,
}

#[derive(Args)]
struct OutArgs {
    /// Directory for output artifacts
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct MiningArgs {
    /// Absolute minimum support count
    #[arg(long, conflicts_with = "min_support_frac")]
    min_support: Option<usize>,
    /// Relative minimum support (ceil of fraction * N, floored at 1)
    #[arg(long)]
    min_support_frac: Option<f64>,
}

#[derive(Args)]
struct AlsArgs {
    /// Latent dimension l
    #[arg(long)]
    latent_dim: Option<usize>,
    /// Regularization weight
    #[arg(long)]
    lambda: Option<f64>,
    /// ALS iterations
    #[arg(long)]
    iterations: Option<usize>,
    /// Seed driving all randomness of the run
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = ConfigFile::resolve(cli.config.as_deref())
        .and_then(|cfg| run::dispatch(cli.command, &cfg));
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
