//! Command-line front end for the prosodex pipeline.
//!
//! [`run`] parses arguments, resolves the configuration and executes one
//! command, returning the process exit code: 0 on success, 1 for usage or
//! configuration errors, 2 for data errors (missing files, unreadable corpora,
//! untrainable datasets).

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Config, CONFIG_ENV};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<prosodex::Error> for CliError {
    fn from(e: prosodex::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "prosodex", version, about = "Rhyme-timeline features and poetry/prose classification")]
pub struct Cli {
    /// Seed for synthesis, shuffling and layout.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// TOML configuration file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// CMU-format pronunciation lexicon (default: bundled fixture lexicon).
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-document statistics, histograms and Weibull fits.
    Stats(CorpusArg),
    /// Feature vectors, optionally with timeline and window dumps.
    Extract(ExtractArgs),
    /// Leave-one-out evaluation over the n_f sweep.
    Classify(ClassifyArgs),
    /// Word-shuffled copy of a corpus with punctuation held in place.
    Shuffle(ShuffleArgs),
    /// Similarity network figure (format from the output extension).
    Graph(GraphArgs),
    /// Seeded synthetic poetry/prose corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArg {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long, conflicts_with = "input")]
    pub corpus: Option<PathBuf>,
    /// Single text file to process instead of a corpus.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Replaces the L0 list of the grid.
    #[arg(long, value_delimiter = ',')]
    pub l0: Vec<usize>,
    /// Replaces the delta list of the grid.
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,
    #[arg(long)]
    pub dump_timeline: bool,
    #[arg(long)]
    pub dump_windows: bool,
    /// Feature CSV path (default: <out-dir>/features.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Feature CSV (default: <out-dir>/features.csv).
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub nf_min: Option<usize>,
    #[arg(long)]
    pub nf_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ShuffleArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Output corpus directory (default: <out-dir>/shuffled).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopK {
    All,
    Count(usize),
}

fn parse_top_k(s: &str) -> Result<TopK, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(TopK::All);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(TopK::Count(n)),
        _ => Err(format!("expected a positive integer or `all`, got `{s}`")),
    }
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Feature CSV (default: <out-dir>/features.csv).
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Number of NMI-ranked features to use, or `all`.
    #[arg(long, value_parser = parse_top_k, default_value = "all")]
    pub top_k: TopK,
    /// Output file; `.svg`, `.json` or `.dot` (default: <out-dir>/graph.svg).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Documents per class.
    #[arg(long)]
    pub n: Option<usize>,
    /// Output corpus directory (default: <out-dir>/corpus).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Merges file configuration with global flags.
pub fn resolve_config(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(lex) = &cli.lexicon {
        cfg.lexicon_path = Some(lex.clone());
    }
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", cfg.jobs)))?;
    pool.install(|| commands::dispatch(&cli.command, cfg))
}
