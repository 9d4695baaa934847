//! The `cgforge` command line: every pipeline stage as a subcommand, plus
//! the review service.

mod commands;
pub mod config;
pub mod error;
pub mod server;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cgforge",
    version,
    about = "Build and score compositional-generalization benchmarks for context-dependent text-to-SQL"
)]
pub struct Cli {
    /// JSON config file; flags given explicitly take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random seed (CGFORGE_SEED overrides it).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// More logging on standard error (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Default)]
pub struct Schema {
    /// Spider-format schema catalog (tables.json).
    #[arg(long)]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct Out {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Rule,
    External,
}

#[derive(Debug, Clone, Args, Default)]
pub struct RecombineOpts {
    /// Fills tried per (base, template) pair; 0 tries them all.
    #[arg(long)]
    pub cap: Option<usize>,
    /// JSON file of lint rules replacing the defaults.
    #[arg(long)]
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct DraftOpts {
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorKind>,
    /// External generator: program and arguments, split on whitespace.
    #[arg(long)]
    pub command: Option<String>,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    /// Most external programs running at once.
    #[arg(long)]
    pub concurrency: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition training turns into context-dependent and independent.
    Filter {
        #[command(flatten)]
        schema: Schema,
        #[arg(long)]
        train: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Build the modification-template library.
    Patterns {
        #[command(flatten)]
        schema: Schema,
        #[arg(long)]
        train: Option<PathBuf>,
        /// A filter report to take the dependent turns from; the filter
        /// runs again when absent.
        #[arg(long)]
        dependent: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Recombine library templates with development queries.
    Recombine {
        #[command(flatten)]
        schema: Schema,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long)]
        library: Option<PathBuf>,
        #[command(flatten)]
        opts: RecombineOpts,
        #[command(flatten)]
        out: Out,
    },
    /// Draft an utterance for every candidate.
    Draft {
        #[command(flatten)]
        schema: Schema,
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[command(flatten)]
        opts: DraftOpts,
        #[command(flatten)]
        out: Out,
    },
    /// Serve the review API and UI.
    ReviewServe {
        #[arg(long)]
        store: Option<PathBuf>,
        #[command(flatten)]
        schema: Schema,
        /// Candidates to queue before serving (needs --schema).
        #[arg(long)]
        enqueue: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        port: Option<u16>,
        /// Directory of the built review UI.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
    /// Apply a file of decisions to the review store.
    ReviewApply {
        #[arg(long)]
        store: Option<PathBuf>,
        #[command(flatten)]
        schema: Schema,
        /// Candidates to queue first (needs --schema).
        #[arg(long)]
        enqueue: Option<PathBuf>,
        /// Line-delimited decisions.
        decisions: Option<PathBuf>,
    },
    /// Write the finished benchmark and p-align training pairs.
    Export {
        #[arg(long)]
        store: Option<PathBuf>,
        /// Dialogue file to turn into p-align pairs (needs --schema).
        #[arg(long)]
        palign: Option<PathBuf>,
        #[command(flatten)]
        schema: Schema,
        #[command(flatten)]
        out: Out,
    },
    /// Tag every question of a benchmark CG, NonCG or other.
    SplitTag {
        #[command(flatten)]
        schema: Schema,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        gold: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Score predictions against a benchmark.
    Evaluate {
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long)]
        train: Option<PathBuf>,
        #[command(flatten)]
        schema: Schema,
        /// Report file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dataset statistics and template tag counts.
    Stats {
        #[command(flatten)]
        schema: Schema,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// filter, patterns, recombine, draft and enqueue in one go.
    Pipeline {
        #[command(flatten)]
        schema: Schema,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[command(flatten)]
        recombine: RecombineOpts,
        #[command(flatten)]
        draft: DraftOpts,
        #[command(flatten)]
        out: Out,
    },
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Runs one invocation and returns its exit status: 0 on success, 1 for
/// usage or validation errors, 2 for I/O errors, 3 when an internal
/// invariant breaks.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    init_logging(cli.verbose);
    let outcome =
        std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| commands::dispatch(cli)));
    match outcome {
        Ok(Ok(summary)) => {
            if let Some(s) = summary {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&s).expect("summaries serialize")
                );
            }
            0
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal invariant violated (panic)");
            3
        }
    }
}
