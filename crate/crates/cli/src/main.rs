//! `elicit`: headless driver for the elicitation pipeline
//! (ingest → sample → export → compile/eval) and the HTTP service.
//!
//! Exit status: 0 on success, 1 when a command fails (including
//! validation failures, which are listed on stderr), 2 on usage errors.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Config, Usage};

#[derive(Parser)]
#[command(name = "elicit", version, about = "Elicitation workbench pipeline")]
struct Cli {
    /// Flat TOML file whose keys mirror the flags; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read NDJSON reviews into a corpus, optionally with a balanced split.
    Ingest(IngestArgs),
    /// Pick representative training instances for elicitation.
    Sample(SampleArgs),
    /// Check a repository export, or a justification script before export.
    Validate(ValidateArgs),
    /// Compile one condition's rule model from a repository.
    Compile(CompileArgs),
    /// Evaluate rule models on the test split and write the report table.
    Eval(EvalArgs),
    /// Build a repository export from a sample and a justification script.
    Export(ExportArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Newline-delimited {"text", "stars"} records.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Training instances in the balanced split (needs --test).
    #[arg(long)]
    train: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
    /// Defaults to --seed.
    #[arg(long)]
    split_seed: Option<u64>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// k-means stops once no centroid moves further than this.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    repository: Option<PathBuf>,
    #[arg(long)]
    justifications: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    sample: Option<PathBuf>,
    /// Also write the result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    repository: Option<PathBuf>,
    #[arg(long)]
    condition: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    repository: Option<PathBuf>,
    /// A condition tag, or `all` (the default).
    #[arg(long)]
    condition: Option<String>,
    /// JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plain-text table.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    sample: Option<PathBuf>,
    /// {"taxonomies": [...], "justifications": [...]}
    #[arg(long)]
    justifications: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    addr: Option<String>,
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Ingest(a) => commands::ingest(a, &cfg),
        Command::Sample(a) => commands::sample(a, &cfg),
        Command::Validate(a) => commands::validate(a, &cfg),
        Command::Compile(a) => commands::compile_cmd(a, &cfg),
        Command::Eval(a) => commands::eval(a, &cfg),
        Command::Export(a) => commands::export(a, &cfg),
        Command::Serve(a) => commands::serve(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default = if matches!(cli.command, Command::Serve(_)) { "info" } else { "error" };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| default.into()),
        )
        .with_writer(std::io::stderr)
        .init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
