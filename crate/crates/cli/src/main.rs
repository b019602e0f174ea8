use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use framelab_cli::config::load_config;
use framelab_cli::error::CliError;
use framelab_cli::report::TOOL_VERSION;
use framelab_cli::{execute, Command};

#[derive(Parser)]
#[command(name = "frame-lab", version, about = "Density, frame and hull experiments for exponential systems")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Beurling density estimates over a radius ladder
    Density(RunArgs),
    /// Frame-measure, critical-density, bounds and residual analyses
    Frames(RunArgs),
    /// Local matching, orbits, return vectors and operator convergence
    Hull(RunArgs),
    /// Print the tool version
    Version,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV side files
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap; results do not depend on it
    #[arg(long)]
    threads: Option<usize>,
    /// Override the seed of every perturbed generator
    #[arg(long)]
    seed: Option<u64>,
    /// Record wall-clock time in the report
    #[arg(long)]
    timing: bool,
}

fn run(command: Command, args: RunArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.config, args.seed)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Io(e.to_string()))?;
    let (envelope, tables) = pool.install(|| execute(command, &loaded, args.timing))?;

    let text = envelope.render()?;
    match args.out.or(loaded.config.output.report.clone()) {
        Some(path) => std::fs::write(&path, text)?,
        None => print!("{text}"),
    }
    if let Some(dir) = args.csv.or(loaded.config.output.csv_dir.clone()) {
        for t in &tables {
            t.write(&dir)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Density(a) => (Command::Density, a),
        Sub::Frames(a) => (Command::Frames, a),
        Sub::Hull(a) => (Command::Hull, a),
        Sub::Version => {
            println!("frame-lab {TOOL_VERSION}");
            return ExitCode::SUCCESS;
        }
    };
    match run(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
