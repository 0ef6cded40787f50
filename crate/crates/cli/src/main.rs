use clap::{Parser, Subcommand};
use pftg_cli::{cmd_check, cmd_diag, cmd_run, cmd_sweep, CliError, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Phase-field tumor growth: simulation, ε-sweeps and diagnostics.
#[derive(Debug, Parser)]
#[command(name = "pftg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file; defaults apply to every key not set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `[output] dir`.
    #[arg(long, global = true, env = "PFTG_OUT")]
    out: Option<PathBuf>,
    /// Snapshot stride, overriding `[output] stride`.
    #[arg(long, global = true)]
    stride: Option<usize>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "PFTG_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single run at `[model] epsilon`.
    Run,
    /// Runs every epsilon of `[sweep] epsilons`.
    Sweep,
    /// Checks the model hypotheses; exits with 2 if any fails.
    Check,
    /// Recomputes diagnostics from snapshot files.
    Diag {
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(e.into()))?;
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    if let Some(s) = cli.stride {
        cfg.output.stride = s;
    }
    let stdout = &mut std::io::stdout().lock();
    match cli.command {
        Command::Run => cmd_run(&cfg, stdout),
        Command::Sweep => cmd_sweep(&cfg, stdout),
        Command::Check => cmd_check(&cfg, stdout),
        Command::Diag { snapshots } => cmd_diag(&cfg, &snapshots, stdout),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pftg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
