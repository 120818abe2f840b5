use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nilpw::report::emit;
use nilpw::{execute, CliError, Command, Outcome, RunConfig, RunOptions};

#[derive(Parser)]
#[command(
    name = "nilpw",
    version,
    about = "Group Fourier transforms on nilpotent Lie groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// override one config leaf, e.g. --set grids.x.axes.0.points=129
    #[arg(long = "set", value_name = "PATH=VALUE", global = true)]
    overrides: Vec<String>,
    /// worker threads
    #[arg(long, default_value_t = 1, global = true)]
    workers: usize,
    /// compute at most this many new lambda slots, then stop (resume by rerunning)
    #[arg(long, global = true)]
    max_slots: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// list the preset groups
    Catalog,
    /// direct-route operators at every lambda node
    Fourier,
    /// kernel tensor, checked against the direct route
    Kernel,
    /// Plancherel ratio per function
    Plancherel,
    /// vanishing scan of lambda -> ||K(lambda)||_HS
    PwScan,
    /// smallest singular values of the discretized operators
    ProbeInvert,
    /// run the acceptance checks
    Selftest,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Catalog => Command::Catalog,
            Cmd::Fourier => Command::Fourier,
            Cmd::Kernel => Command::Kernel,
            Cmd::Plancherel => Command::Plancherel,
            Cmd::PwScan => Command::PwScan,
            Cmd::ProbeInvert => Command::ProbeInvert,
            Cmd::Selftest => Command::Selftest,
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let config = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    let opts = RunOptions {
        workers: cli.workers,
        max_slots: cli.max_slots,
    };
    execute(cli.command.into(), config, opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Done { files, summary }) => {
            if !summary.is_empty() {
                emit(&format!("{summary}\n"));
            }
            for f in files {
                emit(&format!("wrote {}\n", f.display()));
            }
            ExitCode::SUCCESS
        }
        Ok(Outcome::Partial { done, total }) => {
            emit(&format!(
                "stopped after {done}/{total} lambda slots; rerun to resume\n"
            ));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
