use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oldroyd_core::experiments::{self, Config, RUNS_DIR_ENV};

/// Oldroyd-B spectral lab: Green-function validation, linear decay fits,
/// nonlinear simulation and vanishing-diffusion sweeps.
#[derive(Parser, Debug)]
#[command(name = "oblab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file; omitted sections take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output root for run records.
    #[arg(long, global = true, env = RUNS_DIR_ENV, default_value = "runs")]
    out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides the random initial-data seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Closed-form mode propagator against the RK4 oracle.
    ValidateGreen,
    /// Decay exponents of the linear flow on the whole plane.
    LinearDecay,
    /// Nonlinear run with energy monitors.
    Simulate,
    /// Runs over a decreasing list of stress diffusivities.
    SweepMu,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::ValidateGreen => "validate-green",
            Command::LinearDecay => "linear-decay",
            Command::Simulate => "simulate",
            Command::SweepMu => "sweep-mu",
        }
    }
}

fn load(cli: &Cli) -> oldroyd_core::Result<Config> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut cfg = Config::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.init.random.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match experiments::run_command(cli.command.name(), &cfg, &cli.out) {
        Ok(rec) => {
            println!("{} {} {}", rec.run_id, rec.status, rec.dir.display());
            ExitCode::from(rec.exit.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(experiments::ExitCode::from_error(&e).code() as u8)
        }
    }
}
