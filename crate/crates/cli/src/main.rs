use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use multipeak_cli::pipeline::Pipeline;
use multipeak_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "multipeak", version, about = "Sign-changing multi-peak solutions with a point interaction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat key = value configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Closed-form constants: p_*, rates, ℓ(K), β_η(1).
    Constants,
    /// Radial ground state Φ (cached).
    GroundState,
    /// Polygon ansatz W at r (or the interval midpoint) for each η.
    Ansatz,
    /// Scan and minimise the reduced functional.
    Reduce,
    /// Full solve at each η.
    Solve,
    /// Apply the ω-rescaling to a field snapshot.
    Rescale,
    /// Sampled checks of the auxiliary estimates.
    Validate,
    /// constants, ground-state, validate and solve over the η list.
    Sweep,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::parse("")?,
    };
    if let Some(seed) = cli.seed {
        config.set_seed(seed);
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        config.threads = t;
    }
    let mut pipe = Pipeline::new(config, &cli.out)?;
    match cli.command {
        Command::Constants => pipe.constants()?,
        Command::GroundState => {
            pipe.ground_state()?;
        }
        Command::Ansatz => {
            let pr = pipe.ground_state()?;
            pipe.ansatz(&pr)?;
        }
        Command::Reduce => {
            let pr = pipe.ground_state()?;
            pipe.reduce(&pr)?;
        }
        Command::Solve => {
            let pr = pipe.ground_state()?;
            pipe.solve(&pr)?;
        }
        Command::Rescale => pipe.rescale()?,
        Command::Validate => {
            let pr = pipe.ground_state()?;
            pipe.validate(&pr)?;
        }
        Command::Sweep => pipe.sweep()?,
    }
    for a in pipe.assertions.iter().filter(|a| !a.passed) {
        eprintln!("FAILED {}: {}", a.name, a.detail);
    }
    pipe.verdict()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("multipeak: {e}");
            e.exit_code()
        }
    }
}
