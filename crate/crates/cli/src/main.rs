use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use olg_cli::commands::{self, Format};
use olg_cli::config::ConfigFile;
use olg_cli::output;
use olg_cli::CliError;
use olg_core::dynamics::BranchPolicy;

/// Overlapping-generations growth model with wariness: structural checks,
/// equilibrium enumeration, simulation, poverty-trap thresholds, sweeps.
#[derive(Parser)]
#[command(name = "olg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Economy configuration file (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Write the artifact here instead of stdout; the manifest goes to
    /// `<out>.manifest.json`
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Policy {
    Lowest,
    Highest,
    Nearest,
}

impl From<Policy> for BranchPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Lowest => BranchPolicy::Lowest,
            Policy::Highest => BranchPolicy::Highest,
            Policy::Nearest => BranchPolicy::NearestToCurrent,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the named structural checks (monotonicity, uniqueness, regime
    /// lock, collapse, trap premises)
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate every admissible next-period capital from k0
    Step {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        k0: f64,
    },
    /// Simulate capital paths from one or more starting points
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated starting capitals
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        k0: Vec<f64>,
        /// Branch selection when a step is multivalued
        #[arg(long, value_enum, default_value = "nearest")]
        policy: Policy,
        #[arg(long, default_value_t = 400)]
        horizon: usize,
    },
    /// Poverty-trap case, thresholds, and dynamic verification
    Trap {
        #[command(flatten)]
        common: Common,
        /// Audit every threshold against this reference value
        #[arg(long, allow_negative_numbers = true)]
        reference: Option<f64>,
        /// Horizon for the trap-semantics simulations
        #[arg(long, default_value_t = 800)]
        horizon: usize,
    },
    /// Evaluate a named threshold along a parameter grid
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary: A, a, rho, B, beta, gamma, n
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        /// Number of grid points (endpoints included)
        #[arg(long)]
        steps: usize,
        /// Threshold to record: x1, x2, x0, x_beta1, x_beta2, kbar1, kbar2,
        /// x_star, x_poverty_a, x_poverty_b
        #[arg(long)]
        target: String,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let (common, mut artifact) = match cli.command {
        Command::Check { common } => {
            let cfg = ConfigFile::from_path(&common.config)?;
            let artifact = commands::cmd_check(&cfg, common.format)?;
            (common, artifact)
        }
        Command::Step { common, k0 } => {
            let cfg = ConfigFile::from_path(&common.config)?;
            let artifact = commands::cmd_step(&cfg, k0, common.format)?;
            (common, artifact)
        }
        Command::Simulate {
            common,
            k0,
            policy,
            horizon,
        } => {
            let cfg = ConfigFile::from_path(&common.config)?;
            let artifact =
                commands::cmd_simulate(&cfg, &k0, policy.into(), horizon, common.format)?;
            (common, artifact)
        }
        Command::Trap {
            common,
            reference,
            horizon,
        } => {
            let cfg = ConfigFile::from_path(&common.config)?;
            let artifact = commands::cmd_trap(&cfg, reference, horizon, common.format)?;
            (common, artifact)
        }
        Command::Sweep {
            common,
            param,
            from,
            to,
            steps,
            target,
        } => {
            let cfg = ConfigFile::from_path(&common.config)?;
            let param = commands::parse_param(&param)?;
            let target = commands::parse_target(&target)?;
            let artifact =
                commands::cmd_sweep(&cfg, param, from, to, steps, target, common.format)?;
            (common, artifact)
        }
    };
    artifact.manifest.duration_ms = started.elapsed().as_secs_f64() * 1e3;
    output::emit(&artifact, common.out.as_deref())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
