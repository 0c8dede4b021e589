mod artifact;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ncs-sched", version, about = "Design and check periodic channel schedules for networked control systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design certificates and T-factors for the configured cycle.
    Design {
        #[arg(long)]
        config: PathBuf,
        /// Cycle file overriding the config's [cycle] section.
        #[arg(long)]
        cycle: Option<PathBuf>,
        #[arg(long)]
        t_max: Option<u64>,
        /// Directory for design.json; without it the artifact goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a design artifact into a periodic policy file.
    Schedule {
        #[arg(long)]
        design: PathBuf,
        /// Directory for policy.txt; without it the policy goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the plants under a policy and verify the certificates.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, required_unless_present = "round_robin")]
        policy: Option<PathBuf>,
        /// Use the round-robin baseline from the config instead of a policy file.
        #[arg(long, conflicts_with = "policy")]
        round_robin: bool,
        /// Design artifact whose certificates are checked along the traces.
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Seed overriding the config's initial-condition seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for per-run trace CSV files and report.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate Ξ for a cycle, searching T-factors when none are given.
    CheckCycle {
        #[arg(long, required_unless_present = "design")]
        config: Option<PathBuf>,
        #[arg(long)]
        cycle: Option<PathBuf>,
        /// Take the certificate scalars (and, without --cycle, the cycle) from a design artifact.
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long)]
        t_max: Option<u64>,
    },
    /// Rerun the reference checks on the benchmark systems.
    Reproduce {
        #[arg(value_enum)]
        suite: Suite,
        /// Plant counts for the scale check (repeatable); default 100 and 200.
        #[arg(long = "n")]
        n: Vec<usize>,
        /// Add the largest sizes (500, 700, 1000) to the scale check.
        #[arg(long)]
        full_scale: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Exp1,
    Exp2,
    Examples,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Design { config, cycle, t_max, out } => commands::design(&config, cycle.as_deref(), t_max, out.as_deref()),
        Command::Schedule { design, out } => commands::schedule(&design, out.as_deref()),
        Command::Simulate { config, policy, round_robin, design, horizon, seed, out } => commands::simulate(commands::SimulateArgs {
            config: &config,
            policy: policy.as_deref(),
            round_robin,
            design: design.as_deref(),
            horizon,
            seed,
            out: out.as_deref(),
        }),
        Command::CheckCycle { config, cycle, design, t_max } => {
            commands::check_cycle(config.as_deref(), cycle.as_deref(), design.as_deref(), t_max)
        }
        Command::Reproduce { suite, n, full_scale, seed } => {
            let suite = match suite {
                Suite::Exp1 => commands::Suite::FivePlant,
                Suite::Exp2 => commands::Suite::Scale,
                Suite::Examples => commands::Suite::Examples,
            };
            commands::reproduce(suite, &n, full_scale, seed)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
