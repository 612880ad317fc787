mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// CLI failure classes mapped onto exit codes: bad input exits 2, runtime
/// failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Runtime(String),
}

#[derive(Parser)]
#[command(
    name = "failslow",
    version,
    about = "Fail-slow laboratory: simulate hybrid-parallel training, detect stragglers, plan mitigations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MitigateFlag {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario: healthy and fail-slow arms, plus a mitigated arm.
    Simulate {
        /// Scenario config (JSON).
        config: PathBuf,
        #[arg(long, value_enum, default_value = "on")]
        mitigate: MitigateFlag,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Report directory (defaults to the config's output.dir or `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a communication-call trace CSV offline.
    Detect {
        /// Trace file in `rank,timestamp_s,kind,group,bytes` format.
        trace: PathBuf,
        /// Largest period considered by the ACF scan.
        #[arg(long, default_value_t = 64)]
        max_lag: usize,
    },
    /// Print a P2P validation schedule.
    Schedule {
        #[command(subcommand)]
        communicator: ScheduleCommand,
    },
    /// Run a mitigation planner on ad-hoc inputs.
    Plan {
        #[command(subcommand)]
        what: PlanCommand,
    },
}

#[derive(Subcommand)]
enum ScheduleCommand {
    /// Ring communicator of N ranks.
    Ring { n: usize },
    /// Binary-tree communicator from a JSON child->parent map.
    Tree { file: PathBuf },
}

#[derive(Subcommand)]
enum PlanCommand {
    /// Solve the micro-batch distribution for the given per-group times.
    Microbatch {
        #[arg(long)]
        total: usize,
        /// Comma-separated per-group micro-batch times in seconds.
        #[arg(long)]
        times: String,
    },
    /// Consolidate straggler GPUs into interior pipeline stages.
    Consolidate {
        /// Scenario config providing the topology.
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated straggler GPU ids.
        #[arg(long)]
        stragglers: String,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            mitigate,
            seed,
            out,
        } => commands::cmd_simulate(&config, mitigate == MitigateFlag::On, seed, out),
        Command::Detect { trace, max_lag } => commands::cmd_detect(&trace, max_lag),
        Command::Schedule { communicator } => match communicator {
            ScheduleCommand::Ring { n } => commands::cmd_schedule_ring(n),
            ScheduleCommand::Tree { file } => commands::cmd_schedule_tree(&file),
        },
        Command::Plan { what } => match what {
            PlanCommand::Microbatch { total, times } => {
                commands::cmd_plan_microbatch(total, &times)
            }
            PlanCommand::Consolidate { config, stragglers } => {
                commands::cmd_plan_consolidate(&config, &stragglers)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
