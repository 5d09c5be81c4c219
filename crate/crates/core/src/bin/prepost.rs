use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use prepost::cli::run::RunError;
use prepost::cli::{load_scenario, parse_scenario, run_scenario, Format, Kind, RunOptions, Scenario, ScenarioError};
use prepost::rng::threads_from_env;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  parse error (malformed JSON with line and column, or bad command line)
  3  validation error (missing, unknown or ill-typed key; invalid parameter)
  4  numeric error (e.g. orthogonal post-selection, infeasible band, grid too small)
  5  I/O error (config unreadable, artifact not writable)

Failures print a JSON error document on stderr.

Environment:
  PREPOST_THREADS  worker cap for parallel kernels (0 or unset = automatic)

Without --config each subcommand runs its bundled example scenario.";

#[derive(Debug, Parser)]
#[command(name = "prepost", version, about = "Weak measurements, pre/post-selected ensembles and time-translation machines")]
#[command(after_help = EXIT_CODES)]
struct Cli {
    /// Scenario file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Overrides the artifact path.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Artifact format.
    #[arg(long, global = true, value_name = "csv|json")]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weak value of an observable between pre- and post-selection.
    WeakValue,
    /// Post-selected pointer distribution on a grid.
    Pointer,
    /// Monte Carlo ensemble of measured, post-selected pointers.
    Ensemble,
    /// Time-translation machine design and audit.
    Machine {
        #[command(subcommand)]
        command: MachineCommand,
    },
    /// Filtered polarization interferometer.
    Suter {
        #[command(subcommand)]
        command: SuterCommand,
    },
    /// Multi-mode packet through the filtered retarder.
    Packet,
}

#[derive(Debug, Subcommand)]
enum MachineCommand {
    /// Least-squares branch coefficients for a target time.
    Design,
    /// Fidelity of a machine on random band-limited states.
    Audit,
}

#[derive(Debug, Subcommand)]
enum SuterCommand {
    /// Phase, gain and throughput against retardation.
    Sweep,
}

impl Command {
    fn kind(&self) -> Kind {
        match self {
            Command::WeakValue => Kind::WeakValue,
            Command::Pointer => Kind::Pointer,
            Command::Ensemble => Kind::Ensemble,
            Command::Machine {
                command: MachineCommand::Design,
            } => Kind::MachineDesign,
            Command::Machine {
                command: MachineCommand::Audit,
            } => Kind::MachineAudit,
            Command::Suter {
                command: SuterCommand::Sweep,
            } => Kind::SuterSweep,
            Command::Packet => Kind::Packet,
        }
    }
}

fn bundled(kind: Kind) -> &'static str {
    match kind {
        Kind::WeakValue => include_str!("../../examples/weak_value.json"),
        Kind::Pointer => include_str!("../../examples/pointer.json"),
        Kind::Ensemble => include_str!("../../examples/ensemble.json"),
        Kind::MachineDesign => include_str!("../../examples/machine_design.json"),
        Kind::MachineAudit => include_str!("../../examples/machine_audit.json"),
        Kind::SuterSweep => include_str!("../../examples/suter_sweep.json"),
        Kind::Packet => include_str!("../../examples/packet.json"),
    }
}

fn scenario(cli: &Cli) -> Result<Scenario, RunError> {
    let kind = cli.command.kind();
    let s = match &cli.config {
        Some(path) => load_scenario(path)?,
        None => parse_scenario(bundled(kind))?,
    };
    if s.kind != kind {
        return Err(ScenarioError::Validation {
            key: "kind".into(),
            message: format!("scenario is '{}' but the subcommand runs '{}'", s.kind.name(), kind.name()),
        }
        .into());
    }
    Ok(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        seed: cli.seed,
        out: cli.out.clone(),
        format: cli.format,
        threads: threads_from_env(),
    };
    match scenario(&cli).and_then(|s| run_scenario(&s, &opts)) {
        Ok(outcome) => {
            for line in &outcome.messages {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            let code = e.exit_code();
            ExitCode::from(code as u8)
        }
    }
}
