//! `relmech`: run scenario files and the two-particle demonstration.
//!
//! Results go to stdout as JSON. Failures print a JSON object on stderr and
//! exit with 1 (usage, scenario or file errors) or 2 (numerical failures).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use relmech_core::paradox::ReportMode;
use relmech_core::runner::{self, RunError, RunResult};

#[derive(Debug, Parser)]
#[command(
    name = "relmech",
    version,
    about = "Geometric mechanics scenarios: integrate, check, correct, paradox"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Closed,
    Integrated,
}

impl From<Mode> for ReportMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Closed => ReportMode::ClosedForm,
            Mode::Integrated => ReportMode::Integrated,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a scenario; writes trajectory.csv and summary.json.
    Integrate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Check whether the scenario force lies in the contact system.
    Check {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Apply the relativistic correction and compare energy drift.
    Correct {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Durations and proper times of the charged and neutral particles.
    Paradox {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        eta: f64,
        #[arg(long, value_enum, default_value = "closed")]
        mode: Mode,
        /// Also write report.json and curves.csv here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Chord endpoint parameter for the curve CSV, in (0, pi].
        #[arg(long)]
        s: Option<f64>,
    },
    /// Write the eta = 1 scenarios and run them end to end.
    Demo {
        #[arg(long, default_value = "relmech-demo")]
        out_dir: PathBuf,
    },
}

fn run(cmd: Command) -> RunResult<String> {
    Ok(match cmd {
        Command::Integrate { scenario, out_dir } => {
            let sc = runner::load_scenario(&scenario)?;
            runner::to_json_pretty(&runner::run_integrate(&sc, &out_dir)?)
        }
        Command::Check { scenario, samples, tol } => {
            let sc = runner::load_scenario(&scenario)?;
            runner::to_json_pretty(&runner::run_check(&sc, samples, tol)?)
        }
        Command::Correct { scenario, samples, tol } => {
            let sc = runner::load_scenario(&scenario)?;
            runner::to_json_pretty(&runner::run_correct(&sc, samples, tol)?)
        }
        Command::Paradox { eta, mode, out_dir, s } => {
            runner::to_json_pretty(&runner::run_paradox(eta, mode.into(), out_dir.as_deref(), s)?)
        }
        Command::Demo { out_dir } => runner::to_json_pretty(&runner::demo(&out_dir)?),
    })
}

fn fail(err: &RunError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let payload = serde_json::json!({"error": "Usage", "message": e.to_string(), "exit_code": 1});
            eprintln!("{payload}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
