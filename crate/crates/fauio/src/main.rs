use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fauio::commands::{self, ScenarioSource, SimulateArgs, SynthArgs};
use fauio::output::TRAJECTORY_COLUMNS;
use fauio::{report, AppError};

#[derive(Parser)]
#[command(name = "fauio", version, about = "Fast adaptive unknown input observer synthesis and simulation")]
#[command(after_help = "Exit codes: 0 success, 1 infeasible design or failed check, 2 input error.")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "FAUIO_OUT_DIR", default_value = "fauio-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the plant assumptions and the observer existence conditions.
    Validate { config: PathBuf },
    /// Solve the LMI and write gains, certificate and design checks.
    Synth(SynthCli),
    /// Simulate a scenario with stored gains.
    #[command(after_help = format!("trajectory.csv columns: {TRAJECTORY_COLUMNS}"))]
    Simulate(SimulateCli),
    /// Aggregate a run directory into report.md.
    Report {
        /// Run directory; defaults to --out.
        dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SynthCli {
    config: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    theorem: Option<u8>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Search the (epsilon, delta) grid and synthesize at the best cell.
    #[arg(long)]
    grid: bool,
    #[arg(long, value_delimiter = ',')]
    grid_epsilon: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    grid_delta: Vec<f64>,
}

#[derive(Args)]
struct SimulateCli {
    config: PathBuf,
    /// Gains directory; defaults to <out>/gains.
    #[arg(long)]
    gains: Option<PathBuf>,
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    preset: Option<String>,
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Write every n-th step to trajectory.csv.
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Validate { config } => {
            let r = commands::cmd_validate(&config, &cli.out);
            if let Ok(report) = &r {
                print!("{report}");
            }
            r.map(|_| ())
        }
        Command::Synth(a) => {
            let args = SynthArgs {
                theorem: a.theorem,
                epsilon: a.epsilon,
                delta: a.delta,
                beta: a.beta,
                grid: a.grid,
                grid_epsilon: a.grid_epsilon,
                grid_delta: a.grid_delta,
            };
            let s = commands::cmd_synth(&a.config, &args, &cli.out)?;
            if let Some(g) = &s.grid {
                let b = g.best_point();
                println!("grid best: epsilon = {} delta = {:?} mu = {:e}", b.epsilon, b.delta, b.mu);
            }
            println!("sqrt(mu) = {:e}", s.sqrt_mu);
            println!("gains written to {}", cli.out.join(commands::GAINS_DIR).display());
            Ok(())
        }
        Command::Simulate(a) => {
            let scenario = match (a.preset, a.scenario) {
                (Some(p), _) => ScenarioSource::Preset(p),
                (None, Some(f)) => ScenarioSource::File(f),
                (None, None) => return Err(AppError::Usage("--preset or --scenario is required".into())),
            };
            let args = SimulateArgs { gains: a.gains, scenario, stride: a.stride };
            let m = commands::cmd_simulate(&a.config, &args, &cli.out)?;
            for (k, v) in m.rows() {
                println!("{k:<28} {v}");
            }
            Ok(())
        }
        Command::Report { dir } => {
            let dir = dir.unwrap_or(cli.out);
            let path = report::cmd_report(&dir)?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
