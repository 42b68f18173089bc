use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mhd3::checkpoint::checkpoint_load;
use mhd3::config::load_config;
use mhd3::diagnostics::audit_energy;
use mhd3::run::{bisect_threshold, run_scenario, RunOptions, Termination};

#[derive(Parser)]
#[command(name = "mhd3", about = "Periodic-box MHD laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario to its horizon, emitting ledger artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for timeseries.csv, summary.json and checkpoints.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Resume from a checkpoint written by a previous run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Bisect the initial-amplitude scale where the regularity monitor flips.
    Bisect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        /// Monotonicity probes across the range.
        #[arg(long, default_value_t = 5)]
        trials: usize,
    },
    /// Randomized sweeps of the norm-inequality and Stokes harnesses.
    CheckInequalities {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 32)]
        n: usize,
    },
    /// Offline energy audit between two checkpoints one step apart.
    Audit {
        #[arg(long)]
        ckpt_a: PathBuf,
        #[arg(long)]
        ckpt_b: PathBuf,
        #[arg(long)]
        dt: f64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> mhd3::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            out,
            resume,
        } => {
            let spec = load_config(&config)?;
            let result = run_scenario(
                &spec,
                &RunOptions {
                    out_dir: out.as_deref(),
                    resume: resume.as_deref(),
                },
            )?;
            println!(
                "termination: {} at t = {}",
                match result.termination {
                    Termination::HorizonReached => "horizon_reached",
                    Termination::NanFault => "nan_fault",
                    Termination::VacuumFault => "vacuum_fault",
                    Termination::UserStop => "user_stop",
                },
                result.final_state.time
            );
            println!("steps: {}  wall: {:.2}s", result.steps, result.wall_seconds);
            println!("verdict: {:?}", result.verdict);
            println!(
                "E_sup = {:.6e}  serrin_int = {:.6e}  gradu4_int = {:.6e}",
                result.ledger.e_sup, result.ledger.serrin_integral, result.ledger.gradu4_integral
            );
            Ok(match result.termination {
                Termination::HorizonReached => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            })
        }
        Command::Bisect {
            config,
            lo,
            hi,
            trials,
        } => {
            let spec = load_config(&config)?;
            let report = bisect_threshold(&spec, lo, hi, trials)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report)
                    .map_err(|e| mhd3::Error::Config(e.to_string()))?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckInequalities { seed, trials, n } => {
            let ineq = mhd3::lorentz::run_ensemble(seed, trials, n)?;
            let stokes = mhd3::stokes::run_ensemble(seed, trials, n)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "lorentz": ineq,
                    "stokes": stokes,
                }))
                .map_err(|e| mhd3::Error::Config(e.to_string()))?
            );
            let ok = ineq.weak_le_strong_violations == 0
                && stokes.max_residual_rel <= 1e-10
                && stokes.max_pythagorean_ratio <= 1.0 + 1e-8;
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Audit { ckpt_a, ckpt_b, dt } => {
            let (a, ca) = checkpoint_load(&ckpt_a)?;
            let (b, cb) = checkpoint_load(&ckpt_b)?;
            if ca != cb {
                return Err(mhd3::Error::Checkpoint(
                    "checkpoints carry different physical constants".into(),
                ));
            }
            let report = audit_energy(&a, &b, dt, &ca)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report)
                    .map_err(|e| mhd3::Error::Config(e.to_string()))?
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
