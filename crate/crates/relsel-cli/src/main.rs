use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use relsel_cli::commands::{
    self, EvalObjective, ReproName, ReproOptions, SweepMode, PROFILE_SWEEP_VALUES,
    RISK_SWEEP_GAMMAS,
};
use relsel_cli::config::ExperimentConfig;
use relsel_cli::error::CliError;

/// Dynamic test-module selection: solve, evaluate, and simulate policies
/// that maximize worst-case delivered reliability.
#[derive(Parser)]
#[command(name = "relsel", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a configured problem; writes values.csv and policy.csv.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the configured (or baseline) policy under a true profile.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// True operational profile, comma separated (e.g. 0.5,0.5).
        #[arg(long, value_delimiter = ',', required = true)]
        truth: Vec<f64>,
        #[arg(long, value_enum, default_value = "config")]
        objective: ObjectiveArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve, then run the configured seeded Monte Carlo simulation.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the assumed/true first-module probability on a two-module
    /// model; writes gaps.csv.
    SweepProfile {
        #[arg(long)]
        config: PathBuf,
        /// Swept p1 values, comma separated (default: the study grid).
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<f64>>,
        /// The fixed side of the sweep (truth in assumed mode, guess in
        /// truth mode).
        #[arg(long, default_value_t = 0.5)]
        truth_p1: f64,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve and simulate across risk tolerances; writes table2.csv and
    /// per-gamma histograms.
    SweepGamma {
        #[arg(long)]
        config: PathBuf,
        /// Risk tolerances, comma separated (default: the study grid).
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named end-to-end study reproduction with built-in configs and
    /// check the published values; exits 4 on check failure.
    Repro {
        #[arg(long, value_enum)]
        name: ReproArg,
        /// Quick mode: 100 simulation runs, tolerances widened tenfold.
        #[arg(long)]
        smoke: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Config,
    MinDefects,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Assumed,
    Truth,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReproArg {
    ObjectiveGap,
    RobustGap,
    RiskSweep,
    Counterexamples,
}

fn load_with_out(
    config_path: &std::path::Path,
    out: Option<PathBuf>,
) -> Result<(ExperimentConfig, String, PathBuf), CliError> {
    let (config, digest) = ExperimentConfig::load(config_path)?;
    let out_dir = out.unwrap_or_else(|| config.output_dir.clone());
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    Ok((config, digest, out_dir))
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Solve { config, out } => {
            let (config, digest, out_dir) = load_with_out(&config, out)?;
            commands::cmd_solve(&config, &out_dir, &digest)?;
            Ok(())
        }
        Command::Evaluate {
            config,
            truth,
            objective,
            out,
        } => {
            let (config, digest, out_dir) = load_with_out(&config, out)?;
            let objective = match objective {
                ObjectiveArg::Config => EvalObjective::Configured,
                ObjectiveArg::MinDefects => EvalObjective::MinDefects,
            };
            commands::cmd_evaluate(&config, &truth, objective, &out_dir, &digest)?;
            Ok(())
        }
        Command::Simulate {
            config,
            seed,
            runs,
            out,
        } => {
            let (config, digest, out_dir) = load_with_out(&config, out)?;
            commands::cmd_simulate(&config, seed, runs, &out_dir, &digest)?;
            Ok(())
        }
        Command::SweepProfile {
            config,
            sweep,
            truth_p1,
            mode,
            out,
        } => {
            let (config, digest, out_dir) = load_with_out(&config, out)?;
            let sweep = sweep.unwrap_or_else(|| PROFILE_SWEEP_VALUES.to_vec());
            let mode = match mode {
                ModeArg::Assumed => SweepMode::Assumed,
                ModeArg::Truth => SweepMode::Truth,
                ModeArg::Both => SweepMode::Both,
            };
            commands::cmd_sweep_profile(&config, &sweep, truth_p1, mode, &out_dir, &digest)?;
            Ok(())
        }
        Command::SweepGamma {
            config,
            gammas,
            seed,
            runs,
            out,
        } => {
            let (config, digest, out_dir) = load_with_out(&config, out)?;
            let gammas = gammas.unwrap_or_else(|| RISK_SWEEP_GAMMAS.to_vec());
            commands::cmd_sweep_gamma(&config, &gammas, seed, runs, &out_dir, &digest)?;
            Ok(())
        }
        Command::Repro {
            name,
            smoke,
            seed,
            runs,
            out,
        } => {
            std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
            let name = match name {
                ReproArg::ObjectiveGap => ReproName::ObjectiveGap,
                ReproArg::RobustGap => ReproName::RobustGap,
                ReproArg::RiskSweep => ReproName::RiskSweep,
                ReproArg::Counterexamples => ReproName::Counterexamples,
            };
            let report = commands::cmd_repro(name, &ReproOptions { smoke, seed, runs }, &out)?;
            report.print();
            if report.all_passed() {
                Ok(())
            } else {
                Err(CliError::Acceptance(format!(
                    "{} of {} checks failed",
                    report.checks.iter().filter(|c| !c.passed).count(),
                    report.checks.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
