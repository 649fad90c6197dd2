use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gptd::error::Error;
use gptd::runner::{
    cmd_eval_grid, cmd_fit, cmd_profile, cmd_simulate, Experiment, RunConfig, VariantChoice,
};

/// GPTD policy evaluation with automatic covariance selection.
#[derive(Parser)]
#[command(name = "gptd", version, about)]
struct Cli {
    /// JSON run config; command-line flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for every random choice in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Covariance variant to run: iso, ard, or fa (repeatable).
    #[arg(long = "variant", global = true)]
    variants: Vec<String>,

    /// Residual tolerance for subset selection.
    #[arg(long, global = true)]
    sparse_tol: Option<f64>,

    /// Maximum subset size for sparse inference.
    #[arg(long, global = true)]
    max_subset: Option<usize>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a trajectory from the configured experiment.
    Simulate {
        /// gridworld or pendulum.
        #[arg(long)]
        experiment: Option<String>,
        /// Number of transitions to sample.
        #[arg(long)]
        transitions: Option<usize>,
    },
    /// Fit the covariance variants to a trajectory and write a report.
    Fit {
        /// Trajectory CSV produced by `simulate` (or hand-assembled).
        trajectory: PathBuf,
        /// gridworld, pendulum, or custom; selects the ground-truth oracle.
        #[arg(long)]
        experiment: Option<String>,
    },
    /// Eigenspectrum and subset-selection profiles at optimized hyperparameters.
    Profile {
        trajectory: PathBuf,
        #[arg(long)]
        experiment: Option<String>,
    },
    /// Write the experiment's ground-truth value grid.
    EvalGrid {
        #[arg(long)]
        experiment: Option<String>,
    },
}

fn parse_experiment(s: &str) -> Result<Experiment, Error> {
    match s {
        "gridworld" => Ok(Experiment::Gridworld),
        "pendulum" => Ok(Experiment::Pendulum),
        "custom" => Ok(Experiment::Custom),
        other => Err(Error::Config(format!(
            "unknown experiment {other:?} (expected gridworld, pendulum, or custom)"
        ))),
    }
}

fn build_config(
    cli: &Cli,
    experiment: Option<&str>,
    transitions: Option<usize>,
) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(e) = experiment {
        cfg.experiment = parse_experiment(e)?;
    }
    if let Some(n) = transitions {
        cfg.n_transitions = n;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if !cli.variants.is_empty() {
        cfg.variants = cli
            .variants
            .iter()
            .map(|v| VariantChoice::parse(v))
            .collect::<Result<Vec<_>, _>>()?;
    }
    if let Some(tol) = cli.sparse_tol {
        cfg.sparse.tol = tol;
    }
    if let Some(m) = cli.max_subset {
        cfg.sparse.max_subset = m;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Simulate {
            experiment,
            transitions,
        } => {
            let cfg = build_config(cli, experiment.as_deref(), *transitions)?;
            let out = cmd_simulate(&cfg)?;
            println!(
                "wrote {} ({} episodes completed) and {}",
                out.trajectory_path.display(),
                out.episodes_completed,
                out.manifest_path.display()
            );
        }
        Command::Fit {
            trajectory,
            experiment,
        } => {
            let cfg = build_config(cli, experiment.as_deref(), None)?;
            let out = cmd_fit(&cfg, trajectory)?;
            for v in &out.report.variants {
                println!(
                    "{}: L = {:.3} (complexity {:.3}, data fit {:.3}){}{}",
                    v.variant,
                    v.likelihood.total,
                    v.likelihood.complexity,
                    v.likelihood.data_fit,
                    v.trajectory_mse
                        .map(|m| format!(", trajectory MSE {m:.4}"))
                        .unwrap_or_default(),
                    v.grid_mse
                        .map(|m| format!(", grid MSE {m:.4}"))
                        .unwrap_or_default(),
                );
            }
            for f in &out.report.failures {
                eprintln!("{} failed: {}", f.variant, f.error);
            }
            println!("report: {}", out.report_path.display());
        }
        Command::Profile {
            trajectory,
            experiment,
        } => {
            let cfg = build_config(cli, experiment.as_deref(), None)?;
            let out = cmd_profile(&cfg, trajectory)?;
            for r in &out.reports {
                let at_tol: Vec<String> = r
                    .icd_profile
                    .iter()
                    .map(|p| format!("m({})={}", p.tol, p.subset_size))
                    .collect();
                println!("{}: {}", r.variant, at_tol.join(" "));
            }
            println!("profile: {}", out.report_path.display());
        }
        Command::EvalGrid { experiment } => {
            let cfg = build_config(cli, experiment.as_deref(), None)?;
            let out = cmd_eval_grid(&cfg)?;
            println!("wrote {}", out.grid_path.display());
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter { .. } => 2,
        Error::OptimizationFailed(_) => 3,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
