//! Config-driven experiment orchestration.
//!
//! Everything the command-line interface does lives here: sampling
//! trajectories, fitting the covariance variants with model selection,
//! profiling kernel structure, and writing ground-truth value grids. All
//! randomness flows from the single config seed through fixed per-purpose
//! offsets, so a config fully determines every output byte.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::envs::{
    fitted_value_iteration, gridworld_rollout, gridworld_true_values, pendulum_rollout,
    AxisSpec, GreedyPolicy, GridworldSpec, PendulumSpec, ValueGrid,
};
use crate::error::{Error, Result};
use crate::eval::{
    clamped_spectrum, icd_profile, mse_on_points, write_eigenspectrum_csv, write_icd_csv,
    IcdProfilePoint,
};
use crate::exact::{fit_exact, reward_covariance, TdOperator};
use crate::kernel::{
    gram_symmetric, omega_eigendecomposition, CovarianceSpec, HyperParams,
    VariantParams,
};
use crate::model_selection::{
    default_hyperparams, optimize, LikelihoodReport, OptimizeOpts,
};
use crate::sparse::{fit_sr, icd_select, StopReason};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Gridworld,
    Pendulum,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantChoice {
    Iso,
    Ard,
    Fa,
}

impl VariantChoice {
    pub fn name(self) -> &'static str {
        match self {
            VariantChoice::Iso => "iso",
            VariantChoice::Ard => "ard",
            VariantChoice::Fa => "fa",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "iso" => Ok(VariantChoice::Iso),
            "ard" => Ok(VariantChoice::Ard),
            "fa" => Ok(VariantChoice::Fa),
            other => Err(Error::Config(format!(
                "unknown variant {other:?} (expected iso, ard, or fa)"
            ))),
        }
    }

    pub fn spec(self, input_dim: usize, factor_rank: usize) -> Result<CovarianceSpec> {
        match self {
            VariantChoice::Iso => CovarianceSpec::isotropic(input_dim),
            VariantChoice::Ard => CovarianceSpec::ard(input_dim),
            VariantChoice::Fa => CovarianceSpec::factor_analysis(input_dim, factor_rank),
        }
    }

    fn seed_offset(self) -> u64 {
        match self {
            VariantChoice::Iso => 101,
            VariantChoice::Ard => 202,
            VariantChoice::Fa => 303,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-4,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SparseConfig {
    pub enabled: bool,
    pub tol: f64,
    pub max_subset: usize,
}

impl Default for SparseConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            tol: 0.1,
            max_subset: 400,
        }
    }
}

/// A full experiment description. Serialized form doubles as the manifest of
/// record: identical config + seed reproduces identical outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub variants: Vec<VariantChoice>,
    pub seed: u64,
    pub n_transitions: usize,
    /// Discount override; each environment's default applies when absent.
    pub discount: Option<f64>,
    /// Factor-analysis rank for the `fa` variant.
    pub factor_rank: usize,
    pub optimizer: OptimizerConfig,
    pub sparse: SparseConfig,
    /// Resolution of the fitted-value-iteration oracle grid (pendulum).
    pub fvi_resolution: usize,
    pub fvi_tol: f64,
    /// Resolution per axis of the prediction-evaluation grid (pendulum).
    pub eval_grid_resolution: usize,
    /// Descending tolerance sweep for subset-selection profiling.
    pub icd_profile_tols: Vec<f64>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Gridworld,
            variants: vec![VariantChoice::Iso, VariantChoice::Ard, VariantChoice::Fa],
            seed: 1,
            n_transitions: 500,
            discount: None,
            factor_rank: 1,
            optimizer: OptimizerConfig::default(),
            sparse: SparseConfig::default(),
            fvi_resolution: 400,
            fvi_tol: 1e-6,
            eval_grid_resolution: 50,
            icd_profile_tols: vec![3.0, 1.0, 0.3, 0.1, 0.03, 0.01],
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("cannot parse config: {e}")))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::Config("at least one variant is required".into()));
        }
        if self.n_transitions < 2 {
            return Err(Error::Config("n_transitions must be at least 2".into()));
        }
        if self.sparse.tol <= 0.0 {
            return Err(Error::Config("sparse.tol must be positive".into()));
        }
        if let Some(g) = self.discount {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::Config(format!("discount {g} outside [0, 1)")));
            }
        }
        Ok(())
    }

    pub fn gridworld_spec(&self) -> GridworldSpec {
        let mut spec = GridworldSpec::default();
        if let Some(g) = self.discount {
            spec.discount = g;
        }
        spec
    }

    pub fn pendulum_spec(&self) -> PendulumSpec {
        let mut spec = PendulumSpec::default();
        if let Some(g) = self.discount {
            spec.discount = g;
        }
        spec
    }

    fn optimize_opts(&self, variant: VariantChoice) -> OptimizeOpts {
        OptimizeOpts {
            max_iter: self.optimizer.max_iter,
            grad_tol: self.optimizer.grad_tol,
            restarts: self.optimizer.restarts,
            seed: self.seed.wrapping_add(variant.seed_offset()),
        }
    }

    fn ensure_out_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir)?;
        Ok(())
    }
}

/// Manifest written next to every simulated trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub seed: u64,
    pub n_transitions: usize,
    pub discount: f64,
    pub episodes_completed: usize,
    pub trajectory: String,
    pub env: serde_json::Value,
}

#[derive(Debug)]
pub struct SimulateOutcome {
    pub trajectory_path: PathBuf,
    pub manifest_path: PathBuf,
    pub episodes_completed: usize,
}

/// Sample a trajectory from the configured environment and write it with its
/// manifest.
pub fn cmd_simulate(config: &RunConfig) -> Result<SimulateOutcome> {
    config.validate()?;
    config.ensure_out_dir()?;
    let (traj, discount, env): (Trajectory, f64, serde_json::Value) = match config.experiment {
        Experiment::Gridworld => {
            let spec = config.gridworld_spec();
            let traj = gridworld_rollout(&spec, config.n_transitions, config.seed)?;
            (traj, spec.discount, serde_json::to_value(spec)?)
        }
        Experiment::Pendulum => {
            let spec = config.pendulum_spec();
            let grid = fitted_value_iteration(
                &spec,
                config.fvi_resolution,
                &spec.default_actions(),
                config.fvi_tol,
            )?;
            let policy = GreedyPolicy::new(spec, grid, spec.default_actions());
            let traj = pendulum_rollout(&spec, &policy, config.n_transitions, config.seed)?;
            (traj, spec.discount, serde_json::to_value(spec)?)
        }
        Experiment::Custom => {
            return Err(Error::Config(
                "simulate needs experiment = gridworld or pendulum".into(),
            ));
        }
    };

    let trajectory_path = config.out_dir.join("trajectory.csv");
    traj.write_csv(&trajectory_path)?;
    let manifest = Manifest {
        experiment: config.experiment,
        seed: config.seed,
        n_transitions: config.n_transitions,
        discount,
        episodes_completed: traj.n_stitches(),
        trajectory: "trajectory.csv".into(),
        env,
    };
    let manifest_path = config.out_dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(SimulateOutcome {
        trajectory_path,
        manifest_path,
        episodes_completed: manifest.episodes_completed,
    })
}

/// Hyperparameters in natural space plus, for the factor-analysis variant,
/// the eigendecomposition of Ω.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaReport {
    pub log_space: Vec<f64>,
    pub v0: f64,
    pub b: f64,
    pub noise: f64,
    /// Per-dimension Ω weights (h repeated for the isotropic variant).
    pub relevance: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_scales: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_directions: Option<Vec<Vec<f64>>>,
}

impl ThetaReport {
    pub fn from_params(spec: &CovarianceSpec, params: &HyperParams) -> Result<Self> {
        let (factors, omega) = match &params.variant {
            VariantParams::FactorAnalysis { factors, .. } => {
                let (dirs, scales) = omega_eigendecomposition(spec, params)?;
                let dir_rows: Vec<Vec<f64>> = (0..dirs.ncols())
                    .map(|c| dirs.column(c).iter().copied().collect())
                    .collect();
                (
                    Some(
                        (0..factors.ncols())
                            .map(|c| factors.column(c).iter().copied().collect())
                            .collect(),
                    ),
                    Some((scales.iter().copied().collect(), dir_rows)),
                )
            }
            _ => (None, None),
        };
        let (omega_scales, omega_directions) = match omega {
            Some((s, d)) => (Some(s), Some(d)),
            None => (None, None),
        };
        Ok(Self {
            log_space: params.to_vector().iter().copied().collect(),
            v0: params.v0(),
            b: params.b(),
            noise: params.noise(),
            relevance: params.relevance_weights(spec.input_dim),
            factors,
            omega_scales,
            omega_directions,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparseSummary {
    pub subset_size: usize,
    pub stop_reason: StopReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_mse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_mse: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantReport {
    pub variant: String,
    pub theta: ThetaReport,
    pub likelihood: LikelihoodReport,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_mse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_mse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparse: Option<SparseSummary>,
    pub eigenspectrum: Vec<f64>,
    pub icd_profile: Vec<IcdProfilePoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureReport {
    pub variant: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub experiment: Experiment,
    pub seed: u64,
    pub n_transitions: usize,
    pub variants: Vec<VariantReport>,
    pub failures: Vec<FailureReport>,
}

/// Ground truth for the configured experiment: the tabular gridworld solve or
/// the fitted-value-iteration grid. `None` for custom trajectories.
pub fn ground_truth(config: &RunConfig) -> Result<Option<ValueGrid>> {
    match config.experiment {
        Experiment::Gridworld => Ok(Some(gridworld_true_values(&config.gridworld_spec())?)),
        Experiment::Pendulum => {
            let spec = config.pendulum_spec();
            Ok(Some(fitted_value_iteration(
                &spec,
                config.fvi_resolution,
                &spec.default_actions(),
                config.fvi_tol,
            )?))
        }
        Experiment::Custom => Ok(None),
    }
}

/// Evaluation grid for predictions: the 121 gridworld states, or an
/// `eval_grid_resolution`² grid over the pendulum axes with interpolated
/// truth.
fn evaluation_grid(config: &RunConfig, truth: &ValueGrid) -> (DMatrix<f64>, Vec<f64>, AxisSpec, AxisSpec) {
    match config.experiment {
        Experiment::Gridworld | Experiment::Custom => (
            truth.points(),
            truth.values_flat(),
            truth.x_axis,
            truth.y_axis,
        ),
        Experiment::Pendulum => {
            let x_axis = AxisSpec::periodic(truth.x_axis.min, truth.x_axis.max, config.eval_grid_resolution);
            let y_axis = AxisSpec::clamped(truth.y_axis.min, truth.y_axis.max, config.eval_grid_resolution);
            let mut pts = DMatrix::zeros(x_axis.n * y_axis.n, 2);
            let mut vals = Vec::with_capacity(x_axis.n * y_axis.n);
            let mut r = 0;
            for iy in 0..y_axis.n {
                for ix in 0..x_axis.n {
                    let (x, y) = (x_axis.coord(ix), y_axis.coord(iy));
                    pts[(r, 0)] = x;
                    pts[(r, 1)] = y;
                    vals.push(truth.interpolate(x, y));
                    r += 1;
                }
            }
            (pts, vals, x_axis, y_axis)
        }
    }
}

#[derive(Debug)]
pub struct FitOutcome {
    pub report_path: PathBuf,
    pub report: ComparisonReport,
}

/// Fit every requested covariance variant to a trajectory: model selection,
/// exact fit, optional sparse fit, metrics, and per-figure CSV outputs. A
/// variant failure is recorded and the run continues; the command fails only
/// when every variant fails.
pub fn cmd_fit<P: AsRef<Path>>(config: &RunConfig, trajectory_path: P) -> Result<FitOutcome> {
    config.validate()?;
    config.ensure_out_dir()?;
    let traj = Trajectory::read_csv(trajectory_path)?;
    let truth = ground_truth(config)?;

    let eval_points = truth.as_ref().map(|t| evaluation_grid(config, t));
    let traj_truth: Option<Vec<f64>> = truth.as_ref().map(|t| {
        (0..traj.n_states())
            .map(|i| {
                let s = traj.state(i);
                t.interpolate(s[0], s[1])
            })
            .collect()
    });

    let mut variants = Vec::new();
    let mut failures = Vec::new();
    for &choice in &config.variants {
        match fit_one_variant(
            config,
            &traj,
            choice,
            eval_points.as_ref(),
            traj_truth.as_deref(),
        ) {
            Ok(report) => variants.push(report),
            Err(e) => failures.push(FailureReport {
                variant: choice.name().into(),
                error: e.to_string(),
            }),
        }
    }
    if variants.is_empty() {
        return Err(Error::OptimizationFailed(format!(
            "every variant failed: {}",
            failures
                .iter()
                .map(|f| format!("{}: {}", f.variant, f.error))
                .collect::<Vec<_>>()
                .join("; ")
        )));
    }

    let report = ComparisonReport {
        experiment: config.experiment,
        seed: config.seed,
        n_transitions: traj.n_transitions(),
        variants,
        failures,
    };
    let report_path = config.out_dir.join("report.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    Ok(FitOutcome {
        report_path,
        report,
    })
}

fn fit_one_variant(
    config: &RunConfig,
    traj: &Trajectory,
    choice: VariantChoice,
    eval_points: Option<&(DMatrix<f64>, Vec<f64>, AxisSpec, AxisSpec)>,
    traj_truth: Option<&[f64]>,
) -> Result<VariantReport> {
    let spec = choice.spec(traj.dim(), config.factor_rank)?;
    let theta0 = default_hyperparams(traj, &spec, config.seed.wrapping_add(choice.seed_offset()))?;
    let trace = optimize(traj, &spec, &theta0, &config.optimize_opts(choice))?;
    let params = trace.best_params.clone();
    let posterior = fit_exact(traj, &spec, &params)?;

    let trajectory_mse = match traj_truth {
        Some(truth) => Some(mse_on_points(
            |x| posterior.predict_mean(x),
            traj.states(),
            truth,
        )?),
        None => None,
    };

    let mut grid_mse = None;
    let mut sparse_grid_mse = None;
    let mut grid_pred: Option<ValueGrid> = None;
    if let Some((points, truth_vals, x_axis, y_axis)) = eval_points {
        grid_mse = Some(mse_on_points(
            |x| posterior.predict_mean(x),
            points,
            truth_vals,
        )?);
        let mut vg = ValueGrid::zeros(*x_axis, *y_axis)?;
        let mut r = 0;
        for iy in 0..y_axis.n {
            for ix in 0..x_axis.n {
                let p = [points[(r, 0)], points[(r, 1)]];
                vg.values[(ix, iy)] = posterior.predict_mean(&p)?;
                r += 1;
            }
        }
        grid_pred = Some(vg);
    }

    let sparse = if config.sparse.enabled {
        let selection = icd_select(
            &spec,
            &params,
            traj.states(),
            config.sparse.tol,
            config.sparse.max_subset,
        )?;
        let sr = fit_sr(traj, &spec, &params, &selection)?;
        let sr_traj_mse = match traj_truth {
            Some(truth) => Some(mse_on_points(|x| sr.predict_mean(x), traj.states(), truth)?),
            None => None,
        };
        if let Some((points, truth_vals, _, _)) = eval_points {
            sparse_grid_mse = Some(mse_on_points(|x| sr.predict_mean(x), points, truth_vals)?);
        }
        Some(SparseSummary {
            subset_size: selection.size(),
            stop_reason: selection.stop_reason,
            trajectory_mse: sr_traj_mse,
            grid_mse: sparse_grid_mse,
        })
    } else {
        None
    };

    // Kernel and reward-covariance spectra at the optimized hyperparameters.
    let gram = gram_symmetric(&spec, &params, traj.states(), false)?.matrix;
    let spectrum_k = clamped_spectrum(&gram)?;
    let td = TdOperator::from_trajectory(traj);
    let q = reward_covariance(&gram, &td, params.noise());
    let spectrum_q = clamped_spectrum(&q)?;
    let profile = icd_profile(&spec, &params, traj.states(), &config.icd_profile_tols)?;

    let name = choice.name();
    write_eigenspectrum_csv(
        config.out_dir.join(format!("eigenspectrum_k_{name}.csv")),
        &spectrum_k,
    )?;
    write_eigenspectrum_csv(
        config.out_dir.join(format!("eigenspectrum_q_{name}.csv")),
        &spectrum_q,
    )?;
    write_icd_csv(config.out_dir.join(format!("icd_{name}.csv")), &profile)?;
    let theta = ThetaReport::from_params(&spec, &params)?;
    std::fs::write(
        config.out_dir.join(format!("theta_{name}.json")),
        serde_json::to_string_pretty(&theta)?,
    )?;
    if let Some(vg) = &grid_pred {
        vg.write_csv(config.out_dir.join(format!("grid_{name}.csv")))?;
    }

    Ok(VariantReport {
        variant: name.into(),
        theta,
        likelihood: trace.best_report,
        converged: trace.converged,
        trajectory_mse,
        grid_mse,
        sparse,
        eigenspectrum: spectrum_k,
        icd_profile: profile,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileReport {
    pub variant: String,
    pub theta: ThetaReport,
    pub likelihood: LikelihoodReport,
    pub icd_profile: Vec<IcdProfilePoint>,
}

#[derive(Debug)]
pub struct ProfileOutcome {
    pub report_path: PathBuf,
    pub reports: Vec<ProfileReport>,
}

/// Optimize each variant on the trajectory, then profile the kernel matrix it
/// induces: eigenspectrum CSV plus the subset-size/error sweep.
pub fn cmd_profile<P: AsRef<Path>>(config: &RunConfig, trajectory_path: P) -> Result<ProfileOutcome> {
    config.validate()?;
    config.ensure_out_dir()?;
    let traj = Trajectory::read_csv(trajectory_path)?;

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for &choice in &config.variants {
        let run = || -> Result<ProfileReport> {
            let spec = choice.spec(traj.dim(), config.factor_rank)?;
            let theta0 =
                default_hyperparams(&traj, &spec, config.seed.wrapping_add(choice.seed_offset()))?;
            let trace = optimize(&traj, &spec, &theta0, &config.optimize_opts(choice))?;
            let params = trace.best_params.clone();
            let gram = gram_symmetric(&spec, &params, traj.states(), false)?.matrix;
            let spectrum = clamped_spectrum(&gram)?;
            let profile = icd_profile(&spec, &params, traj.states(), &config.icd_profile_tols)?;
            let name = choice.name();
            write_eigenspectrum_csv(
                config.out_dir.join(format!("eigenspectrum_k_{name}.csv")),
                &spectrum,
            )?;
            write_icd_csv(config.out_dir.join(format!("icd_{name}.csv")), &profile)?;
            Ok(ProfileReport {
                variant: name.into(),
                theta: ThetaReport::from_params(&spec, &params)?,
                likelihood: trace.best_report,
                icd_profile: profile,
            })
        };
        match run() {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(FailureReport {
                variant: choice.name().into(),
                error: e.to_string(),
            }),
        }
    }
    if reports.is_empty() {
        return Err(Error::OptimizationFailed(format!(
            "every variant failed: {}",
            failures
                .iter()
                .map(|f| format!("{}: {}", f.variant, f.error))
                .collect::<Vec<_>>()
                .join("; ")
        )));
    }
    let report_path = config.out_dir.join("profile.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&reports)?)?;
    Ok(ProfileOutcome {
        report_path,
        reports,
    })
}

#[derive(Debug)]
pub struct EvalGridOutcome {
    pub grid_path: PathBuf,
}

/// Write the experiment's ground-truth value grid.
pub fn cmd_eval_grid(config: &RunConfig) -> Result<EvalGridOutcome> {
    config.validate()?;
    config.ensure_out_dir()?;
    let truth = ground_truth(config)?.ok_or_else(|| {
        Error::Config("eval-grid needs experiment = gridworld or pendulum".into())
    })?;
    let grid_path = config.out_dir.join("true_values.csv");
    truth.write_csv(&grid_path)?;
    Ok(EvalGridOutcome { grid_path })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_validation() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.n_transitions, cfg.n_transitions);
        assert!(cfg.validate().is_ok());

        let bad = RunConfig {
            variants: vec![],
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());

        // Partial configs fill from defaults.
        let partial: RunConfig =
            serde_json::from_str(r#"{"experiment":"pendulum","seed":7}"#).unwrap();
        assert_eq!(partial.experiment, Experiment::Pendulum);
        assert_eq!(partial.seed, 7);
        assert_eq!(partial.n_transitions, 500);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!(VariantChoice::parse("iso").unwrap(), VariantChoice::Iso);
        assert_eq!(VariantChoice::parse("ard").unwrap(), VariantChoice::Ard);
        assert_eq!(VariantChoice::parse("fa").unwrap(), VariantChoice::Fa);
        assert!(VariantChoice::parse("rbf").is_err());
    }

    #[test]
    fn simulate_rejects_custom() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            experiment: Experiment::Custom,
            out_dir: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        assert!(matches!(cmd_simulate(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn simulate_gridworld_writes_trajectory_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            experiment: Experiment::Gridworld,
            n_transitions: 40,
            seed: 5,
            out_dir: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        let out = cmd_simulate(&cfg).unwrap();
        let traj = Trajectory::read_csv(&out.trajectory_path).unwrap();
        assert_eq!(traj.n_transitions(), 40);
        let manifest: Manifest =
            serde_json::from_str(&std::fs::read_to_string(&out.manifest_path).unwrap()).unwrap();
        assert_eq!(manifest.discount, 0.9);
        assert_eq!(manifest.episodes_completed, traj.n_stitches());
    }
}
