//! Marginal-likelihood model selection.
//!
//! The log marginal likelihood of the observed rewards,
//!
//!   L(θ) = −½ log det Q − ½ rᵀQ⁻¹r − (n−1)/2 · log 2π,
//!
//! trades data fit against model complexity and is maximized over the
//! log-space hyperparameter vector with scaled conjugate gradients. The
//! gradient is analytic: ∂L/∂θᵢ = −½ tr(Q⁻¹ ∂Q/∂θᵢ) + ½ wᵀ(∂Q/∂θᵢ)w with
//! w = Q⁻¹r, where ∂Q/∂θᵢ = H(∂K/∂θᵢ)Hᵀ for kernel parameters and σ₀²HHᵀ
//! (tridiagonal) for the noise.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{reward_covariance, TdOperator};
use crate::kernel::{
    gram_symmetric, kernel_param_gradients, CovarianceSpec, CovarianceVariant, HyperParams,
};
use crate::linalg;
use crate::trajectory::Trajectory;

/// Log marginal likelihood decomposed into its three terms.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LikelihoodReport {
    pub total: f64,
    /// −½ log det Q: small for flexible models, large for rigid ones.
    pub complexity: f64,
    /// −½ rᵀQ⁻¹r.
    pub data_fit: f64,
    /// −(n−1)/2 · log 2π.
    pub constant: f64,
}

impl LikelihoodReport {
    /// Negative log likelihood (smaller is better).
    pub fn nll(&self) -> f64 {
        -self.total
    }
}

fn evaluate(
    traj: &Trajectory,
    spec: &CovarianceSpec,
    params: &HyperParams,
    want_grad: bool,
) -> Result<(LikelihoodReport, Option<DVector<f64>>)> {
    params.validate_for(spec)?;
    if traj.dim() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            context: "likelihood trajectory dimension",
            expected: spec.input_dim,
            got: traj.dim(),
        });
    }
    let td = TdOperator::from_trajectory(traj);
    let k = gram_symmetric(spec, params, traj.states(), false)?.matrix;
    let q = reward_covariance(&k, &td, params.noise());
    let chol = linalg::cholesky_lower(&q)?;
    let w = linalg::chol_solve(&chol, traj.rewards());

    let m = traj.n_transitions() as f64;
    let complexity = -0.5 * linalg::logdet_from_chol(&chol);
    let data_fit = -0.5 * traj.rewards().dot(&w);
    let constant = -0.5 * m * (2.0 * std::f64::consts::PI).ln();
    let report = LikelihoodReport {
        total: complexity + data_fit + constant,
        complexity,
        data_fit,
        constant,
    };
    if !want_grad {
        return Ok((report, None));
    }

    let q_inv = linalg::spd_inverse_from_chol(&chol);
    let alpha = td.apply_transpose(&w);
    // Pull both gradient terms back to kernel space:
    //   tr(Q⁻¹·H·∂K·Hᵀ) = Σᵢⱼ [HᵀQ⁻¹H]ᵢⱼ [∂K]ᵢⱼ,
    //   wᵀ·H·∂K·Hᵀ·w = (Hᵀw)ᵀ ∂K (Hᵀw),
    // so a single n×n weight matrix contracts against every ∂K/∂θᵢ.
    let pulled = td.pullback(&q_inv);
    let n = traj.n_states();
    let mut weight = pulled;
    for j in 0..n {
        for i in 0..n {
            weight[(i, j)] = -0.5 * weight[(i, j)] + 0.5 * alpha[i] * alpha[j];
        }
    }

    let mut grad = DVector::zeros(spec.n_params());
    let kernel_grads = kernel_param_gradients(spec, params, traj.states())?;
    // Packed slots: 0 = log v₀, 1 = log b, 2 = log σ₀², 3.. = variant block.
    for (slot, (_, dk)) in kernel_grads.iter().enumerate() {
        let idx = if slot < 2 { slot } else { slot + 1 };
        grad[idx] = dk
            .as_slice()
            .iter()
            .zip(weight.as_slice().iter())
            .map(|(a, b)| a * b)
            .sum();
    }

    // Noise: ∂Q/∂log σ₀² = σ₀²·HHᵀ is tridiagonal, so O(n).
    let noise = params.noise();
    let (diag, off) = td.gram_tridiagonal();
    let mt = td.n_transitions();
    let mut trace = 0.0;
    for i in 0..mt {
        trace += q_inv[(i, i)] * diag[i];
        if i + 1 < mt {
            trace += 2.0 * q_inv[(i, i + 1)] * off[i];
        }
    }
    grad[2] = noise * (-0.5 * trace + 0.5 * alpha.norm_squared());

    Ok((report, Some(grad)))
}

/// L(θ) with its decomposition; one Cholesky factorization.
pub fn log_marginal_likelihood(
    traj: &Trajectory,
    spec: &CovarianceSpec,
    params: &HyperParams,
) -> Result<LikelihoodReport> {
    evaluate(traj, spec, params, false).map(|(r, _)| r)
}

/// ∇L in the packed log-space coordinates of [`HyperParams::to_vector`].
pub fn likelihood_gradient(
    traj: &Trajectory,
    spec: &CovarianceSpec,
    params: &HyperParams,
) -> Result<DVector<f64>> {
    evaluate(traj, spec, params, true).map(|(_, g)| g.unwrap())
}

/// L and ∇L sharing one factorization.
pub fn likelihood_value_and_gradient(
    traj: &Trajectory,
    spec: &CovarianceSpec,
    params: &HyperParams,
) -> Result<(LikelihoodReport, DVector<f64>)> {
    evaluate(traj, spec, params, true).map(|(r, g)| (r, g.unwrap()))
}

/// Optimizer settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeOpts {
    pub max_iter: usize,
    /// Convergence threshold on ‖∇L‖∞.
    pub grad_tol: f64,
    /// Total optimization runs: the first starts at θ₀, the rest at
    /// log-space perturbations of θ₀ (σ = 0.5).
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizeOpts {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-4,
            restarts: 3,
            seed: 0,
        }
    }
}

/// One accepted optimizer iterate.
#[derive(Debug, Clone)]
pub struct IterateRecord {
    pub theta: DVector<f64>,
    pub likelihood: f64,
    pub grad_norm: f64,
}

/// Outcome of a multi-restart maximization of L.
#[derive(Debug, Clone)]
pub struct OptimizationTrace {
    /// Accepted iterates across all restarts, in order.
    pub iterates: Vec<IterateRecord>,
    /// Number of optimization runs executed.
    pub restarts: usize,
    /// Whether any run met the convergence criteria.
    pub converged: bool,
    pub best_params: HyperParams,
    pub best_report: LikelihoodReport,
}

/// Log-space values are clipped to this box during the search so that
/// exponentiation cannot overflow mid-line-search.
const THETA_CLIP: (f64, f64) = (-20.0, 20.0);

/// Maximize L from `theta0` with scaled conjugate gradients and restarts.
/// The returned best is never worse than θ₀ (when θ₀ is evaluable).
pub fn optimize(
    traj: &Trajectory,
    spec: &CovarianceSpec,
    theta0: &HyperParams,
    opts: &OptimizeOpts,
) -> Result<OptimizationTrace> {
    theta0.validate_for(spec)?;
    let x0 = theta0.to_vector();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scg_opts = crate::scg::ScgOptions {
        max_iter: opts.max_iter,
        grad_tol: opts.grad_tol,
        f_tol: 1e-9,
        clip: Some(THETA_CLIP),
    };

    let mut iterates = Vec::new();
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut converged = false;
    let mut runs = 0usize;
    let mut failures = Vec::new();
    let total_runs = opts.restarts.max(1);

    for run in 0..total_runs {
        let start = if run == 0 {
            x0.clone()
        } else {
            DVector::from_fn(x0.len(), |i, _| {
                x0[i] + 0.5 * rng.sample::<f64, _>(StandardNormal)
            })
        };
        let fg = |x: &DVector<f64>| {
            let params = HyperParams::from_vector(spec, x)?;
            let (report, grad) = evaluate(traj, spec, &params, true)?;
            Ok((-report.total, -grad.unwrap()))
        };
        let f_only = |x: &DVector<f64>| {
            let params = HyperParams::from_vector(spec, x)?;
            evaluate(traj, spec, &params, false).map(|(r, _)| -r.total)
        };
        match crate::scg::minimize(start, fg, f_only, &scg_opts) {
            Ok(result) => {
                runs += 1;
                for step in &result.path {
                    iterates.push(IterateRecord {
                        theta: step.x.clone(),
                        likelihood: -step.f,
                        grad_norm: step.grad_norm,
                    });
                }
                converged |= result.converged;
                let better = match &best {
                    Some((f_best, _)) => result.f < *f_best,
                    None => true,
                };
                if better {
                    best = Some((result.f, result.x.clone()));
                }
                // A stationary θ₀ needs no restarts at all.
                if run == 0 && result.converged && result.iterations == 0 {
                    break;
                }
            }
            Err(e) => failures.push(format!("run {run}: {e}")),
        }
    }

    let (_, best_x) = best.ok_or_else(|| {
        Error::OptimizationFailed(format!(
            "all {total_runs} starts failed: {}",
            failures.join("; ")
        ))
    })?;
    let best_params = HyperParams::from_vector(spec, &best_x)?;
    let best_report = log_marginal_likelihood(traj, spec, &best_params)?;
    Ok(OptimizationTrace {
        iterates,
        restarts: runs,
        converged,
        best_params,
        best_report,
    })
}

/// Scale-aware default starting point: log v₀ = 0, log b = −2, log σ₀² = −2,
/// and per-dimension weights a_d = 1/median(δ_d²) over sampled state pairs
/// (the ARD weights act as precisions). Factor entries are small seeded
/// Gaussians since M = 0 is a stationary point of L in M.
pub fn default_hyperparams(
    traj: &Trajectory,
    spec: &CovarianceSpec,
    seed: u64,
) -> Result<HyperParams> {
    if traj.dim() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            context: "default_hyperparams trajectory dimension",
            expected: spec.input_dim,
            got: traj.dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1234_abcd_0001);
    let d = traj.dim();
    let n = traj.n_states();
    let states = traj.states();

    // Median pairwise squared distance per dimension, subsampled for large n.
    let cap = 400.min(n);
    let idx: Vec<usize> = if n <= cap {
        (0..n).collect()
    } else {
        let mut v: Vec<usize> = (0..n).collect();
        for i in (1..v.len()).rev() {
            let j = rng.gen_range(0..=i);
            v.swap(i, j);
        }
        v.truncate(cap);
        v.sort_unstable();
        v
    };
    let mut per_dim = vec![Vec::new(); d];
    let mut total = Vec::new();
    for (a, &i) in idx.iter().enumerate() {
        for &j in idx.iter().skip(a + 1) {
            let mut sum = 0.0;
            for nu in 0..d {
                let diff = states[(i, nu)] - states[(j, nu)];
                per_dim[nu].push(diff * diff);
                sum += diff * diff;
            }
            total.push(sum / d as f64);
        }
    }
    let median = |v: &mut Vec<f64>| -> f64 {
        if v.is_empty() {
            return 1.0;
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = v[v.len() / 2];
        if m > 1e-12 {
            m
        } else {
            1.0
        }
    };

    let (v0, b, noise) = (1.0, (-2.0f64).exp(), (-2.0f64).exp());
    match spec.variant {
        CovarianceVariant::Isotropic => {
            let h = 1.0 / median(&mut total);
            HyperParams::isotropic(v0, b, noise, h)
        }
        CovarianceVariant::ArdDiagonal => {
            let a: Vec<f64> = per_dim.iter_mut().map(|v| 1.0 / median(v)).collect();
            HyperParams::ard(v0, b, noise, &a)
        }
        CovarianceVariant::FactorAnalysis => {
            let a: Vec<f64> = per_dim.iter_mut().map(|v| 1.0 / median(v)).collect();
            let k = spec.factor_rank.unwrap();
            let factors = nalgebra::DMatrix::from_fn(d, k, |row, _| {
                0.3 * a[row].sqrt() * rng.sample::<f64, _>(StandardNormal)
            });
            HyperParams::factor_analysis(v0, b, noise, &a, factors)
        }
    }
}

/// Optimize the factor-analysis variant independently for each candidate rank
/// and return the likelihood-maximizing one with the full score table.
pub fn select_factor_rank(
    traj: &Trajectory,
    k_candidates: &[usize],
    opts: &OptimizeOpts,
) -> Result<(usize, Vec<(usize, LikelihoodReport)>)> {
    let d = traj.dim();
    if k_candidates.is_empty() {
        return Err(Error::InvalidParameter {
            name: "k_candidates".into(),
            reason: "must be nonempty".into(),
        });
    }
    for &k in k_candidates {
        if k == 0 || k >= d {
            return Err(Error::InvalidParameter {
                name: "k_candidates".into(),
                reason: format!("each k must satisfy 0 < k < D = {d}, got {k}"),
            });
        }
    }
    let mut table = Vec::new();
    let mut failures = Vec::new();
    for &k in k_candidates {
        let spec = CovarianceSpec::factor_analysis(d, k)?;
        let theta0 = default_hyperparams(traj, &spec, opts.seed.wrapping_add(k as u64))?;
        match optimize(traj, &spec, &theta0, opts) {
            Ok(trace) => table.push((k, trace.best_report)),
            Err(e) => failures.push(format!("k = {k}: {e}")),
        }
    }
    if table.is_empty() {
        return Err(Error::OptimizationFailed(format!(
            "every candidate rank failed: {}",
            failures.join("; ")
        )));
    }
    let best = table
        .iter()
        .max_by(|a, b| a.1.total.partial_cmp(&b.1.total).unwrap().then(b.0.cmp(&a.0)))
        .map(|(k, _)| *k)
        .unwrap();
    Ok((best, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::eval_kernel;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_trajectory(rng: &mut StdRng, n: usize, d: usize, gamma: f64) -> Trajectory {
        let states = DMatrix::from_fn(n, d, |_, _| rng.gen_range(-2.0..2.0));
        let discounts = DVector::from_fn(n - 1, |i, _| if i % 6 == 4 { 0.0 } else { gamma });
        let rewards = DVector::from_fn(n - 1, |i, _| {
            if discounts[i] == 0.0 {
                0.0
            } else {
                rng.gen_range(-1.5..1.5)
            }
        });
        Trajectory::new(states, rewards, discounts).unwrap()
    }

    #[test]
    fn single_transition_closed_form() {
        let spec = CovarianceSpec::isotropic(1).unwrap();
        let params = HyperParams::isotropic(1.4, 0.2, 0.3, 1.1).unwrap();
        let gamma = 0.9;
        let r = -0.7;
        let traj = Trajectory::new(
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            DVector::from_vec(vec![r]),
            DVector::from_vec(vec![gamma]),
        )
        .unwrap();
        let k00 = eval_kernel(&spec, &params, &[0.0], &[0.0]).unwrap();
        let k01 = eval_kernel(&spec, &params, &[0.0], &[1.0]).unwrap();
        let k11 = eval_kernel(&spec, &params, &[1.0], &[1.0]).unwrap();
        let q = k00 - 2.0 * gamma * k01 + gamma * gamma * k11
            + params.noise() * (1.0 + gamma * gamma);
        let expect = -0.5 * q.ln() - r * r / (2.0 * q) - 0.5 * (2.0 * std::f64::consts::PI).ln();
        let report = log_marginal_likelihood(&traj, &spec, &params).unwrap();
        assert_relative_eq!(report.total, expect, epsilon = 1e-12);
        assert_relative_eq!(
            report.total,
            report.complexity + report.data_fit + report.constant,
            epsilon = 1e-10
        );
    }

    #[test]
    fn shrinking_rewards_only_shrinks_data_fit() {
        let mut rng = StdRng::seed_from_u64(31);
        let traj = random_trajectory(&mut rng, 15, 2, 0.9);
        let spec = CovarianceSpec::isotropic(2).unwrap();
        let params = HyperParams::isotropic(1.0, 0.2, 0.2, 1.0).unwrap();
        let full = log_marginal_likelihood(&traj, &spec, &params).unwrap();
        for scale in [0.5, 0.1, 0.01] {
            let scaled = Trajectory::new(
                traj.states().clone(),
                traj.rewards() * scale,
                traj.discounts().clone(),
            )
            .unwrap();
            let rep = log_marginal_likelihood(&scaled, &spec, &params).unwrap();
            assert_relative_eq!(rep.complexity, full.complexity, epsilon = 1e-12);
            assert_relative_eq!(rep.data_fit, full.data_fit * scale * scale, epsilon = 1e-10);
        }
    }

    #[test]
    fn reevaluation_is_bit_stable() {
        let mut rng = StdRng::seed_from_u64(32);
        let traj = random_trajectory(&mut rng, 12, 3, 0.85);
        let spec = CovarianceSpec::ard(3).unwrap();
        let params = HyperParams::ard(1.1, 0.2, 0.15, &[0.5, 1.5, 0.9]).unwrap();
        let a = log_marginal_likelihood(&traj, &spec, &params).unwrap();
        let b = log_marginal_likelihood(&traj, &spec, &params).unwrap();
        assert_eq!(a.total, b.total);
        assert_eq!(a.complexity, b.complexity);
        assert_eq!(a.data_fit, b.data_fit);
    }

    fn check_gradient_fd(traj: &Trajectory, spec: &CovarianceSpec, params: &HyperParams) {
        let grad = likelihood_gradient(traj, spec, params).unwrap();
        let x = params.to_vector();
        let step = 1e-5;
        for i in 0..x.len() {
            let mut plus = x.clone();
            plus[i] += step;
            let mut minus = x.clone();
            minus[i] -= step;
            let lp = log_marginal_likelihood(
                traj,
                spec,
                &HyperParams::from_vector(spec, &plus).unwrap(),
            )
            .unwrap()
            .total;
            let lm = log_marginal_likelihood(
                traj,
                spec,
                &HyperParams::from_vector(spec, &minus).unwrap(),
            )
            .unwrap()
            .total;
            let fd = (lp - lm) / (2.0 * step);
            let denom = fd.abs().max(grad.amax() * 1e-3).max(1e-8);
            let rel = (grad[i] - fd).abs() / denom;
            assert!(
                rel < 1e-4,
                "component {i}: analytic {} vs fd {fd} (rel {rel})",
                grad[i]
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences_all_variants() {
        let mut rng = StdRng::seed_from_u64(33);
        for d in [2usize, 3] {
            let traj = random_trajectory(&mut rng, 20, d, 0.9);
            let a: Vec<f64> = (0..d).map(|_| rng.gen_range(0.3..1.5)).collect();

            let spec = CovarianceSpec::isotropic(d).unwrap();
            check_gradient_fd(
                &traj,
                &spec,
                &HyperParams::isotropic(1.2, 0.3, 0.25, 0.8).unwrap(),
            );

            let spec = CovarianceSpec::ard(d).unwrap();
            check_gradient_fd(&traj, &spec, &HyperParams::ard(1.2, 0.3, 0.25, &a).unwrap());

            let spec = CovarianceSpec::factor_analysis(d, 1).unwrap();
            let factors = DMatrix::from_fn(d, 1, |_, _| rng.gen_range(-0.8..0.8));
            check_gradient_fd(
                &traj,
                &spec,
                &HyperParams::factor_analysis(1.2, 0.3, 0.25, &a, factors).unwrap(),
            );
        }
    }

    #[test]
    fn bias_gradient_is_pure_trace_term_when_rewards_vanish() {
        let mut rng = StdRng::seed_from_u64(34);
        let base = random_trajectory(&mut rng, 10, 2, 0.9);
        let traj = Trajectory::new(
            base.states().clone(),
            DVector::zeros(base.n_transitions()),
            base.discounts().clone(),
        )
        .unwrap();
        let spec = CovarianceSpec::isotropic(2).unwrap();
        let params = HyperParams::isotropic(1.0, 0.4, 0.2, 1.0).unwrap();
        let grad = likelihood_gradient(&traj, &spec, &params).unwrap();

        // Dense oracle: −½ tr(Q⁻¹ · b·H𝟙Hᵀ).
        let td = TdOperator::from_trajectory(&traj);
        let k = gram_symmetric(&spec, &params, traj.states(), false)
            .unwrap()
            .matrix;
        let q = reward_covariance(&k, &td, params.noise());
        let h = td.dense();
        let ones = DMatrix::from_element(traj.n_states(), traj.n_states(), params.b());
        let dq = &h * ones * h.transpose();
        let expect = -0.5 * (q.try_inverse().unwrap() * dq).trace();
        assert_relative_eq!(grad[1], expect, max_relative = 1e-9);
    }

    #[test]
    fn permuting_identical_dimensions_permutes_gradient() {
        let mut rng = StdRng::seed_from_u64(35);
        let n = 12;
        // Dimension 1 duplicates dimension 0.
        let col: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let states = DMatrix::from_fn(n, 2, |i, _| col[i]);
        let traj = Trajectory::new(
            states,
            DVector::from_fn(n - 1, |_, _| rng.gen_range(-1.0..1.0)),
            DVector::from_element(n - 1, 0.9),
        )
        .unwrap();
        let spec = CovarianceSpec::ard(2).unwrap();
        let params = HyperParams::ard(1.0, 0.2, 0.2, &[0.7, 1.3]).unwrap();
        let swapped = HyperParams::ard(1.0, 0.2, 0.2, &[1.3, 0.7]).unwrap();
        let g = likelihood_gradient(&traj, &spec, &params).unwrap();
        let gs = likelihood_gradient(&traj, &spec, &swapped).unwrap();
        assert_relative_eq!(g[3], gs[4], epsilon = 1e-10);
        assert_relative_eq!(g[4], gs[3], epsilon = 1e-10);
    }

    #[test]
    fn noise_profile_matches_grid_scan() {
        // 1-D problem: all kernel parameters fixed, only log σ₀² varies. SCG
        // must land on the optimum bracketed by a dense grid scan.
        let mut rng = StdRng::seed_from_u64(36);
        let traj = random_trajectory(&mut rng, 25, 2, 0.9);
        let spec = CovarianceSpec::isotropic(2).unwrap();
        let base = HyperParams::isotropic(1.0, 0.2, 1.0, 0.7).unwrap();
        let l_of = |log_noise: f64| {
            let params = HyperParams {
                log_noise,
                ..base.clone()
            };
            log_marginal_likelihood(&traj, &spec, &params).unwrap().total
        };

        // Dense scan over a wide bracket.
        let mut best_z = 0.0;
        let mut best_l = f64::NEG_INFINITY;
        let lo = -8.0;
        let hi = 4.0;
        let steps = 4800;
        for s in 0..=steps {
            let z = lo + (hi - lo) * s as f64 / steps as f64;
            let l = l_of(z);
            if l > best_l {
                best_l = l;
                best_z = z;
            }
        }

        let fg = |x: &DVector<f64>| {
            let params = HyperParams {
                log_noise: x[0],
                ..base.clone()
            };
            let (rep, g) = likelihood_value_and_gradient(&traj, &spec, &params)?;
            Ok((-rep.total, DVector::from_vec(vec![-g[2]])))
        };
        let r = crate::scg::minimize(
            DVector::from_vec(vec![1.0]),
            fg,
            |x| fg(x).map(|(f, _)| f),
            &crate::scg::ScgOptions {
                max_iter: 300,
                grad_tol: 1e-8,
                f_tol: 1e-14,
                clip: Some(THETA_CLIP),
            },
        )
        .unwrap();
        assert!(
            (r.x[0] - best_z).abs() < 1e-3,
            "scg {} vs grid {best_z}",
            r.x[0]
        );
    }

    #[test]
    fn optimize_improves_on_start_and_respects_stationarity() {
        let mut rng = StdRng::seed_from_u64(37);
        let traj = random_trajectory(&mut rng, 20, 2, 0.9);
        let spec = CovarianceSpec::ard(2).unwrap();
        let theta0 = default_hyperparams(&traj, &spec, 1).unwrap();
        let l0 = log_marginal_likelihood(&traj, &spec, &theta0).unwrap().total;
        let opts = OptimizeOpts {
            max_iter: 80,
            restarts: 2,
            seed: 5,
            ..Default::default()
        };
        let trace = optimize(&traj, &spec, &theta0, &opts).unwrap();
        assert!(trace.best_report.total >= l0 - 1e-12);
        for it in &trace.iterates {
            assert!(trace.best_report.total >= it.likelihood - 1e-9);
        }

        // A huge gradient tolerance makes θ₀ already stationary.
        let lazy = OptimizeOpts {
            grad_tol: 1e12,
            ..opts
        };
        let trace = optimize(&traj, &spec, &theta0, &lazy).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterates.len(), 1);
        assert_eq!(trace.restarts, 1);
        assert_relative_eq!(trace.best_report.total, l0, epsilon = 1e-12);
    }

    #[test]
    fn factor_rank_selection_validates_candidates() {
        let mut rng = StdRng::seed_from_u64(38);
        let traj = random_trajectory(&mut rng, 12, 2, 0.9);
        assert!(select_factor_rank(&traj, &[2], &OptimizeOpts::default()).is_err());
        assert!(select_factor_rank(&traj, &[], &OptimizeOpts::default()).is_err());
        let opts = OptimizeOpts {
            max_iter: 30,
            restarts: 1,
            ..Default::default()
        };
        let (k, table) = select_factor_rank(&traj, &[1], &opts).unwrap();
        assert_eq!(k, 1);
        assert_eq!(table.len(), 1);
    }
}
