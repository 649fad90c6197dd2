//! Exact GPTD inference.
//!
//! The value function is a zero-mean GP observed only through rewards via
//! r = Hv + η, where H is the (n−1)×n bidiagonal temporal-difference operator
//! and the noise covariance is σ₀²HHᵀ (the stochastic-MDP choice). Rewards
//! are then jointly Gaussian with covariance Q = HKHᵀ + σ₀²HHᵀ, and the
//! posterior over V(x*) follows by conditioning.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{eval_kernel, gram_symmetric, CovarianceSpec, HyperParams};
use crate::linalg;
use crate::trajectory::Trajectory;

/// The bidiagonal operator encoding rᵢ = V(xᵢ) − γᵢV(xᵢ₊₁): row i has 1 at
/// column i and −γᵢ at column i+1. Stored as the discount vector; never
/// materialized densely outside of test oracles.
#[derive(Debug, Clone)]
pub struct TdOperator {
    discounts: DVector<f64>,
}

impl TdOperator {
    pub fn new(discounts: DVector<f64>) -> Result<Self> {
        if discounts.is_empty() {
            return Err(Error::InvalidTrajectory(
                "temporal-difference operator needs at least one transition".into(),
            ));
        }
        Ok(Self { discounts })
    }

    pub fn from_trajectory(traj: &Trajectory) -> Self {
        Self {
            discounts: traj.discounts().clone(),
        }
    }

    pub fn n_transitions(&self) -> usize {
        self.discounts.len()
    }

    pub fn n_states(&self) -> usize {
        self.discounts.len() + 1
    }

    pub fn discounts(&self) -> &DVector<f64> {
        &self.discounts
    }

    /// H v: maps n state values to n−1 temporal differences.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let m = self.n_transitions();
        debug_assert_eq!(v.len(), self.n_states());
        DVector::from_fn(m, |i, _| v[i] - self.discounts[i] * v[i + 1])
    }

    /// Hᵀ u: adjoint of [`Self::apply`].
    pub fn apply_transpose(&self, u: &DVector<f64>) -> DVector<f64> {
        let n = self.n_states();
        debug_assert_eq!(u.len(), self.n_transitions());
        DVector::from_fn(n, |j, _| {
            let mut s = 0.0;
            if j < n - 1 {
                s += u[j];
            }
            if j > 0 {
                s -= self.discounts[j - 1] * u[j - 1];
            }
            s
        })
    }

    /// H A Hᵀ for a symmetric n×n matrix A, via the entrywise identity
    /// aᵢⱼ − γᵢaᵢ₊₁,ⱼ − γⱼaᵢ,ⱼ₊₁ + γᵢγⱼaᵢ₊₁,ⱼ₊₁.
    pub fn project(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.n_transitions();
        debug_assert_eq!(a.nrows(), self.n_states());
        debug_assert_eq!(a.ncols(), self.n_states());
        let g = &self.discounts;
        let mut out = DMatrix::zeros(m, m);
        for j in 0..m {
            for i in j..m {
                let v = a[(i, j)] - g[i] * a[(i + 1, j)] - g[j] * a[(i, j + 1)]
                    + g[i] * g[j] * a[(i + 1, j + 1)];
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Hᵀ A H for a symmetric (n−1)×(n−1) matrix A.
    pub fn pullback(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.n_transitions();
        let n = self.n_states();
        debug_assert_eq!(a.nrows(), m);
        let g = &self.discounts;
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                let mut v = 0.0;
                if i < m && j < m {
                    v += a[(i, j)];
                }
                if i > 0 && j < m {
                    v -= g[i - 1] * a[(i - 1, j)];
                }
                if i < m && j > 0 {
                    v -= g[j - 1] * a[(i, j - 1)];
                }
                if i > 0 && j > 0 {
                    v += g[i - 1] * g[j - 1] * a[(i - 1, j - 1)];
                }
                out[(i, j)] = v;
            }
        }
        out
    }

    /// Closed-form tridiagonal HHᵀ: diagonal 1+γᵢ², off-diagonal −γᵢ.
    pub fn gram_tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.n_transitions();
        let diag = (0..m).map(|i| 1.0 + self.discounts[i].powi(2)).collect();
        let off = (0..m.saturating_sub(1))
            .map(|i| -self.discounts[i])
            .collect();
        (diag, off)
    }

    /// Dense H. Test-oracle use only.
    pub fn dense(&self) -> DMatrix<f64> {
        let m = self.n_transitions();
        let mut h = DMatrix::zeros(m, m + 1);
        for i in 0..m {
            h[(i, i)] = 1.0;
            h[(i, i + 1)] = -self.discounts[i];
        }
        h
    }
}

/// Covariance Q = HKHᵀ + σ₀²HHᵀ of the observed rewards.
pub fn reward_covariance(kernel_gram: &DMatrix<f64>, td: &TdOperator, noise: f64) -> DMatrix<f64> {
    let mut q = td.project(kernel_gram);
    let (diag, off) = td.gram_tridiagonal();
    let m = td.n_transitions();
    for i in 0..m {
        q[(i, i)] += noise * diag[i];
        if i + 1 < m {
            q[(i, i + 1)] += noise * off[i];
            q[(i + 1, i)] += noise * off[i];
        }
    }
    q
}

/// A fitted full-rank GPTD model. Immutable after fit; predictions are O(n).
#[derive(Debug, Clone)]
pub struct ExactPosterior {
    trajectory: Trajectory,
    spec: CovarianceSpec,
    params: HyperParams,
    td: TdOperator,
    /// Lower Cholesky factor of Q.
    chol_q: DMatrix<f64>,
    /// Q⁻¹ r.
    weights: DVector<f64>,
    /// Hᵀ Q⁻¹ r, so the posterior mean is k(x*)ᵀ·alpha.
    alpha: DVector<f64>,
}

/// Factorize Q once and cache the weight vector; O((n−1)³) fit, O(n) mean
/// and O(n²) variance per query afterwards.
pub fn fit_exact(
    traj: &Trajectory,
    spec: &CovarianceSpec,
    params: &HyperParams,
) -> Result<ExactPosterior> {
    params.validate_for(spec)?;
    if traj.dim() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            context: "fit_exact trajectory dimension",
            expected: spec.input_dim,
            got: traj.dim(),
        });
    }
    let td = TdOperator::from_trajectory(traj);
    let k = gram_symmetric(spec, params, traj.states(), false)?.matrix;
    let q = reward_covariance(&k, &td, params.noise());
    let chol_q = linalg::cholesky_lower(&q)?;
    let weights = linalg::chol_solve(&chol_q, traj.rewards());
    let alpha = td.apply_transpose(&weights);
    Ok(ExactPosterior {
        trajectory: traj.clone(),
        spec: *spec,
        params: params.clone(),
        td,
        chol_q,
        weights,
        alpha,
    })
}

impl ExactPosterior {
    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn spec(&self) -> &CovarianceSpec {
        &self.spec
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn chol_q(&self) -> &DMatrix<f64> {
        &self.chol_q
    }

    /// Covariance vector k(x*) against all training states.
    fn kernel_vector(&self, x: &[f64]) -> Result<DVector<f64>> {
        let n = self.trajectory.n_states();
        let mut k = DVector::zeros(n);
        for i in 0..n {
            k[i] = eval_kernel(&self.spec, &self.params, x, &self.trajectory.state(i))?;
        }
        Ok(k)
    }

    /// Posterior mean k(x*)ᵀHᵀQ⁻¹r.
    pub fn predict_mean(&self, x: &[f64]) -> Result<f64> {
        let k = self.kernel_vector(x)?;
        Ok(k.dot(&self.alpha))
    }

    /// Posterior variance k* − k(x*)ᵀHᵀQ⁻¹Hk(x*), via one triangular solve.
    /// Tiny negative values from cancellation are clamped to 0; anything below
    /// −1e-8·v₀ is a numerical failure.
    pub fn predict_variance(&self, x: &[f64]) -> Result<f64> {
        let k = self.kernel_vector(x)?;
        let k_star = eval_kernel(&self.spec, &self.params, x, x)?;
        let mut u = self.td.apply(&k);
        linalg::solve_lower_inplace(&self.chol_q, &mut u);
        let var = k_star - u.norm_squared();
        let tol = 1e-8 * self.params.v0();
        if var < -tol {
            return Err(Error::NegativeVariance {
                value: var,
                tolerance: tol,
            });
        }
        Ok(var.max(0.0))
    }

    /// Mean and variance in one pass.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        Ok((self.predict_mean(x)?, self.predict_variance(x)?))
    }
}
