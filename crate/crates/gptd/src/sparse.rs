//! Sparse inference via subset of regressors.
//!
//! A subset {x̃₁,…,x̃_m} of the training states induces the rank-m kernel
//! approximation k̃(x,x') = k_m(x)ᵀK_mm⁻¹k_m(x'). Pushed through the GPTD
//! posterior and rearranged with the SMW identity, the mean becomes
//!
//!   μ(x*) ≈ k_m(x*)ᵀ(GᵀWG + σ₀²K_mm)⁻¹GᵀWr,   G = HK_nm,  W = (HHᵀ)⁻¹,
//!
//! which costs O(m²n) to fit and O(m) per mean query. The plain SR variance
//! σ₀²k_mᵀ(GᵀWG + σ₀²K_mm)⁻¹k_m collapses to zero far from the subset; the
//! projected-process correction adds k* − k_mᵀK_mm⁻¹k_m to restore honest
//! uncertainty there.
//!
//! Subsets are chosen by greedy pivoted incomplete Cholesky: each step picks
//! the state whose feature-space distance from the span of the current subset
//! is largest, working column-on-demand so the full Gram matrix is never
//! formed.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::TdOperator;
use crate::kernel::{eval_kernel, gram, CovarianceSpec, HyperParams};
use crate::linalg::{self, TridiagFactor};
use crate::trajectory::Trajectory;

/// Why subset selection stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// The largest residual diagonal fell below the tolerance.
    Tolerance,
    /// The maximum subset size was reached.
    MaxSize,
}

/// Result of incomplete-Cholesky subset selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsetSelection {
    /// Selected state indices, in pivot order; distinct by construction.
    pub indices: Vec<usize>,
    /// Pivot residual at each selection step; non-increasing.
    pub residual_trace: Vec<f64>,
    pub stop_reason: StopReason,
}

impl SubsetSelection {
    pub fn size(&self) -> usize {
        self.indices.len()
    }

    /// Use every point, in order. Makes SR inference exact.
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
            residual_trace: Vec::new(),
            stop_reason: StopReason::MaxSize,
        }
    }
}

/// Greedy pivoted incomplete Cholesky on the kernel matrix of `points`,
/// column-on-demand. The first pivot is always taken; selection then stops
/// once the largest remaining residual diagonal drops below `tol` or the
/// subset reaches `max_m`. Ties break toward the lowest index.
pub fn icd_select(
    spec: &CovarianceSpec,
    params: &HyperParams,
    points: &DMatrix<f64>,
    tol: f64,
    max_m: usize,
) -> Result<SubsetSelection> {
    params.validate_for(spec)?;
    if points.ncols() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            context: "icd_select points",
            expected: spec.input_dim,
            got: points.ncols(),
        });
    }
    let n = points.nrows();
    let max_m = max_m.min(n);
    if n == 0 || max_m == 0 {
        return Ok(SubsetSelection {
            indices: Vec::new(),
            residual_trace: Vec::new(),
            stop_reason: StopReason::MaxSize,
        });
    }

    let row = |i: usize| -> Vec<f64> { points.row(i).iter().copied().collect() };
    // Diagonal of K is constant v₀ + b for this kernel family.
    let mut residual = vec![params.v0() + params.b(); n];
    let mut selected = vec![false; n];
    // Partial factor: column t holds the t-th selected column of L.
    let mut factor: Vec<Vec<f64>> = Vec::new();
    let mut indices = Vec::new();
    let mut trace = Vec::new();

    loop {
        // Pivot = argmax residual over unselected, lowest index on ties.
        let mut pivot = usize::MAX;
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            if !selected[i] && residual[i] > best {
                best = residual[i];
                pivot = i;
            }
        }
        if pivot == usize::MAX {
            break;
        }
        // After the unconditional first pivot, honor the tolerance.
        if !indices.is_empty() && best < tol {
            return Ok(SubsetSelection {
                indices,
                residual_trace: trace,
                stop_reason: StopReason::Tolerance,
            });
        }
        if best <= 0.0 {
            // Degenerate remainder: nothing left to explain.
            return Ok(SubsetSelection {
                indices,
                residual_trace: trace,
                stop_reason: StopReason::Tolerance,
            });
        }

        let piv_row = row(pivot);
        let root = best.sqrt();
        let mut col = vec![0.0; n];
        for i in 0..n {
            if selected[i] {
                continue;
            }
            let mut v = eval_kernel(spec, params, &row(i), &piv_row)?;
            for prev in &factor {
                v -= prev[i] * prev[pivot];
            }
            col[i] = v / root;
        }
        for i in 0..n {
            if !selected[i] {
                residual[i] = (residual[i] - col[i] * col[i]).max(0.0);
            }
        }
        selected[pivot] = true;
        indices.push(pivot);
        trace.push(best);
        factor.push(col);

        if indices.len() == max_m {
            return Ok(SubsetSelection {
                indices,
                residual_trace: trace,
                stop_reason: StopReason::MaxSize,
            });
        }
    }

    Ok(SubsetSelection {
        indices,
        residual_trace: trace,
        stop_reason: StopReason::Tolerance,
    })
}

/// The rank-m approximate Gram K̃ = K_nm·K_mm⁻¹·K_nmᵀ implied by a subset,
/// returned as its low-rank factor L (K̃ = LLᵀ). Test and profiling use.
pub fn icd_low_rank_factor(
    spec: &CovarianceSpec,
    params: &HyperParams,
    points: &DMatrix<f64>,
    subset: &SubsetSelection,
) -> Result<DMatrix<f64>> {
    let n = points.nrows();
    let m = subset.size();
    let sub_states = subset_states(points, subset);
    let knm = gram(spec, params, points, &sub_states)?;
    let kmm = gram(spec, params, &sub_states, &sub_states)?;
    let mut kmm_j = kmm;
    let jitter = 1e-10 * params.v0();
    for i in 0..m {
        kmm_j[(i, i)] += jitter;
    }
    let chol = linalg::cholesky_lower(&kmm_j)?;
    // L = K_nm·L_mm⁻ᵀ so that LLᵀ = K_nm·K_mm⁻¹·K_nmᵀ.
    let mut out = DMatrix::zeros(n, m);
    for i in 0..n {
        let mut r = knm.row(i).transpose();
        linalg::solve_lower_inplace(&chol, &mut r);
        out.set_row(i, &r.transpose());
    }
    Ok(out)
}

fn subset_states(points: &DMatrix<f64>, subset: &SubsetSelection) -> DMatrix<f64> {
    DMatrix::from_fn(subset.size(), points.ncols(), |i, j| {
        points[(subset.indices[i], j)]
    })
}

/// An SR-approximated GPTD posterior over a selected subset.
///
/// The inner system (GᵀWG + σ₀²K_mm) is held in coordinates whitened by the
/// Cholesky factor L of K_mm: Σ = L⁻¹(GᵀWG)L⁻ᵀ + σ₀²I. This keeps the fit
/// well-conditioned even when the subset approaches the full (rank-deficient)
/// training set, while representing exactly the same posterior.
#[derive(Debug, Clone)]
pub struct SparsePosterior {
    spec: CovarianceSpec,
    params: HyperParams,
    subset_states: DMatrix<f64>,
    /// Lower Cholesky factor of the whitened inner matrix Σ (after jitter).
    chol_inner: DMatrix<f64>,
    /// Lower Cholesky factor L of K_mm (after jitter).
    chol_kmm: DMatrix<f64>,
    /// Whitened weights Σ⁻¹L⁻¹GᵀWr; the mean is (L⁻¹k_m)ᵀ·weights.
    sr_weights: DVector<f64>,
}

/// Fit the subset-of-regressors posterior. W = (HHᵀ)⁻¹ is applied through
/// tridiagonal LDLᵀ solves, never formed densely; cost O(m²n), storage O(m²).
pub fn fit_sr(
    traj: &Trajectory,
    spec: &CovarianceSpec,
    params: &HyperParams,
    subset: &SubsetSelection,
) -> Result<SparsePosterior> {
    params.validate_for(spec)?;
    if subset.indices.is_empty() {
        return Err(Error::InvalidParameter {
            name: "subset".into(),
            reason: "must contain at least one state".into(),
        });
    }
    if let Some(&bad) = subset.indices.iter().find(|&&i| i >= traj.n_states()) {
        return Err(Error::InvalidParameter {
            name: "subset".into(),
            reason: format!("index {bad} out of range (n = {})", traj.n_states()),
        });
    }
    let m = subset.size();
    let sub = subset_states(traj.states(), subset);
    let knm = gram(spec, params, traj.states(), &sub)?;
    let mut kmm = gram(spec, params, &sub, &sub)?;
    let kmm_jitter = 1e-10 * params.v0();
    for i in 0..m {
        kmm[(i, i)] += kmm_jitter;
    }
    let chol_kmm = linalg::cholesky_lower(&kmm)?;

    let td = TdOperator::from_trajectory(traj);
    let nt = td.n_transitions();
    // G = H·K_nm, row-wise differences.
    let g = DMatrix::from_fn(nt, m, |i, j| {
        knm[(i, j)] - td.discounts()[i] * knm[(i + 1, j)]
    });
    let (diag, off) = td.gram_tridiagonal();
    let w_op = TridiagFactor::new(&diag, &off)?;
    let wg = w_op.solve_matrix(&g);
    let wr = w_op.solve(traj.rewards());

    // Whiten: Σ = L⁻¹(GᵀWG)L⁻ᵀ + σ₀²I.
    let f = g.transpose() * &wg;
    let mut half = f;
    for mut col in half.column_iter_mut() {
        let mut v = col.clone_owned();
        linalg::solve_lower_inplace(&chol_kmm, &mut v);
        col.copy_from(&v);
    }
    let mut inner = DMatrix::zeros(m, m);
    // Second solve applied to the transpose, then symmetrize.
    let half_t = half.transpose();
    for (j, col) in half_t.column_iter().enumerate() {
        let mut v = col.clone_owned();
        linalg::solve_lower_inplace(&chol_kmm, &mut v);
        inner.column_mut(j).copy_from(&v);
    }
    for j in 0..m {
        for i in (j + 1)..m {
            let s = 0.5 * (inner[(i, j)] + inner[(j, i)]);
            inner[(i, j)] = s;
            inner[(j, i)] = s;
        }
    }
    let noise = params.noise();
    for i in 0..m {
        inner[(i, i)] += noise;
    }
    let jitter = 1e-10 * inner.trace() / m as f64;
    for i in 0..m {
        inner[(i, i)] += jitter;
    }
    let chol_inner = linalg::cholesky_lower(&inner)?;

    let mut rhs = g.transpose() * &wr;
    linalg::solve_lower_inplace(&chol_kmm, &mut rhs);
    let sr_weights = linalg::chol_solve(&chol_inner, &rhs);

    Ok(SparsePosterior {
        spec: *spec,
        params: params.clone(),
        subset_states: sub,
        chol_inner,
        chol_kmm,
        sr_weights,
    })
}

impl SparsePosterior {
    pub fn subset_size(&self) -> usize {
        self.subset_states.nrows()
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    /// L⁻¹k_m(x*): the whitened covariance against the subset.
    fn whitened_kernel_vector(&self, x: &[f64]) -> Result<DVector<f64>> {
        let m = self.subset_size();
        let mut k = DVector::zeros(m);
        for i in 0..m {
            let xi: Vec<f64> = self.subset_states.row(i).iter().copied().collect();
            k[i] = eval_kernel(&self.spec, &self.params, x, &xi)?;
        }
        linalg::solve_lower_inplace(&self.chol_kmm, &mut k);
        Ok(k)
    }

    /// SR posterior mean k_m(x*)ᵀ(GᵀWG + σ₀²K_mm)⁻¹GᵀWr; O(m) per query
    /// beyond the whitening solve.
    pub fn predict_mean(&self, x: &[f64]) -> Result<f64> {
        Ok(self.whitened_kernel_vector(x)?.dot(&self.sr_weights))
    }

    /// SR predictive variance. Uncorrected: σ₀²·k_mᵀ(GᵀWG+σ₀²K_mm)⁻¹k_m,
    /// which underestimates far from the subset. With `corrected`, the
    /// projected-process term k* − k_mᵀK_mm⁻¹k_m is added.
    pub fn predict_variance(&self, x: &[f64], corrected: bool) -> Result<f64> {
        let z = self.whitened_kernel_vector(x)?;
        let mut u = z.clone();
        linalg::solve_lower_inplace(&self.chol_inner, &mut u);
        let mut var = self.params.noise() * u.norm_squared();
        if corrected {
            let k_star = eval_kernel(&self.spec, &self.params, x, x)?;
            var += k_star - z.norm_squared();
        }
        let tol = 1e-8 * self.params.v0();
        if var < -tol {
            return Err(Error::NegativeVariance {
                value: var,
                tolerance: tol,
            });
        }
        Ok(var.max(0.0))
    }
}
