//! Squared-exponential covariance in three parameterizations.
//!
//! All variants share the form k(x, x') = v₀·exp(−½ δᵀΩδ) + b with δ = x − x',
//! differing only in the structure of Ω:
//!
//! - isotropic: Ω = h·I (one bandwidth for every state variable)
//! - axis-aligned ARD: Ω = diag(a₁, …, a_D) (per-dimension relevance weights)
//! - factor analysis: Ω = M·Mᵀ + diag(a₁, …, a_D) (relevant linear subspaces)
//!
//! The a_d act as precisions: a large value means small variations along that
//! coordinate matter, a value near zero means the coordinate is irrelevant.
//! Positivity-constrained hyperparameters (v₀, b, σ₀², h, a_d) live in log
//! space; factor-matrix entries are unconstrained.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structural choice of Ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovarianceVariant {
    Isotropic,
    ArdDiagonal,
    FactorAnalysis,
}

/// Covariance structure: variant, input dimension, and (for factor analysis)
/// the number of learned directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub variant: CovarianceVariant,
    pub input_dim: usize,
    /// Present iff `variant` is `FactorAnalysis`; must satisfy 0 < k < D.
    pub factor_rank: Option<usize>,
}

impl CovarianceSpec {
    pub fn isotropic(input_dim: usize) -> Result<Self> {
        Self::new(CovarianceVariant::Isotropic, input_dim, None)
    }

    pub fn ard(input_dim: usize) -> Result<Self> {
        Self::new(CovarianceVariant::ArdDiagonal, input_dim, None)
    }

    pub fn factor_analysis(input_dim: usize, factor_rank: usize) -> Result<Self> {
        Self::new(
            CovarianceVariant::FactorAnalysis,
            input_dim,
            Some(factor_rank),
        )
    }

    pub fn new(
        variant: CovarianceVariant,
        input_dim: usize,
        factor_rank: Option<usize>,
    ) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidParameter {
                name: "input_dim".into(),
                reason: "must be at least 1".into(),
            });
        }
        match (variant, factor_rank) {
            (CovarianceVariant::FactorAnalysis, Some(k)) if k == 0 || k >= input_dim => {
                return Err(Error::InvalidParameter {
                    name: "factor_rank".into(),
                    reason: format!("must satisfy 0 < k < D = {input_dim}, got {k}"),
                });
            }
            (CovarianceVariant::FactorAnalysis, None) => {
                return Err(Error::InvalidParameter {
                    name: "factor_rank".into(),
                    reason: "required for the factor-analysis variant".into(),
                });
            }
            (CovarianceVariant::Isotropic | CovarianceVariant::ArdDiagonal, Some(_)) => {
                return Err(Error::InvalidParameter {
                    name: "factor_rank".into(),
                    reason: "only meaningful for the factor-analysis variant".into(),
                });
            }
            _ => {}
        }
        Ok(Self {
            variant,
            input_dim,
            factor_rank,
        })
    }

    /// Number of optimizable scalar hyperparameters, including the noise σ₀².
    pub fn n_params(&self) -> usize {
        3 + match self.variant {
            CovarianceVariant::Isotropic => 1,
            CovarianceVariant::ArdDiagonal => self.input_dim,
            CovarianceVariant::FactorAnalysis => {
                self.input_dim + self.input_dim * self.factor_rank.unwrap()
            }
        }
    }
}

/// Variant-specific hyperparameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VariantParams {
    Isotropic { log_h: f64 },
    ArdDiagonal { log_a: Vec<f64> },
    FactorAnalysis { log_a: Vec<f64>, factors: DMatrix<f64> },
}

/// Full hyperparameter vector θ. Positivity-constrained entries are stored in
/// log space; the D×k factor matrix is raw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub log_v0: f64,
    pub log_b: f64,
    /// log σ₀².
    pub log_noise: f64,
    pub variant: VariantParams,
}

impl HyperParams {
    /// Isotropic parameters in natural space.
    pub fn isotropic(v0: f64, b: f64, noise: f64, h: f64) -> Result<Self> {
        let hp = Self {
            log_v0: ln_checked("v0", v0)?,
            log_b: ln_checked("b", b)?,
            log_noise: ln_checked("noise", noise)?,
            variant: VariantParams::Isotropic {
                log_h: ln_checked("h", h)?,
            },
        };
        Ok(hp)
    }

    /// Axis-aligned ARD parameters in natural space.
    pub fn ard(v0: f64, b: f64, noise: f64, a: &[f64]) -> Result<Self> {
        let log_a = a
            .iter()
            .map(|&ai| ln_checked("a", ai))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            log_v0: ln_checked("v0", v0)?,
            log_b: ln_checked("b", b)?,
            log_noise: ln_checked("noise", noise)?,
            variant: VariantParams::ArdDiagonal { log_a },
        })
    }

    /// Factor-analysis parameters in natural space; `factors` is the raw D×k matrix.
    pub fn factor_analysis(
        v0: f64,
        b: f64,
        noise: f64,
        a: &[f64],
        factors: DMatrix<f64>,
    ) -> Result<Self> {
        if factors.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "factors".into(),
                reason: "entries must be finite".into(),
            });
        }
        let log_a = a
            .iter()
            .map(|&ai| ln_checked("a", ai))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            log_v0: ln_checked("v0", v0)?,
            log_b: ln_checked("b", b)?,
            log_noise: ln_checked("noise", noise)?,
            variant: VariantParams::FactorAnalysis { log_a, factors },
        })
    }

    pub fn v0(&self) -> f64 {
        self.log_v0.exp()
    }

    pub fn b(&self) -> f64 {
        self.log_b.exp()
    }

    /// σ₀².
    pub fn noise(&self) -> f64 {
        self.log_noise.exp()
    }

    /// Check that the variant block matches `spec` and all entries are finite.
    pub fn validate_for(&self, spec: &CovarianceSpec) -> Result<()> {
        let finite = self.log_v0.is_finite() && self.log_b.is_finite() && self.log_noise.is_finite();
        if !finite {
            return Err(Error::InvalidParameter {
                name: "theta".into(),
                reason: "log-space entries must be finite".into(),
            });
        }
        let ok = match (&self.variant, spec.variant) {
            (VariantParams::Isotropic { log_h }, CovarianceVariant::Isotropic) => {
                log_h.is_finite()
            }
            (VariantParams::ArdDiagonal { log_a }, CovarianceVariant::ArdDiagonal) => {
                log_a.len() == spec.input_dim && log_a.iter().all(|v| v.is_finite())
            }
            (
                VariantParams::FactorAnalysis { log_a, factors },
                CovarianceVariant::FactorAnalysis,
            ) => {
                log_a.len() == spec.input_dim
                    && log_a.iter().all(|v| v.is_finite())
                    && factors.nrows() == spec.input_dim
                    && factors.ncols() == spec.factor_rank.unwrap()
                    && factors.iter().all(|v| v.is_finite())
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "theta".into(),
                reason: "variant block does not match the covariance spec".into(),
            })
        }
    }

    /// Pack into the optimizer's flat coordinate vector:
    /// [log v₀, log b, log σ₀², variant block…] with factor entries column-major.
    pub fn to_vector(&self) -> DVector<f64> {
        let mut v = vec![self.log_v0, self.log_b, self.log_noise];
        match &self.variant {
            VariantParams::Isotropic { log_h } => v.push(*log_h),
            VariantParams::ArdDiagonal { log_a } => v.extend_from_slice(log_a),
            VariantParams::FactorAnalysis { log_a, factors } => {
                v.extend_from_slice(log_a);
                v.extend_from_slice(factors.as_slice());
            }
        }
        DVector::from_vec(v)
    }

    /// Inverse of [`Self::to_vector`] for a given spec.
    pub fn from_vector(spec: &CovarianceSpec, v: &DVector<f64>) -> Result<Self> {
        if v.len() != spec.n_params() {
            return Err(Error::DimensionMismatch {
                context: "hyperparameter vector",
                expected: spec.n_params(),
                got: v.len(),
            });
        }
        let d = spec.input_dim;
        let variant = match spec.variant {
            CovarianceVariant::Isotropic => VariantParams::Isotropic { log_h: v[3] },
            CovarianceVariant::ArdDiagonal => VariantParams::ArdDiagonal {
                log_a: v.as_slice()[3..3 + d].to_vec(),
            },
            CovarianceVariant::FactorAnalysis => {
                let k = spec.factor_rank.unwrap();
                VariantParams::FactorAnalysis {
                    log_a: v.as_slice()[3..3 + d].to_vec(),
                    factors: DMatrix::from_column_slice(d, k, &v.as_slice()[3 + d..3 + d + d * k]),
                }
            }
        };
        let hp = Self {
            log_v0: v[0],
            log_b: v[1],
            log_noise: v[2],
            variant,
        };
        hp.validate_for(spec)?;
        Ok(hp)
    }

    /// ARD weights a₁..a_D in natural space (also defined for the isotropic
    /// variant, where every weight equals h).
    pub fn relevance_weights(&self, input_dim: usize) -> Vec<f64> {
        match &self.variant {
            VariantParams::Isotropic { log_h } => vec![log_h.exp(); input_dim],
            VariantParams::ArdDiagonal { log_a } | VariantParams::FactorAnalysis { log_a, .. } => {
                log_a.iter().map(|v| v.exp()).collect()
            }
        }
    }
}

fn ln_checked(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value.ln())
    } else {
        Err(Error::InvalidParameter {
            name: name.into(),
            reason: format!("must be strictly positive and finite, got {value}"),
        })
    }
}

/// Identifier for one scalar kernel hyperparameter (noise excluded: σ₀²
/// enters the reward covariance, not K).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelParam {
    LogV0,
    LogB,
    LogH,
    LogA(usize),
    /// Raw factor-matrix entry m[row, col].
    Factor(usize, usize),
}

impl std::fmt::Display for KernelParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelParam::LogV0 => write!(f, "log_v0"),
            KernelParam::LogB => write!(f, "log_b"),
            KernelParam::LogH => write!(f, "log_h"),
            KernelParam::LogA(d) => write!(f, "log_a[{d}]"),
            KernelParam::Factor(d, j) => write!(f, "m[{d},{j}]"),
        }
    }
}

/// A symmetric Gram matrix together with the diagonal jitter that was applied.
#[derive(Debug, Clone)]
pub struct GramView {
    pub matrix: DMatrix<f64>,
    pub jitter_applied: f64,
}

/// Sum of `n` terms; compensated (Kahan) accumulation for long sums, where
/// cancellation in large-D distance accumulation becomes visible.
#[inline]
fn sum_terms(n: usize, mut term: impl FnMut(usize) -> f64) -> f64 {
    if n > 32 {
        let mut s = 0.0;
        let mut c = 0.0;
        for i in 0..n {
            let y = term(i) - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
        s
    } else {
        let mut s = 0.0;
        for i in 0..n {
            s += term(i);
        }
        s
    }
}

/// δᵀΩδ for the given variant.
fn omega_quadratic(spec: &CovarianceSpec, params: &HyperParams, x: &[f64], y: &[f64]) -> f64 {
    let d = spec.input_dim;
    match &params.variant {
        VariantParams::Isotropic { log_h } => {
            let h = log_h.exp();
            sum_terms(d, |i| {
                let diff = x[i] - y[i];
                h * diff * diff
            })
        }
        VariantParams::ArdDiagonal { log_a } => sum_terms(d, |i| {
            let diff = x[i] - y[i];
            log_a[i].exp() * diff * diff
        }),
        VariantParams::FactorAnalysis { log_a, factors } => {
            let diag = sum_terms(d, |i| {
                let diff = x[i] - y[i];
                log_a[i].exp() * diff * diff
            });
            let k = factors.ncols();
            let proj = sum_terms(k, |j| {
                let col = factors.column(j);
                let p = sum_terms(d, |i| col[i] * (x[i] - y[i]));
                p * p
            });
            diag + proj
        }
    }
}

/// Evaluate k(x, x') = v₀·exp(−½ δᵀΩδ) + b.
pub fn eval_kernel(
    spec: &CovarianceSpec,
    params: &HyperParams,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    params.validate_for(spec)?;
    if x.len() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            context: "eval_kernel lhs",
            expected: spec.input_dim,
            got: x.len(),
        });
    }
    if y.len() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            context: "eval_kernel rhs",
            expected: spec.input_dim,
            got: y.len(),
        });
    }
    let e = omega_quadratic(spec, params, x, y);
    Ok(params.v0() * (-0.5 * e).exp() + params.b())
}

fn row_of(x: &DMatrix<f64>, i: usize, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(x.row(i).iter().copied());
}

/// Cross-covariance matrix between two point sets (rows are points).
pub fn gram(
    spec: &CovarianceSpec,
    params: &HyperParams,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    params.validate_for(spec)?;
    for (name, m) in [("lhs", x), ("rhs", y)] {
        if m.ncols() != spec.input_dim {
            return Err(Error::DimensionMismatch {
                context: if name == "lhs" { "gram lhs" } else { "gram rhs" },
                expected: spec.input_dim,
                got: m.ncols(),
            });
        }
    }
    let (n, m) = (x.nrows(), y.nrows());
    let v0 = params.v0();
    let b = params.b();
    let mut out = DMatrix::zeros(n, m);
    let mut xi = Vec::with_capacity(spec.input_dim);
    let mut yj = Vec::with_capacity(spec.input_dim);
    for j in 0..m {
        row_of(y, j, &mut yj);
        for i in 0..n {
            row_of(x, i, &mut xi);
            let e = omega_quadratic(spec, params, &xi, &yj);
            out[(i, j)] = v0 * (-0.5 * e).exp() + b;
        }
    }
    Ok(out)
}

/// Symmetric Gram matrix over one point set. Jitter (1e-10·v₀ on the
/// diagonal) is added only when requested; consumers that go on to factorize
/// rank-deficient K should request it.
pub fn gram_symmetric(
    spec: &CovarianceSpec,
    params: &HyperParams,
    x: &DMatrix<f64>,
    with_jitter: bool,
) -> Result<GramView> {
    params.validate_for(spec)?;
    if x.ncols() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            context: "gram_symmetric points",
            expected: spec.input_dim,
            got: x.ncols(),
        });
    }
    let n = x.nrows();
    let v0 = params.v0();
    let b = params.b();
    let jitter = if with_jitter { 1e-10 * v0 } else { 0.0 };
    let mut out = DMatrix::zeros(n, n);
    let mut xi = Vec::with_capacity(spec.input_dim);
    let mut xj = Vec::with_capacity(spec.input_dim);
    for i in 0..n {
        out[(i, i)] = v0 + b + jitter;
        row_of(x, i, &mut xi);
        for j in 0..i {
            row_of(x, j, &mut xj);
            let e = omega_quadratic(spec, params, &xi, &xj);
            let k = v0 * (-0.5 * e).exp() + b;
            out[(i, j)] = k;
            out[(j, i)] = k;
        }
    }
    Ok(GramView {
        matrix: out,
        jitter_applied: jitter,
    })
}

/// Analytic ∂K/∂θᵢ over one point set, one matrix per scalar kernel
/// hyperparameter, in the packing order of [`HyperParams::to_vector`] with the
/// noise entry skipped. Log-space parameters return θᵢ·∂K/∂θᵢ; raw
/// factor-matrix entries return the plain derivative.
pub fn kernel_param_gradients(
    spec: &CovarianceSpec,
    params: &HyperParams,
    x: &DMatrix<f64>,
) -> Result<Vec<(KernelParam, DMatrix<f64>)>> {
    params.validate_for(spec)?;
    if x.ncols() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            context: "kernel_param_gradients points",
            expected: spec.input_dim,
            got: x.ncols(),
        });
    }
    if x.nrows() == 0 {
        return Err(Error::InvalidParameter {
            name: "points".into(),
            reason: "must be nonempty".into(),
        });
    }
    let n = x.nrows();
    let d = spec.input_dim;
    let v0 = params.v0();
    let b = params.b();

    // Correlation part C with c_ii = 1 (bias excluded).
    let mut corr = DMatrix::zeros(n, n);
    let mut xi = Vec::with_capacity(d);
    let mut xj = Vec::with_capacity(d);
    for i in 0..n {
        corr[(i, i)] = 1.0;
        row_of(x, i, &mut xi);
        for j in 0..i {
            row_of(x, j, &mut xj);
            let e = omega_quadratic(spec, params, &xi, &xj);
            let c = (-0.5 * e).exp();
            corr[(i, j)] = c;
            corr[(j, i)] = c;
        }
    }

    let mut grads = Vec::with_capacity(spec.n_params() - 1);
    grads.push((KernelParam::LogV0, &corr * v0));
    grads.push((KernelParam::LogB, DMatrix::from_element(n, n, b)));

    let sqdiff = |i: usize, j: usize, nu: usize| {
        let diff = x[(i, nu)] - x[(j, nu)];
        diff * diff
    };

    match &params.variant {
        VariantParams::Isotropic { log_h } => {
            let h = log_h.exp();
            let m = DMatrix::from_fn(n, n, |i, j| {
                let total = sum_terms(d, |nu| sqdiff(i, j, nu));
                -0.5 * h * v0 * corr[(i, j)] * total
            });
            grads.push((KernelParam::LogH, m));
        }
        VariantParams::ArdDiagonal { log_a } => {
            for nu in 0..d {
                let a = log_a[nu].exp();
                let m =
                    DMatrix::from_fn(n, n, |i, j| -0.5 * a * v0 * corr[(i, j)] * sqdiff(i, j, nu));
                grads.push((KernelParam::LogA(nu), m));
            }
        }
        VariantParams::FactorAnalysis { log_a, factors } => {
            for nu in 0..d {
                let a = log_a[nu].exp();
                let m =
                    DMatrix::from_fn(n, n, |i, j| -0.5 * a * v0 * corr[(i, j)] * sqdiff(i, j, nu));
                grads.push((KernelParam::LogA(nu), m));
            }
            // ∂k/∂m_{dj} = −v₀ · c(x,x') · (Mᵀδ)_j · δ_d, derived from
            // δᵀMMᵀδ = Σ_j (Mᵀδ)_j²; raw space, so no extra factor.
            let k = factors.ncols();
            for j in 0..k {
                let col = factors.column(j).clone_owned();
                let mut proj = DMatrix::zeros(n, n);
                for q in 0..n {
                    for p in 0..n {
                        proj[(p, q)] = sum_terms(d, |nu| col[nu] * (x[(p, nu)] - x[(q, nu)]));
                    }
                }
                for row in 0..d {
                    let m = DMatrix::from_fn(n, n, |p, q| {
                        -v0 * corr[(p, q)] * proj[(p, q)] * (x[(p, row)] - x[(q, row)])
                    });
                    grads.push((KernelParam::Factor(row, j), m));
                }
            }
        }
    }
    Ok(grads)
}

/// The Ω matrix itself (D×D).
pub fn omega_matrix(spec: &CovarianceSpec, params: &HyperParams) -> DMatrix<f64> {
    let d = spec.input_dim;
    match &params.variant {
        VariantParams::Isotropic { log_h } => DMatrix::identity(d, d) * log_h.exp(),
        VariantParams::ArdDiagonal { log_a } => {
            DMatrix::from_diagonal(&DVector::from_iterator(d, log_a.iter().map(|v| v.exp())))
        }
        VariantParams::FactorAnalysis { log_a, factors } => {
            let mut omega = factors * factors.transpose();
            for i in 0..d {
                omega[(i, i)] += log_a[i].exp();
            }
            omega
        }
    }
}

/// Orthonormal directions and scales of Ω, descending. For the diagonal
/// variants this is exact (axis directions ordered by scale); for factor
/// analysis it is the symmetric eigendecomposition of MMᵀ + diag(a).
pub fn omega_eigendecomposition(
    spec: &CovarianceSpec,
    params: &HyperParams,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    params.validate_for(spec)?;
    let d = spec.input_dim;
    match &params.variant {
        VariantParams::Isotropic { log_h } => Ok((
            DMatrix::identity(d, d),
            DVector::from_element(d, log_h.exp()),
        )),
        VariantParams::ArdDiagonal { log_a } => {
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&i, &j| log_a[j].partial_cmp(&log_a[i]).unwrap().then(i.cmp(&j)));
            let mut dirs = DMatrix::zeros(d, d);
            let mut scales = DVector::zeros(d);
            for (col, &axis) in order.iter().enumerate() {
                dirs[(axis, col)] = 1.0;
                scales[col] = log_a[axis].exp();
            }
            Ok((dirs, scales))
        }
        VariantParams::FactorAnalysis { .. } => {
            let omega = omega_matrix(spec, params);
            let (scales, dirs) = crate::linalg::symmetric_eigen_desc(&omega)?;
            Ok((dirs, scales))
        }
    }
}
