//! Quantitative comparison machinery: prediction MSE, Gram/reward-covariance
//! eigenspectra, and incomplete-Cholesky profiling (subset size and
//! approximation error as functions of the selection tolerance).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{gram_symmetric, CovarianceSpec, HyperParams};
use crate::linalg;
use crate::sparse::{icd_low_rank_factor, icd_select};
use crate::trajectory::fmt_float;

/// Mean squared error of a predictor over a point set.
pub fn mse_on_points<F>(mut predict: F, points: &DMatrix<f64>, truth: &[f64]) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if points.nrows() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "mse_on_points truth length",
            expected: points.nrows(),
            got: truth.len(),
        });
    }
    if truth.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "truth".into(),
            reason: "must be finite".into(),
        });
    }
    let mut acc = 0.0;
    let mut row = Vec::with_capacity(points.ncols());
    for i in 0..points.nrows() {
        row.clear();
        row.extend(points.row(i).iter().copied());
        let diff = predict(&row)? - truth[i];
        acc += diff * diff;
    }
    Ok(acc / points.nrows() as f64)
}

/// Descending eigenvalues of a symmetric matrix.
pub fn eigenspectrum(matrix: &DMatrix<f64>) -> Result<DVector<f64>> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::DimensionMismatch {
            context: "eigenspectrum",
            expected: matrix.nrows(),
            got: matrix.ncols(),
        });
    }
    linalg::symmetric_eigenvalues_desc(matrix)
}

/// Eigenvalues clamped to be non-negative, tolerating roundoff down to
/// −1e-8·trace. Values below that are a numerical failure.
pub fn clamped_spectrum(matrix: &DMatrix<f64>) -> Result<Vec<f64>> {
    let eigs = eigenspectrum(matrix)?;
    let floor = -1e-8 * matrix.trace().abs();
    eigs.iter()
        .map(|&v| {
            if v < floor {
                Err(Error::NegativeVariance {
                    value: v,
                    tolerance: -floor,
                })
            } else {
                Ok(v.max(0.0))
            }
        })
        .collect()
}

/// One row of an incomplete-Cholesky profile.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IcdProfilePoint {
    pub tol: f64,
    pub subset_size: usize,
    pub frob_error: f64,
}

/// Largest point count for which the exact Gram matrix is formed when
/// computing Frobenius errors.
pub const ICD_PROFILE_GUARD: usize = 2000;

/// Run subset selection at each tolerance and measure ‖K − K̃‖_F against the
/// exact Gram matrix. Tolerances must be positive and descending.
pub fn icd_profile(
    spec: &CovarianceSpec,
    params: &HyperParams,
    points: &DMatrix<f64>,
    tols: &[f64],
) -> Result<Vec<IcdProfilePoint>> {
    let n = points.nrows();
    if n > ICD_PROFILE_GUARD {
        return Err(Error::GuardExceeded {
            n,
            limit: ICD_PROFILE_GUARD,
        });
    }
    for w in tols.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::InvalidParameter {
                name: "tols".into(),
                reason: "must be strictly descending".into(),
            });
        }
    }
    if tols.iter().any(|&t| t <= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tols".into(),
            reason: "must be positive".into(),
        });
    }
    let exact = gram_symmetric(spec, params, points, false)?.matrix;
    let mut out = Vec::with_capacity(tols.len());
    for &tol in tols {
        let sel = icd_select(spec, params, points, tol, n)?;
        let factor = icd_low_rank_factor(spec, params, points, &sel)?;
        let frob = (&exact - &factor * factor.transpose()).norm();
        out.push(IcdProfilePoint {
            tol,
            subset_size: sel.size(),
            frob_error: frob,
        });
    }
    Ok(out)
}

/// Write an eigenspectrum as `rank,value` CSV.
pub fn write_eigenspectrum_csv<P: AsRef<std::path::Path>>(path: P, values: &[f64]) -> Result<()> {
    use std::io::Write;
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "rank,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(f, "{},{}", i + 1, fmt_float(*v))?;
    }
    Ok(())
}

/// Write an ICD profile as `tol,subset_size,frob_error` CSV.
pub fn write_icd_csv<P: AsRef<std::path::Path>>(path: P, rows: &[IcdProfilePoint]) -> Result<()> {
    use std::io::Write;
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "tol,subset_size,frob_error")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{}",
            fmt_float(r.tol),
            r.subset_size,
            fmt_float(r.frob_error)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn mse_basics() {
        let points = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 2.0]);
        let truth = [1.0, 2.0, 3.0];
        let exact = mse_on_points(|x| Ok(x[0] + 1.0), &points, &truth).unwrap();
        assert_eq!(exact, 0.0);
        let zero = mse_on_points(|_| Ok(0.0), &points, &truth).unwrap();
        assert_relative_eq!(zero, (1.0 + 4.0 + 9.0) / 3.0, epsilon = 1e-15);
        assert!(mse_on_points(|_| Ok(0.0), &points, &[f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn eigenspectrum_identity_and_rank_one() {
        let eye = DMatrix::<f64>::identity(6, 6);
        let w = eigenspectrum(&eye).unwrap();
        for v in w.iter() {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-12);
        }
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let m = &v * v.transpose();
        let w = eigenspectrum(&m).unwrap();
        assert_relative_eq!(w[0], v.norm_squared(), epsilon = 1e-12);
        assert!(w[1].abs() < 1e-12 && w[2].abs() < 1e-12);
    }

    #[test]
    fn eigenspectrum_matches_characteristic_polynomial_roots() {
        // 3×3 symmetric: roots of λ³ − c₂λ² + c₁λ − c₀ via the trigonometric
        // closed form, all real by symmetry.
        let mut rng = StdRng::seed_from_u64(50);
        let a = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let m = (&a + a.transpose()) * 0.5 + DMatrix::identity(3, 3) * 2.0;

        let c2: f64 = m.trace();
        let minor = |i: usize, j: usize| m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)];
        let c1 = minor(0, 1) + minor(0, 2) + minor(1, 2);
        let c0 = m.determinant();
        // Depressed cubic t³ + pt + q with λ = t + c₂/3.
        let p = c1 - c2 * c2 / 3.0;
        let q = -2.0 * c2.powi(3) / 27.0 + c2 * c1 / 3.0 - c0;
        let r = (-p / 3.0f64).sqrt();
        let phi = (3.0 * q / (2.0 * p * r)).clamp(-1.0, 1.0).acos();
        let mut roots: Vec<f64> = (0..3)
            .map(|k| 2.0 * r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + c2 / 3.0)
            .collect();
        roots.sort_by(|a, b| b.partial_cmp(a).unwrap());

        let w = eigenspectrum(&m).unwrap();
        for (have, want) in w.iter().zip(roots.iter()) {
            assert_relative_eq!(have, want, max_relative = 1e-8);
        }
    }

    #[test]
    fn spectrum_sum_matches_trace() {
        let mut rng = StdRng::seed_from_u64(51);
        let a = DMatrix::from_fn(40, 40, |_, _| rng.gen_range(-1.0..1.0));
        let m = &a * a.transpose();
        let w = eigenspectrum(&m).unwrap();
        assert_relative_eq!(w.sum(), m.trace(), max_relative = 1e-8);
        let clamped = clamped_spectrum(&m).unwrap();
        assert!(clamped.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn icd_profile_behaviors() {
        let mut rng = StdRng::seed_from_u64(52);
        let spec = CovarianceSpec::isotropic(2).unwrap();
        let params = HyperParams::isotropic(1.0, 0.1, 0.1, 1.5).unwrap();
        let points = DMatrix::from_fn(60, 2, |_, _| rng.gen_range(-2.0..2.0));
        let rows = icd_profile(&spec, &params, &points, &[5.0, 0.5, 0.05, 1e-4, 1e-8]).unwrap();
        // Above v0 + b: one unconditional pivot.
        assert_eq!(rows[0].subset_size, 1);
        // Sizes grow and errors shrink as the tolerance drops.
        for w in rows.windows(2) {
            assert!(w[1].subset_size >= w[0].subset_size);
            assert!(w[1].frob_error <= w[0].frob_error + 1e-9);
        }
        let last = rows.last().unwrap();
        assert!(
            last.frob_error < 1e-3,
            "tight tolerance should drive the error down, got {}",
            last.frob_error
        );

        // Guard and argument validation.
        assert!(matches!(
            icd_profile(
                &spec,
                &params,
                &DMatrix::zeros(ICD_PROFILE_GUARD + 1, 2),
                &[0.1]
            ),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(icd_profile(&spec, &params, &points, &[0.1, 0.5]).is_err());
        assert!(icd_profile(&spec, &params, &points, &[0.1, -0.5]).is_err());
    }
}
