//! Dense and tridiagonal factorization helpers.
//!
//! Thin wrappers over LAPACK (via system BLAS) for the hot paths — Cholesky
//! factorization, SPD inverse, symmetric eigenvalues — plus a tridiagonal
//! LDLᵀ used to apply (HHᵀ)⁻¹ in O(n) per solve. All dense matrices are
//! column-major `nalgebra::DMatrix`, which LAPACK consumes directly.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// In-place lower Cholesky factorization. On success the strict upper
/// triangle is zeroed so the result can be used as an ordinary lower factor.
pub fn cholesky_lower_inplace(a: &mut DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "cholesky requires a square matrix");
    if n == 0 {
        return Ok(());
    }
    let mut info = 0;
    unsafe {
        lapack::dpotrf(b'L', n as i32, a.as_mut_slice(), n as i32, &mut info);
    }
    if info > 0 {
        return Err(Error::NotPositiveDefinite {
            leading_minor: info as usize,
        });
    }
    assert_eq!(info, 0, "dpotrf: illegal argument {}", -info);
    for j in 1..n {
        for i in 0..j {
            a[(i, j)] = 0.0;
        }
    }
    Ok(())
}

/// Lower Cholesky factor of `a`, leaving `a` untouched.
pub fn cholesky_lower(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut l = a.clone();
    cholesky_lower_inplace(&mut l)?;
    Ok(l)
}

/// log det A from its lower Cholesky factor.
pub fn logdet_from_chol(l: &DMatrix<f64>) -> f64 {
    2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// Solve A x = b given the lower Cholesky factor of A.
pub fn chol_solve(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut x = b.clone();
    solve_lower_inplace(l, &mut x);
    solve_lower_transpose_inplace(l, &mut x);
    x
}

/// Forward substitution: solves L x = b in place for lower-triangular L.
pub fn solve_lower_inplace(l: &DMatrix<f64>, v: &mut DVector<f64>) {
    let n = l.nrows();
    debug_assert_eq!(v.len(), n);
    for j in 0..n {
        let vj = v[j] / l[(j, j)];
        v[j] = vj;
        let col = l.column(j);
        for i in (j + 1)..n {
            v[i] -= col[i] * vj;
        }
    }
}

/// Back substitution: solves Lᵀ x = b in place for lower-triangular L.
pub fn solve_lower_transpose_inplace(l: &DMatrix<f64>, v: &mut DVector<f64>) {
    let n = l.nrows();
    debug_assert_eq!(v.len(), n);
    for j in (0..n).rev() {
        let col = l.column(j);
        let mut s = v[j];
        for i in (j + 1)..n {
            s -= col[i] * v[i];
        }
        v[j] = s / col[j];
    }
}

/// Full SPD inverse from the lower Cholesky factor (dpotri), symmetrized.
pub fn spd_inverse_from_chol(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = l.clone();
    if n == 0 {
        return inv;
    }
    let mut info = 0;
    unsafe {
        lapack::dpotri(b'L', n as i32, inv.as_mut_slice(), n as i32, &mut info);
    }
    assert_eq!(info, 0, "dpotri failed with info {info}");
    for j in 1..n {
        for i in 0..j {
            inv[(i, j)] = inv[(j, i)];
        }
    }
    inv
}

/// Eigenvalues of a symmetric matrix, descending. Only the lower triangle is read.
pub fn symmetric_eigenvalues_desc(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigenvalues require a square matrix");
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let mut work_m = a.clone();
    let mut w = vec![0.0; n];
    let lwork = (3 * n).max(8);
    let mut work = vec![0.0; lwork];
    let mut info = 0;
    unsafe {
        lapack::dsyev(
            b'N',
            b'L',
            n as i32,
            work_m.as_mut_slice(),
            n as i32,
            &mut w,
            &mut work,
            lwork as i32,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigenFailed { info });
    }
    w.reverse();
    Ok(DVector::from_vec(w))
}

/// Full symmetric eigendecomposition, eigenvalues descending with matching
/// eigenvector columns. Intended for small matrices (Ω is D×D).
pub fn symmetric_eigen_desc(a: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigendecomposition requires a square matrix");
    let mut vecs = a.clone();
    let mut w = vec![0.0; n];
    let lwork = (3 * n).max(8);
    let mut work = vec![0.0; lwork];
    let mut info = 0;
    unsafe {
        lapack::dsyev(
            b'V',
            b'L',
            n as i32,
            vecs.as_mut_slice(),
            n as i32,
            &mut w,
            &mut work,
            lwork as i32,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigenFailed { info });
    }
    // LAPACK returns ascending order; flip to descending and fix signs so the
    // largest-magnitude component of each eigenvector is positive.
    let mut vals = DVector::zeros(n);
    let mut dirs = DMatrix::zeros(n, n);
    for k in 0..n {
        let src = n - 1 - k;
        vals[k] = w[src];
        let col = vecs.column(src);
        let pivot = col
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            dirs[(i, k)] = sign * col[i];
        }
    }
    Ok((vals, dirs))
}

/// LDLᵀ factorization of a symmetric positive-definite tridiagonal matrix.
///
/// Used to apply W = (HHᵀ)⁻¹ without ever forming a dense inverse.
#[derive(Debug, Clone)]
pub struct TridiagFactor {
    /// Pivots of D.
    d: Vec<f64>,
    /// Subdiagonal of the unit lower bidiagonal L.
    l: Vec<f64>,
}

impl TridiagFactor {
    /// Factor the tridiagonal matrix with main diagonal `diag` and symmetric
    /// off-diagonal `off` (off[i] couples rows i and i+1).
    pub fn new(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        assert_eq!(off.len(), n.saturating_sub(1), "off-diagonal length");
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let mut di = diag[i];
            if i > 0 {
                di -= l[i - 1] * off[i - 1];
            }
            if di <= 0.0 {
                return Err(Error::NotPositiveDefinite { leading_minor: i + 1 });
            }
            d[i] = di;
            if i + 1 < n {
                l[i] = off[i] / di;
            }
        }
        Ok(Self { d, l })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Solve A x = b in place.
    pub fn solve_inplace(&self, v: &mut [f64]) {
        let n = self.d.len();
        debug_assert_eq!(v.len(), n);
        for i in 1..n {
            v[i] -= self.l[i - 1] * v[i - 1];
        }
        for i in 0..n {
            v[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            v[i] -= self.l[i] * v[i + 1];
        }
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        self.solve_inplace(x.as_mut_slice());
        x
    }

    /// Solve A X = B column by column.
    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = b.clone();
        for mut col in x.column_iter_mut() {
            self.solve_inplace(col.as_mut_slice());
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spd(n: usize) -> DMatrix<f64> {
        let a = DMatrix::<f64>::from_fn(n, n, |i, j| ((i * 13 + j * 7) % 23) as f64 / 23.0);
        &a * a.transpose() + DMatrix::identity(n, n) * (n as f64)
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = spd(12);
        let l = cholesky_lower(&a).unwrap();
        let back = &l * l.transpose();
        assert_relative_eq!(back, a, epsilon = 1e-10);
    }

    #[test]
    fn cholesky_reports_leading_minor() {
        let mut a = spd(6);
        a[(3, 3)] = -100.0;
        match cholesky_lower(&a) {
            Err(Error::NotPositiveDefinite { leading_minor }) => assert_eq!(leading_minor, 4),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn solve_matches_inverse() {
        let a = spd(9);
        let l = cholesky_lower(&a).unwrap();
        let b = DVector::from_fn(9, |i, _| (i as f64) - 4.0);
        let x = chol_solve(&l, &b);
        assert_relative_eq!(&a * &x, b, epsilon = 1e-9);

        let inv = spd_inverse_from_chol(&l);
        assert_relative_eq!(&inv * &a, DMatrix::identity(9, 9), epsilon = 1e-9);
        assert_relative_eq!(inv.clone(), inv.transpose(), epsilon = 0.0);
    }

    #[test]
    fn eigenvalues_descending_sum_to_trace() {
        let a = spd(15);
        let w = symmetric_eigenvalues_desc(&a).unwrap();
        for k in 1..w.len() {
            assert!(w[k] <= w[k - 1]);
        }
        assert_relative_eq!(w.sum(), a.trace(), max_relative = 1e-12);
    }

    #[test]
    fn small_eigendecomposition_reconstructs() {
        let a = spd(5);
        let (vals, dirs) = symmetric_eigen_desc(&a).unwrap();
        let back = &dirs * DMatrix::from_diagonal(&vals) * dirs.transpose();
        assert_relative_eq!(back, a, epsilon = 1e-9);
        assert_relative_eq!(
            &dirs * dirs.transpose(),
            DMatrix::identity(5, 5),
            epsilon = 1e-10
        );
    }

    #[test]
    fn tridiagonal_solve_matches_dense() {
        let n = 8;
        let diag: Vec<f64> = (0..n).map(|i| 2.5 + 0.1 * i as f64).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| -0.7 + 0.05 * i as f64).collect();
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            dense[(i, i)] = diag[i];
            if i + 1 < n {
                dense[(i, i + 1)] = off[i];
                dense[(i + 1, i)] = off[i];
            }
        }
        let f = TridiagFactor::new(&diag, &off).unwrap();
        let b = DVector::from_fn(n, |i, _| (i as f64).sin());
        let x = f.solve(&b);
        assert_relative_eq!(&dense * &x, b, epsilon = 1e-10);
    }
}
