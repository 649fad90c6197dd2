//! Scaled conjugate gradient minimizer (Møller's trust-region scaling).
//!
//! Line searches are replaced by a one-sided curvature probe along the search
//! direction plus a Levenberg-style scale λ that grows when the local
//! quadratic model disagrees with the objective and shrinks when it agrees.
//! Objective failures (e.g. a factorization that breaks down at an extreme
//! candidate) are treated as rejected steps rather than hard errors, so the
//! optimizer backs away from infeasible regions on its own.

use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ScgOptions {
    pub max_iter: usize,
    /// Convergence on the gradient infinity norm.
    pub grad_tol: f64,
    /// Convergence on the relative objective change between accepted steps.
    pub f_tol: f64,
    /// Componentwise box applied to every candidate iterate.
    pub clip: Option<(f64, f64)>,
}

impl Default for ScgOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-4,
            f_tol: 1e-9,
            clip: None,
        }
    }
}

/// One accepted iterate.
#[derive(Debug, Clone)]
pub struct ScgStep {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct ScgResult {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub converged: bool,
    /// Accepted iterations (the initial point is not counted).
    pub iterations: usize,
    /// Initial point followed by every accepted iterate.
    pub path: Vec<ScgStep>,
}

fn clip_vec(x: &mut DVector<f64>, clip: Option<(f64, f64)>) {
    if let Some((lo, hi)) = clip {
        for v in x.iter_mut() {
            *v = v.clamp(lo, hi);
        }
    }
}

/// Minimize `fg` starting from `x0`. `fg` returns the objective and its
/// gradient; `f_only` evaluates just the objective (used for candidate steps).
/// An error from the initial evaluation is propagated; errors at candidate
/// points reject the step.
pub fn minimize<FG, F>(
    x0: DVector<f64>,
    mut fg: FG,
    mut f_only: F,
    opts: &ScgOptions,
) -> Result<ScgResult>
where
    FG: FnMut(&DVector<f64>) -> Result<(f64, DVector<f64>)>,
    F: FnMut(&DVector<f64>) -> Result<f64>,
{
    const SIGMA0: f64 = 1e-4;
    const LAMBDA_MIN: f64 = 1e-15;
    const LAMBDA_MAX: f64 = 1e100;

    let mut x = x0;
    clip_vec(&mut x, opts.clip);
    let (mut f, mut grad) = fg(&x)?;
    if !f.is_finite() {
        return Err(Error::OptimizationFailed(format!(
            "objective not finite at the starting point (f = {f})"
        )));
    }
    let mut path = vec![ScgStep {
        x: x.clone(),
        f,
        grad_norm: grad.amax(),
    }];
    if grad.amax() < opts.grad_tol {
        return Ok(ScgResult {
            grad_norm: grad.amax(),
            x,
            f,
            converged: true,
            iterations: 0,
            path,
        });
    }

    let mut d = -&grad;
    let mut lambda = 1e-6;
    let mut success = true;
    let mut n_success = 0usize;
    let mut mu = 0.0;
    let mut kappa = 0.0;
    let mut theta = 0.0;
    let mut converged = false;
    let mut iterations = 0usize;
    let dim = x.len();

    for _ in 0..opts.max_iter {
        if success {
            mu = d.dot(&grad);
            if mu >= 0.0 {
                d = -&grad;
                mu = d.dot(&grad);
            }
            kappa = d.norm_squared();
            if kappa < f64::EPSILON {
                converged = true;
                break;
            }
            // Curvature probe along d.
            let sigma = SIGMA0 / kappa.sqrt();
            let mut x_probe = &x + &d * sigma;
            clip_vec(&mut x_probe, opts.clip);
            theta = match fg(&x_probe) {
                Ok((_, g_probe)) => d.dot(&(&g_probe - &grad)) / sigma,
                // Infeasible probe: fall back to a safe positive curvature.
                Err(_) => kappa,
            };
            if !theta.is_finite() {
                theta = kappa;
            }
        }

        // Scale the curvature to be positive definite.
        let mut delta = theta + lambda * kappa;
        if delta <= 0.0 {
            lambda = 2.0 * (lambda - theta / kappa);
            delta = -theta + lambda * kappa;
        }
        let alpha = -mu / delta;

        let mut x_new = &x + &d * alpha;
        clip_vec(&mut x_new, opts.clip);
        let f_new = match f_only(&x_new) {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        };
        // Comparison between actual and predicted decrease.
        let comparison = 2.0 * delta * (f - f_new) / (mu * mu);

        if comparison >= 0.0 {
            // Accept.
            let f_old = f;
            let (f_acc, g_acc) = match fg(&x_new) {
                Ok(v) => v,
                Err(e) => return Err(e),
            };
            x = x_new;
            f = f_acc;
            let grad_old = std::mem::replace(&mut grad, g_acc);
            success = true;
            n_success += 1;
            iterations += 1;
            path.push(ScgStep {
                x: x.clone(),
                f,
                grad_norm: grad.amax(),
            });

            if grad.amax() < opts.grad_tol
                || (f_old - f).abs() < opts.f_tol * (f_old.abs() + f64::EPSILON)
            {
                converged = true;
                break;
            }

            // Polak-Ribière-style update, steepest-descent restart every dim
            // successful steps.
            if n_success % dim == 0 {
                d = -&grad;
            } else {
                let beta = (&grad_old - &grad).dot(&grad) / mu;
                d = &d * beta - &grad;
            }
        } else {
            success = false;
        }

        if comparison < 0.25 {
            lambda = (4.0 * lambda).min(LAMBDA_MAX);
        } else if comparison > 0.75 {
            lambda = (0.5 * lambda).max(LAMBDA_MIN);
        }
        if lambda >= LAMBDA_MAX {
            break;
        }
    }

    Ok(ScgResult {
        grad_norm: grad.amax(),
        x,
        f,
        converged,
        iterations,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quadratic(x: &DVector<f64>) -> (f64, DVector<f64>) {
        // f = x₀² + 10·x₁²
        let f = x[0] * x[0] + 10.0 * x[1] * x[1];
        let g = DVector::from_vec(vec![2.0 * x[0], 20.0 * x[1]]);
        (f, g)
    }

    #[test]
    fn minimizes_quadratic() {
        let opts = ScgOptions {
            grad_tol: 1e-8,
            ..Default::default()
        };
        let r = minimize(
            DVector::from_vec(vec![3.0, -1.5]),
            |x| Ok(quadratic(x)),
            |x| Ok(quadratic(x).0),
            &opts,
        )
        .unwrap();
        assert!(r.converged);
        assert!(r.f < 1e-12, "f = {}", r.f);
        assert!(r.iterations <= 50);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let fg = |x: &DVector<f64>| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = DVector::from_vec(vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ]);
            Ok((f, g))
        };
        let opts = ScgOptions {
            max_iter: 2000,
            grad_tol: 1e-7,
            f_tol: 1e-15,
            clip: None,
        };
        let r = minimize(
            DVector::from_vec(vec![-1.2, 1.0]),
            fg,
            |x| fg(x).map(|(f, _)| f),
            &opts,
        )
        .unwrap();
        assert!(r.f < 1e-8, "f = {}", r.f);
        assert_relative_eq!(r.x[0], 1.0, epsilon = 1e-3);
    }

    #[test]
    fn stationary_start_returns_without_iterating() {
        let r = minimize(
            DVector::from_vec(vec![0.0, 0.0]),
            |x| Ok(quadratic(x)),
            |x| Ok(quadratic(x).0),
            &ScgOptions::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.path.len(), 1);
    }

    #[test]
    fn candidate_failures_reject_the_step() {
        // Objective errors outside the unit box; the minimizer must still
        // make progress toward 0 from a feasible start.
        let guarded = |x: &DVector<f64>| -> Result<(f64, DVector<f64>)> {
            if x.amax() > 1.0 {
                return Err(Error::OptimizationFailed("outside domain".into()));
            }
            Ok(quadratic(x))
        };
        let r = minimize(
            DVector::from_vec(vec![0.9, 0.9]),
            guarded,
            |x| guarded(x).map(|(f, _)| f),
            &ScgOptions {
                grad_tol: 1e-8,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.f < 1e-10, "f = {}", r.f);
    }

    #[test]
    fn clip_keeps_iterates_in_box() {
        let opts = ScgOptions {
            clip: Some((-0.5, 0.5)),
            grad_tol: 1e-10,
            ..Default::default()
        };
        let r = minimize(
            DVector::from_vec(vec![3.0, -4.0]),
            |x| Ok(quadratic(x)),
            |x| Ok(quadratic(x).0),
            &opts,
        )
        .unwrap();
        for step in &r.path {
            assert!(step.x.amax() <= 0.5 + 1e-12);
        }
        assert!(r.f < 1e-10);
    }

    #[test]
    fn initial_failure_is_an_error() {
        let r = minimize(
            DVector::from_vec(vec![0.0]),
            |_| -> Result<(f64, DVector<f64>)> {
                Err(Error::OptimizationFailed("bad start".into()))
            },
            |_| Ok(0.0),
            &ScgOptions::default(),
        );
        assert!(r.is_err());
    }
}
