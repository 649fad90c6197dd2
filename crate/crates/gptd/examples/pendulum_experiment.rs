//! The pendulum swing-up comparison across all three covariance variants.
//!
//! Generates a trajectory under the greedy fitted-value-iteration policy,
//! selects hyperparameters for each covariance by marginal likelihood, and
//! reports trajectory/grid MSE against the value-iteration oracle. Pass a
//! transition count as the first argument (default 400; the full-scale run
//! uses 1000).
//!
//! Run with: cargo run --release --example pendulum_experiment [-- 1000]

use gptd::envs::{fitted_value_iteration, pendulum_rollout, GreedyPolicy, PendulumSpec};
use gptd::eval::mse_on_points;
use gptd::kernel::omega_eigendecomposition;
use gptd::{default_hyperparams, fit_exact, optimize, CovarianceSpec, OptimizeOpts};
use nalgebra::DMatrix;

fn main() -> gptd::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(400);
    let env = PendulumSpec::default();

    eprintln!("solving the oracle value function (400x400 fitted value iteration)...");
    let oracle = fitted_value_iteration(&env, 400, &env.default_actions(), 1e-6)?;
    let policy = GreedyPolicy::new(env, oracle.clone(), env.default_actions());
    let traj = pendulum_rollout(&env, &policy, n, 2)?;
    eprintln!(
        "trajectory: {} transitions, {} episodes completed\n",
        traj.n_transitions(),
        traj.n_stitches()
    );

    // Truth at trajectory states and on a 50×50 evaluation grid.
    let traj_truth: Vec<f64> = (0..traj.n_states())
        .map(|i| {
            let s = traj.state(i);
            oracle.interpolate(s[0], s[1])
        })
        .collect();
    let res = 50;
    let mut grid_points = DMatrix::zeros(res * res, 2);
    let mut grid_truth = Vec::with_capacity(res * res);
    for iy in 0..res {
        for ix in 0..res {
            let x = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * ix as f64 / res as f64;
            let y = -env.max_speed + 2.0 * env.max_speed * iy as f64 / (res - 1) as f64;
            grid_points[(iy * res + ix, 0)] = x;
            grid_points[(iy * res + ix, 1)] = y;
            grid_truth.push(oracle.interpolate(x, y));
        }
    }

    let opts = OptimizeOpts {
        max_iter: 150,
        restarts: 2,
        seed: 2,
        ..Default::default()
    };
    println!(
        "{:14} {:>12} {:>14} {:>10}",
        "covariance", "L", "trajectory MSE", "grid MSE"
    );
    for (name, spec) in [
        ("isotropic", CovarianceSpec::isotropic(2)?),
        ("relevance", CovarianceSpec::ard(2)?),
        ("factor k=1", CovarianceSpec::factor_analysis(2, 1)?),
    ] {
        let theta0 = default_hyperparams(&traj, &spec, 2)?;
        let trace = optimize(&traj, &spec, &theta0, &opts)?;
        let posterior = fit_exact(&traj, &spec, &trace.best_params)?;
        let t_mse = mse_on_points(|x| posterior.predict_mean(x), traj.states(), &traj_truth)?;
        let g_mse = mse_on_points(|x| posterior.predict_mean(x), &grid_points, &grid_truth)?;
        println!(
            "{name:14} {:12.2} {t_mse:14.4} {g_mse:10.2}",
            trace.best_report.total
        );
        if spec.factor_rank.is_some() {
            let (dirs, scales) = omega_eigendecomposition(&spec, &trace.best_params)?;
            println!(
                "               dominant direction [{:+.2}, {:+.2}] scale {:.2}; secondary scale {:.3}",
                dirs[(0, 0)],
                dirs[(1, 0)],
                scales[0],
                scales[1]
            );
        }
    }
    println!("\nThe factor variant can rotate its coordinate system toward the diagonal");
    println!("ridge of the swing-up value function, which the axis-aligned variants cannot.");
    Ok(())
}
