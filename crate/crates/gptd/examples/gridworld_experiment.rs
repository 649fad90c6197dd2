//! The 2-D gridworld comparison: isotropic vs axis-aligned relevance, plus
//! re-scoring the relevance model with the irrelevant y dimension removed.
//!
//! Prints a likelihood/complexity/fit table and the value-function MSE over
//! all 121 states against the exact tabular solution.
//!
//! Run with: cargo run --release --example gridworld_experiment

use gptd::envs::{gridworld_rollout, gridworld_true_values, GridworldSpec};
use gptd::eval::mse_on_points;
use gptd::{
    default_hyperparams, fit_exact, log_marginal_likelihood, optimize, CovarianceSpec,
    HyperParams, OptimizeOpts,
};

fn main() -> gptd::Result<()> {
    let env = GridworldSpec::default();
    let traj = gridworld_rollout(&env, 500, 1)?;
    let truth = gridworld_true_values(&env)?;
    let grid_points = truth.points();
    let grid_values = truth.values_flat();

    let opts = OptimizeOpts {
        seed: 1,
        ..Default::default()
    };

    let mut rows: Vec<(String, f64, f64, f64, Option<f64>)> = Vec::new();
    let mut ard_params: Option<HyperParams> = None;

    for (name, spec) in [
        ("isotropic (I)", CovarianceSpec::isotropic(2)?),
        ("relevance (II)", CovarianceSpec::ard(2)?),
    ] {
        let theta0 = default_hyperparams(&traj, &spec, 1)?;
        let trace = optimize(&traj, &spec, &theta0, &opts)?;
        let posterior = fit_exact(&traj, &spec, &trace.best_params)?;
        let mse = mse_on_points(|x| posterior.predict_mean(x), &grid_points, &grid_values)?;
        let rep = trace.best_report;
        rows.push((name.into(), rep.total, rep.complexity, rep.data_fit, Some(mse)));
        if name.starts_with("relevance") {
            ard_params = Some(trace.best_params.clone());
        }
    }

    // Remove the y dimension entirely (a₂ := 0 by dropping the coordinate)
    // and re-score: same data fit, lower complexity, higher likelihood.
    let ard = ard_params.unwrap();
    let weights = ard.relevance_weights(2);
    let reduced_traj = traj.project_dims(&[0])?;
    let reduced_spec = CovarianceSpec::ard(1)?;
    let reduced = HyperParams::ard(ard.v0(), ard.b(), ard.noise(), &weights[..1])?;
    let rep = log_marginal_likelihood(&reduced_traj, &reduced_spec, &reduced)?;
    rows.push((
        "relevance, no y".into(),
        rep.total,
        rep.complexity,
        rep.data_fit,
        None,
    ));

    println!("a = [{:.3e}, {:.3e}]  (a2/a1 = {:.1e})\n", weights[0], weights[1], weights[1] / weights[0]);
    println!("{:16} {:>12} {:>12} {:>10} {:>10}", "model", "L", "complexity", "data fit", "grid MSE");
    for (name, total, complexity, data_fit, mse) in &rows {
        println!(
            "{name:16} {total:12.2} {complexity:12.2} {data_fit:10.3} {}",
            mse.map(|m| format!("{m:10.4}")).unwrap_or_else(|| "         -".into())
        );
    }
    Ok(())
}
