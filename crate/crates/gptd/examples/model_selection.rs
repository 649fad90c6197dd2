//! Marginal-likelihood hyperparameter selection on gridworld data.
//!
//! Fits the isotropic and axis-aligned relevance covariances to the same
//! trajectory and prints the likelihood decomposition. The relevance variant
//! discovers that the y coordinate is irrelevant and collapses its weight.
//!
//! Run with: cargo run --release --example model_selection

use gptd::envs::{gridworld_rollout, GridworldSpec};
use gptd::{default_hyperparams, log_marginal_likelihood, optimize, CovarianceSpec, OptimizeOpts};

fn main() -> gptd::Result<()> {
    let env = GridworldSpec::default();
    let traj = gridworld_rollout(&env, 300, 7)?;
    println!(
        "gridworld trajectory: {} transitions, {} episodes\n",
        traj.n_transitions(),
        traj.n_stitches()
    );

    let opts = OptimizeOpts {
        max_iter: 120,
        restarts: 2,
        seed: 7,
        ..Default::default()
    };

    println!("variant      L total   complexity   data fit   relevance weights");
    for (name, spec) in [
        ("isotropic", CovarianceSpec::isotropic(2)?),
        ("relevance", CovarianceSpec::ard(2)?),
    ] {
        let theta0 = default_hyperparams(&traj, &spec, 7)?;
        let start = log_marginal_likelihood(&traj, &spec, &theta0)?;
        let trace = optimize(&traj, &spec, &theta0, &opts)?;
        let rep = &trace.best_report;
        let weights = trace.best_params.relevance_weights(2);
        println!(
            "{name:10} {:9.1}   {:10.1}   {:8.2}   a = [{:.3e}, {:.3e}]",
            rep.total, rep.complexity, rep.data_fit, weights[0], weights[1]
        );
        println!(
            "           (improved L from {:.1} in {} accepted steps, {} runs)",
            start.total,
            trace.iterates.len(),
            trace.restarts
        );
    }
    println!("\nA collapsed second weight (a₂ ≪ a₁) marks the y coordinate as ignorable.");
    Ok(())
}
