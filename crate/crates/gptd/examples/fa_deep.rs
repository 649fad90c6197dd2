//! Internal probe (removed before release).
use gptd::envs::*;
use gptd::*;

fn main() -> gptd::Result<()> {
    let env = PendulumSpec::default();
    let oracle = fitted_value_iteration(&env, 400, &env.default_actions(), 1e-6)?;
    let policy = GreedyPolicy::new(env, oracle.clone(), env.default_actions());
    let traj = pendulum_rollout(&env, &policy, 400, 2)?;
    // max speed actually visited
    let mut vmax: f64 = 0.0;
    for i in 0..traj.n_states() { vmax = vmax.max(traj.state(i)[1].abs()); }
    println!("max |speed| in rollout: {vmax:.2}");
    let spec = CovarianceSpec::factor_analysis(2, 1)?;
    for (r, mi, s) in [(8usize, 500usize, 2u64), (8, 500, 77)] {
        let opts = OptimizeOpts { max_iter: mi, restarts: r, seed: s, ..Default::default() };
        let theta0 = default_hyperparams(&traj, &spec, s)?;
        let trace = optimize(&traj, &spec, &theta0, &opts)?;
        let (_, sc) = kernel::omega_eigendecomposition(&spec, &trace.best_params)?;
        println!("restarts={r} iters={mi} seed={s}: L={:.2} scales=[{:.2},{:.3}] aniso={:.1}",
            trace.best_report.total, sc[0], sc[1], sc[0]/sc[1]);
    }
    Ok(())
}
