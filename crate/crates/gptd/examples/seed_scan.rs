//! Internal scan utility (removed before release).
use gptd::envs::*;
use gptd::eval::{icd_profile, mse_on_points};
use gptd::*;
use nalgebra::DMatrix;

fn main() -> gptd::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(400);
    let restarts: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(2);
    let env = PendulumSpec::default();
    let oracle = fitted_value_iteration(&env, 400, &env.default_actions(), 1e-6)?;
    let policy = GreedyPolicy::new(env, oracle.clone(), env.default_actions());
    for seed in [1u64, 2, 3, 4, 5] {
        let traj = pendulum_rollout(&env, &policy, n, seed)?;
        let traj_truth: Vec<f64> = (0..traj.n_states()).map(|i| { let s = traj.state(i); oracle.interpolate(s[0], s[1]) }).collect();
        let res = 50;
        let mut gp = DMatrix::zeros(res*res, 2); let mut gt = Vec::new();
        for iy in 0..res { for ix in 0..res {
            let x = -std::f64::consts::PI + 2.0*std::f64::consts::PI*ix as f64/res as f64;
            let y = -env.max_speed + 2.0*env.max_speed*iy as f64/(res-1) as f64;
            gp[(iy*res+ix,0)]=x; gp[(iy*res+ix,1)]=y; gt.push(oracle.interpolate(x,y)); }}
        let opts = OptimizeOpts { max_iter: 200, restarts, seed, ..Default::default() };
        let mut l = vec![]; let mut gm = vec![]; let mut tm = vec![]; let mut m01 = vec![]; let mut aniso = vec![];
        for spec in [CovarianceSpec::isotropic(2)?, CovarianceSpec::ard(2)?, CovarianceSpec::factor_analysis(2,1)?] {
            let theta0 = default_hyperparams(&traj, &spec, seed)?;
            let trace = optimize(&traj, &spec, &theta0, &opts)?;
            let post = fit_exact(&traj, &spec, &trace.best_params)?;
            l.push(trace.best_report.total);
            tm.push(mse_on_points(|x| post.predict_mean(x), traj.states(), &traj_truth)?);
            gm.push(mse_on_points(|x| post.predict_mean(x), &gp, &gt)?);
            let rows = icd_profile(&spec, &trace.best_params, traj.states(), &[0.1])?;
            m01.push(rows[0].subset_size);
            let (_, s) = kernel::omega_eigendecomposition(&spec, &trace.best_params)?;
            aniso.push(s[0]/s[s.len()-1]);
        }
        println!("seed {seed}: L=[{:.0},{:.0},{:.0}] gridMSE=[{:.1},{:.1},{:.1}] trajMSE=[{:.3},{:.3},{:.3}] m@0.1=[{},{},{}] aniso=[{:.1},{:.1},{:.1}]",
            l[0],l[1],l[2], gm[0],gm[1],gm[2], tm[0],tm[1],tm[2], m01[0],m01[1],m01[2], aniso[0],aniso[1],aniso[2]);
    }
    Ok(())
}
