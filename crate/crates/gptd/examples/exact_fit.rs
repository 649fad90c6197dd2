//! Fit the exact GPTD posterior on a tiny hand-built trajectory and query it.
//!
//! The trajectory walks a 1-D chain toward a terminal state; the stitch
//! transition (discount 0, reward 0) links the episode end back to a fresh
//! start, keeping the chain connected.
//!
//! Run with: cargo run --example exact_fit

use gptd::{fit_exact, CovarianceSpec, HyperParams, Trajectory};
use nalgebra::{DMatrix, DVector};

fn main() -> gptd::Result<()> {
    // States along a line; rewards −1 per step until the terminal state 0.
    let states = DMatrix::from_row_slice(
        7,
        1,
        &[3.0, 2.0, 1.0, 0.0, /* stitch -> */ 4.0, 3.0, 2.0],
    );
    let gamma = 0.9;
    let rewards = DVector::from_vec(vec![-1.0, -1.0, -1.0, 0.0, -1.0, -1.0]);
    let discounts = DVector::from_vec(vec![gamma, gamma, gamma, 0.0, gamma, gamma]);
    let traj = Trajectory::new(states, rewards, discounts)?;

    let spec = CovarianceSpec::isotropic(1)?;
    let params = HyperParams::isotropic(2.0, 0.1, 0.01, 2.0)?;
    let posterior = fit_exact(&traj, &spec, &params)?;

    println!("state   posterior mean   posterior std    true value");
    for x in [0.0, 1.0, 2.0, 3.0, 4.0] {
        let (mean, var) = posterior.predict(&[x])?;
        // Distance-to-terminal value under the deterministic walk.
        let d = x as i32;
        let truth = -(1.0 - gamma.powi(d)) / (1.0 - gamma);
        println!("{x:5.1}   {mean:14.4}   {:13.4}   {truth:11.4}", var.sqrt());
    }

    // Far from the data the posterior reverts to the prior.
    let (mean, var) = posterior.predict(&[40.0])?;
    println!(
        "\nfar query x = 40: mean {mean:.4}, variance {var:.4} (prior variance {:.4})",
        2.0 + 0.1
    );
    Ok(())
}
