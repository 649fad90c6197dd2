//! Experiment domains: simulators, fixed evaluation policies, rollout
//! generation with episodic stitching, and ground-truth value oracles.

mod gridworld;
mod pendulum;
mod value_grid;

pub use gridworld::{gridworld_rollout, gridworld_true_values, GridworldSpec};
pub use pendulum::{
    fitted_value_iteration, pendulum_energy, pendulum_rollout, pendulum_step, GreedyPolicy,
    PendulumSpec,
};
pub use value_grid::{AxisSpec, ValueGrid};
