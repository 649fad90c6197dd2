//! Pendulum swing-up.
//!
//! An underpowered pendulum (maximum torque below the gravity torque at the
//! horizontal) must be pumped back and forth before it can reach the upright
//! region, formulated episodically: every step costs −1 and an episode ends
//! when the state enters the goal region around the upright equilibrium.
//! Angle convention: φ = 0 is upright, φ wraps to [−π, π); dynamics
//! φ̈ = (g/l)·sin φ + u/(m·l²), integrated with RK4 substeps.
//!
//! Ground truth comes from fitted value iteration on a discretized state
//! space with bilinear interpolation (periodic in φ), which also induces the
//! greedy behavior policy used to generate rollouts.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::value_grid::{AxisSpec, ValueGrid};
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PendulumSpec {
    pub mass: f64,
    pub length: f64,
    pub gravity: f64,
    pub max_torque: f64,
    /// Control interval in seconds.
    pub dt: f64,
    /// RK4 substeps per control interval.
    pub substeps: usize,
    pub discount: f64,
    /// Angular-velocity extent of the discretized state space.
    pub max_speed: f64,
    /// Goal region: |φ| < goal_angle and |φ̇| < goal_speed.
    pub goal_angle: f64,
    pub goal_speed: f64,
    /// Episode step cap for rollouts.
    pub max_episode_steps: usize,
}

impl Default for PendulumSpec {
    // 20 Hz control with 10 ms integrator substeps: swing-up from the hanging
    // region takes ~40 control steps, so 1000-transition rollouts complete
    // roughly 25 episodes.
    fn default() -> Self {
        Self {
            mass: 1.0,
            length: 1.0,
            gravity: 9.81,
            max_torque: 5.0,
            dt: 0.05,
            substeps: 5,
            discount: 0.98,
            max_speed: 10.0,
            goal_angle: 0.1,
            goal_speed: 0.5,
            max_episode_steps: 300,
        }
    }
}

impl PendulumSpec {
    pub fn in_goal(&self, state: [f64; 2]) -> bool {
        state[0].abs() < self.goal_angle && state[1].abs() < self.goal_speed
    }

    /// The bang-bang action set used for fitted value iteration.
    pub fn default_actions(&self) -> Vec<f64> {
        vec![-self.max_torque, 0.0, self.max_torque]
    }
}

fn wrap_angle(phi: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = (phi + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if w >= std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// One control step: RK4 integration of the dynamics over dt with the torque
/// held constant (clamped to the actuation limit), angle wrapped to [−π, π).
pub fn pendulum_step(spec: &PendulumSpec, state: [f64; 2], torque: f64) -> [f64; 2] {
    let u = torque.clamp(-spec.max_torque, spec.max_torque);
    let g_over_l = spec.gravity / spec.length;
    let inertia = spec.mass * spec.length * spec.length;
    let accel = |phi: f64, _vel: f64| g_over_l * phi.sin() + u / inertia;
    let h = spec.dt / spec.substeps as f64;
    let mut phi = state[0];
    let mut vel = state[1];
    for _ in 0..spec.substeps {
        let k1v = accel(phi, vel);
        let k1p = vel;
        let k2v = accel(phi + 0.5 * h * k1p, vel + 0.5 * h * k1v);
        let k2p = vel + 0.5 * h * k1v;
        let k3v = accel(phi + 0.5 * h * k2p, vel + 0.5 * h * k2v);
        let k3p = vel + 0.5 * h * k2v;
        let k4v = accel(phi + h * k3p, vel + h * k3v);
        let k4p = vel + h * k3v;
        phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        vel += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    [wrap_angle(phi), vel]
}

/// Total mechanical energy ½ml²φ̇² + mgl·cos φ (conserved when u = 0).
pub fn pendulum_energy(spec: &PendulumSpec, state: [f64; 2]) -> f64 {
    0.5 * spec.mass * spec.length * spec.length * state[1] * state[1]
        + spec.mass * spec.gravity * spec.length * state[0].cos()
}

/// Fitted value iteration on a `resolution`×`resolution` grid (periodic in φ,
/// clamped in φ̇). Successor states and interpolation stencils are
/// precomputed once; sweeps run until the sup-norm change drops below `tol`.
pub fn fitted_value_iteration(
    spec: &PendulumSpec,
    resolution: usize,
    actions: &[f64],
    tol: f64,
) -> Result<ValueGrid> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol".into(),
            reason: "must be positive".into(),
        });
    }
    if actions.is_empty() {
        return Err(Error::InvalidParameter {
            name: "actions".into(),
            reason: "need at least one action".into(),
        });
    }
    let x_axis = AxisSpec::periodic(-std::f64::consts::PI, std::f64::consts::PI, resolution);
    let y_axis = AxisSpec::clamped(-spec.max_speed, spec.max_speed, resolution);
    let mut grid = ValueGrid::zeros(x_axis, y_axis)?;
    let nx = x_axis.n;
    let ny = y_axis.n;

    // Interpolation stencil for one successor state: 4 node indices + weights.
    struct Stencil {
        idx: [u32; 4],
        w: [f64; 4],
    }
    let stencil_of = |state: [f64; 2]| -> Stencil {
        let (x0, x1, fx) = locate(x_axis, state[0]);
        let (y0, y1, fy) = locate(y_axis, state[1]);
        Stencil {
            idx: [
                (x0 + y0 * nx) as u32,
                (x1 + y0 * nx) as u32,
                (x0 + y1 * nx) as u32,
                (x1 + y1 * nx) as u32,
            ],
            w: [
                (1.0 - fx) * (1.0 - fy),
                fx * (1.0 - fy),
                (1.0 - fx) * fy,
                fx * fy,
            ],
        }
    };

    let mut terminal = vec![false; nx * ny];
    let mut stencils = Vec::with_capacity(nx * ny * actions.len());
    for iy in 0..ny {
        for ix in 0..nx {
            let state = [x_axis.coord(ix), y_axis.coord(iy)];
            terminal[ix + iy * nx] = spec.in_goal(state);
            for &a in actions {
                stencils.push(stencil_of(pendulum_step(spec, state, a)));
            }
        }
    }

    let mut values = vec![0.0f64; nx * ny];
    let mut next = vec![0.0f64; nx * ny];
    let max_sweeps = 20_000;
    let mut residual = f64::INFINITY;
    for _ in 0..max_sweeps {
        residual = 0.0;
        for s in 0..nx * ny {
            let new_v = if terminal[s] {
                0.0
            } else {
                let mut best = f64::NEG_INFINITY;
                for a in 0..actions.len() {
                    let st = &stencils[s * actions.len() + a];
                    let mut v = 0.0;
                    for q in 0..4 {
                        v += st.w[q] * values[st.idx[q] as usize];
                    }
                    best = best.max(-1.0 + spec.discount * v);
                }
                best
            };
            residual = residual.max((new_v - values[s]).abs());
            next[s] = new_v;
        }
        std::mem::swap(&mut values, &mut next);
        if residual < tol {
            for iy in 0..ny {
                for ix in 0..nx {
                    grid.values[(ix, iy)] = values[ix + iy * nx];
                }
            }
            return Ok(grid);
        }
    }
    Err(Error::ValueIterationDiverged {
        max_sweeps,
        residual,
    })
}

// Mirror of AxisSpec::locate for the stencil precomputation.
fn locate(axis: AxisSpec, x: f64) -> (usize, usize, f64) {
    let step = axis.step();
    if axis.periodic {
        let span = axis.max - axis.min;
        let mut t = (x - axis.min).rem_euclid(span) / step;
        if t >= axis.n as f64 {
            t = 0.0;
        }
        let i0 = (t.floor() as usize).min(axis.n - 1);
        let frac = t - i0 as f64;
        (i0, (i0 + 1) % axis.n, frac)
    } else {
        let t = ((x - axis.min) / step).clamp(0.0, (axis.n - 1) as f64);
        let i0 = (t.floor() as usize).min(axis.n - 2);
        (i0, i0 + 1, (t - i0 as f64).clamp(0.0, 1.0))
    }
}

/// Greedy one-step-lookahead policy induced by a value grid.
#[derive(Debug, Clone)]
pub struct GreedyPolicy {
    spec: PendulumSpec,
    grid: ValueGrid,
    actions: Vec<f64>,
}

impl GreedyPolicy {
    pub fn new(spec: PendulumSpec, grid: ValueGrid, actions: Vec<f64>) -> Self {
        Self {
            spec,
            grid,
            actions,
        }
    }

    pub fn grid(&self) -> &ValueGrid {
        &self.grid
    }

    /// argmax over actions of the interpolated successor value; lowest action
    /// index wins ties.
    pub fn action(&self, state: [f64; 2]) -> f64 {
        let mut best = self.actions[0];
        let mut best_v = f64::NEG_INFINITY;
        for &a in &self.actions {
            let next = pendulum_step(&self.spec, state, a);
            let v = self.grid.interpolate(next[0], next[1]);
            if v > best_v {
                best_v = v;
                best = a;
            }
        }
        best
    }
}

/// Episodic rollouts under the greedy policy: episodes start from randomized
/// non-goal states, end on goal entry (or the step cap), and are stitched
/// with zero-reward, zero-discount transitions. A fixed seed reproduces the
/// trajectory byte for byte.
pub fn pendulum_rollout(
    spec: &PendulumSpec,
    policy: &GreedyPolicy,
    n_transitions: usize,
    seed: u64,
) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Episodes begin near the hanging position with a small random spin.
    let fresh_start = |rng: &mut ChaCha8Rng| -> [f64; 2] {
        let phi = wrap_angle(std::f64::consts::PI + rng.gen_range(-1.0..1.0));
        [phi, rng.gen_range(-1.0..1.0)]
    };

    let mut states = Vec::with_capacity((n_transitions + 1) * 2);
    let mut rewards = Vec::with_capacity(n_transitions);
    let mut discounts = Vec::with_capacity(n_transitions);

    let mut state = fresh_start(&mut rng);
    let mut steps_in_episode = 0usize;
    states.extend_from_slice(&state);
    for _ in 0..n_transitions {
        if spec.in_goal(state) || steps_in_episode >= spec.max_episode_steps {
            rewards.push(0.0);
            discounts.push(0.0);
            state = fresh_start(&mut rng);
            steps_in_episode = 0;
        } else {
            let u = policy.action(state);
            rewards.push(-1.0);
            discounts.push(spec.discount);
            state = pendulum_step(spec, state, u);
            steps_in_episode += 1;
        }
        states.extend_from_slice(&state);
    }

    Trajectory::new(
        DMatrix::from_row_slice(n_transitions + 1, 2, &states),
        DVector::from_vec(rewards),
        DVector::from_vec(discounts),
    )
}
