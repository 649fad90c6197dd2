//! Observed trajectories: states, rewards, and per-transition discounts.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A chain of n observed states with n−1 reward/discount pairs.
///
/// A discount of 0 on transition i marks state i as terminal: the transition
/// is the episodic stitch connecting one episode's end to the next episode's
/// start. Environment rollouts always emit such stitches with zero reward. A
/// zero-discount transition with a nonzero reward is also accepted and acts
/// as a direct (absolute) observation of the value at state i.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: DMatrix<f64>,
    rewards: DVector<f64>,
    discounts: DVector<f64>,
}

impl Trajectory {
    pub fn new(
        states: DMatrix<f64>,
        rewards: DVector<f64>,
        discounts: DVector<f64>,
    ) -> Result<Self> {
        let n = states.nrows();
        if n < 2 {
            return Err(Error::InvalidTrajectory(format!(
                "need at least 2 states, got {n}"
            )));
        }
        if rewards.len() != n - 1 {
            return Err(Error::InvalidTrajectory(format!(
                "expected {} rewards for {n} states, got {}",
                n - 1,
                rewards.len()
            )));
        }
        if discounts.len() != n - 1 {
            return Err(Error::InvalidTrajectory(format!(
                "expected {} discounts for {n} states, got {}",
                n - 1,
                discounts.len()
            )));
        }
        if states.iter().any(|v| !v.is_finite()) || rewards.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTrajectory(
                "states and rewards must be finite".into(),
            ));
        }
        let mut gamma = None;
        for (i, &g) in discounts.iter().enumerate() {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::InvalidTrajectory(format!(
                    "discount {g} at transition {i} outside [0, 1)"
                )));
            }
            if g > 0.0 {
                match gamma {
                    None => gamma = Some(g),
                    Some(prev) if prev != g => {
                        return Err(Error::InvalidTrajectory(format!(
                            "nonzero discounts must all equal the task discount: saw {prev} and {g}"
                        )));
                    }
                    _ => {}
                }
            }
        }
        Ok(Self {
            states,
            rewards,
            discounts,
        })
    }

    /// Number of states n.
    pub fn n_states(&self) -> usize {
        self.states.nrows()
    }

    /// Number of transitions n−1.
    pub fn n_transitions(&self) -> usize {
        self.states.nrows() - 1
    }

    /// State-space dimension D.
    pub fn dim(&self) -> usize {
        self.states.ncols()
    }

    /// All states, one row per state.
    pub fn states(&self) -> &DMatrix<f64> {
        &self.states
    }

    pub fn rewards(&self) -> &DVector<f64> {
        &self.rewards
    }

    pub fn discounts(&self) -> &DVector<f64> {
        &self.discounts
    }

    /// State i as a slice-friendly vector.
    pub fn state(&self, i: usize) -> Vec<f64> {
        self.states.row(i).iter().copied().collect()
    }

    /// Number of zero-discount (stitch) transitions.
    pub fn n_stitches(&self) -> usize {
        self.discounts.iter().filter(|&&g| g == 0.0).count()
    }

    /// Project the state space onto a subset of dimensions, keeping rewards
    /// and discounts. Used when an irrelevant state variable is removed.
    pub fn project_dims(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidTrajectory(
                "cannot project onto zero dimensions".into(),
            ));
        }
        for &d in keep {
            if d >= self.dim() {
                return Err(Error::InvalidTrajectory(format!(
                    "projection dimension {d} out of range (D = {})",
                    self.dim()
                )));
            }
        }
        let states = DMatrix::from_fn(self.n_states(), keep.len(), |i, j| {
            self.states[(i, keep[j])]
        });
        Self::new(states, self.rewards.clone(), self.discounts.clone())
    }

    /// Write as CSV: one row per state with columns `x0,…,x{D−1},reward,gamma`.
    /// The final state's reward/gamma fields are left empty.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let d = self.dim();
        let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        header.push("reward".into());
        header.push("gamma".into());
        w.write_record(&header)?;
        for i in 0..self.n_states() {
            let mut rec: Vec<String> = (0..d).map(|j| fmt_float(self.states[(i, j)])).collect();
            if i < self.n_transitions() {
                rec.push(fmt_float(self.rewards[i]));
                rec.push(fmt_float(self.discounts[i]));
            } else {
                rec.push(String::new());
                rec.push(String::new());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read back a trajectory written by [`Self::write_csv`].
    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        if headers.len() < 3 {
            return Err(Error::InvalidTrajectory(
                "trajectory CSV needs at least one state column plus reward,gamma".into(),
            ));
        }
        let d = headers.len() - 2;
        let mut states: Vec<f64> = Vec::new();
        let mut rewards: Vec<f64> = Vec::new();
        let mut discounts: Vec<f64> = Vec::new();
        let mut pending: Option<(f64, f64)> = None;
        for rec in r.records() {
            let rec = rec?;
            if let Some((rw, g)) = pending.take() {
                rewards.push(rw);
                discounts.push(g);
            }
            for j in 0..d {
                let v: f64 = rec
                    .get(j)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| {
                        Error::InvalidTrajectory(format!("unparseable state field {j}"))
                    })?;
                states.push(v);
            }
            let rw = rec.get(d).map(str::trim).unwrap_or("");
            let g = rec.get(d + 1).map(str::trim).unwrap_or("");
            if !rw.is_empty() || !g.is_empty() {
                let rw: f64 = rw.parse().map_err(|_| {
                    Error::InvalidTrajectory("unparseable reward field".into())
                })?;
                let g: f64 = g.parse().map_err(|_| {
                    Error::InvalidTrajectory("unparseable gamma field".into())
                })?;
                pending = Some((rw, g));
            }
        }
        let n = states.len() / d;
        Self::new(
            DMatrix::from_row_slice(n, d, &states),
            DVector::from_vec(rewards),
            DVector::from_vec(discounts),
        )
    }
}

/// Shortest round-trip float formatting; deterministic for identical inputs.
pub(crate) fn fmt_float(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}
