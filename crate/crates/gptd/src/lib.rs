//! Policy evaluation with Gaussian-process temporal-difference learning.
//!
//! The value function of a fixed policy is modeled as a zero-mean GP observed
//! indirectly through rewards, r = Hv + η, where H encodes the discounted
//! Bellman differences along a sampled trajectory. On top of that model this
//! crate provides:
//!
//! - three squared-exponential covariance variants (isotropic, axis-aligned
//!   relevance weights, factor analysis) with analytic parameter derivatives
//!   ([`kernel`]);
//! - exact posterior inference over values ([`exact`]);
//! - marginal-likelihood model selection by scaled conjugate gradients,
//!   including factor-rank selection ([`model_selection`]);
//! - sparse subset-of-regressors inference with incomplete-Cholesky subset
//!   selection and the projected-process variance correction ([`sparse`]);
//! - two benchmark domains (teleport gridworld, pendulum swing-up) with
//!   ground-truth value oracles ([`envs`]), comparison metrics ([`eval`]),
//!   and config-driven experiment orchestration ([`runner`]).
//!
//! The `examples/` directory walks through each capability; the `gptd` binary
//! exposes the experiment pipeline as `simulate`, `fit`, `profile`, and
//! `eval-grid` subcommands.

// Link the system BLAS/LAPACK used by the dense factorization paths.
extern crate lapack_src;
extern crate openblas_src;

pub mod envs;
pub mod error;
pub mod eval;
pub mod exact;
pub mod kernel;
pub mod linalg;
pub mod model_selection;
pub mod runner;
pub mod scg;
pub mod sparse;
pub mod trajectory;

pub use error::{Error, Result};
pub use exact::{fit_exact, ExactPosterior, TdOperator};
pub use kernel::{CovarianceSpec, CovarianceVariant, HyperParams};
pub use model_selection::{
    default_hyperparams, likelihood_gradient, log_marginal_likelihood, optimize,
    select_factor_rank, LikelihoodReport, OptimizeOpts,
};
pub use sparse::{fit_sr, icd_select, SparsePosterior, SubsetSelection};
pub use trajectory::Trajectory;
