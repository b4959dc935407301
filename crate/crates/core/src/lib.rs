//! Solvers for the piecewise-linear New Keynesian model with a zero lower
//! bound on the policy rate and a two-state Markov demand shock.
//!
//! Expectations can be rational, restricted to the unconditional mean,
//! cognitively discounted, or a mix of the last two. The crate computes the
//! candidate equilibria of each regime, their existence cutoffs, E-stability
//! under least-squares learning and simulated learning paths, plus a few
//! side experiments (continuous shocks, forward guidance, endogenous
//! attention).

pub mod attention;
pub mod continuous;
pub mod equilibrium;
mod error;
pub mod estability;
pub mod guidance;
pub mod learning;
pub mod model_core;

pub use error::ModelError;
pub use model_core::{MarkovShock, ModelParams, StateOutcome};
