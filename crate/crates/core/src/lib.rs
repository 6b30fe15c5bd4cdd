//! Scalarization-based multiobjective optimization toolkit.
//!
//! The crate is organized around the objects a multiobjective experiment
//! touches, always under the maximization convention:
//!
//! - [`pareto`]: dominance tests and Pareto-front extraction.
//! - [`scalarize`]: linear, Chebyshev and hypervolume scalarizations, weight
//!   samplers and scalarized argmax selection.
//! - [`hypervolume`]: exact dominated hypervolume, the random-scalarization
//!   Monte-Carlo estimator, and cumulative curves.
//! - [`whitebox`]: synthetic known-frontier experiments.
//! - [`bandit`]: multiobjective stochastic linear bandits and ExploreUCB.
//! - [`stats`]: small summary helpers (medians, percentiles, log-log fits).

pub mod bandit;
pub mod error;
pub mod hypervolume;
pub mod pareto;
pub mod scalarize;
pub mod stats;
pub mod whitebox;

pub use error::{Error, Result};
pub use pareto::{dominates, pareto_front, ObjectiveSet, ObjectiveVector, ReferencePoint};
pub use scalarize::{
    argmax_scalarized, HvExponent, ScalarizerFamily, ScalarizerSpec, SamplerKind, WeightSampler,
    WeightVector,
};
