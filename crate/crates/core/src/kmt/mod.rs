//! Strong-embedding constructions.
//!
//! Uniforms are built from a Brownian bridge by dyadic splitting with
//! binomial quantiles; random walks are built from a Brownian motion by
//! quantile-transforming the whole block sum and splitting blocks through
//! their conditional laws. [`build_coupled_sample`] combines both into the
//! arrival epochs, dropout indicators and service times of one replication.

mod sample;
mod uniforms;
mod walk;

pub use sample::{build_coupled_sample, walk_levels, Branch, CoupledSample, SampleRow};
pub use uniforms::{
    binom_half_quantile, empirical_bridge_distance, uniforms_from_bridge, BridgeUniforms, DyadicCounts,
    DyadicNode, DEFAULT_J_MAX,
};
pub use walk::{walk_from_bm, WalkFamily};
