//! Monte Carlo simulation of RS(G,p)/G/1 transitory queues together with
//! strong couplings to their reflected-diffusion approximations.
//!
//! A population of `n` customers each draws an arrival epoch from `G` and
//! joins with probability `p`; a single FCFS server works at rate `c_n`.
//! [`kmt`] builds arrival epochs, dropout indicators and service times from
//! a Brownian bridge and two Brownian motions, [`approx`] turns the same
//! drivers into the approximating processes, and [`harness`] measures the
//! sup-norm distance between the two across a ladder of population sizes.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod bounds;
pub mod dist;
pub mod error;
pub mod harness;
pub mod kmt;
pub mod paths;
pub mod queue;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
