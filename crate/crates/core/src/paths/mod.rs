//! Paths on finite knot sets and the functionals applied to them.
//!
//! A [`GridPath`] is càdlàg and piecewise linear: each knot carries its
//! right value and its left limit, and between consecutive knots the path
//! interpolates linearly from the right value at the earlier knot to the
//! left limit at the later one. Step paths are the special case where every
//! segment is flat. After the last knot the path is constant.

mod brownian;
mod grid;

pub use brownian::{sample_bm, sample_bridge_dyadic, time_change, RefinableBrownianPath};
pub use grid::{reflect, running_infimum, sup_distance, GridPath, Interp};
