//! Deterministic multi-agent maze exploration with a spatial-representation
//! analysis toolkit.

// NaN-rejecting guards read as `!(x > 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coordination;
pub mod error;
pub mod geometry;
pub mod gridness;
pub mod harness;
pub mod ib_comm;
pub mod pgm;
pub mod planner;
pub mod spatial_codes;
pub mod world;

pub use error::{Error, Result};
