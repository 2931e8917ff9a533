// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod grid;
pub mod harness;
pub mod integrator;
pub mod physics;
pub mod solid;
pub mod soliton;
pub mod stencils;
