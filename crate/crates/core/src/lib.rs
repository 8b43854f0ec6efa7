//! Cover and hitting times of the chaos game on self-similar and self-affine
//! sets, with the dimension formulas that predict them.

// negated comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod carpet;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod measures;
pub mod svg;
pub mod symbolic;

pub use error::{Error, Result};
