// NaN-rejecting guards are written as negated comparisons; index loops follow the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bandit;
pub mod barrier;
pub mod bm;
pub mod error;
pub mod games;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod rates;
pub mod robust;

pub use error::{Error, Result};
