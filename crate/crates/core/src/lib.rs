#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod measures;
pub mod reference;
pub mod sampler;
pub mod scheme;
pub mod special;

pub use error::{Error, Result};
