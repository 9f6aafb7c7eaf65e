// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod rng;

pub use error::{Error, Result};
pub mod data;
pub mod net;
pub mod retina;
pub mod robustness;
