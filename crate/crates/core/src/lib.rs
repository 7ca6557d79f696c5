#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod error;
pub mod golden;
pub mod montecarlo;
pub mod output;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
