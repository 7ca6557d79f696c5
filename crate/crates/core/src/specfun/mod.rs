//! Scalar special functions: Bessel `J0`, Marcum `Q1` and its lower bound,
//! and the order-zero upper incomplete gamma function.
//!
//! All functions are pure and thread-safe.

mod bessel;
mod bound;
mod expint;
mod marcum;

pub use bessel::bessel_j0;
pub use bound::{marcum_q1_lower_bound, varrho};
pub use expint::{exp_scaled_gamma_zero, upper_incomplete_gamma_zero};
pub use marcum::marcum_q1;

use crate::error::{Error, Result};

/// Convergence controls for series and quadrature inside special functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_terms: 10_000,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_terms: usize) -> Result<Self> {
        let t = Tolerance {
            abs_tol,
            rel_tol,
            max_terms,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::config("abs_tol", "must be positive"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::config("rel_tol", "must be positive"));
        }
        if self.max_terms == 0 {
            return Err(Error::config("max_terms", "must be at least 1"));
        }
        Ok(())
    }
}
