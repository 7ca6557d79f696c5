use std::f64::consts::PI;

use crate::error::{Error, Result};

/// The constant `ϱ(κ)` multiplying the Gaussian-type lower bound of `Q1`.
/// Lies strictly inside `(0, 1/2)` for every `κ > 1`.
pub fn varrho(kappa: f64) -> Result<f64> {
    if kappa.is_nan() || kappa <= 1.0 || kappa.is_infinite() {
        return Err(Error::domain("varrho", format!("requires finite kappa > 1, got {kappa}")));
    }
    let km1 = kappa - 1.0;
    let c = PI * km1 + 2.0;
    Ok((1.0 / c).exp() / (2.0 * kappa) * (km1 * c / PI).sqrt())
}

/// `ϱ(κ) sqrt(b/a) exp(-κ (b-a)^2 / 2)`, a lower bound on `Q1(a, b)` for
/// `0 < a < b` when `b` is large.
pub fn marcum_q1_lower_bound(a: f64, b: f64, kappa: f64) -> Result<f64> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::domain(
            "marcum_q1_lower_bound",
            format!("requires 0 < a < b, got a={a}, b={b}"),
        ));
    }
    let rho = varrho(kappa)?;
    let d = b - a;
    Ok(rho * (b / a).sqrt() * (-0.5 * kappa * d * d).exp())
}
