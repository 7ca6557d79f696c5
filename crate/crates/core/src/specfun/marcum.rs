//! First-order Marcum Q-function.
//!
//! Two evaluation routes meet at `ab = 30`:
//!
//! * `ab <= 30`: the modified-Bessel series written with exponentially
//!   scaled `e^{-x} I_k(x)`, so nothing overflows even when `a` or `b` is
//!   large on its own:
//!
//!   `Q1 = e^{-(b-a)^2/2} sum_{k>=0} (a/b)^k Ie_k(ab)`            for `a < b`
//!   `Q1 = 1 - e^{-(b-a)^2/2} sum_{k>=1} (b/a)^k Ie_k(ab)`       for `a >= b`
//!
//! * `ab > 30`: an exact single-integral form. Splitting the Craig-type
//!   integrand into a constant part and a Poisson kernel gives
//!
//!   `Q1 = e^{-(b-a)^2/2} (Ie_0(ab) + J) / 2`                       for `a < b`
//!   `Q1 = 1 - e^{-(b-a)^2/2} (J - Ie_0(ab)) / 2`                   for `a > b`
//!
//!   with `J = int_0^1 exp(-2ab s^2/(1+s^2)) du`, `s = r tan(pi u / 2)` and
//!   `r = |b-a|/(b+a)`. The integrand is smooth and bounded by one.

use std::f64::consts::FRAC_PI_2;

use super::bessel::{scaled_bessel_i0, scaled_bessel_i_sequence};
use super::Tolerance;
use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, AdaptiveOptions};

const SERIES_CROSSOVER: f64 = 30.0;

/// `Q1(a, b)` for `a, b >= 0`.
pub fn marcum_q1(a: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("marcum_q1", "arguments must be finite"));
    }
    if a < 0.0 || b < 0.0 {
        return Err(Error::domain(
            "marcum_q1",
            format!("arguments must be nonnegative, got ({a}, {b})"),
        ));
    }
    if b == 0.0 {
        return Ok(1.0);
    }
    if a == 0.0 {
        return Ok((-0.5 * b * b).exp());
    }
    let x = a * b;
    let q = if x <= SERIES_CROSSOVER {
        series(a, b, tol)?
    } else {
        integral(a, b, tol)?
    };
    Ok(q.clamp(0.0, 1.0))
}

pub(crate) fn series(a: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    let x = a * b;
    let (ratio, first) = if a < b { (a / b, 0) } else { (b / a, 1) };
    let prefactor = (-0.5 * (b - a) * (b - a)).exp();
    if prefactor == 0.0 {
        return Ok(if a < b { 0.0 } else { 1.0 });
    }

    let count = 40 + (x + 10.0 * x.sqrt()) as usize;
    let ie = scaled_bessel_i_sequence(x, count);
    let eps = (tol.rel_tol.min(tol.abs_tol) * 1e-6).max(1e-17);

    let mut sum = 0.0;
    let mut power = if first == 0 { 1.0 } else { ratio };
    let mut converged = false;
    for (terms, &i_k) in ie.iter().enumerate().skip(first) {
        if terms >= tol.max_terms {
            break;
        }
        let term = power * i_k;
        sum += term;
        if term <= eps * sum || term == 0.0 {
            converged = true;
            break;
        }
        power *= ratio;
    }
    let value = if a < b {
        prefactor * sum
    } else {
        1.0 - prefactor * sum
    };
    if !converged {
        return Err(Error::Numeric {
            what: "Marcum Q1 series",
            partial: value,
            estimate: prefactor * power,
        });
    }
    Ok(value)
}

pub(crate) fn integral(a: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    let x = a * b;
    let d = b - a;
    let prefactor = (-0.5 * d * d).exp();
    if prefactor == 0.0 {
        return Ok(if a < b { 0.0 } else { 1.0 });
    }
    let ie0 = scaled_bessel_i0(x);
    let r = d.abs() / (a + b);

    let j = if r == 0.0 {
        1.0
    } else {
        let integrand = |u: f64| {
            let s = r * (FRAC_PI_2 * u).tan();
            if !s.is_finite() {
                return (-2.0 * x).exp();
            }
            let s2 = s * s;
            (-2.0 * x * s2 / (1.0 + s2)).exp()
        };
        // the mass sits where s ~ 1/sqrt(2x)
        let c = 1.0 / (r * (2.0 * x).sqrt());
        let mut points = vec![0.0];
        for m in [1.0, 4.0, 16.0] {
            let u = (c * m).atan() / FRAC_PI_2;
            if u > *points.last().unwrap() && u < 1.0 {
                points.push(u);
            }
        }
        points.push(1.0);
        let opts = AdaptiveOptions {
            abs_tol: (tol.abs_tol * 1e-2).max(1e-15),
            rel_tol: (tol.rel_tol * 1e-2).max(2e-13),
            max_subdivisions: tol.max_terms.max(10),
        };
        integrate_with_breaks(integrand, &points, &opts)
            .map_err(|e| match e {
                Error::Numeric {
                    partial, estimate, ..
                } => Error::Numeric {
                    what: "Marcum Q1 integral",
                    partial,
                    estimate,
                },
                other => other,
            })?
            .value
    };

    Ok(if a < b {
        0.5 * prefactor * (ie0 + j)
    } else {
        1.0 - 0.5 * prefactor * (j - ie0)
    })
}
