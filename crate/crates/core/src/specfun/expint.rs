use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Upper incomplete gamma function of order zero, `Γ(0, x) = E1(x)`.
pub fn upper_incomplete_gamma_zero(x: f64) -> Result<f64> {
    check(x, "upper_incomplete_gamma_zero")?;
    Ok(if x <= 1.0 {
        e1_series(x)
    } else {
        (-x).exp() * scaled_continued_fraction(x)
    })
}

/// `e^x Γ(0, x)`, which stays representable for large `x` where `Γ(0, x)`
/// underflows. This is the value of `int_0^inf e^{-x y} / (1 + y) dy`.
pub fn exp_scaled_gamma_zero(x: f64) -> Result<f64> {
    check(x, "exp_scaled_gamma_zero")?;
    Ok(if x <= 1.0 {
        x.exp() * e1_series(x)
    } else {
        scaled_continued_fraction(x)
    })
}

fn check(x: f64, func: &'static str) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::domain(func, format!("requires x > 0, got {x}")));
    }
    Ok(())
}

fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    let mut k = 1.0;
    loop {
        term *= -x / k;
        let contrib = -term / k;
        sum += contrib;
        if contrib.abs() < 1e-17 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    -EULER_GAMMA - x.ln() + sum
}

/// Modified Lentz evaluation of `e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...)))`.
fn scaled_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}
