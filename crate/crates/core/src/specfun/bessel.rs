use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 8.0;
const RECURRENCE_LIMIT: f64 = 25.0;

/// Bessel function of the first kind, order zero.
///
/// Accurate to about 1e-15 absolute on the whole real line. Evaluated on
/// `|x|`, so `bessel_j0(x) == bessel_j0(-x)` holds bit for bit.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("bessel_j0", format!("non-finite argument {x}")));
    }
    let x = x.abs();
    Ok(if x <= SERIES_LIMIT {
        j0_series(x)
    } else if x <= RECURRENCE_LIMIT {
        j0_miller(x)
    } else {
        j0_asymptotic(x)
    })
}

fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-3) {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Backward recurrence `J_{k-1} = (2k/x) J_k - J_{k+1}` from an order well
/// above `x`, normalized with `J_0 + 2 (J_2 + J_4 + ...) = 1`.
fn j0_miller(x: f64) -> f64 {
    let start = 2 * ((x as usize + 50) / 2);
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut even_sum = 0.0;
    for k in (1..=start).rev() {
        if k % 2 == 0 {
            even_sum += cur;
        }
        let prev = (2.0 * k as f64 / x) * cur - next;
        next = cur;
        cur = prev;
    }
    cur / (cur + 2.0 * even_sum)
}

/// Hankel expansion `sqrt(2/(pi x)) (P cos chi - Q sin chi)`, `chi = x - pi/4`.
fn j0_asymptotic(x: f64) -> f64 {
    // b_k = prod_{j<=k} (2j-1)^2 / (k! 8^k) / x^k
    let mut p = 1.0;
    let mut q = 0.0;
    let mut b = 1.0;
    let mut k = 1usize;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = b * odd * odd / (k as f64 * 8.0 * x);
        if next > b {
            break; // asymptotic series has started to diverge
        }
        b = next;
        // k odd contributes to Q with sign -(-1)^((k-1)/2); k even to P with (-1)^(k/2)
        match k % 4 {
            0 => p += b,
            1 => q -= b,
            2 => p -= b,
            _ => q += b,
        }
        if b < 1e-17 {
            break;
        }
        k += 1;
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Exponentially scaled modified Bessel functions `e^{-x} I_k(x)` for
/// `k = 0..count`, by Miller's backward recurrence normalized with
/// `I_0 + 2 sum I_k = e^x`. Requires `x > 0`.
pub(crate) fn scaled_bessel_i_sequence(x: f64, count: usize) -> Vec<f64> {
    debug_assert!(x > 0.0);
    let start = count.max(1) + 40 + (10.0 * x.sqrt()) as usize;
    let mut values = vec![0.0; start + 2];
    values[start] = 1.0;
    for k in (1..=start).rev() {
        let v = (2.0 * k as f64 / x) * values[k] + values[k + 1];
        values[k - 1] = v;
        if v > 1e200 {
            for w in values[k - 1..].iter_mut() {
                *w *= 1e-200;
            }
        }
    }
    let norm: f64 = values[0] + 2.0 * values[1..=start].iter().sum::<f64>();
    values.truncate(count);
    for v in values.iter_mut() {
        *v /= norm;
    }
    values
}

/// `e^{-x} I_0(x)` for `x >= 0`.
pub(crate) fn scaled_bessel_i0(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if x <= 30.0 {
        return scaled_bessel_i_sequence(x, 1)[0];
    }
    // e^{-x} I_0(x) ~ (2 pi x)^{-1/2} sum ((2k-1)!!)^2 / (k! (8x)^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1usize;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (k as f64 * 8.0 * x);
        if next > term || next < 1e-17 * sum {
            break;
        }
        term = next;
        sum += term;
        k += 1;
    }
    sum / (2.0 * PI * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;


    #[test]
    fn j0_at_zero_is_one() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn first_zero() {
        assert!(bessel_j0(2.404825557695773).unwrap().abs() < 1e-9);
    }

    #[test]
    fn j0_at_pi_matches_golden() {
        let v = bessel_j0(PI).unwrap();
        assert!((v - -0.304_242_177_644_093_83).abs() < 1e-14);
    }

    #[test]
    fn branches_agree_at_crossovers() {
        for &x in &[7.5, 8.0, 8.5] {
            assert!((j0_miller(x) - j0_series(x)).abs() < 1e-13, "x={x}");
        }
        for &x in &[24.0, 25.0, 26.0, 40.0] {
            assert!((j0_miller(x) - j0_asymptotic(x)).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_j0(f64::INFINITY).is_err());
    }

    #[test]
    fn scaled_i_sequence_known_values() {
        // e^{-1} I_0(1), e^{-1} I_1(1)
        let v = scaled_bessel_i_sequence(1.0, 3);
        assert!((v[0] - 0.465_759_607_593_640_43).abs() < 1e-15);
        assert!((v[1] - 0.207_910_415_349_708_5).abs() < 1e-15);
        // normalization over the full sequence
        let all = scaled_bessel_i_sequence(12.0, 200);
        let s = all[0] + 2.0 * all[1..].iter().sum::<f64>();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scaled_i0_branches_agree() {
        let a = scaled_bessel_i_sequence(30.0, 1)[0];
        let b = {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..40 {
                let odd = (2 * k - 1) as f64;
                term *= odd * odd / (k as f64 * 240.0);
                sum += term;
            }
            sum / (2.0 * PI * 30.0).sqrt()
        };
        assert!((a - b).abs() < 1e-14);
        assert!((scaled_bessel_i0(30.0001) - a).abs() < 1e-6);
    }
}
