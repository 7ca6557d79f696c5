//! Evaluates the special functions behind the analysis.

use fasperf::specfun::{
    bessel_j0, exp_scaled_gamma_zero, marcum_q1, marcum_q1_lower_bound, upper_incomplete_gamma_zero, varrho,
    Tolerance,
};

fn main() -> fasperf::Result<()> {
    let tol = Tolerance::default();

    println!("x, J0(x)");
    for x in [0.0, 1.0, 2.404825557695773, 10.0, 40.0] {
        println!("{x}, {:.15}", bessel_j0(x)?);
    }

    println!("\na, b, Q1(a, b), lower bound (kappa = 2)");
    for (a, b) in [(0.5, 3.0), (1.0, 4.0), (2.0, 6.0), (40.0, 41.0)] {
        let q = marcum_q1(a, b, &tol)?;
        let lb = marcum_q1_lower_bound(a, b, 2.0)?;
        println!("{a}, {b}, {q:.6e}, {lb:.6e}");
    }

    println!("\nx, E1(x), e^x E1(x)");
    for x in [0.01, 0.1, 1.0, 10.0, 700.0] {
        println!("{x}, {:.12e}, {:.12}", upper_incomplete_gamma_zero(x)?, exp_scaled_gamma_zero(x)?);
    }

    println!("\nvarrho(2) = {:.12}", varrho(2.0)?);
    Ok(())
}
