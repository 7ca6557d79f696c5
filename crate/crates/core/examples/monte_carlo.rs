//! Seeded Monte Carlo capacity with confidence intervals.

use fasperf::analytic::{ergodic_capacity, QuadratureSpec};
use fasperf::channel::{correlation_profile, FasConfig};
use fasperf::montecarlo::{mc_capacity, McSpec};

fn main() -> fasperf::Result<()> {
    let config = FasConfig::new(10, 0.5, 10.0)?;
    let profile = correlation_profile(&config)?;
    let exact = ergodic_capacity(&config, &profile, &QuadratureSpec::default())?;
    println!("quadrature: {:.6} nats", exact.value);

    for samples in [10_000, 100_000, 1_000_000] {
        let r = mc_capacity(&config, &profile, &McSpec::new(samples, 99))?;
        println!("M = {samples:>7}: {:.6} +- {:.6}", r.value, r.abs_error_estimate);
    }
    let again = mc_capacity(&config, &profile, &McSpec::new(100_000, 99))?;
    assert_eq!(again, mc_capacity(&config, &profile, &McSpec::new(100_000, 99))?);
    Ok(())
}
