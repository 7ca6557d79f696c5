//! Capacity lower bound next to the exact capacity over SNR.

use fasperf::analytic::{best_kappa, capacity_lower_bound, ergodic_capacity, BoundMethod, QuadratureSpec};
use fasperf::channel::{correlation_profile, FasConfig};

fn main() -> fasperf::Result<()> {
    let quad = QuadratureSpec::default();
    println!("N, SNR dB, exact, bound (kappa 2, closed form), bound (best kappa)");
    for n in [2, 4, 8] {
        for snr in [0.0, 10.0, 20.0] {
            let config = FasConfig::new(n, 1.0, snr)?;
            let profile = correlation_profile(&config)?;
            let exact = ergodic_capacity(&config, &profile, &quad)?.value;
            let lb = capacity_lower_bound(&config, &profile, 2.0, BoundMethod::ClosedForm, &quad)?.value;
            let (k, best) = best_kappa(&config, &profile, &quad)?;
            println!("{n}, {snr}, {exact:.4}, {lb:.4}, {:.4} (kappa {k})", best.value);
        }
    }
    Ok(())
}
