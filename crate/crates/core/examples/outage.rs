//! Outage probability of best-port selection against simulation.

use fasperf::analytic::{outage_probability, QuadratureSpec};
use fasperf::channel::{correlation_profile, FasConfig};
use fasperf::montecarlo::{mc_outage_curve, McSpec};

fn main() -> fasperf::Result<()> {
    let quad = QuadratureSpec::default();
    let levels = [0.3, 0.6, 1.0, 1.5, 2.0];
    let mc = McSpec::new(200_000, 1);

    for n in [1, 3, 10] {
        let config = FasConfig::new(n, 0.5, 10.0)?;
        let profile = correlation_profile(&config)?;
        let sim = mc_outage_curve(&config, &profile, &levels, &mc)?;
        println!("N = {n}");
        for (r, s) in levels.iter().zip(&sim) {
            let p = outage_probability(&config, &profile, *r, &quad)?;
            println!("  r = {r:.1} sigma: {:.6e}  (simulated {:.6e} +- {:.1e})", p.value, s.value, s.abs_error_estimate);
        }
    }
    Ok(())
}
