//! Level crossing rate and average fade duration, closed form and simulated.

use fasperf::analytic::{afd, lcr, QuadratureSpec};
use fasperf::channel::{correlation_profile, FasConfig};
use fasperf::montecarlo::{mc_lcr_afd, McSpec};

fn main() -> fasperf::Result<()> {
    // 3 m/s at 2.4 GHz
    let (speed, wavelength) = (3.0, 0.125);
    let quad = QuadratureSpec::default();

    for n in [1, 5] {
        let config = FasConfig::new(n, 1.0, 10.0)?.with_doppler(speed, wavelength)?;
        let profile = correlation_profile(&config)?;
        let fm = config.max_doppler()?;
        let duration = 2e3 / fm;
        let (sim_lcr, sim_afd) = mc_lcr_afd(&config, &profile, 1.0, duration, 64.0 * fm, &McSpec::new(1000, 7))?;
        println!("N = {n}, f_m = {fm} Hz, level = sigma");
        println!("  LCR {:.3} /s (simulated {:.3})", lcr(&config, 1.0)?, sim_lcr.value);
        println!(
            "  AFD {:.3e} s (simulated {:.3e})",
            afd(&config, &profile, 1.0, &quad)?.value,
            sim_afd.value
        );
    }
    Ok(())
}
