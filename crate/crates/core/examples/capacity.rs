//! Ergodic capacity against the number of ports, next to MRC baselines.

use fasperf::analytic::{ergodic_capacity, mrc_ergodic_capacity, QuadratureSpec};
use fasperf::channel::{correlation_profile, FasConfig};

fn main() -> fasperf::Result<()> {
    let quad = QuadratureSpec::default();
    let snr_db = 10.0;

    for l in 1..=3 {
        println!("MRC L = {l}: {:.4} nats", mrc_ergodic_capacity(l, snr_db, &quad)?.value);
    }
    println!("N, W = 0.1, W = 0.5, W = 1");
    for n in [1, 2, 4, 6, 8, 10, 12] {
        let mut row = vec![n.to_string()];
        for w in [0.1, 0.5, 1.0] {
            let config = FasConfig::new(n, w, snr_db)?;
            let profile = correlation_profile(&config)?;
            row.push(format!("{:.4}", ergodic_capacity(&config, &profile, &quad)?.value));
        }
        println!("{}", row.join(", "));
    }
    Ok(())
}
