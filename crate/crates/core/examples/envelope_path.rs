//! Writes a short simulated envelope path as CSV to stdout.

use std::io;

use fasperf::channel::{correlation_profile, sample_time_series, FasConfig, DEFAULT_OSCILLATORS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = FasConfig::new(3, 0.5, 10.0)?.with_doppler(1.0, 0.1)?;
    let profile = correlation_profile(&config)?;
    let fm = config.max_doppler()?;
    let path = sample_time_series(&config, &profile, 100.0 / fm, 32.0 * fm, DEFAULT_OSCILLATORS, 5)?;
    eprintln!("{} samples at {} Hz", path.len(), path.sample_rate);
    path.write_csv(io::stdout().lock())?;
    Ok(())
}
