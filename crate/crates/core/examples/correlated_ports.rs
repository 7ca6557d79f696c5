//! Port correlations of a fluid antenna and a few joint channel draws.

use fasperf::channel::{correlation_profile, FasConfig, PortSampler};

fn main() -> fasperf::Result<()> {
    let config = FasConfig::new(6, 0.5, 10.0)?;
    let profile = correlation_profile(&config)?;
    println!("mu = {:.4?}", profile.mu());

    let mut sampler = PortSampler::new(&config, &profile, 2024)?;
    for _ in 0..5 {
        let s = sampler.draw();
        let env: Vec<String> = s.envelopes.iter().map(|r| format!("{r:.3}")).collect();
        println!("[{}] -> port {} ({:.3})", env.join(" "), s.best_port + 1, s.best_envelope);
    }
    Ok(())
}
