//! Simulation estimates of the analytic metrics, with normal-approximation
//! 95% confidence half-widths in `abs_error_estimate`.
//!
//! Draws are split into batches, each with its own seed derived from the
//! master seed, simulated in parallel and merged in batch order. Results are
//! therefore bit-identical for a given seed regardless of thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{Method, MetricResult};
use crate::channel::{sample_time_series, CorrelationProfile, FasConfig, PortSampler, DEFAULT_OSCILLATORS};
use crate::error::{Error, Result};

const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSpec {
    pub n_samples: u64,
    pub seed: u64,
    pub batch: u64,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec {
            n_samples: 100_000,
            seed: 0,
            batch: 10_000,
        }
    }
}

impl McSpec {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        McSpec {
            n_samples,
            seed,
            ..McSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1000 {
            return Err(Error::config("n_samples", format!("must be at least 1000, got {}", self.n_samples)));
        }
        if self.batch == 0 {
            return Err(Error::config("batch", "must be positive"));
        }
        Ok(())
    }

    fn batches(&self) -> Vec<(u64, u64)> {
        let count = self.n_samples.div_ceil(self.batch);
        (0..count)
            .map(|i| {
                let len = self.batch.min(self.n_samples - i * self.batch);
                (batch_seed(self.seed, i), len)
            })
            .collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn batch_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index)
}

/// Streaming mean and variance (Welford), mergeable across batches (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / n;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

fn run_batches<R, F>(config: &FasConfig, profile: &CorrelationProfile, mc: &McSpec, body: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&mut PortSampler, &mut [f64], u64) -> R + Sync,
{
    config.validate()?;
    mc.validate()?;
    // surface profile mismatches before fanning out
    PortSampler::new(config, profile, 0)?;
    mc.batches()
        .into_par_iter()
        .map(|(seed, len)| {
            let mut sampler = PortSampler::new(config, profile, seed)?;
            let mut env = vec![0.0; config.n_ports];
            Ok(body(&mut sampler, &mut env, len))
        })
        .collect()
}

fn proportion(hits: u64, total: u64, config: &FasConfig) -> MetricResult {
    let p = hits as f64 / total as f64;
    let half = Z95 * (p * (1.0 - p) / total as f64).sqrt();
    MetricResult::new(p, half, Method::MonteCarlo, Some(config))
}

/// Fraction of draws with `r_FAS <= r_level`.
pub fn mc_outage(
    config: &FasConfig,
    profile: &CorrelationProfile,
    r_level: f64,
    mc: &McSpec,
) -> Result<MetricResult> {
    Ok(mc_outage_curve(config, profile, &[r_level], mc)?.remove(0))
}

/// Empirical CDF of `r_FAS` at every level in `levels`, from one set of draws.
pub fn mc_outage_curve(
    config: &FasConfig,
    profile: &CorrelationProfile,
    levels: &[f64],
    mc: &McSpec,
) -> Result<Vec<MetricResult>> {
    if let Some(&bad) = levels.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
        return Err(Error::domain("mc_outage", format!("level must be >= 0, got {bad}")));
    }
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&i, &j| levels[i].total_cmp(&levels[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| levels[i]).collect();

    let per_batch = run_batches(config, profile, mc, |sampler, env, len| {
        // hist[j] counts draws with sorted[j-1] < r <= sorted[j]
        let mut hist = vec![0u64; sorted.len() + 1];
        for _ in 0..len {
            let (_, best) = sampler.draw_into(env);
            hist[sorted.partition_point(|&l| l < best)] += 1;
        }
        hist
    })?;

    let mut hist = vec![0u64; sorted.len() + 1];
    for h in &per_batch {
        for (a, b) in hist.iter_mut().zip(h) {
            *a += b;
        }
    }
    let mut out = vec![MetricResult::new(0.0, 0.0, Method::MonteCarlo, Some(config)); levels.len()];
    let mut cumulative = 0;
    for (j, &i) in order.iter().enumerate() {
        cumulative += hist[j];
        out[i] = if levels[i] == 0.0 {
            MetricResult::new(0.0, 0.0, Method::MonteCarlo, Some(config))
        } else {
            proportion(cumulative, mc.n_samples, config)
        };
    }
    Ok(out)
}

/// Sample mean of `ln(1 + Γ r_FAS²/σ²)`.
pub fn mc_capacity(config: &FasConfig, profile: &CorrelationProfile, mc: &McSpec) -> Result<MetricResult> {
    let scale = config.snr_linear() / config.sigma2;
    let per_batch = run_batches(config, profile, mc, |sampler, env, len| {
        let mut s = RunningStats::new();
        for _ in 0..len {
            let (_, best) = sampler.draw_into(env);
            s.push((scale * best * best).ln_1p());
        }
        s
    })?;
    let mut total = RunningStats::new();
    for s in &per_batch {
        total.merge(s);
    }
    Ok(MetricResult::new(total.mean(), Z95 * total.std_error(), Method::MonteCarlo, Some(config)))
}

/// How often each port is selected.
pub fn mc_best_port_histogram(config: &FasConfig, profile: &CorrelationProfile, mc: &McSpec) -> Result<Vec<u64>> {
    let n = config.n_ports;
    let per_batch = run_batches(config, profile, mc, |sampler, env, len| {
        let mut hist = vec![0u64; n];
        for _ in 0..len {
            hist[sampler.draw_into(env).0] += 1;
        }
        hist
    })?;
    let mut hist = vec![0u64; n];
    for h in &per_batch {
        for (a, b) in hist.iter_mut().zip(h) {
            *a += b;
        }
    }
    Ok(hist)
}

/// Capacity of L-branch MRC over i.i.d. unit-mean Rayleigh branches, by
/// simulating the post-combining SNR `Γ Σ|h_l|²`.
pub fn mc_mrc_capacity(n_branches: usize, gamma_db: f64, mc: &McSpec) -> Result<MetricResult> {
    if n_branches == 0 {
        return Err(Error::config("n_branches", "must be at least 1"));
    }
    // independent unit-variance ports, drawn by the channel sampler itself
    let config = FasConfig::new(n_branches, 1.0, gamma_db)?;
    let profile = CorrelationProfile::from_mu(
        std::iter::once(1.0).chain(std::iter::repeat_n(0.0, n_branches - 1)).collect(),
    )?;
    let gamma = config.snr_linear();
    let per_batch = run_batches(&config, &profile, mc, |sampler, env, len| {
        let mut s = RunningStats::new();
        for _ in 0..len {
            sampler.draw_into(env);
            let total: f64 = env.iter().map(|r| r * r).sum();
            s.push((gamma * total).ln_1p());
        }
        s
    })?;
    let mut total = RunningStats::new();
    for s in &per_batch {
        total.merge(s);
    }
    Ok(MetricResult::new(total.mean(), Z95 * total.std_error(), Method::MonteCarlo, None))
}

/// Crossing statistics of a sampled `r_FAS` path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingCounts {
    pub up: u64,
    pub down: u64,
    pub samples_below: u64,
    pub samples: u64,
}

/// Counts up- and down-crossings of `level` between consecutive samples.
pub fn count_crossings(path: &[f64], level: f64) -> CrossingCounts {
    let mut c = CrossingCounts {
        up: 0,
        down: 0,
        samples_below: 0,
        samples: path.len() as u64,
    };
    let mut prev_below = None;
    for &r in path {
        let below = r < level;
        if below {
            c.samples_below += 1;
        }
        match (prev_below, below) {
            (Some(true), false) => c.up += 1,
            (Some(false), true) => c.down += 1,
            _ => {}
        }
        prev_below = Some(below);
    }
    c
}

/// Empirical level crossing rate (up-crossings per second) and average fade
/// duration (time below the level per fade, seconds) on one simulated path
/// seeded by `mc.seed`.
pub fn mc_lcr_afd(
    config: &FasConfig,
    profile: &CorrelationProfile,
    r_level: f64,
    duration: f64,
    sample_rate: f64,
    mc: &McSpec,
) -> Result<(MetricResult, MetricResult)> {
    config.validate()?;
    let fm = config.max_doppler()?;
    if !(duration * fm >= 1e3) {
        return Err(Error::Precondition(format!(
            "duration·f_m = {} is below 1000; the crossing estimate would be too noisy",
            duration * fm
        )));
    }
    if !(r_level > 0.0) {
        return Err(Error::domain("mc_lcr_afd", format!("level must be > 0, got {r_level}")));
    }
    let path = sample_time_series(config, profile, duration, sample_rate, DEFAULT_OSCILLATORS, mc.seed)?;
    let c = count_crossings(&path.best, r_level);
    let span = path.duration;
    let rate = c.up as f64 / span;
    // Poisson approximation for the crossing count
    let rate_err = Z95 * (c.up as f64).sqrt() / span;
    let lcr = MetricResult::new(rate, rate_err, Method::MonteCarlo, Some(config));
    let afd = if c.down == 0 {
        MetricResult::new(f64::INFINITY, f64::INFINITY, Method::MonteCarlo, Some(config))
    } else {
        let tau = c.samples_below as f64 / path.sample_rate / c.down as f64;
        MetricResult::new(tau, Z95 * tau / (c.down as f64).sqrt(), Method::MonteCarlo, Some(config))
    };
    Ok((lcr, afd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::correlation_profile;

    fn setup(n: usize, w: f64) -> (FasConfig, CorrelationProfile) {
        let c = FasConfig::new(n, w, 10.0).unwrap();
        let p = correlation_profile(&c).unwrap();
        (c, p)
    }

    #[test]
    fn running_stats_match_two_pass() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..100_000).map(|_| 5.0 + rng.random::<f64>()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;

        let mut whole = RunningStats::new();
        xs.iter().for_each(|&x| whole.push(x));
        let mut merged = RunningStats::new();
        for chunk in xs.chunks(7_331) {
            let mut s = RunningStats::new();
            chunk.iter().for_each(|&x| s.push(x));
            merged.merge(&s);
        }
        for s in [whole, merged] {
            assert!(((s.mean() - mean) / mean).abs() < 1e-12);
            assert!(((s.variance() - var) / var).abs() < 1e-12);
        }
    }

    #[test]
    fn batches_cover_all_samples() {
        let mc = McSpec { n_samples: 25_001, seed: 1, batch: 10_000 };
        let b = mc.batches();
        assert_eq!(b.iter().map(|x| x.1).sum::<u64>(), 25_001);
        assert_eq!(b.len(), 3);
        assert_ne!(b[0].0, b[1].0);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let (c, p) = setup(4, 0.5);
        let mc = McSpec::new(20_000, 42);
        assert_eq!(mc_capacity(&c, &p, &mc).unwrap(), mc_capacity(&c, &p, &mc).unwrap());
        assert_eq!(mc_outage(&c, &p, 1.0, &mc).unwrap(), mc_outage(&c, &p, 1.0, &mc).unwrap());
        let other = mc_capacity(&c, &p, &McSpec::new(20_000, 43)).unwrap();
        assert_ne!(other.value, mc_capacity(&c, &p, &mc).unwrap().value);
    }

    #[test]
    fn zero_level_outage_is_exactly_zero() {
        let (c, p) = setup(3, 0.5);
        let r = mc_outage(&c, &p, 0.0, &McSpec::new(1000, 0)).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.abs_error_estimate, 0.0);
    }

    #[test]
    fn single_port_outage_is_rayleigh() {
        let (c, p) = setup(1, 1.0);
        let r = mc_outage(&c, &p, 1.0, &McSpec::new(200_000, 5)).unwrap();
        let exact = 1.0 - (-1.0f64).exp();
        assert!((r.value - exact).abs() < 3.0 * r.standard_error());
    }

    #[test]
    fn curve_is_monotone_and_matches_pointwise() {
        let (c, p) = setup(3, 0.5);
        let mc = McSpec::new(10_000, 9);
        let levels = [1.5, 0.3, 1.0];
        let curve = mc_outage_curve(&c, &p, &levels, &mc).unwrap();
        assert!(curve[1].value <= curve[2].value && curve[2].value <= curve[0].value);
        assert_eq!(curve[2], mc_outage(&c, &p, 1.0, &mc).unwrap());
    }

    #[test]
    fn capacity_vanishes_at_low_snr() {
        let c = FasConfig::new(2, 0.5, -60.0).unwrap();
        let p = correlation_profile(&c).unwrap();
        let r = mc_capacity(&c, &p, &McSpec::new(1000, 1)).unwrap();
        assert!(r.value > 0.0 && r.value < 1e-5);
    }

    #[test]
    fn independent_ports_are_selected_uniformly() {
        let c = FasConfig::new(4, 1.0, 10.0).unwrap();
        let p = CorrelationProfile::from_mu(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let mc = McSpec::new(200_000, 11);
        let h = mc_best_port_histogram(&c, &p, &mc).unwrap();
        let expect = mc.n_samples as f64 / 4.0;
        let sd = (expect * 0.75).sqrt();
        for &k in &h {
            assert!((k as f64 - expect).abs() < 4.0 * sd, "{h:?}");
        }
    }

    #[test]
    fn equally_correlated_ports_are_exchangeable() {
        let c = FasConfig::new(5, 1.0, 10.0).unwrap();
        let p = CorrelationProfile::from_mu(vec![1.0, 0.6, 0.6, 0.6, 0.6]).unwrap();
        let mc = McSpec::new(200_000, 12);
        let h = mc_best_port_histogram(&c, &p, &mc).unwrap();
        let others = &h[1..];
        let mean = others.iter().sum::<u64>() as f64 / 4.0;
        let q = mean / mc.n_samples as f64;
        let sd = (mc.n_samples as f64 * q * (1.0 - q)).sqrt();
        for &k in others {
            assert!((k as f64 - mean).abs() < 4.0 * sd, "{h:?}");
        }
    }

    #[test]
    fn crossing_counter() {
        let path = [2.0, 0.5, 0.4, 2.0, 0.1, 3.0, 0.9];
        let c = count_crossings(&path, 1.0);
        assert_eq!((c.up, c.down, c.samples_below), (2, 3, 4));
    }

    #[test]
    fn lcr_requires_long_path_and_doppler() {
        let (c, p) = setup(1, 1.0);
        let mc = McSpec::default();
        assert!(matches!(mc_lcr_afd(&c, &p, 1.0, 10.0, 640.0, &mc), Err(Error::Config { .. })));
        let c = c.with_doppler(1.0, 0.1).unwrap();
        assert!(matches!(mc_lcr_afd(&c, &p, 1.0, 10.0, 640.0, &mc), Err(Error::Precondition(_))));
    }

    #[test]
    fn spec_rejects_few_samples() {
        let (c, p) = setup(2, 1.0);
        assert!(mc_capacity(&c, &p, &McSpec::new(999, 0)).is_err());
    }
}
