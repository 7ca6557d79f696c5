//! System description, spatial correlation and channel samplers.
//!
//! Port 1 carries the shared complex Gaussian factor `x_0 + j y_0`; every
//! other port mixes it with its own innovation:
//!
//! ```text
//! g_1 = σ (x_0 + j y_0)
//! g_k = σ (sqrt(1-μ_k²) x_k + μ_k x_0) + jσ (sqrt(1-μ_k²) y_k + μ_k y_0),  k > 1
//! ```
//!
//! with all factors i.i.d. `N(0, 1/2)`. Port indices are 0-based in the API:
//! index 0 is the reference port.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::format_sig;
use crate::specfun::bessel_j0;

/// Terminal speed and carrier wavelength; `f_m = speed / wavelength`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Doppler {
    pub speed: f64,
    pub wavelength: f64,
}

impl Doppler {
    pub fn max_doppler(&self) -> f64 {
        self.speed / self.wavelength
    }
}

/// An N-port fluid antenna occupying `width` wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FasConfig {
    pub n_ports: usize,
    /// Aperture in wavelengths.
    pub width: f64,
    /// Average SNR `Γ` in dB.
    pub avg_snr_db: f64,
    /// `E[r_k²]`.
    pub sigma2: f64,
    pub doppler: Option<Doppler>,
}

impl FasConfig {
    pub fn new(n_ports: usize, width: f64, avg_snr_db: f64) -> Result<Self> {
        let c = FasConfig {
            n_ports,
            width,
            avg_snr_db,
            sigma2: 1.0,
            doppler: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_doppler(mut self, speed: f64, wavelength: f64) -> Result<Self> {
        self.doppler = Some(Doppler { speed, wavelength });
        self.validate()?;
        Ok(self)
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Result<Self> {
        self.sigma2 = sigma2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ports == 0 {
            return Err(Error::config("n_ports", "must be at least 1"));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::config("width", format!("must be positive, got {}", self.width)));
        }
        if !self.avg_snr_db.is_finite() {
            return Err(Error::config("avg_snr_db", "must be finite"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::config("sigma2", format!("must be positive, got {}", self.sigma2)));
        }
        if let Some(d) = &self.doppler {
            if !(d.speed > 0.0 && d.speed.is_finite()) {
                return Err(Error::config("speed", format!("must be positive, got {}", d.speed)));
            }
            if !(d.wavelength > 0.0 && d.wavelength.is_finite()) {
                return Err(Error::config(
                    "wavelength",
                    format!("must be positive, got {}", d.wavelength),
                ));
            }
        }
        Ok(())
    }

    /// `Γ` as a linear ratio.
    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.avg_snr_db / 10.0)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn max_doppler(&self) -> Result<f64> {
        self.doppler
            .map(|d| d.max_doppler())
            .ok_or_else(|| Error::config("doppler", "speed and wavelength are required"))
    }
}

/// Correlation of each port with the reference port; `mu()[0] == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile {
    mu: Vec<f64>,
}

impl CorrelationProfile {
    /// Builds a profile from explicit coefficients. The first entry must be 1
    /// and all entries must lie in `[-1, 1]`.
    pub fn from_mu(mu: Vec<f64>) -> Result<Self> {
        if mu.first() != Some(&1.0) {
            return Err(Error::config("mu", "first entry must be exactly 1"));
        }
        if let Some(bad) = mu.iter().find(|m| !(m.abs() <= 1.0)) {
            return Err(Error::config("mu", format!("|mu| must not exceed 1, got {bad}")));
        }
        Ok(CorrelationProfile { mu })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn n_ports(&self) -> usize {
        self.mu.len()
    }

    fn check_matches(&self, config: &FasConfig) -> Result<()> {
        if self.mu.len() != config.n_ports {
            return Err(Error::config(
                "n_ports",
                format!(
                    "profile has {} ports but configuration has {}",
                    self.mu.len(),
                    config.n_ports
                ),
            ));
        }
        Ok(())
    }
}

/// Jakes spatial correlation of evenly spaced ports:
/// `μ_k = J0(2π (k-1) W / (N-1))` for 1-based `k`.
pub fn correlation_profile(config: &FasConfig) -> Result<CorrelationProfile> {
    config.validate()?;
    let n = config.n_ports;
    let mut mu = Vec::with_capacity(n);
    mu.push(1.0);
    for k in 1..n {
        let arg = 2.0 * PI * k as f64 * config.width / (n - 1) as f64;
        mu.push(bessel_j0(arg)?);
    }
    Ok(CorrelationProfile { mu })
}

/// Index and value of the strongest envelope; ties go to the lowest index.
pub fn select_best(envelopes: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &r) in envelopes.iter().enumerate() {
        if r > best.1 {
            best = (i, r);
        }
    }
    best
}

/// One joint draw of all port envelopes.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub envelopes: Vec<f64>,
    /// 0-based index of the selected port.
    pub best_port: usize,
    pub best_envelope: f64,
}

/// Mixing weights `(shared, own)` per port for the one-factor construction.
fn mixing_weights(profile: &CorrelationProfile) -> Vec<(f64, f64)> {
    profile
        .mu
        .iter()
        .map(|&m| (m, (1.0 - m * m).max(0.0).sqrt()))
        .collect()
}

/// Repeated independent draws of the port envelopes from one seeded stream.
#[derive(Debug, Clone)]
pub struct PortSampler {
    rng: ChaCha8Rng,
    weights: Vec<(f64, f64)>,
    sigma: f64,
}

impl PortSampler {
    pub fn new(config: &FasConfig, profile: &CorrelationProfile, seed: u64) -> Result<Self> {
        config.validate()?;
        profile.check_matches(config)?;
        Ok(PortSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            weights: mixing_weights(profile),
            sigma: config.sigma(),
        })
    }

    fn gaussian(&mut self) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        z * FRAC_1_SQRT_2
    }

    /// Fills `envelopes` (length N) and returns the best port and envelope.
    #[allow(clippy::needless_range_loop)]
    pub fn draw_into(&mut self, envelopes: &mut [f64]) -> (usize, f64) {
        debug_assert_eq!(envelopes.len(), self.weights.len());
        let x0 = self.gaussian();
        let y0 = self.gaussian();
        envelopes[0] = self.sigma * x0.hypot(y0);
        for k in 1..self.weights.len() {
            let (shared, own) = self.weights[k];
            let xk = self.gaussian();
            let yk = self.gaussian();
            let re = own * xk + shared * x0;
            let im = own * yk + shared * y0;
            envelopes[k] = self.sigma * re.hypot(im);
        }
        select_best(envelopes)
    }

    pub fn draw(&mut self) -> ChannelSample {
        let mut envelopes = vec![0.0; self.weights.len()];
        let (best_port, best_envelope) = self.draw_into(&mut envelopes);
        ChannelSample {
            envelopes,
            best_port,
            best_envelope,
        }
    }
}

/// A single draw of the correlated channel, reproducible from `seed`.
pub fn sample_ports(
    config: &FasConfig,
    profile: &CorrelationProfile,
    seed: u64,
) -> Result<ChannelSample> {
    Ok(PortSampler::new(config, profile, seed)?.draw())
}

/// Sampled envelope trajectories of all ports and of the selected port.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePath {
    pub sample_rate: f64,
    pub duration: f64,
    n_ports: usize,
    /// Row-major `[time][port]`.
    per_port: Vec<f64>,
    pub best: Vec<f64>,
}

impl EnvelopePath {
    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn len(&self) -> usize {
        self.best.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best.is_empty()
    }

    /// Envelopes of all ports at time index `t`.
    pub fn row(&self, t: usize) -> &[f64] {
        &self.per_port[t * self.n_ports..(t + 1) * self.n_ports]
    }

    /// Trajectory of one port.
    pub fn port(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.per_port.iter().skip(k).step_by(self.n_ports).copied()
    }

    pub fn time(&self, t: usize) -> f64 {
        t as f64 / self.sample_rate
    }

    /// CSV with header `t,r_1,...,r_N,r_fas`, 9 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut header = String::from("t");
        for k in 1..=self.n_ports {
            header.push_str(&format!(",r_{k}"));
        }
        header.push_str(",r_fas");
        writeln!(out, "{header}")?;
        for t in 0..self.len() {
            let mut line = format_sig(self.time(t));
            for &r in self.row(t) {
                line.push(',');
                line.push_str(&format_sig(r));
            }
            line.push(',');
            line.push_str(&format_sig(self.best[t]));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Sum-of-sinusoids Gaussian process with a Jakes spectrum and variance 1/2.
///
/// `x(t) = M^{-1/2} Σ cos(2π f_m cos(α_n) t + φ_n)` with quarter-circle
/// angles `α_n = (2πn - π + θ)/(4M)`; the time-average autocorrelation is
/// `(1/M) Σ cos(2π f_m cos(α_n) τ) / 2 → J0(2π f_m τ) / 2`.
#[derive(Debug, Clone)]
pub struct JakesProcess {
    omega: Vec<f64>,
    phase: Vec<f64>,
    scale: f64,
}

impl JakesProcess {
    pub fn new<R: Rng>(max_doppler: f64, n_oscillators: usize, rng: &mut R) -> Self {
        let m = n_oscillators as f64;
        let theta: f64 = rng.random_range(-PI..PI);
        let omega = (1..=n_oscillators)
            .map(|n| {
                let alpha = (2.0 * PI * n as f64 - PI + theta) / (4.0 * m);
                2.0 * PI * max_doppler * alpha.cos()
            })
            .collect();
        let phase = (0..n_oscillators)
            .map(|_| rng.random_range(-PI..PI))
            .collect();
        JakesProcess {
            omega,
            phase,
            scale: (1.0 / m).sqrt(),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.scale
            * self
                .omega
                .iter()
                .zip(&self.phase)
                .map(|(w, p)| (w * t + p).cos())
                .sum::<f64>()
    }

    /// Values at `t = i / sample_rate` for `i in 0..n`. Phasors are rotated
    /// incrementally and resynchronized exactly every 256 steps.
    pub fn sample(&self, sample_rate: f64, n: usize) -> Vec<f64> {
        const RESYNC: usize = 256;
        let dt = 1.0 / sample_rate;
        let steps: Vec<(f64, f64)> = self
            .omega
            .iter()
            .map(|w| ((w * dt).cos(), (w * dt).sin()))
            .collect();
        let mut state: Vec<(f64, f64)> = vec![(0.0, 0.0); self.omega.len()];
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            if i % RESYNC == 0 {
                let t = i as f64 * dt;
                for (s, (w, p)) in state.iter_mut().zip(self.omega.iter().zip(&self.phase)) {
                    let arg = w * t + p;
                    *s = (arg.cos(), arg.sin());
                }
            }
            out.push(self.scale * state.iter().map(|s| s.0).sum::<f64>());
            for (s, &(c, sn)) in state.iter_mut().zip(&steps) {
                *s = (s.0 * c - s.1 * sn, s.0 * sn + s.1 * c);
            }
        }
        out
    }
}

pub const DEFAULT_OSCILLATORS: usize = 64;

/// Time-evolving channel: every Gaussian factor is an independent Jakes
/// process with the configured maximum Doppler, combined across ports by the
/// one-factor construction at every instant.
pub fn sample_time_series(
    config: &FasConfig,
    profile: &CorrelationProfile,
    duration: f64,
    sample_rate: f64,
    n_oscillators: usize,
    seed: u64,
) -> Result<EnvelopePath> {
    config.validate()?;
    profile.check_matches(config)?;
    let fm = config.max_doppler()?;
    if !(sample_rate >= 32.0 * fm) {
        return Err(Error::Precondition(format!(
            "sample_rate {sample_rate} Hz is below 32 f_m = {} Hz",
            32.0 * fm
        )));
    }
    if !(duration * fm >= 100.0) {
        return Err(Error::Precondition(format!(
            "duration·f_m = {} is below 100 fading cycles",
            duration * fm
        )));
    }
    if n_oscillators == 0 {
        return Err(Error::Precondition("n_oscillators must be at least 1".into()));
    }

    let n_samples = (duration * sample_rate).round() as usize;
    let n = config.n_ports;
    let sigma = config.sigma();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factor = || JakesProcess::new(fm, n_oscillators, &mut rng).sample(sample_rate, n_samples);

    let x0 = factor();
    let y0 = factor();
    let mut per_port = vec![0.0; n_samples * n];
    for t in 0..n_samples {
        per_port[t * n] = sigma * x0[t].hypot(y0[t]);
    }
    for (k, &(shared, own)) in mixing_weights(profile).iter().enumerate().skip(1) {
        let xk = factor();
        let yk = factor();
        for t in 0..n_samples {
            let re = own * xk[t] + shared * x0[t];
            let im = own * yk[t] + shared * y0[t];
            per_port[t * n + k] = sigma * re.hypot(im);
        }
    }
    let best = per_port
        .chunks_exact(n)
        .map(|row| select_best(row).1)
        .collect();

    Ok(EnvelopePath {
        sample_rate,
        duration: n_samples as f64 / sample_rate,
        n_ports: n,
        per_port,
        best,
    })
}
