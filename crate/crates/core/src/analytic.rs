//! Closed-form and integral performance metrics of best-port selection.
//!
//! Everything is expressed in the normalized level `ρ² = r²/σ² = y/Γ`.
//! Conditioned on the reference port, port `k` is Rician, so
//!
//! ```text
//! P(r_FAS ≤ r) = ∫_0^{ρ²} e^{-t} ∏_{k≥2} [1 - Q1(α_k √t, β_k ρ)] dt
//! α_k = sqrt(2μ_k² / (1-μ_k²)),   β_k = sqrt(2 / (1-μ_k²))
//! ```
//!
//! and the ergodic capacity is `∫_0^∞ q_N(y) / (1+y) dy` with the service
//! probability `q_N = 1 - P(r_FAS ≤ sqrt(y/Θ))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::{CorrelationProfile, FasConfig};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_with_breaks, AdaptiveOptions, Integral};
use crate::specfun::{exp_scaled_gamma_zero, marcum_q1, varrho, Tolerance};

/// Ports whose correlation with the reference exceeds this are treated as
/// duplicates of it.
pub const DUPLICATE_PORT_THRESHOLD: f64 = 1.0 - 1e-9;

pub const DEFAULT_KAPPA: f64 = 2.0;

/// Candidate κ values for [`best_kappa`].
pub const KAPPA_GRID: [f64; 5] = [1.1, 1.5, 2.0, 3.0, 5.0];

/// Largest N accepted by the subset-enumeration bound.
pub const CLOSED_FORM_MAX_PORTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterTransform {
    /// `y = s·u/(1-u)` onto `u ∈ [0, 1)`.
    Rational,
    /// Finite interval, truncated where the union-bound tail drops below `abs_tol`.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub outer_transform: OuterTransform,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-7,
            abs_tol: 1e-10,
            max_subdivisions: 2000,
            outer_transform: OuterTransform::Rational,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::config("rel_tol", "must be positive"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::config("abs_tol", "must be positive"));
        }
        if self.max_subdivisions < 10 {
            return Err(Error::config("max_subdivisions", "must be at least 10"));
        }
        Ok(())
    }

    fn outer(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }

    fn inner(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            abs_tol: (self.abs_tol * 1e-2).max(1e-15),
            rel_tol: (self.rel_tol * 1e-2).max(1e-13),
            max_subdivisions: self.max_subdivisions,
        }
    }

    fn special(&self) -> Tolerance {
        Tolerance {
            abs_tol: (self.abs_tol * 1e-3).max(1e-15),
            rel_tol: (self.rel_tol * 1e-3).max(1e-13),
            max_terms: Tolerance::default().max_terms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    ProductIntegral,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::ProductIntegral => "product_integral",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub n_ports: usize,
    pub width: f64,
    pub avg_snr_db: f64,
}

impl From<&FasConfig> for ConfigSummary {
    fn from(c: &FasConfig) -> Self {
        ConfigSummary {
            n_ports: c.n_ports,
            width: c.width,
            avg_snr_db: c.avg_snr_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub method: Method,
    pub config_echo: Option<ConfigSummary>,
}

impl MetricResult {
    pub fn new(value: f64, abs_error_estimate: f64, method: Method, config: Option<&FasConfig>) -> Self {
        MetricResult {
            value,
            abs_error_estimate: abs_error_estimate.abs(),
            method,
            config_echo: config.map(ConfigSummary::from),
        }
    }

    /// Standard error of a Monte Carlo estimate (the stored estimate is a
    /// 95% half-width); for deterministic methods, the error estimate itself.
    pub fn standard_error(&self) -> f64 {
        match self.method {
            Method::MonteCarlo => self.abs_error_estimate / 1.96,
            _ => self.abs_error_estimate,
        }
    }
}

/// Which route evaluates the capacity lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    /// Inclusion–exclusion over all nonempty port subsets.
    ClosedForm,
    /// Quadrature of `[1 - ∏(1-ε_k(y))]/(1+y)`.
    ProductIntegral,
}

/// Per-port constants of the service-probability and capacity bounds:
/// `ε_k(y) = a_k exp(-b_k y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub kappa: f64,
    pub varrho: f64,
    pub a: Vec<f64>,
    /// `b_k`, the coefficient of `y`; infinite for ports merged into the reference.
    pub b_over_y: Vec<f64>,
}

impl BoundParams {
    pub fn new(config: &FasConfig, profile: &CorrelationProfile, kappa: f64) -> Result<Self> {
        config.validate()?;
        check_profile(config, profile)?;
        let rho = varrho(kappa)?;
        let gamma = config.snr_linear();
        let mut a = Vec::with_capacity(config.n_ports);
        let mut b = Vec::with_capacity(config.n_ports);
        a.push(1.0);
        b.push(1.0 / gamma);
        for &m in &profile.mu()[1..] {
            let am = m.abs();
            a.push(if am > rho * rho { rho / am.sqrt() } else { 1.0 });
            b.push(if am > DUPLICATE_PORT_THRESHOLD {
                f64::INFINITY
            } else {
                kappa / ((1.0 - m * m) * gamma)
            });
        }
        Ok(BoundParams {
            kappa,
            varrho: rho,
            a,
            b_over_y: b,
        })
    }

    pub fn epsilon(&self, k: usize, y: f64) -> f64 {
        let b = self.b_over_y[k];
        if b.is_infinite() {
            if y == 0.0 { self.a[k] } else { 0.0 }
        } else {
            self.a[k] * (-b * y).exp()
        }
    }

    /// `1 - ∏_k (1 - ε_k(y))`.
    pub fn service_bound(&self, y: f64) -> f64 {
        let log_miss: f64 = (0..self.a.len())
            .map(|k| (-self.epsilon(k, y)).ln_1p())
            .sum();
        (-log_miss.exp_m1()).clamp(0.0, 1.0)
    }
}

fn check_profile(config: &FasConfig, profile: &CorrelationProfile) -> Result<()> {
    if profile.n_ports() != config.n_ports {
        return Err(Error::config(
            "n_ports",
            format!(
                "profile has {} ports but configuration has {}",
                profile.n_ports(),
                config.n_ports
            ),
        ));
    }
    Ok(())
}

/// The best-port envelope distribution with the per-port Marcum-Q
/// prefactors precomputed. Cheap to evaluate at many levels.
#[derive(Debug, Clone)]
pub struct SelectionDistribution {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    quad: QuadratureSpec,
    tol: Tolerance,
}

impl SelectionDistribution {
    pub fn new(profile: &CorrelationProfile, quad: &QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        let (alpha, beta) = profile.mu()[1..]
            .iter()
            .filter(|m| m.abs() <= DUPLICATE_PORT_THRESHOLD)
            .map(|&m| {
                let s = 1.0 - m * m;
                ((2.0 * m * m / s).sqrt(), (2.0 / s).sqrt())
            })
            .unzip();
        Ok(SelectionDistribution {
            alpha,
            beta,
            quad: *quad,
            tol: quad.special(),
        })
    }

    /// Ports that take part after merging near-duplicates of the reference.
    pub fn effective_ports(&self) -> usize {
        self.alpha.len() + 1
    }

    /// `Σ_k ln(1 - Q1(α_k √t, β_k ρ))`, i.e. the log of the probability
    /// that no correlated port exceeds `ρ` given the reference at `√t`.
    fn log_all_below(&self, t: f64, rho: f64) -> Result<f64> {
        let st = t.max(0.0).sqrt();
        let mut acc = 0.0;
        for (&a, &b) in self.alpha.iter().zip(&self.beta) {
            let q = marcum_q1(a * st, b * rho, &self.tol)?;
            acc += (-q).ln_1p();
        }
        Ok(acc)
    }

    fn inner<F>(&self, rho2: f64, mut f: F) -> Result<Integral>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut failure = None;
        let r = integrate(
            |t| match f(t) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            rho2,
            &self.quad.inner(),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        r
    }

    /// `P(r_FAS/σ ≤ ρ)` at `rho2 = ρ²`.
    pub fn cdf(&self, rho2: f64) -> Result<Integral> {
        if rho2 <= 0.0 {
            return Ok(Integral { value: 0.0, abs_error: 0.0, evaluations: 0 });
        }
        if self.alpha.is_empty() {
            return Ok(Integral { value: -(-rho2).exp_m1(), abs_error: 0.0, evaluations: 0 });
        }
        let rho = rho2.sqrt();
        let mut r = self.inner(rho2, |t| Ok((-t + self.log_all_below(t, rho)?).exp()))?;
        r.value = r.value.clamp(0.0, 1.0);
        Ok(r)
    }

    /// Service probability `P(r_FAS/σ > ρ)`, evaluated in complement form
    /// `e^{-ρ²} + ∫_0^{ρ²} e^{-t} [1 - ∏(1-Q1)] dt`, accurate in the tail.
    pub fn survival(&self, rho2: f64) -> Result<Integral> {
        if rho2 <= 0.0 {
            return Ok(Integral { value: 1.0, abs_error: 0.0, evaluations: 0 });
        }
        let base = (-rho2).exp();
        // q <= N e^{-ρ²} underflows past this point
        if self.alpha.is_empty() || rho2 > 750.0 {
            return Ok(Integral { value: base, abs_error: 0.0, evaluations: 0 });
        }
        let rho = rho2.sqrt();
        let mut r = self.inner(rho2, |t| Ok(-(-t).exp() * self.log_all_below(t, rho)?.exp_m1()))?;
        r.value = (r.value + base).clamp(0.0, 1.0);
        Ok(r)
    }
}

/// Integrates `g(y)/(1+y)` over `y ∈ [0, ∞)` where `g` is bounded by
/// `n_ports · e^{-y/Γ}`.
fn capacity_integral<G>(
    mut g: G,
    gamma: f64,
    n_ports: usize,
    quad: &QuadratureSpec,
) -> Result<Integral>
where
    G: FnMut(f64) -> Result<f64>,
{
    let mut failure = None;
    let mut eval = |y: f64| -> f64 {
        match g(y) {
            Ok(v) => v / (1.0 + y),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let r = match quad.outer_transform {
        OuterTransform::Rational => {
            let s = gamma.max(1.0);
            integrate(
                |u| {
                    let om = 1.0 - u;
                    let y = s * u / om;
                    if !y.is_finite() {
                        return 0.0;
                    }
                    eval(y) * s / (om * om)
                },
                0.0,
                1.0,
                &quad.outer(),
            )
        }
        OuterTransform::None => {
            let upper = truncation_point(gamma, n_ports, quad.abs_tol);
            let mut points = vec![0.0];
            for m in [1.0, 4.0, 16.0] {
                if m * gamma < upper {
                    points.push(m * gamma);
                }
            }
            points.push(upper);
            integrate_with_breaks(&mut eval, &points, &quad.outer())
        }
    };
    if let Some(e) = failure {
        return Err(e);
    }
    r
}

/// `Y` with `N Γ e^{-Y/Γ} / (1+Y) <= abs_tol`, bounding `∫_Y^∞ q_N/(1+y)`.
fn truncation_point(gamma: f64, n_ports: usize, abs_tol: f64) -> f64 {
    let c = n_ports as f64 * gamma / abs_tol;
    let mut y = gamma * c.ln().max(1.0);
    for _ in 0..50 {
        let next = gamma * (c / (1.0 + y)).ln().max(1.0);
        if (next - y).abs() < 1e-9 * y {
            break;
        }
        y = next;
    }
    y
}

/// `P(r_FAS ≤ r_level)`.
pub fn outage_probability(
    config: &FasConfig,
    profile: &CorrelationProfile,
    r_level: f64,
    quad: &QuadratureSpec,
) -> Result<MetricResult> {
    config.validate()?;
    check_profile(config, profile)?;
    if !(r_level >= 0.0) || !r_level.is_finite() {
        return Err(Error::domain("outage_probability", format!("level must be >= 0, got {r_level}")));
    }
    let dist = SelectionDistribution::new(profile, quad)?;
    let rho2 = r_level * r_level / config.sigma2;
    let r = dist.cdf(rho2)?;
    let method = if dist.effective_ports() == 1 { Method::ClosedForm } else { Method::Quadrature };
    Ok(MetricResult::new(r.value, r.abs_error, method, Some(config)))
}

/// Exact service probability `q_N(y)` at the capacity integration variable `y`.
pub fn service_probability(
    config: &FasConfig,
    profile: &CorrelationProfile,
    y: f64,
    quad: &QuadratureSpec,
) -> Result<MetricResult> {
    config.validate()?;
    check_profile(config, profile)?;
    if !(y >= 0.0) {
        return Err(Error::domain("service_probability", format!("y must be >= 0, got {y}")));
    }
    let dist = SelectionDistribution::new(profile, quad)?;
    let r = dist.survival(y / config.snr_linear())?;
    Ok(MetricResult::new(r.value, r.abs_error, Method::Quadrature, Some(config)))
}

/// Level crossing rate of the selected envelope, crossings per second:
/// `2√π f_m (r/σ) e^{-r²/σ²}`. Independent of N and of the correlation.
pub fn lcr(config: &FasConfig, r_level: f64) -> Result<f64> {
    config.validate()?;
    let fm = config.max_doppler()?;
    if !(r_level >= 0.0) || !r_level.is_finite() {
        return Err(Error::domain("lcr", format!("level must be >= 0, got {r_level}")));
    }
    let rho = r_level / config.sigma();
    Ok(2.0 * PI.sqrt() * fm * rho * (-rho * rho).exp())
}

/// Average fade duration in seconds: outage probability over LCR.
pub fn afd(
    config: &FasConfig,
    profile: &CorrelationProfile,
    r_level: f64,
    quad: &QuadratureSpec,
) -> Result<MetricResult> {
    if !(r_level > 0.0) {
        return Err(Error::domain("afd", format!("level must be > 0, got {r_level}")));
    }
    let rate = lcr(config, r_level)?;
    let outage = outage_probability(config, profile, r_level, quad)?;
    Ok(MetricResult::new(
        outage.value / rate,
        outage.abs_error_estimate / rate,
        outage.method,
        Some(config),
    ))
}

/// Exact ergodic capacity in nats per channel use.
pub fn ergodic_capacity(
    config: &FasConfig,
    profile: &CorrelationProfile,
    quad: &QuadratureSpec,
) -> Result<MetricResult> {
    config.validate()?;
    check_profile(config, profile)?;
    let dist = SelectionDistribution::new(profile, quad)?;
    let gamma = config.snr_linear();
    let r = capacity_integral(
        |y| Ok(dist.survival(y / gamma)?.value),
        gamma,
        dist.effective_ports(),
        quad,
    )?;
    Ok(MetricResult::new(r.value, r.abs_error, Method::Quadrature, Some(config)))
}

/// Lower bound on the service probability, `1 - (1-ε_1) ∏_{k≥2} (1-ε_k)`.
pub fn service_probability_lower_bound(
    config: &FasConfig,
    profile: &CorrelationProfile,
    y: f64,
    kappa: f64,
) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain("service_probability_lower_bound", format!("y must be >= 0, got {y}")));
    }
    Ok(BoundParams::new(config, profile, kappa)?.service_bound(y))
}

/// Capacity lower bound in nats per channel use.
pub fn capacity_lower_bound(
    config: &FasConfig,
    profile: &CorrelationProfile,
    kappa: f64,
    method: BoundMethod,
    quad: &QuadratureSpec,
) -> Result<MetricResult> {
    let params = BoundParams::new(config, profile, kappa)?;
    match method {
        BoundMethod::ClosedForm => {
            if config.n_ports > CLOSED_FORM_MAX_PORTS {
                return Err(Error::Capability(format!(
                    "closed-form bound enumerates 2^N - 1 subsets and is limited to N <= {CLOSED_FORM_MAX_PORTS} \
                     (got N = {}); use the product_integral method",
                    config.n_ports
                )));
            }
            let (value, err) = closed_form_bound(&params)?;
            Ok(MetricResult::new(value, err, Method::ClosedForm, Some(config)))
        }
        BoundMethod::ProductIntegral => {
            quad.validate()?;
            let r = capacity_integral(
                |y| Ok(params.service_bound(y)),
                config.snr_linear(),
                config.n_ports,
                quad,
            )?;
            Ok(MetricResult::new(r.value, r.abs_error, Method::ProductIntegral, Some(config)))
        }
    }
}

/// `Σ_{S≠∅} (-1)^{|S|+1} ∏_{k∈S} a_k · e^{c} Γ(0, c)`, `c = Σ_{k∈S} b_k`.
/// Returns the value and a rounding-error estimate.
fn closed_form_bound(params: &BoundParams) -> Result<(f64, f64)> {
    let active: Vec<usize> = (0..params.a.len())
        .filter(|&k| params.b_over_y[k].is_finite())
        .collect();
    let n = active.len();
    let mut sum = 0.0;
    let mut comp = 0.0; // Neumaier compensation
    let mut magnitude = 0.0;
    for mask in 1u32..(1u32 << n) {
        let mut prod_a = 1.0;
        let mut c = 0.0;
        for (bit, &k) in active.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                prod_a *= params.a[k];
                c += params.b_over_y[k];
            }
        }
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * prod_a * exp_scaled_gamma_zero(c)?;
        let t = sum + term;
        comp += if f64::abs(sum) >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
        magnitude += term.abs();
    }
    Ok((sum + comp, 4.0 * f64::EPSILON * magnitude))
}

/// Evaluates the product-integral bound on [`KAPPA_GRID`] and returns the
/// κ with the largest (tightest) bound.
pub fn best_kappa(
    config: &FasConfig,
    profile: &CorrelationProfile,
    quad: &QuadratureSpec,
) -> Result<(f64, MetricResult)> {
    let mut best: Option<(f64, MetricResult)> = None;
    for &k in &KAPPA_GRID {
        let r = capacity_lower_bound(config, profile, k, BoundMethod::ProductIntegral, quad)?;
        if best.as_ref().is_none_or(|(_, b)| r.value > b.value) {
            best = Some((k, r));
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// Ergodic capacity of L-branch maximum ratio combining over i.i.d.
/// unit-mean Rayleigh branches: `∫ ln(1+Γt) t^{L-1} e^{-t}/(L-1)! dt`.
pub fn mrc_ergodic_capacity(n_branches: usize, gamma_db: f64, quad: &QuadratureSpec) -> Result<MetricResult> {
    if n_branches == 0 {
        return Err(Error::config("n_branches", "must be at least 1"));
    }
    if !gamma_db.is_finite() {
        return Err(Error::config("snr_db", "must be finite"));
    }
    quad.validate()?;
    let gamma = 10f64.powf(gamma_db / 10.0);
    let l = n_branches as f64;
    let log_norm: f64 = (1..n_branches).map(|k| (k as f64).ln()).sum();
    let density = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        ((l - 1.0) * t.ln() - t - log_norm).exp()
    };
    let s = l;
    let r = integrate(
        |u| {
            let om = 1.0 - u;
            let t = s * u / om;
            if !t.is_finite() {
                return 0.0;
            }
            (gamma * t).ln_1p() * density(t) * s / (om * om)
        },
        0.0,
        1.0,
        &quad.outer(),
    )?;
    Ok(MetricResult::new(r.value, r.abs_error, Method::Quadrature, None))
}
