//! The `fasperf` command line: single-metric queries, parameter sweeps,
//! Monte Carlo runs and figure recipes, all emitting CSV or JSON lines.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 when
//! a numerical method fails.

use std::ffi::OsString;
use std::f64::consts::LN_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::analytic::{
    self, best_kappa, capacity_lower_bound, ergodic_capacity, mrc_ergodic_capacity, outage_probability,
    BoundMethod, MetricResult, OuterTransform, QuadratureSpec,
};
use crate::channel::{correlation_profile, sample_time_series, FasConfig, DEFAULT_OSCILLATORS};
use crate::error::Error;
use crate::golden;
use crate::montecarlo::{self, McSpec};
use crate::output::{Cell, Format, Table};

pub const SEED_ENV: &str = "FASPERF_SEED";

#[derive(Debug, Parser)]
#[command(name = "fasperf", version, about = "Outage, LCR/AFD and ergodic capacity of N-port fluid antenna systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Outage probability P(r_FAS <= level·σ).
    Outage(PointCmd),
    /// Level crossing rate (per second with --doppler, else in units of f_m).
    Lcr(PointCmd),
    /// Average fade duration (seconds with --doppler, else τ·f_m).
    Afd(PointCmd),
    /// Exact ergodic capacity.
    Capacity(PointCmd),
    /// Capacity lower bound.
    CapacityBound(BoundCmd),
    /// Ergodic capacity of L-branch MRC over independent Rayleigh branches.
    Mrc(MrcCmd),
    /// Monte Carlo estimate of a metric.
    Mc(McCmd),
    /// Regenerate a figure as CSV with columns x,series,value,method.
    Figure(FigureCmd),
    /// Run the golden-value suite and cross-oracle spot checks.
    Selftest(SelftestCmd),
}

#[derive(Debug, Clone, Args)]
struct ChannelArgs {
    /// Number of ports N.
    #[arg(long, default_value_t = 1)]
    n_ports: usize,
    /// Aperture W in wavelengths.
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    /// Average SNR Γ in dB.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// Per-port average power σ².
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Speed and wavelength as `v,λ` (m/s, m); sets f_m = v/λ.
    #[arg(long, value_parser = parse_doppler)]
    doppler: Option<Doppler>,
}

#[derive(Debug, Clone, Copy)]
struct Doppler {
    speed: f64,
    wavelength: f64,
}

#[derive(Debug, Clone, Args)]
struct QuadArgs {
    #[arg(long, default_value_t = 1e-7)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_subdivisions: usize,
    #[arg(long, value_enum, default_value_t = TransformArg::Rational)]
    outer_transform: TransformArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformArg {
    Rational,
    None,
}

impl QuadArgs {
    fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
            outer_transform: match self.outer_transform {
                TransformArg::Rational => OuterTransform::Rational,
                TransformArg::None => OuterTransform::None,
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Worker threads for sweeps (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
struct PointCmd {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Envelope level in units of σ.
    #[arg(long, default_value_t = 1.0)]
    level: f64,
    /// Report capacities in bits instead of nats.
    #[arg(long)]
    bits: bool,
    /// Sweep one parameter: `VAR:START:STOP:STEPS`, VAR in n_ports, width, snr_db, level.
    #[arg(long)]
    sweep: Option<SweepSpec>,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundMethodArg {
    ClosedForm,
    ProductIntegral,
}

#[derive(Debug, Clone, Args)]
struct BoundCmd {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, default_value_t = analytic::DEFAULT_KAPPA)]
    kappa: f64,
    #[arg(long, value_enum, default_value_t = BoundMethodArg::ProductIntegral)]
    method: BoundMethodArg,
    /// Pick κ from {1.1, 1.5, 2, 3, 5} maximizing the bound (product integral).
    #[arg(long)]
    best_kappa: bool,
    #[arg(long)]
    bits: bool,
    #[arg(long)]
    sweep: Option<SweepSpec>,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
struct MrcCmd {
    /// Number of MRC branches L.
    #[arg(long, default_value_t = 3)]
    branches: usize,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long)]
    bits: bool,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum McMetric {
    Outage,
    Capacity,
    LcrAfd,
    Mrc,
}

#[derive(Debug, Clone, Args)]
struct McCmd {
    #[arg(long, value_enum, default_value_t = McMetric::Capacity)]
    metric: McMetric,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, default_value_t = 1.0)]
    level: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Master seed; falls back to the FASPERF_SEED environment variable, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    batch: u64,
    /// Path length in seconds for lcr-afd (default 10⁴/f_m).
    #[arg(long)]
    duration: Option<f64>,
    /// Path sample rate in Hz for lcr-afd (default 64·f_m).
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Also write the simulated envelope path (lcr-afd) as CSV.
    #[arg(long)]
    export_path: Option<PathBuf>,
    /// MRC branches for `--metric mrc`.
    #[arg(long, default_value_t = 3)]
    branches: usize,
    #[arg(long)]
    bits: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigureKind {
    /// Normalized AFD against the level.
    Fig2,
    /// Capacity against N, with MRC references.
    Fig3a,
    /// Capacity against W.
    Fig3b,
    /// Capacity and lower bound against SNR.
    Fig3c,
}

#[derive(Debug, Clone, Args)]
struct FigureCmd {
    #[arg(value_enum)]
    which: FigureKind,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// Aperture for fig2 series without --widths, and for fig3c.
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, value_delimiter = ',')]
    widths: Option<Vec<f64>>,
    /// Largest N for fig3a.
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr_list: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    level_min: f64,
    #[arg(long, default_value_t = 2.0)]
    level_max: f64,
    /// Grid points along the x axis of fig2 (levels) and fig3b (widths).
    #[arg(long, default_value_t = 40)]
    steps: usize,
    #[arg(long, default_value_t = 0.1)]
    w_min: f64,
    #[arg(long, default_value_t = 2.0)]
    w_max: f64,
    #[arg(long, default_value_t = analytic::DEFAULT_KAPPA)]
    kappa: f64,
    /// fig2 in seconds for this `v,λ` instead of τ·f_m.
    #[arg(long, value_parser = parse_doppler)]
    doppler: Option<Doppler>,
    #[arg(long)]
    bits: bool,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
struct SelftestCmd {
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

/// Parameter swept by `--sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    NPorts,
    Width,
    SnrDb,
    Level,
}

/// `VAR:START:STOP:STEPS`, an inclusive linear grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err("expected VAR:START:STOP:STEPS".into());
        }
        let variable = match parts[0] {
            "n_ports" | "n-ports" => SweepVariable::NPorts,
            "width" => SweepVariable::Width,
            "snr_db" | "snr-db" => SweepVariable::SnrDb,
            "level" => SweepVariable::Level,
            other => return Err(format!("unknown sweep variable `{other}`")),
        };
        let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let spec = SweepSpec {
            variable,
            start: num(parts[1])?,
            stop: num(parts[2])?,
            steps: parts[3].parse().map_err(|e| format!("`{}`: {e}", parts[3]))?,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl SweepSpec {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.start < self.stop) {
            return Err(Error::Config {
                field: "sweep",
                msg: "start must be below stop".into(),
            });
        }
        if self.steps < 2 {
            return Err(Error::Config {
                field: "sweep",
                msg: "steps must be at least 2".into(),
            });
        }
        if self.variable == SweepVariable::NPorts
            && (self.start.fract() != 0.0 || self.stop.fract() != 0.0 || self.start < 1.0)
        {
            return Err(Error::Config {
                field: "sweep",
                msg: "n_ports sweeps need integer bounds >= 1".into(),
            });
        }
        Ok(())
    }

    /// Grid values; for `n_ports` rounded to integers with duplicates removed.
    pub fn points(&self) -> Vec<f64> {
        let mut v = linspace(self.start, self.stop, self.steps);
        if self.variable == SweepVariable::NPorts {
            v.iter_mut().for_each(|x| *x = x.round());
            v.dedup();
        }
        v
    }
}

fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![start];
    }
    let h = (stop - start) / (steps - 1) as f64;
    (0..steps)
        .map(|i| if i + 1 == steps { stop } else { start + h * i as f64 })
        .collect()
}

fn parse_doppler(s: &str) -> Result<Doppler, String> {
    let (v, l) = s.split_once(',').ok_or("expected `v,λ`")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok(Doppler {
        speed: num(v)?,
        wavelength: num(l)?,
    })
}

#[derive(Debug)]
enum CliError {
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(Error::Numeric { .. }) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command against
/// the process stdout and stderr. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let (table, out) = match cmd {
        Command::Outage(c) => (point_metric(&c, Metric::Outage)?, c.out),
        Command::Lcr(c) => (point_metric(&c, Metric::Lcr)?, c.out),
        Command::Afd(c) => (point_metric(&c, Metric::Afd)?, c.out),
        Command::Capacity(c) => (point_metric(&c, Metric::Capacity)?, c.out),
        Command::CapacityBound(c) => (bound(&c)?, c.out),
        Command::Mrc(c) => (mrc(&c)?, c.out),
        Command::Mc(c) => (mc(&c)?, c.out),
        Command::Figure(c) => (figure(&c)?, c.out),
        Command::Selftest(c) => {
            let table = selftest(&c)?;
            let failed = table.rows.iter().filter(|r| r[1] == Cell::from("fail")).count();
            writeln!(stderr, "selftest: {} passed, {} failed", table.rows.len() - failed, failed)?;
            emit(&table, &c.out, stdout)?;
            return Ok(if failed == 0 { 0 } else { 2 });
        }
    };
    emit(&table, &out, stdout)?;
    Ok(0)
}

fn emit(table: &Table, out: &OutputArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let format = match out.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    match &out.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(&mut w, format)?;
            w.flush()?;
        }
        None => table.write(&mut *stdout, format)?,
    }
    Ok(())
}

/// Maps `f` over `items` on up to `jobs` threads, keeping input order.
fn par_map<T, R, F>(jobs: Option<usize>, items: &[T], f: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> crate::Result<R> + Sync + Send,
{
    let work = || items.par_iter().map(&f).collect::<crate::Result<Vec<R>>>();
    let out = match jobs {
        Some(0) => {
            return Err(Error::Config {
                field: "jobs",
                msg: "must be at least 1".into(),
            }
            .into())
        }
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| io::Error::other(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(out?)
}

#[derive(Debug, Clone, Copy)]
struct Point {
    n_ports: usize,
    width: f64,
    snr_db: f64,
    level: f64,
}

fn grid(ch: &ChannelArgs, level: f64, sweep: &Option<SweepSpec>) -> Vec<Point> {
    let base = Point {
        n_ports: ch.n_ports,
        width: ch.width,
        snr_db: ch.snr_db,
        level,
    };
    let Some(s) = sweep else { return vec![base] };
    s.points()
        .into_iter()
        .map(|x| {
            let mut p = base;
            match s.variable {
                SweepVariable::NPorts => p.n_ports = x as usize,
                SweepVariable::Width => p.width = x,
                SweepVariable::SnrDb => p.snr_db = x,
                SweepVariable::Level => p.level = x,
            }
            p
        })
        .collect()
}

/// Builds the configuration at `p`; without a Doppler setting, `f_m = 1`
/// so rates and durations come out normalized.
fn config_at(ch: &ChannelArgs, p: &Point) -> crate::Result<(FasConfig, bool)> {
    let c = FasConfig::new(p.n_ports, p.width, p.snr_db)?.with_sigma2(ch.sigma2)?;
    Ok(match ch.doppler {
        Some(d) => (c.with_doppler(d.speed, d.wavelength)?, true),
        None => (c.with_doppler(1.0, 1.0)?, false),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    Outage,
    Lcr,
    Afd,
    Capacity,
}

fn capacity_unit(bits: bool) -> &'static str {
    if bits { "bits" } else { "nats" }
}

fn in_unit(r: MetricResult, bits: bool) -> MetricResult {
    if bits {
        MetricResult {
            value: r.value / LN_2,
            abs_error_estimate: r.abs_error_estimate / LN_2,
            ..r
        }
    } else {
        r
    }
}

fn point_metric(cmd: &PointCmd, metric: Metric) -> CliResult<Table> {
    let quad = cmd.quad.spec();
    quad.validate()?;
    let points = grid(&cmd.channel, cmd.level, &cmd.sweep);
    let rows = par_map(cmd.out.jobs, &points, |p| {
        let (config, physical) = config_at(&cmd.channel, p)?;
        let r_level = p.level * config.sigma();
        let (result, unit) = match metric {
            Metric::Outage => {
                let profile = correlation_profile(&config)?;
                (outage_probability(&config, &profile, r_level, &quad)?, "probability")
            }
            Metric::Lcr => {
                let v = analytic::lcr(&config, r_level)?;
                let r = MetricResult::new(v, 0.0, analytic::Method::ClosedForm, Some(&config));
                (r, if physical { "hz" } else { "f_m" })
            }
            Metric::Afd => {
                let profile = correlation_profile(&config)?;
                (analytic::afd(&config, &profile, r_level, &quad)?, if physical { "s" } else { "1/f_m" })
            }
            Metric::Capacity => {
                let profile = correlation_profile(&config)?;
                (in_unit(ergodic_capacity(&config, &profile, &quad)?, cmd.bits), capacity_unit(cmd.bits))
            }
        };
        Ok(vec![
            Cell::from(p.n_ports),
            Cell::from(p.width),
            Cell::from(p.snr_db),
            Cell::from(p.level),
            Cell::from(result.value),
            Cell::from(result.abs_error_estimate),
            Cell::from(unit),
            Cell::from(result.method.as_str()),
        ])
    })?;
    let mut t = Table::new(&["n_ports", "width", "snr_db", "level", "value", "abs_error", "unit", "method"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

fn bound(cmd: &BoundCmd) -> CliResult<Table> {
    let quad = cmd.quad.spec();
    quad.validate()?;
    let points = grid(&cmd.channel, 1.0, &cmd.sweep);
    let method = match cmd.method {
        BoundMethodArg::ClosedForm => BoundMethod::ClosedForm,
        BoundMethodArg::ProductIntegral => BoundMethod::ProductIntegral,
    };
    let rows = par_map(cmd.out.jobs, &points, |p| {
        let (config, _) = config_at(&cmd.channel, p)?;
        let profile = correlation_profile(&config)?;
        let (kappa, r) = if cmd.best_kappa {
            best_kappa(&config, &profile, &quad)?
        } else {
            (cmd.kappa, capacity_lower_bound(&config, &profile, cmd.kappa, method, &quad)?)
        };
        let r = in_unit(r, cmd.bits);
        Ok(vec![
            Cell::from(p.n_ports),
            Cell::from(p.width),
            Cell::from(p.snr_db),
            Cell::from(kappa),
            Cell::from(r.value),
            Cell::from(r.abs_error_estimate),
            Cell::from(capacity_unit(cmd.bits)),
            Cell::from(r.method.as_str()),
        ])
    })?;
    let mut t = Table::new(&["n_ports", "width", "snr_db", "kappa", "value", "abs_error", "unit", "method"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

fn mrc(cmd: &MrcCmd) -> CliResult<Table> {
    let r = in_unit(mrc_ergodic_capacity(cmd.branches, cmd.snr_db, &cmd.quad.spec())?, cmd.bits);
    let mut t = Table::new(&["branches", "snr_db", "value", "abs_error", "unit", "method"]);
    t.push(vec![
        Cell::from(cmd.branches),
        Cell::from(cmd.snr_db),
        Cell::from(r.value),
        Cell::from(r.abs_error_estimate),
        Cell::from(capacity_unit(cmd.bits)),
        Cell::from(r.method.as_str()),
    ]);
    Ok(t)
}

fn resolve_seed(flag: Option<u64>) -> crate::Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Config {
            field: "seed",
            msg: format!("{SEED_ENV}=`{v}` is not an unsigned integer"),
        }),
        Err(_) => Ok(0),
    }
}

fn mc(cmd: &McCmd) -> CliResult<Table> {
    let seed = resolve_seed(cmd.seed)?;
    let spec = McSpec {
        n_samples: cmd.samples,
        seed,
        batch: cmd.batch,
    };
    spec.validate()?;
    let point = Point {
        n_ports: cmd.channel.n_ports,
        width: cmd.channel.width,
        snr_db: cmd.channel.snr_db,
        level: cmd.level,
    };
    let (config, physical) = config_at(&cmd.channel, &point)?;
    let profile = correlation_profile(&config)?;
    let r_level = cmd.level * config.sigma();

    let run = || -> CliResult<Vec<(&'static str, MetricResult, &'static str)>> {
        Ok(match cmd.metric {
            McMetric::Outage => vec![(
                "outage",
                montecarlo::mc_outage(&config, &profile, r_level, &spec)?,
                "probability",
            )],
            McMetric::Capacity => vec![(
                "capacity",
                in_unit(montecarlo::mc_capacity(&config, &profile, &spec)?, cmd.bits),
                capacity_unit(cmd.bits),
            )],
            McMetric::Mrc => vec![(
                "mrc_capacity",
                in_unit(montecarlo::mc_mrc_capacity(cmd.branches, cmd.channel.snr_db, &spec)?, cmd.bits),
                capacity_unit(cmd.bits),
            )],
            McMetric::LcrAfd => {
                let fm = config.max_doppler()?;
                let duration = cmd.duration.unwrap_or(1e4 / fm);
                let rate = cmd.sample_rate.unwrap_or(64.0 * fm);
                let (lcr, afd) = montecarlo::mc_lcr_afd(&config, &profile, r_level, duration, rate, &spec)?;
                if let Some(path) = &cmd.export_path {
                    let p = sample_time_series(&config, &profile, duration, rate, DEFAULT_OSCILLATORS, seed)?;
                    let mut w = BufWriter::new(File::create(path)?);
                    p.write_csv(&mut w)?;
                    w.flush()?;
                }
                let (ul, ua) = if physical { ("hz", "s") } else { ("f_m", "1/f_m") };
                vec![("lcr", lcr, ul), ("afd", afd, ua)]
            }
        })
    };
    let results = match cmd.out.jobs {
        Some(0) => {
            return Err(Error::Config {
                field: "jobs",
                msg: "must be at least 1".into(),
            }
            .into())
        }
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| io::Error::other(e.to_string()))?
            .install(run)?,
        None => run()?,
    };

    let mut t = Table::new(&[
        "metric", "n_ports", "width", "snr_db", "level", "samples", "seed", "value", "abs_error", "unit", "method",
    ]);
    for (name, r, unit) in results {
        let n = if matches!(cmd.metric, McMetric::Mrc) { cmd.branches } else { config.n_ports };
        t.push(vec![
            Cell::from(name),
            Cell::from(n),
            Cell::from(config.width),
            Cell::from(config.avg_snr_db),
            Cell::from(cmd.level),
            Cell::Int(cmd.samples as i64),
            Cell::Text(seed.to_string()),
            Cell::from(r.value),
            Cell::from(r.abs_error_estimate),
            Cell::from(unit),
            Cell::from(r.method.as_str()),
        ]);
    }
    Ok(t)
}

/// One row of a figure table.
struct FigureRow {
    x: f64,
    series: String,
    value: f64,
    method: &'static str,
}

fn label(x: f64) -> String {
    format!("{x}")
}

fn figure(cmd: &FigureCmd) -> CliResult<Table> {
    let quad = cmd.quad.spec();
    quad.validate()?;
    let scale = if cmd.bits { 1.0 / LN_2 } else { 1.0 };
    let jobs = cmd.out.jobs;

    let rows: Vec<FigureRow> = match cmd.which {
        FigureKind::Fig2 => {
            let ns = cmd.n_list.clone().unwrap_or_else(|| vec![1, 2, 5, 10]);
            let ws = cmd.widths.clone().unwrap_or_else(|| vec![0.5, cmd.width]);
            let levels = linspace(cmd.level_min, cmd.level_max, cmd.steps);
            let mut jobs_list = Vec::new();
            for &w in &ws {
                for &n in &ns {
                    for &l in &levels {
                        jobs_list.push((n, w, l));
                    }
                }
            }
            par_map(jobs, &jobs_list, |&(n, w, l)| {
                let c = FasConfig::new(n, w, cmd.snr_db)?;
                let c = match cmd.doppler {
                    Some(d) => c.with_doppler(d.speed, d.wavelength)?,
                    None => c.with_doppler(1.0, 1.0)?,
                };
                let p = correlation_profile(&c)?;
                let r = analytic::afd(&c, &p, l * c.sigma(), &quad)?;
                Ok(FigureRow {
                    x: l,
                    series: format!("N={n} W={}", label(w)),
                    value: r.value,
                    method: r.method.as_str(),
                })
            })?
        }
        FigureKind::Fig3a => {
            let ws = cmd.widths.clone().unwrap_or_else(|| vec![0.1, 0.2, 0.3, 0.5, 1.0]);
            if cmd.n_max == 0 {
                return Err(Error::Config {
                    field: "n_max",
                    msg: "must be at least 1".into(),
                }
                .into());
            }
            let mut jobs_list = Vec::new();
            for &w in &ws {
                for n in 1..=cmd.n_max {
                    jobs_list.push((n, w));
                }
            }
            let mut rows = par_map(jobs, &jobs_list, |&(n, w)| {
                let c = FasConfig::new(n, w, cmd.snr_db)?;
                let p = correlation_profile(&c)?;
                let r = ergodic_capacity(&c, &p, &quad)?;
                Ok(FigureRow {
                    x: n as f64,
                    series: format!("W={}", label(w)),
                    value: r.value * scale,
                    method: r.method.as_str(),
                })
            })?;
            for l in [2usize, 3] {
                let r = mrc_ergodic_capacity(l, cmd.snr_db, &quad)?;
                for n in 1..=cmd.n_max {
                    rows.push(FigureRow {
                        x: n as f64,
                        series: format!("MRC L={l}"),
                        value: r.value * scale,
                        method: r.method.as_str(),
                    });
                }
            }
            rows
        }
        FigureKind::Fig3b => {
            let ns = cmd.n_list.clone().unwrap_or_else(|| vec![2, 5, 10, 20]);
            let ws = cmd.widths.clone().unwrap_or_else(|| linspace(cmd.w_min, cmd.w_max, cmd.steps.min(20)));
            let mut jobs_list = Vec::new();
            for &n in &ns {
                for &w in &ws {
                    jobs_list.push((n, w));
                }
            }
            par_map(jobs, &jobs_list, |&(n, w)| {
                let c = FasConfig::new(n, w, cmd.snr_db)?;
                let p = correlation_profile(&c)?;
                let r = ergodic_capacity(&c, &p, &quad)?;
                Ok(FigureRow {
                    x: w,
                    series: format!("N={n}"),
                    value: r.value * scale,
                    method: r.method.as_str(),
                })
            })?
        }
        FigureKind::Fig3c => {
            let ns = cmd.n_list.clone().unwrap_or_else(|| vec![2, 4, 8]);
            let snrs = cmd.snr_list.clone().unwrap_or_else(|| vec![0.0, 5.0, 10.0, 15.0, 20.0]);
            let mut jobs_list = Vec::new();
            for &n in &ns {
                for bound in [false, true] {
                    for &s in &snrs {
                        jobs_list.push((n, bound, s));
                    }
                }
            }
            par_map(jobs, &jobs_list, |&(n, is_bound, s)| {
                let c = FasConfig::new(n, cmd.width, s)?;
                let p = correlation_profile(&c)?;
                let (r, name) = if is_bound {
                    let r = capacity_lower_bound(&c, &p, cmd.kappa, BoundMethod::ProductIntegral, &quad)?;
                    (r, "bound")
                } else {
                    (ergodic_capacity(&c, &p, &quad)?, "exact")
                };
                Ok(FigureRow {
                    x: s,
                    series: format!("{name} N={n}"),
                    value: r.value * scale,
                    method: r.method.as_str(),
                })
            })?
        }
    };

    if let Some(bad) = rows.iter().find(|r| !r.value.is_finite() || !r.x.is_finite()) {
        return Err(Error::Numeric {
            what: "figure evaluation",
            partial: bad.value,
            estimate: f64::INFINITY,
        }
        .into());
    }
    let mut t = Table::new(&["x", "series", "value", "method"]);
    for r in rows {
        t.push(vec![Cell::from(r.x), Cell::from(r.series), Cell::from(r.value), Cell::from(r.method)]);
    }
    Ok(t)
}

fn selftest(cmd: &SelftestCmd) -> CliResult<Table> {
    let seed = resolve_seed(cmd.seed)?;
    let quad = QuadratureSpec::default();
    let mut t = Table::new(&["check", "status", "detail"]);
    let mut record = |name: &str, ok: bool, detail: String| {
        t.push(vec![Cell::from(name), Cell::from(if ok { "pass" } else { "fail" }), Cell::from(detail)]);
    };

    let records = golden::parse(golden::SPECFUN_GOLDEN)?;
    let outcomes = golden::check_all(&records);
    let mut functions: Vec<&str> = records.iter().map(|r| r.function.as_str()).collect();
    functions.dedup();
    for f in functions {
        let mine: Vec<_> = outcomes.iter().filter(|o| o.record.function == f).collect();
        let failed = mine.iter().filter(|o| !o.passed).count();
        let worst = mine.iter().map(|o| o.abs_error).fold(0.0, f64::max);
        record(
            &format!("golden {f}"),
            failed == 0,
            format!("{} points; {failed} failed; max error {worst:.2e}", mine.len()),
        );
    }

    let check = |n: usize, w: f64| -> crate::Result<(FasConfig, crate::channel::CorrelationProfile)> {
        let c = FasConfig::new(n, w, 10.0)?.with_doppler(1.0, 1.0)?;
        let p = correlation_profile(&c)?;
        Ok((c, p))
    };

    let (c, p) = check(1, 1.0)?;
    let cap = ergodic_capacity(&c, &p, &quad)?.value;
    let exact = 0.1f64.exp() * crate::specfun::upper_incomplete_gamma_zero(0.1)?;
    record(
        "single-port capacity identity",
        ((cap - exact) / exact).abs() < 1e-6,
        format!("{cap:.9} vs {exact:.9}"),
    );

    let mrc1 = mrc_ergodic_capacity(1, 10.0, &quad)?.value;
    record("single-branch MRC reduction", ((mrc1 - exact) / exact).abs() < 1e-6, format!("{mrc1:.9}"));

    let (c, p) = check(5, 1.0)?;
    let out = outage_probability(&c, &p, 0.8, &quad)?.value;
    let prod = analytic::afd(&c, &p, 0.8, &quad)?.value * analytic::lcr(&c, 0.8)?;
    record(
        "afd times lcr equals outage",
        (prod - out).abs() <= 4.0 * f64::EPSILON * out,
        format!("{prod:e} vs {out:e}"),
    );

    let (c, p) = check(6, 1.0)?;
    let cf = capacity_lower_bound(&c, &p, 2.0, BoundMethod::ClosedForm, &quad)?.value;
    let pi = capacity_lower_bound(&c, &p, 2.0, BoundMethod::ProductIntegral, &quad)?.value;
    let exact6 = ergodic_capacity(&c, &p, &quad)?.value;
    record(
        "bound routes agree and stay below capacity",
        ((cf - pi) / pi).abs() < 1e-6 && pi <= exact6,
        format!("closed {cf:.9}, product {pi:.9}, exact {exact6:.9}"),
    );

    let mc_spec = McSpec::new(200_000, seed);
    let (c, p) = check(3, 0.5)?;
    let a = outage_probability(&c, &p, 1.0, &quad)?.value;
    let m = montecarlo::mc_outage(&c, &p, 1.0, &mc_spec)?;
    record(
        "outage against simulation",
        (a - m.value).abs() <= 4.0 * m.standard_error(),
        format!("{a:.6} vs {:.6} ± {:.1e}", m.value, m.abs_error_estimate),
    );

    let (c, p) = check(4, 1.0)?;
    let a = ergodic_capacity(&c, &p, &quad)?.value;
    let m = montecarlo::mc_capacity(&c, &p, &mc_spec)?;
    record(
        "capacity against simulation",
        (a - m.value).abs() <= 4.0 * m.standard_error(),
        format!("{a:.6} vs {:.6} ± {:.1e}", m.value, m.abs_error_estimate),
    );

    Ok(t)
}
