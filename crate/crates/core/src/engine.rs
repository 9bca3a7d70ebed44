//! Parameter sweeps with counter-based seeding.
//!
//! Every trial owns a private random stream seeded by
//! [`derive_seed`]`(master, point, trial)`, so results are a pure function of
//! the inputs no matter how trials are scheduled across workers. Trials are
//! collected in index order and every reduction runs sequentially over that
//! ordered buffer.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result, Violation};
use crate::metrics::{dor, mean_rate, prp, Mode, TrialModel, TrialOutcome};
use crate::scenario::{ScenarioConfig, WeatherCondition, WeatherKind};

/// z-score of a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

pub const MIN_TRIALS: u64 = 100;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const TRIAL_MULT: u64 = 0xd1b5_4a32_d192_ed03;

/// SplitMix64 finalizer (a bijection on u64).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream seed for one (sweep point, trial) pair:
///
/// ```text
/// k = mix64(master)
/// k = mix64(k ^ point · 0x9e3779b97f4a7c15)
///     mix64(k ^ trial · 0xd1b54a32d192ed03)
/// ```
///
/// (wrapping u64 arithmetic). For fixed `master` and `point`, distinct trials
/// map to distinct seeds because both steps are bijections.
pub fn derive_seed(master_seed: u64, point_index: u64, trial_index: u64) -> u64 {
    let k = mix64(master_seed);
    let k = mix64(k ^ point_index.wrapping_mul(GOLDEN_GAMMA));
    mix64(k ^ trial_index.wrapping_mul(TRIAL_MULT))
}

pub fn trial_rng(master_seed: u64, point_index: u64, trial_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, point_index, trial_index))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_trials: u64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

impl MetricEstimate {
    /// Sample mean with a normal 95% interval.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let se = (var / n).sqrt();
        Self {
            value: mean,
            stderr: se,
            n_trials: xs.len() as u64,
            ci95_low: mean - Z95 * se,
            ci95_high: mean + Z95 * se,
        }
    }

    pub fn scaled(self, k: f64) -> Self {
        Self {
            value: self.value * k,
            stderr: self.stderr * k,
            ci95_low: self.ci95_low * k,
            ci95_high: self.ci95_high * k,
            ..self
        }
    }
}

/// Wilson score 95% interval for `successes` out of `n`.
pub fn confidence_interval(successes: u64, n: u64) -> (f64, f64) {
    assert!(n >= 1 && successes <= n, "need 0 <= successes <= n, n >= 1");
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0).min(p) };
    let hi = if successes == n { 1.0 } else { (centre + half).min(1.0).max(p) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Desired-vehicle distance, meters.
    Distance,
    /// Delay threshold, seconds. All thresholds share one trial set.
    DelayThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Prp,
    Dor,
    /// Mean achievable rate, bit/s.
    Rate,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Prp => "prp",
            Metric::Dor => "dor",
            Metric::Rate => "rate",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "prp" => Ok(Metric::Prp),
            "dor" => Ok(Metric::Dor),
            "rate" => Ok(Metric::Rate),
            other => Err(Error::invalid("metric", format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub weathers: Vec<WeatherCondition>,
    pub modes: Vec<Mode>,
    pub metrics: Vec<Metric>,
    pub n_trials: u64,
    pub master_seed: u64,
    /// Delay threshold (s) for DOR rows of a distance sweep.
    pub delay_threshold: f64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl SweepSpec {
    pub fn distance(values: Vec<f64>) -> Self {
        Self {
            variable: SweepVariable::Distance,
            values,
            weathers: vec![WeatherCondition::clear()],
            modes: vec![Mode::PureVlc, Mode::PureRf, Mode::La],
            metrics: vec![Metric::Prp],
            n_trials: 100_000,
            master_seed: 0,
            delay_threshold: 3e-3,
            workers: 0,
        }
    }

    pub fn delay_threshold(values: Vec<f64>) -> Self {
        Self {
            variable: SweepVariable::DelayThreshold,
            metrics: vec![Metric::Dor],
            n_trials: 1_000_000,
            ..Self::distance(values)
        }
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.values.is_empty() {
            out.push(Violation::new("sweep.values", "must not be empty"));
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            out.push(Violation::new("sweep.values", "must be strictly increasing"));
        }
        if self.values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            out.push(Violation::new("sweep.values", "must be positive and finite"));
        }
        if self.weathers.is_empty() {
            out.push(Violation::new("sweep.weathers", "must not be empty"));
        }
        if self.modes.is_empty() {
            out.push(Violation::new("sweep.modes", "must not be empty"));
        }
        if self.metrics.is_empty() {
            out.push(Violation::new("sweep.metrics", "must not be empty"));
        }
        if self.n_trials < MIN_TRIALS {
            out.push(Violation::new("sweep.n_trials", format!("must be >= {MIN_TRIALS}")));
        }
        if !(self.delay_threshold > 0.0) {
            out.push(Violation::new("sweep.delay_threshold", "must be > 0"));
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub weather: WeatherKind,
    pub mode: Mode,
    pub metric: Metric,
    pub estimate: MetricEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn get(&self, value: f64, weather: WeatherKind, mode: Mode, metric: Metric) -> Option<&MetricEstimate> {
        self.rows
            .iter()
            .find(|r| r.value == value && r.weather == weather && r.mode == mode && r.metric == metric)
            .map(|r| &r.estimate)
    }
}

/// Runs `n_trials` coupled trials of `config` for sweep point `point_index`,
/// in parallel on the current rayon pool, returned in trial order.
pub fn simulate_point(config: &ScenarioConfig, point_index: u64, n_trials: u64, master_seed: u64) -> Result<Vec<TrialOutcome>> {
    let model = TrialModel::new(config)?;
    Ok((0..n_trials)
        .into_par_iter()
        .map(|j| model.run(&mut trial_rng(master_seed, point_index, j)))
        .collect())
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    Ok(pool.install(f))
}

fn estimate(
    outcomes: &[TrialOutcome],
    config: &ScenarioConfig,
    mode: Mode,
    metric: Metric,
    t_th: f64,
) -> Result<MetricEstimate> {
    match metric {
        Metric::Prp => prp(outcomes, mode, config.sinr_threshold_vlc(), config.sinr_threshold_rf()),
        Metric::Dor => dor(outcomes, mode, config, t_th),
        Metric::Rate => mean_rate(outcomes, mode, config),
    }
}

/// Runs a full sweep. Distance sweeps draw a fresh trial set per distance
/// (point index = position in `values`); delay-threshold sweeps draw one
/// trial set (point index 0) per weather and evaluate every threshold on it.
/// Each weather reuses the same seeds, so weather comparisons are paired.
pub fn run_sweep(config: &ScenarioConfig, spec: &SweepSpec) -> Result<SweepTable> {
    config.ensure_valid()?;
    spec.validate().map_err(Error::InvalidConfig)?;
    with_workers(spec.workers, || run_sweep_inner(config, spec))?
}

fn run_sweep_inner(config: &ScenarioConfig, spec: &SweepSpec) -> Result<SweepTable> {
    let mut rows = Vec::new();
    match spec.variable {
        SweepVariable::Distance => {
            for (i, &d) in spec.values.iter().enumerate() {
                let at_d = config.with_distance(d);
                for w in &spec.weathers {
                    let cfg = at_d.with_weather(*w);
                    let outcomes = simulate_point(&cfg, i as u64, spec.n_trials, spec.master_seed)?;
                    push_rows(&mut rows, &outcomes, &cfg, spec, d, w.kind(), spec.delay_threshold)?;
                }
            }
        }
        SweepVariable::DelayThreshold => {
            let mut per_weather = Vec::with_capacity(spec.weathers.len());
            for w in &spec.weathers {
                let cfg = config.with_weather(*w);
                let outcomes = simulate_point(&cfg, 0, spec.n_trials, spec.master_seed)?;
                per_weather.push((cfg, outcomes));
            }
            for &t in &spec.values {
                for (cfg, outcomes) in &per_weather {
                    push_rows(&mut rows, outcomes, cfg, spec, t, cfg.weather.kind(), t)?;
                }
            }
        }
    }
    Ok(SweepTable {
        variable: spec.variable,
        rows,
    })
}

fn push_rows(
    rows: &mut Vec<SweepRow>,
    outcomes: &[TrialOutcome],
    cfg: &ScenarioConfig,
    spec: &SweepSpec,
    value: f64,
    weather: WeatherKind,
    t_th: f64,
) -> Result<()> {
    for &mode in &spec.modes {
        for &metric in &spec.metrics {
            rows.push(SweepRow {
                value,
                weather,
                mode,
                metric,
                estimate: estimate(outcomes, cfg, mode, metric, t_th)?,
            });
        }
    }
    Ok(())
}
