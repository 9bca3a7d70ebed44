//! The sweep subcommands: PRP vs distance, DOR vs delay threshold, rate vs distance.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use super::config::{parse_config, ExperimentConfig};
use super::output::{estimate_fields, fmt_sig9, OutputSet};
use crate::engine::{run_sweep, simulate_point, Metric, SweepSpec, SweepTable, MIN_TRIALS};
use crate::error::{Error, Result, Violation};
use crate::metrics::Mode;
use crate::scenario::WeatherKind;

pub const PRP_HEADER: &str = "distance_m,weather,mode,prp,stderr,ci95_low,ci95_high,n_trials";
pub const DOR_HEADER: &str = "t_th_ms,distance_m,weather,mode,dor,stderr,ci95_low,ci95_high,n_trials";
pub const RATE_HEADER: &str = "distance_m,weather,mode,rate_mbps,stderr,ci95_low,ci95_high,n_trials";

pub const MANIFEST_FILE: &str = "run.manifest";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    PrpSweep,
    DorSweep,
    RateSweep,
    Validate,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::PrpSweep => "prp-sweep",
            Subcommand::DorSweep => "dor-sweep",
            Subcommand::RateSweep => "rate-sweep",
            Subcommand::Validate => "validate",
        }
    }

    fn default_trials(self) -> u64 {
        match self {
            Subcommand::DorSweep => 1_000_000,
            _ => 100_000,
        }
    }

    fn default_modes(self) -> Vec<Mode> {
        match self {
            Subcommand::RateSweep => Mode::ALL.to_vec(),
            _ => vec![Mode::PureVlc, Mode::PureRf, Mode::La],
        }
    }
}

/// Everything a run is parameterised by, as given on the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub weathers: Option<Vec<WeatherKind>>,
    pub modes: Option<Vec<Mode>>,
    pub gnuplot: bool,
    /// Worker threads; 0 lets the pool decide. Never changes the output.
    pub workers: usize,
    /// Also write per-trial SINR dumps (rate sweep only).
    pub dump_trials: bool,
}

/// Provenance record written next to the outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: Subcommand,
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub master_seed: u64,
    pub n_trials: u64,
    pub config_hash: String,
    pub timestamp: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "tool = {}", env!("CARGO_PKG_NAME"));
        let _ = writeln!(s, "version = {}", self.tool_version);
        let _ = writeln!(s, "subcommand = {}", self.subcommand.name());
        let _ = writeln!(
            s,
            "config = {}",
            self.config_path
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "<defaults>".into())
        );
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(s, "seed = {}", self.master_seed);
        let _ = writeln!(s, "n_trials = {}", self.n_trials);
        let _ = writeln!(s, "config_hash = {}", self.config_hash);
        let _ = writeln!(s, "timestamp = {}", self.timestamp);
        let _ = writeln!(s, "outputs = {}", self.outputs.join(","));
        s
    }
}

/// Reads and parses the configuration, then folds in command-line overrides.
pub fn load_config(opts: &RunOptions) -> Result<ExperimentConfig> {
    let text = match &opts.config_path {
        Some(p) => fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(s) = opts.seed {
        cfg.sweep.seed = s;
    }
    if let Some(n) = opts.trials {
        if n < MIN_TRIALS {
            return Err(Error::InvalidConfig(vec![Violation::new(
                "trials",
                format!("must be >= {MIN_TRIALS}"),
            )]));
        }
        cfg.sweep.n_trials = Some(n);
    }
    if let Some(w) = &opts.weathers {
        cfg.sweep.weathers = Some(w.clone());
    }
    if let Some(m) = &opts.modes {
        cfg.sweep.modes = Some(m.clone());
    }
    Ok(cfg)
}

struct Plan {
    cfg: ExperimentConfig,
    n_trials: u64,
    modes: Vec<Mode>,
}

fn plan(cmd: Subcommand, opts: &RunOptions) -> Result<Plan> {
    let cfg = load_config(opts)?;
    let n_trials = cfg.sweep.n_trials.unwrap_or_else(|| cmd.default_trials());
    let modes = cfg.sweep.modes.clone().unwrap_or_else(|| cmd.default_modes());
    Ok(Plan { cfg, n_trials, modes })
}

impl Plan {
    fn spec(&self, mut spec: SweepSpec, metric: Metric, workers: usize) -> SweepSpec {
        spec.weathers = self.cfg.weathers();
        spec.modes = self.modes.clone();
        spec.metrics = vec![metric];
        spec.n_trials = self.n_trials;
        spec.master_seed = self.cfg.sweep.seed;
        spec.workers = workers;
        spec
    }

    fn manifest(&self, cmd: Subcommand, opts: &RunOptions, outputs: &OutputSet) -> RunManifest {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            subcommand: cmd,
            config_path: opts.config_path.clone(),
            out_dir: opts.out_dir.clone(),
            master_seed: self.cfg.sweep.seed,
            n_trials: self.n_trials,
            config_hash: self.cfg.content_hash(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs: outputs
                .paths()
                .map(|p| {
                    p.strip_prefix(&opts.out_dir)
                        .unwrap_or(p)
                        .display()
                        .to_string()
                })
                .collect(),
        }
    }
}

fn finish(cmd: Subcommand, opts: &RunOptions, plan: &Plan, mut outputs: OutputSet) -> Result<Vec<PathBuf>> {
    let manifest = plan.manifest(cmd, opts, &outputs);
    outputs.add(opts.out_dir.join(MANIFEST_FILE), manifest.render());
    outputs.commit()
}

/// Per-curve gnuplot files: `x value stderr` per line.
fn gnuplot_curves(
    outputs: &mut OutputSet,
    dir: &Path,
    prefix: &str,
    table: &SweepTable,
    weathers: &[WeatherKind],
    modes: &[Mode],
    x_scale: f64,
    y_scale: f64,
) {
    for w in weathers {
        for m in modes {
            let mut body = format!("# x {prefix} stderr\n");
            for r in table.rows.iter().filter(|r| r.weather == *w && r.mode == *m) {
                let _ = writeln!(
                    body,
                    "{} {} {}",
                    fmt_sig9(r.value * x_scale),
                    fmt_sig9(r.estimate.value * y_scale),
                    fmt_sig9(r.estimate.stderr * y_scale)
                );
            }
            outputs.add(dir.join(format!("{prefix}_{}_{}.dat", w.name(), m.name())), body);
        }
    }
}

pub fn cmd_prp_sweep(opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let cmd = Subcommand::PrpSweep;
    let plan = plan(cmd, opts)?;
    let spec = plan.spec(SweepSpec::distance(plan.cfg.sweep.prp_distances_m.clone()), Metric::Prp, opts.workers);
    let table = run_sweep(&plan.cfg.scenario, &spec)?;

    let mut csv = format!("{PRP_HEADER}\n");
    for r in &table.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_sig9(r.value),
            r.weather,
            r.mode,
            estimate_fields(&r.estimate)
        );
    }
    let mut outputs = OutputSet::new();
    outputs.add(opts.out_dir.join("prp_sweep.csv"), csv);
    if opts.gnuplot {
        let ws: Vec<_> = spec.weathers.iter().map(|w| w.kind()).collect();
        gnuplot_curves(&mut outputs, &opts.out_dir.join("gnuplot"), "prp", &table, &ws, &spec.modes, 1.0, 1.0);
    }
    finish(cmd, opts, &plan, outputs)
}

pub fn cmd_dor_sweep(opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let cmd = Subcommand::DorSweep;
    let plan = plan(cmd, opts)?;
    let t_ms = plan.cfg.sweep.t_th_ms.clone();
    let t_s: Vec<f64> = t_ms.iter().map(|t| t / 1000.0).collect();

    let mut csv = format!("{DOR_HEADER}\n");
    let mut outputs = OutputSet::new();
    for &d in &plan.cfg.sweep.dor_distances_m {
        let scenario = plan.cfg.scenario.with_distance(d);
        let spec = plan.spec(SweepSpec::delay_threshold(t_s.clone()), Metric::Dor, opts.workers);
        let table = run_sweep(&scenario, &spec)?;
        for r in &table.rows {
            let i = t_s.iter().position(|t| *t == r.value).expect("row value from sweep grid");
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                fmt_sig9(t_ms[i]),
                fmt_sig9(d),
                r.weather,
                r.mode,
                estimate_fields(&r.estimate)
            );
        }
        if opts.gnuplot {
            let ws: Vec<_> = spec.weathers.iter().map(|w| w.kind()).collect();
            let prefix = format!("dor_{}m", fmt_sig9(d));
            gnuplot_curves(&mut outputs, &opts.out_dir.join("gnuplot"), &prefix, &table, &ws, &spec.modes, 1000.0, 1.0);
        }
    }
    let mut all = OutputSet::new();
    all.add(opts.out_dir.join("dor_sweep.csv"), csv);
    all.extend(outputs);
    finish(cmd, opts, &plan, all)
}

pub fn cmd_rate_sweep(opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let cmd = Subcommand::RateSweep;
    let plan = plan(cmd, opts)?;
    let distances = plan.cfg.sweep.rate_distances_m.clone();
    let spec = plan.spec(SweepSpec::distance(distances.clone()), Metric::Rate, opts.workers);
    let table = run_sweep(&plan.cfg.scenario, &spec)?;

    let mut csv = format!("{RATE_HEADER}\n");
    for r in &table.rows {
        let e = r.estimate.scaled(1e-6);
        let _ = writeln!(csv, "{},{},{},{}", fmt_sig9(r.value), r.weather, r.mode, estimate_fields(&e));
    }
    let mut outputs = OutputSet::new();
    outputs.add(opts.out_dir.join("rate_sweep.csv"), csv);
    if opts.gnuplot {
        let ws: Vec<_> = spec.weathers.iter().map(|w| w.kind()).collect();
        gnuplot_curves(&mut outputs, &opts.out_dir.join("gnuplot"), "rate", &table, &ws, &spec.modes, 1.0, 1e-6);
    }
    if opts.dump_trials {
        // Same (master, point, trial) seeds as the sweep, so these are the
        // exact trials behind each row.
        for (i, &d) in distances.iter().enumerate() {
            for w in &spec.weathers {
                let cfg = plan.cfg.scenario.with_distance(d).with_weather(*w);
                let outcomes = simulate_point(&cfg, i as u64, spec.n_trials, spec.master_seed)?;
                let mut body = String::from("trial,sinr_vlc,sinr_rf\n");
                for (j, o) in outcomes.iter().enumerate() {
                    let _ = writeln!(body, "{j},{:?},{:?}", o.sinr_vlc, o.sinr_rf);
                }
                outputs.add(
                    opts.out_dir
                        .join("trials")
                        .join(format!("rate_{}m_{}.csv", fmt_sig9(d), w.kind().name())),
                    body,
                );
            }
        }
    }
    finish(cmd, opts, &plan, outputs)
}

/// Parses and validates the configuration; returns its canonical form.
pub fn cmd_validate(opts: &RunOptions) -> Result<String> {
    let cfg = load_config(opts)?;
    Ok(format!("{}config_hash = {}\n", cfg.canonical_string(), cfg.content_hash()))
}

pub fn run(cmd: Subcommand, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    match cmd {
        Subcommand::PrpSweep => cmd_prp_sweep(opts),
        Subcommand::DorSweep => cmd_dor_sweep(opts),
        Subcommand::RateSweep => cmd_rate_sweep(opts),
        Subcommand::Validate => cmd_validate(opts).map(|_| Vec::new()),
    }
}
