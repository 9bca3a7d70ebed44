//! Flat `key = value` configuration documents.
//!
//! ```text
//! # comments run to end of line
//! lambda_density = 0.01
//! weather = dry_snow
//! vlc.pd_area = 1e-4
//! sweep.weathers = clear, rain
//! ```
//!
//! Keys are strict: an unknown or repeated key is an error. Missing keys keep
//! their defaults.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result, Violation};
use crate::metrics::Mode;
use crate::rf_channel::Fading;
use crate::scenario::{validate, Pose3, ScenarioConfig, Vec3, WeatherCondition, WeatherKind};

/// Sweep axes and run-size knobs shared by the subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub prp_distances_m: Vec<f64>,
    pub rate_distances_m: Vec<f64>,
    pub dor_distances_m: Vec<f64>,
    pub t_th_ms: Vec<f64>,
    /// `None` means "the configured weather if `weather` was set, else all four".
    pub weathers: Option<Vec<WeatherKind>>,
    /// `None` means each subcommand's default mode list.
    pub modes: Option<Vec<Mode>>,
    /// `None` means each subcommand's default trial count.
    pub n_trials: Option<u64>,
    pub seed: u64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            prp_distances_m: (1..=25).map(|i| 10.0 * i as f64).collect(),
            rate_distances_m: vec![50.0, 100.0, 150.0, 200.0, 250.0],
            dor_distances_m: vec![50.0, 200.0],
            t_th_ms: (1..=20).map(|i| 0.5 * i as f64).collect(),
            weathers: None,
            modes: None,
            n_trials: None,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub sweep: SweepSettings,
    weather_set: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            sweep: SweepSettings::default(),
            weather_set: false,
        }
    }
}

impl ExperimentConfig {
    pub fn weathers(&self) -> Vec<WeatherCondition> {
        match &self.sweep.weathers {
            Some(ws) => ws.iter().map(|k| self.weather_for(*k)).collect(),
            None if self.weather_set => vec![self.scenario.weather],
            None => WeatherKind::ALL.iter().map(|k| WeatherCondition::preset(*k)).collect(),
        }
    }

    fn weather_for(&self, kind: WeatherKind) -> WeatherCondition {
        if self.weather_set && self.scenario.weather.kind() == kind {
            self.scenario.weather
        } else {
            WeatherCondition::preset(kind)
        }
    }

    /// Every resolved parameter, one `key = value` line each, in a fixed order
    /// with round-trip float formatting.
    pub fn canonical_string(&self) -> String {
        let s = &self.scenario;
        let g = &s.geometry;
        let rsu = g.rsu_pose.position();
        let n = g.rsu_pose.axis();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("lambda_density", format!("{:?}", s.lambda_density));
        kv("rho_access", format!("{:?}", s.rho_access));
        kv("rho_a", format!("{:?}", s.rho_a));
        kv("beta_ov", format!("{:?}", s.beta_ov));
        kv("distance_r", format!("{:?}", s.distance_r));
        kv("payload_h", format!("{:?}", s.payload_h));
        kv("weather", s.weather.kind().to_string());
        kv("weather.attenuation_db_per_km", format!("{:?}", s.weather.attenuation_db_per_km()));
        kv("sinr_threshold_vlc_db", format!("{:?}", s.sinr_threshold_vlc_db));
        kv("sinr_threshold_rf_db", format!("{:?}", s.sinr_threshold_rf_db));
        kv("geometry.lane_half_length", format!("{:?}", g.lane_half_length));
        kv("geometry.lane_x_offset", format!("{:?}", g.lane_x_offset));
        kv("geometry.lane_y_offset", format!("{:?}", g.lane_y_offset));
        kv("geometry.rsu_position", format!("{:?},{:?},{:?}", rsu.x, rsu.y, rsu.z));
        kv("geometry.rsu_normal", format!("{:?},{:?},{:?}", n.x, n.y, n.z));
        kv("geometry.tx_height", format!("{:?}", g.tx_height));
        kv("geometry.exclusion_radius", format!("{:?}", g.exclusion_radius));
        let v = &s.vlc;
        kv("vlc.optical_tx_power", format!("{:?}", v.optical_tx_power));
        kv("vlc.semi_angle_half_power", format!("{:?}", v.semi_angle_half_power));
        kv("vlc.pd_area", format!("{:?}", v.pd_area));
        kv("vlc.fov", format!("{:?}", v.fov));
        kv("vlc.optical_filter_gain", format!("{:?}", v.optical_filter_gain));
        kv("vlc.concentrator_refractive_index", format!("{:?}", v.concentrator_refractive_index));
        kv("vlc.responsivity", format!("{:?}", v.responsivity));
        kv("vlc.noise_psd", format!("{:?}", v.noise_psd));
        kv("vlc.bandwidth", format!("{:?}", v.bandwidth));
        let r = &s.rf;
        kv("rf.tx_power", format!("{:?}", r.tx_power));
        kv("rf.path_loss_exponent", format!("{:?}", r.path_loss_exponent));
        kv("rf.reference_distance", format!("{:?}", r.reference_distance));
        kv("rf.reference_loss_db", format!("{:?}", r.reference_loss_db));
        kv("rf.fading", r.fading.to_string());
        kv("rf.noise_psd", format!("{:?}", r.noise_psd));
        kv("rf.noise_figure_db", format!("{:?}", r.noise_figure_db));
        kv("rf.bandwidth", format!("{:?}", r.bandwidth));
        let w = &self.sweep;
        kv("sweep.prp_distances_m", fmt_list(&w.prp_distances_m));
        kv("sweep.rate_distances_m", fmt_list(&w.rate_distances_m));
        kv("sweep.dor_distances_m", fmt_list(&w.dor_distances_m));
        kv("sweep.t_th_ms", fmt_list(&w.t_th_ms));
        kv(
            "sweep.weathers",
            self.weathers().iter().map(|w| w.kind().name()).collect::<Vec<_>>().join(","),
        );
        kv(
            "sweep.modes",
            w.modes
                .as_ref()
                .map(|m| m.iter().map(|m| m.name()).collect::<Vec<_>>().join(","))
                .unwrap_or_else(|| "default".into()),
        );
        kv("sweep.n_trials", w.n_trials.map(|n| n.to_string()).unwrap_or_else(|| "default".into()));
        kv("sweep.seed", w.seed.to_string());
        out
    }

    /// `sha256:<hex>` of [`canonical_string`](Self::canonical_string).
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest.iter() {
            let _ = write!(hex, "{b:02x}");
        }
        format!("sha256:{hex}")
    }
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

/// Tilt/azimuth pair that `geometry.rsu_*` keys resolve into.
struct RsuSpec {
    x: f64,
    y: f64,
    height: f64,
    tilt_deg: f64,
    azimuth_deg: f64,
}

impl RsuSpec {
    fn pose(&self) -> Result<Pose3> {
        let t = self.tilt_deg.to_radians();
        let a = self.azimuth_deg.to_radians();
        Pose3::new(
            Vec3::new(self.x, self.y, self.height),
            Vec3::new(t.cos() * a.cos(), t.cos() * a.sin(), -t.sin()),
        )
    }
}

/// Parses a configuration document, applies defaults, and validates the
/// result.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut rsu = RsuSpec {
        x: 0.0,
        y: 0.0,
        height: 5.0,
        tilt_deg: 45.0,
        azimuth_deg: 0.0,
    };
    let mut weather_kind: Option<WeatherKind> = None;
    let mut attenuation: Option<f64> = None;
    let mut nakagami_m: Option<f64> = None;
    let mut fading_name: Option<String> = None;
    let mut seen: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty key".into(),
            });
        }
        if seen.iter().any(|k| k == key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
        seen.push(key.to_string());

        let perr = |message: String| Error::Parse { line: line_no, message };
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| perr(format!("`{key}` expects a number, got `{value}`")))
        };
        let list = || -> Result<Vec<f64>> {
            value
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| perr(format!("`{key}` expects a comma-separated list of numbers")))
                })
                .collect()
        };

        let s = &mut cfg.scenario;
        let g = &mut s.geometry;
        match key {
            "lambda_density" => s.lambda_density = num()?,
            "rho_access" => s.rho_access = num()?,
            "rho_a" => s.rho_a = num()?,
            "beta_ov" => s.beta_ov = num()?,
            "distance_r" => s.distance_r = num()?,
            "payload_h" => s.payload_h = num()?,
            "sinr_threshold_vlc_db" => s.sinr_threshold_vlc_db = num()?,
            "sinr_threshold_rf_db" => s.sinr_threshold_rf_db = num()?,
            "weather" => {
                weather_kind = Some(value.parse().map_err(|e: Error| perr(e.to_string()))?);
            }
            "weather.attenuation_db_per_km" => attenuation = Some(num()?),

            "geometry.lane_half_length" => g.lane_half_length = num()?,
            "geometry.lane_x_offset" => g.lane_x_offset = num()?,
            "geometry.lane_y_offset" => g.lane_y_offset = num()?,
            "geometry.tx_height" => g.tx_height = num()?,
            "geometry.exclusion_radius" => g.exclusion_radius = num()?,
            "geometry.rsu_x" => rsu.x = num()?,
            "geometry.rsu_y" => rsu.y = num()?,
            "geometry.rsu_height" => rsu.height = num()?,
            "geometry.rsu_tilt_deg" => rsu.tilt_deg = num()?,
            "geometry.rsu_azimuth_deg" => rsu.azimuth_deg = num()?,

            "vlc.optical_tx_power" => s.vlc.optical_tx_power = num()?,
            "vlc.semi_angle_half_power" => s.vlc.semi_angle_half_power = num()?,
            "vlc.pd_area" => s.vlc.pd_area = num()?,
            "vlc.fov" => s.vlc.fov = num()?,
            "vlc.optical_filter_gain" => s.vlc.optical_filter_gain = num()?,
            "vlc.concentrator_refractive_index" => s.vlc.concentrator_refractive_index = num()?,
            "vlc.responsivity" => s.vlc.responsivity = num()?,
            "vlc.noise_psd" => s.vlc.noise_psd = num()?,
            "vlc.bandwidth" => s.vlc.bandwidth = num()?,

            "rf.tx_power" => s.rf.tx_power = num()?,
            "rf.path_loss_exponent" => s.rf.path_loss_exponent = num()?,
            "rf.reference_distance" => s.rf.reference_distance = num()?,
            "rf.reference_loss_db" => s.rf.reference_loss_db = num()?,
            "rf.fading" => fading_name = Some(value.to_string()),
            "rf.nakagami_m" => nakagami_m = Some(num()?),
            "rf.noise_psd" => s.rf.noise_psd = num()?,
            "rf.noise_figure_db" => s.rf.noise_figure_db = num()?,
            "rf.bandwidth" => s.rf.bandwidth = num()?,

            "sweep.prp_distances_m" => cfg.sweep.prp_distances_m = list()?,
            "sweep.rate_distances_m" => cfg.sweep.rate_distances_m = list()?,
            "sweep.dor_distances_m" => cfg.sweep.dor_distances_m = list()?,
            "sweep.t_th_ms" => cfg.sweep.t_th_ms = list()?,
            "sweep.weathers" => {
                cfg.sweep.weathers = Some(parse_weathers(value).map_err(|e| perr(e.to_string()))?);
            }
            "sweep.modes" => {
                cfg.sweep.modes = Some(parse_modes(value).map_err(|e| perr(e.to_string()))?);
            }
            "sweep.n_trials" => {
                cfg.sweep.n_trials = Some(
                    value
                        .parse()
                        .map_err(|_| perr(format!("`{key}` expects a positive integer")))?,
                )
            }
            "sweep.seed" => {
                cfg.sweep.seed = value
                    .parse()
                    .map_err(|_| perr(format!("`{key}` expects an unsigned 64-bit integer")))?
            }
            other => return Err(perr(format!("unknown key `{other}`"))),
        }
    }

    let mut violations = Vec::new();
    match rsu.pose() {
        Ok(p) => cfg.scenario.geometry.rsu_pose = p,
        Err(e) => violations.push(Violation::new("geometry.rsu_height", e.to_string())),
    }

    cfg.scenario.rf.fading = match (fading_name.as_deref(), nakagami_m) {
        (None | Some("rayleigh"), None) => Fading::Rayleigh,
        (None | Some("rayleigh"), Some(_)) => {
            violations.push(Violation::new("rf.nakagami_m", "only valid with `rf.fading = nakagami`"));
            Fading::Rayleigh
        }
        (Some("nakagami"), m) => Fading::Nakagami {
            m_shape: m.unwrap_or(1.0),
        },
        (Some(other), _) => {
            violations.push(Violation::new("rf.fading", format!("unknown fading `{other}`")));
            Fading::Rayleigh
        }
    };

    if let Some(kind) = weather_kind {
        cfg.weather_set = true;
        cfg.scenario.weather = WeatherCondition::preset(kind);
    }
    if let Some(c) = attenuation {
        let base = cfg.scenario.weather;
        match WeatherCondition::new(base.kind(), base.descriptor(), c) {
            Ok(w) => cfg.scenario.weather = w,
            Err(e) => violations.push(Violation::new("weather.attenuation_db_per_km", e.to_string())),
        }
    }

    if let Err(v) = validate(&cfg.scenario) {
        violations.extend(v);
    }
    sweep_violations(&cfg.sweep, &mut violations);
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::InvalidConfig(violations))
    }
}

fn sweep_violations(s: &SweepSettings, out: &mut Vec<Violation>) {
    let lists = [
        ("sweep.prp_distances_m", &s.prp_distances_m),
        ("sweep.rate_distances_m", &s.rate_distances_m),
        ("sweep.dor_distances_m", &s.dor_distances_m),
        ("sweep.t_th_ms", &s.t_th_ms),
    ];
    for (field, xs) in lists {
        if xs.is_empty() || xs.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            out.push(Violation::new(field, "must be a nonempty list of positive numbers"));
        } else if xs.windows(2).any(|w| !(w[1] > w[0])) {
            out.push(Violation::new(field, "must be strictly increasing"));
        }
    }
    if let Some(n) = s.n_trials {
        if n < crate::engine::MIN_TRIALS {
            out.push(Violation::new(
                "sweep.n_trials",
                format!("must be >= {}", crate::engine::MIN_TRIALS),
            ));
        }
    }
}

pub fn parse_weathers(s: &str) -> Result<Vec<WeatherKind>> {
    s.split(',').map(str::parse).collect()
}

pub fn parse_modes(s: &str) -> Result<Vec<Mode>> {
    s.split(',').map(str::parse).collect()
}
