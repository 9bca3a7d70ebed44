//! Intersection geometry, weather presets, and interferer deployment.
//!
//! Two single-lane roads cross at `(lane_x_offset, lane_y_offset)`. The
//! desired vehicle drives on the "same" lane (parallel to the x-axis) at
//! horizontal offset `distance_r` from the crossing, the road-side unit (RSU)
//! hangs above the crossing, and contending vehicles on both lanes form
//! independent 1-D Poisson point processes thinned by the channel-access
//! probability.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result, Violation};
use crate::rf_channel::RfParams;
use crate::vlc_channel::VlcParams;

/// Axis norms may deviate from 1 by at most this much.
pub const AXIS_NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn sub(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Position plus unit axis (emitter boresight or receiver normal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose3 {
    position: Vec3,
    axis: Vec3,
}

impl Pose3 {
    /// Builds a pose, normalising `axis`. Rejects a zero or non-finite axis
    /// and positions below ground.
    pub fn new(position: Vec3, axis: Vec3) -> Result<Self> {
        if !position.is_finite() {
            return Err(Error::invalid("position", "must be finite"));
        }
        if position.z < 0.0 {
            return Err(Error::invalid("position", "z must be >= 0"));
        }
        let n = axis.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::invalid("axis", "must be a finite nonzero vector"));
        }
        Ok(Self {
            position,
            axis: axis.scale(1.0 / n),
        })
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn distance_to(&self, other: &Pose3) -> f64 {
        other.position.sub(self.position).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeatherKind {
    Clear,
    Rain,
    Fog,
    DrySnow,
}

impl WeatherKind {
    pub const ALL: [WeatherKind; 4] = [
        WeatherKind::Clear,
        WeatherKind::Rain,
        WeatherKind::Fog,
        WeatherKind::DrySnow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeatherKind::Clear => "clear",
            WeatherKind::Rain => "rain",
            WeatherKind::Fog => "fog",
            WeatherKind::DrySnow => "dry_snow",
        }
    }
}

impl fmt::Display for WeatherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeatherKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "clear" => Ok(WeatherKind::Clear),
            "rain" => Ok(WeatherKind::Rain),
            "fog" => Ok(WeatherKind::Fog),
            "dry_snow" | "snow" => Ok(WeatherKind::DrySnow),
            other => Err(Error::invalid("weather", format!("unknown weather `{other}`"))),
        }
    }
}

/// Physical descriptor a weather attenuation coefficient was tabulated for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeatherDescriptor {
    None,
    /// mm/hr
    RainRate(f64),
    /// km
    Visibility(f64),
    /// mm/hr
    SnowRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherCondition {
    kind: WeatherKind,
    descriptor: WeatherDescriptor,
    attenuation_db_per_km: f64,
}

impl WeatherCondition {
    pub fn new(
        kind: WeatherKind,
        descriptor: WeatherDescriptor,
        attenuation_db_per_km: f64,
    ) -> Result<Self> {
        if !(attenuation_db_per_km >= 0.0) || !attenuation_db_per_km.is_finite() {
            return Err(Error::invalid(
                "attenuation_db_per_km",
                "must be finite and >= 0",
            ));
        }
        if kind == WeatherKind::Clear && attenuation_db_per_km != 0.0 {
            return Err(Error::invalid(
                "attenuation_db_per_km",
                "clear weather has zero attenuation",
            ));
        }
        Ok(Self {
            kind,
            descriptor,
            attenuation_db_per_km,
        })
    }

    pub const fn clear() -> Self {
        Self {
            kind: WeatherKind::Clear,
            descriptor: WeatherDescriptor::None,
            attenuation_db_per_km: 0.0,
        }
    }

    /// Heavy rain, 90 mm/hr.
    pub const fn rain() -> Self {
        Self {
            kind: WeatherKind::Rain,
            descriptor: WeatherDescriptor::RainRate(90.0),
            attenuation_db_per_km: 21.9,
        }
    }

    /// Dense fog, 50 m visibility.
    pub const fn fog() -> Self {
        Self {
            kind: WeatherKind::Fog,
            descriptor: WeatherDescriptor::Visibility(0.05),
            attenuation_db_per_km: 78.8,
        }
    }

    /// Dry snow, 10 mm/hr.
    pub const fn dry_snow() -> Self {
        Self {
            kind: WeatherKind::DrySnow,
            descriptor: WeatherDescriptor::SnowRate(10.0),
            attenuation_db_per_km: 131.0,
        }
    }

    pub fn preset(kind: WeatherKind) -> Self {
        match kind {
            WeatherKind::Clear => Self::clear(),
            WeatherKind::Rain => Self::rain(),
            WeatherKind::Fog => Self::fog(),
            WeatherKind::DrySnow => Self::dry_snow(),
        }
    }

    pub fn kind(&self) -> WeatherKind {
        self.kind
    }

    pub fn descriptor(&self) -> WeatherDescriptor {
        self.descriptor
    }

    pub fn attenuation_db_per_km(&self) -> f64 {
        self.attenuation_db_per_km
    }

    /// Linear optical power factor over `distance` meters.
    pub fn factor(&self, distance: f64) -> Result<f64> {
        attenuation_factor(self.attenuation_db_per_km, distance)
    }
}

impl Default for WeatherCondition {
    fn default() -> Self {
        Self::clear()
    }
}

/// Beer–Lambert power factor `10^(-c * d_km / 10)`.
pub fn attenuation_factor(attenuation_db_per_km: f64, distance: f64) -> Result<f64> {
    if !(attenuation_db_per_km >= 0.0) {
        return Err(Error::invalid("attenuation_db_per_km", "must be >= 0"));
    }
    if !(distance >= 0.0) {
        return Err(Error::invalid("distance", "must be >= 0"));
    }
    Ok(10f64.powf(-attenuation_db_per_km * (distance / 1000.0) / 10.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneGeometry {
    /// Each lane is modeled on `[-half_length, half_length]` around the crossing.
    pub lane_half_length: f64,
    /// x coordinate of the perpendicular lane's centerline.
    pub lane_x_offset: f64,
    /// y coordinate of the desired vehicle's lane centerline.
    pub lane_y_offset: f64,
    pub rsu_pose: Pose3,
    /// Headlamp / antenna height of every vehicle.
    pub tx_height: f64,
    /// No interferer may lie closer than this to the desired vehicle.
    pub exclusion_radius: f64,
}

impl LaneGeometry {
    /// Receiver normal pointing toward +x (the desired lane) and `tilt_deg`
    /// below horizontal.
    pub fn rsu_facing_desired_lane(height: f64, tilt_deg: f64) -> Result<Pose3> {
        let t = tilt_deg.to_radians();
        Pose3::new(Vec3::new(0.0, 0.0, height), Vec3::new(t.cos(), 0.0, -t.sin()))
    }

    pub fn crossing(&self) -> (f64, f64) {
        (self.lane_x_offset, self.lane_y_offset)
    }

    /// Pose of a vehicle on the same lane at coordinate `x`, boresight
    /// horizontal toward the crossing.
    pub fn same_lane_pose(&self, x: f64) -> Pose3 {
        let dir = if x >= self.lane_x_offset { -1.0 } else { 1.0 };
        Pose3 {
            position: Vec3::new(x, self.lane_y_offset, self.tx_height),
            axis: Vec3::new(dir, 0.0, 0.0),
        }
    }

    /// Pose of a vehicle on the perpendicular lane at coordinate `y`.
    pub fn perpendicular_lane_pose(&self, y: f64) -> Pose3 {
        let dir = if y >= self.lane_y_offset { -1.0 } else { 1.0 };
        Pose3 {
            position: Vec3::new(self.lane_x_offset, y, self.tx_height),
            axis: Vec3::new(0.0, dir, 0.0),
        }
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        if !(self.lane_half_length > 0.0) || !self.lane_half_length.is_finite() {
            out.push(Violation::new("geometry.lane_half_length", "must be > 0"));
        }
        if !self.lane_x_offset.is_finite() {
            out.push(Violation::new("geometry.lane_x_offset", "must be finite"));
        }
        if !self.lane_y_offset.is_finite() {
            out.push(Violation::new("geometry.lane_y_offset", "must be finite"));
        }
        if !(self.tx_height > 0.0) || !self.tx_height.is_finite() {
            out.push(Violation::new("geometry.tx_height", "must be > 0"));
        }
        if !(self.rsu_pose.position.z > self.tx_height) {
            out.push(Violation::new(
                "geometry.rsu_height",
                "RSU must be mounted above the vehicle transmitters",
            ));
        }
        if (self.rsu_pose.axis.norm() - 1.0).abs() > AXIS_NORM_TOLERANCE {
            out.push(Violation::new("geometry.rsu_tilt_deg", "receiver normal must be a unit vector"));
        }
        if !(self.exclusion_radius >= 0.0) || !self.exclusion_radius.is_finite() {
            out.push(Violation::new("geometry.exclusion_radius", "must be >= 0"));
        }
    }
}

impl Default for LaneGeometry {
    fn default() -> Self {
        Self {
            lane_half_length: 500.0,
            lane_x_offset: 0.0,
            lane_y_offset: 0.0,
            rsu_pose: LaneGeometry::rsu_facing_desired_lane(5.0, 45.0)
                .expect("default RSU pose is valid"),
            tx_height: 0.75,
            exclusion_radius: 1.0,
        }
    }
}

/// Default SINR decode thresholds in dB.
pub const DEFAULT_SINR_THRESHOLD_VLC_DB: f64 = -20.0;
pub const DEFAULT_SINR_THRESHOLD_RF_DB: f64 = 16.0;

/// A complete single-point experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: LaneGeometry,
    pub weather: WeatherCondition,
    /// Vehicles per meter on each lane.
    pub lambda_density: f64,
    /// Channel-access probability of contending vehicles.
    pub rho_access: f64,
    /// Transmission probability of the desired vehicle.
    pub rho_a: f64,
    /// Link-aggregation overhead factor.
    pub beta_ov: f64,
    /// Horizontal distance of the desired vehicle from the crossing, meters.
    pub distance_r: f64,
    /// Payload size in bytes.
    pub payload_h: f64,
    pub vlc: VlcParams,
    pub rf: RfParams,
    pub sinr_threshold_vlc_db: f64,
    pub sinr_threshold_rf_db: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            geometry: LaneGeometry::default(),
            weather: WeatherCondition::clear(),
            lambda_density: 0.01,
            rho_access: 0.01,
            rho_a: 0.9,
            beta_ov: 0.8,
            distance_r: 50.0,
            payload_h: 50.0 * 1024.0,
            vlc: VlcParams::default(),
            rf: RfParams::default(),
            sinr_threshold_vlc_db: DEFAULT_SINR_THRESHOLD_VLC_DB,
            sinr_threshold_rf_db: DEFAULT_SINR_THRESHOLD_RF_DB,
        }
    }
}

impl ScenarioConfig {
    pub fn desired_pose(&self) -> Pose3 {
        self.geometry
            .same_lane_pose(self.geometry.lane_x_offset + self.distance_r)
    }

    pub fn sinr_threshold_vlc(&self) -> f64 {
        db_to_linear(self.sinr_threshold_vlc_db)
    }

    pub fn sinr_threshold_rf(&self) -> f64 {
        db_to_linear(self.sinr_threshold_rf_db)
    }

    pub fn payload_bits(&self) -> f64 {
        8.0 * self.payload_h
    }

    pub fn with_distance(&self, distance_r: f64) -> Self {
        Self {
            distance_r,
            ..self.clone()
        }
    }

    pub fn with_weather(&self, weather: WeatherCondition) -> Self {
        Self {
            weather,
            ..self.clone()
        }
    }

    /// Fails with the full list of violations.
    pub fn ensure_valid(&self) -> Result<()> {
        validate(self).map_err(Error::InvalidConfig)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Checks every configuration invariant and reports all violations at once.
pub fn validate(config: &ScenarioConfig) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    config.geometry.violations(&mut out);

    let w = &config.weather;
    if !(w.attenuation_db_per_km >= 0.0) || !w.attenuation_db_per_km.is_finite() {
        out.push(Violation::new("weather.attenuation_db_per_km", "must be >= 0"));
    }
    if w.kind == WeatherKind::Clear && w.attenuation_db_per_km != 0.0 {
        out.push(Violation::new(
            "weather.attenuation_db_per_km",
            "clear weather has zero attenuation",
        ));
    }

    if !(config.lambda_density >= 0.0) || !config.lambda_density.is_finite() {
        out.push(Violation::new("lambda_density", "must be >= 0"));
    }
    if !(0.0..=1.0).contains(&config.rho_access) {
        out.push(Violation::new("rho_access", "must lie in [0, 1]"));
    }
    if !(config.rho_a > 0.0 && config.rho_a <= 1.0) {
        out.push(Violation::new("rho_a", "must lie in (0, 1]"));
    }
    if !(config.beta_ov > 0.0 && config.beta_ov <= 1.0) {
        out.push(Violation::new("beta_ov", "must lie in (0, 1]"));
    }
    if !(config.distance_r > 0.0) || !config.distance_r.is_finite() {
        out.push(Violation::new("distance_r", "must be > 0"));
    }
    if !(config.payload_h > 0.0) || !config.payload_h.is_finite() {
        out.push(Violation::new("payload_h", "must be > 0"));
    }
    if !config.sinr_threshold_vlc_db.is_finite() {
        out.push(Violation::new("sinr_threshold_vlc_db", "must be finite"));
    }
    if !config.sinr_threshold_rf_db.is_finite() {
        out.push(Violation::new("sinr_threshold_rf_db", "must be finite"));
    }
    config.vlc.violations(&mut out);
    config.rf.violations(&mut out);

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaneTag {
    Same,
    Perpendicular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    pub pose: Pose3,
    pub lane: LaneTag,
}

/// Transmit-active contending vehicles for one trial.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InterfererSet {
    pub entries: Vec<Interferer>,
}

impl InterfererSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, lane: LaneTag) -> usize {
        self.entries.iter().filter(|e| e.lane == lane).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interferer> {
        self.entries.iter()
    }
}

/// Draws one deployment: per lane, a Poisson(λ·ρ·2L) number of active
/// vehicles placed uniformly on the lane segment, minus any that fall inside
/// the exclusion radius around the desired vehicle.
///
/// Draw order is fixed (same-lane count, same-lane positions, perpendicular
/// count, perpendicular positions) so a given stream always yields the same
/// deployment.
pub fn sample_interferers<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> InterfererSet {
    let g = &config.geometry;
    let desired = config.desired_pose();
    let mean = config.lambda_density * config.rho_access * 2.0 * g.lane_half_length;

    let mut entries = Vec::new();
    for lane in [LaneTag::Same, LaneTag::Perpendicular] {
        let n = poisson_count(mean, rng);
        for _ in 0..n {
            let s = rng.gen_range(-g.lane_half_length..=g.lane_half_length);
            let pose = match lane {
                LaneTag::Same => g.same_lane_pose(g.lane_x_offset + s),
                LaneTag::Perpendicular => g.perpendicular_lane_pose(g.lane_y_offset + s),
            };
            if pose.distance_to(&desired) < g.exclusion_radius {
                continue;
            }
            entries.push(Interferer { pose, lane });
        }
    }
    InterfererSet { entries }
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    let n: f64 = dist.sample(rng);
    n as u64
}
