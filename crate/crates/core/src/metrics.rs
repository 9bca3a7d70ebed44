//! Coupled per-trial SINR draws and the reliability/latency/rate metrics
//! computed from them.
//!
//! One trial draws a single interferer deployment that is shared by both
//! links. The VLC link has no fading, so its SINR is a deterministic function
//! of the deployment; the RF link adds i.i.d. unit-mean fading on the desired
//! and every interfering path.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Distribution;

use crate::engine::{confidence_interval, MetricEstimate};
use crate::error::{Error, Result};
use crate::rf_channel::{rf_mean_rx_power, rf_noise_power, Fading, FadingSampler, RfParams};
use crate::scenario::{sample_interferers, LaneTag, Pose3, ScenarioConfig, WeatherCondition};
use crate::vlc_channel::{
    lambertian_order, los_gain_with_order, vlc_noise_power, vlc_rx_electrical_power, VlcParams,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub sinr_vlc: f64,
    pub sinr_rf: f64,
    pub n_interferers_same: u32,
    pub n_interferers_perp: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    PureVlc,
    PureRf,
    /// Link aggregation: both links carry the packet at once.
    La,
    /// One link at a time, whichever is better.
    NonLa,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::PureVlc, Mode::PureRf, Mode::La, Mode::NonLa];

    pub fn name(self) -> &'static str {
        match self {
            Mode::PureVlc => "pure_vlc",
            Mode::PureRf => "pure_rf",
            Mode::La => "la",
            Mode::NonLa => "non_la",
        }
    }

    pub fn uses_vlc(self) -> bool {
        self != Mode::PureRf
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pure_vlc" | "vlc" => Ok(Mode::PureVlc),
            "pure_rf" | "rf" => Ok(Mode::PureRf),
            "la" => Ok(Mode::La),
            "non_la" => Ok(Mode::NonLa),
            other => Err(Error::invalid("mode", format!("unknown mode `{other}`"))),
        }
    }
}

pub fn sinr(signal: f64, interference_sum: f64, noise: f64) -> Result<f64> {
    if !(noise > 0.0) {
        return Err(Error::invalid("noise", "must be > 0"));
    }
    if !(signal >= 0.0) || !(interference_sum >= 0.0) {
        return Err(Error::invalid("signal", "powers must be >= 0"));
    }
    Ok(signal / (interference_sum + noise))
}

/// Per-configuration constants hoisted out of the trial loop.
#[derive(Debug, Clone)]
pub struct TrialModel {
    config: ScenarioConfig,
    rsu: Pose3,
    lambertian_m: f64,
    vlc_signal: f64,
    vlc_noise: f64,
    rf_signal_mean: f64,
    rf_noise: f64,
    fading: FadingSampler,
}

impl TrialModel {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.ensure_valid()?;
        let rsu = config.geometry.rsu_pose;
        let desired = config.desired_pose();
        let lambertian_m = lambertian_order(config.vlc.semi_angle_half_power)?;
        let vlc_signal = vlc_electrical_power(&desired, &rsu, &config.vlc, &config.weather, lambertian_m)?;
        let rf_signal_mean = rf_mean_rx_power(desired.distance_to(&rsu), &config.rf)?;
        Ok(Self {
            config: config.clone(),
            rsu,
            lambertian_m,
            vlc_signal,
            vlc_noise: vlc_noise_power(&config.vlc),
            rf_signal_mean,
            rf_noise: rf_noise_power(&config.rf),
            fading: FadingSampler::new(config.rf.fading)?,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Interference-free VLC SNR of the desired link.
    pub fn vlc_snr(&self) -> f64 {
        self.vlc_signal / self.vlc_noise
    }

    /// Mean interference-free RF SNR of the desired link.
    pub fn rf_mean_snr(&self) -> f64 {
        self.rf_signal_mean / self.rf_noise
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialOutcome {
        let cfg = &self.config;
        let set = sample_interferers(cfg, rng);

        let rf_signal = self.rf_signal_mean * self.fading.sample(rng);
        let mut vlc_interference = 0.0;
        let mut rf_interference = 0.0;
        for e in set.iter() {
            vlc_interference += vlc_electrical_power(&e.pose, &self.rsu, &cfg.vlc, &cfg.weather, self.lambertian_m)
                .expect("interferers never coincide with the RSU");
            let d = e.pose.distance_to(&self.rsu);
            rf_interference += rf_mean_rx_power(d, &cfg.rf).expect("positive distance") * self.fading.sample(rng);
        }

        TrialOutcome {
            sinr_vlc: self.vlc_signal / (vlc_interference + self.vlc_noise),
            sinr_rf: rf_signal / (rf_interference + self.rf_noise),
            n_interferers_same: set.count(LaneTag::Same) as u32,
            n_interferers_perp: set.count(LaneTag::Perpendicular) as u32,
        }
    }
}

fn vlc_electrical_power(
    tx: &Pose3,
    rsu: &Pose3,
    vlc: &VlcParams,
    weather: &WeatherCondition,
    m: f64,
) -> Result<f64> {
    let gain = los_gain_with_order(tx, rsu, vlc, m)?;
    if gain == 0.0 {
        return Ok(0.0);
    }
    let w = weather.factor(tx.distance_to(rsu))?;
    Ok(vlc_rx_electrical_power(gain, w, vlc))
}

/// One coupled trial. Prefer [`TrialModel`] when running many trials of the
/// same configuration.
pub fn run_trial<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<TrialOutcome> {
    Ok(TrialModel::new(config)?.run(rng))
}

/// Decode success. LA duplicates the packet on both links; non-LA is
/// credited with genie best-link selection, so both succeed if either link
/// clears its threshold.
pub fn success(outcome: &TrialOutcome, mode: Mode, theta_vlc: f64, theta_rf: f64) -> bool {
    let vlc = outcome.sinr_vlc >= theta_vlc;
    let rf = outcome.sinr_rf >= theta_rf;
    match mode {
        Mode::PureVlc => vlc,
        Mode::PureRf => rf,
        Mode::La | Mode::NonLa => vlc || rf,
    }
}

fn proportion(hits: usize, n: usize) -> MetricEstimate {
    let p = hits as f64 / n as f64;
    let (lo, hi) = confidence_interval(hits as u64, n as u64);
    MetricEstimate {
        value: p,
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
        n_trials: n as u64,
        ci95_low: lo,
        ci95_high: hi,
    }
}

/// Packet reception probability.
pub fn prp(outcomes: &[TrialOutcome], mode: Mode, theta_vlc: f64, theta_rf: f64) -> Result<MetricEstimate> {
    if outcomes.is_empty() {
        return Err(Error::invalid("outcomes", "need at least one trial"));
    }
    let hits = outcomes
        .iter()
        .filter(|o| success(o, mode, theta_vlc, theta_rf))
        .count();
    Ok(proportion(hits, outcomes.len()))
}

/// Rate-model constants pulled from a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub bandwidth_vlc: f64,
    pub bandwidth_rf: f64,
    pub rho_a: f64,
    pub beta_ov: f64,
}

impl From<&ScenarioConfig> for RateParams {
    fn from(c: &ScenarioConfig) -> Self {
        Self {
            bandwidth_vlc: c.vlc.bandwidth,
            bandwidth_rf: c.rf.bandwidth,
            rho_a: c.rho_a,
            beta_ov: c.beta_ov,
        }
    }
}

impl RateParams {
    /// Shannon rates of the VLC and RF links, bit/s.
    pub fn link_rates(&self, outcome: &TrialOutcome) -> (f64, f64) {
        (
            self.bandwidth_vlc * (1.0 + outcome.sinr_vlc).log2(),
            self.bandwidth_rf * (1.0 + outcome.sinr_rf).log2(),
        )
    }

    pub fn rate(&self, outcome: &TrialOutcome, mode: Mode) -> f64 {
        let (rv, rr) = self.link_rates(outcome);
        match mode {
            Mode::PureVlc => self.rho_a * rv,
            Mode::PureRf => self.rho_a * rr,
            Mode::NonLa => self.rho_a * rv.max(rr),
            Mode::La => self.beta_ov * self.rho_a * (rv + rr),
        }
    }
}

/// Achievable rate of one trial in bit/s.
pub fn instantaneous_rate(outcome: &TrialOutcome, mode: Mode, config: &ScenarioConfig) -> f64 {
    RateParams::from(config).rate(outcome, mode)
}

/// Mean achievable rate with a normal-approximation 95% interval.
pub fn mean_rate(outcomes: &[TrialOutcome], mode: Mode, config: &ScenarioConfig) -> Result<MetricEstimate> {
    if outcomes.is_empty() {
        return Err(Error::invalid("outcomes", "need at least one trial"));
    }
    let rp = RateParams::from(config);
    let rates: Vec<f64> = outcomes.iter().map(|o| rp.rate(o, mode)).collect();
    Ok(MetricEstimate::from_samples(&rates))
}

/// Minimum transmission time of `payload_bits` at `rate`; infinite when the
/// rate is zero.
pub fn min_transmission_time(payload_bits: f64, rate: f64) -> f64 {
    if rate > 0.0 {
        payload_bits / rate
    } else {
        f64::INFINITY
    }
}

/// Delay outage rate: fraction of trials whose minimum transmission time for
/// the payload exceeds `t_th` seconds.
pub fn dor(outcomes: &[TrialOutcome], mode: Mode, config: &ScenarioConfig, t_th: f64) -> Result<MetricEstimate> {
    if outcomes.is_empty() {
        return Err(Error::invalid("outcomes", "need at least one trial"));
    }
    if !(t_th > 0.0) {
        return Err(Error::invalid("t_th", "must be > 0"));
    }
    if !(config.payload_h > 0.0) {
        return Err(Error::invalid("payload_h", "must be > 0"));
    }
    let rp = RateParams::from(config);
    let bits = config.payload_bits();
    let outages = outcomes
        .iter()
        .filter(|o| min_transmission_time(bits, rp.rate(o, mode)) > t_th)
        .count();
    Ok(proportion(outages, outcomes.len()))
}

/// Exact RF reception probability without interference under Rayleigh
/// fading: `exp(-θ N / P̄(d))`.
pub fn prp_rf_closed_form_no_interference(distance: f64, rf: &RfParams, theta: f64) -> Result<f64> {
    if rf.fading != Fading::Rayleigh {
        return Err(Error::UnsupportedModel(format!(
            "closed form needs Rayleigh fading, got {}",
            rf.fading
        )));
    }
    let mean = rf_mean_rx_power(distance, rf)?;
    Ok((-theta * rf_noise_power(rf) / mean).exp())
}

/// Euclidean distance between the desired vehicle and the RSU.
pub fn desired_link_distance(config: &ScenarioConfig) -> f64 {
    config.desired_pose().distance_to(&config.geometry.rsu_pose)
}

/// Interference-free VLC SNR of the desired link in `config`.
pub fn vlc_snr_no_interference(config: &ScenarioConfig) -> Result<f64> {
    let m = lambertian_order(config.vlc.semi_angle_half_power)?;
    let s = vlc_electrical_power(
        &config.desired_pose(),
        &config.geometry.rsu_pose,
        &config.vlc,
        &config.weather,
        m,
    )?;
    Ok(s / vlc_noise_power(&config.vlc))
}

/// 1 if the deterministic, interference-free VLC link decodes at `theta`,
/// else 0.
pub fn prp_vlc_no_interference(config: &ScenarioConfig, theta: f64) -> Result<f64> {
    Ok(if vlc_snr_no_interference(config)? >= theta { 1.0 } else { 0.0 })
}

/// Largest desired-vehicle distance at which the interference-free VLC link
/// still decodes at `theta`, found by bisection on `[lo, hi]` to `tol` meters.
///
/// Assumes the SNR crosses `theta` once on the bracket (it decays
/// monotonically beyond a few meters from the RSU).
pub fn vlc_cutoff_distance(config: &ScenarioConfig, theta: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let ok = |d: f64| -> Result<bool> { Ok(prp_vlc_no_interference(&config.with_distance(d), theta)? == 1.0) };
    if !ok(lo)? {
        return Err(Error::invalid("lo", "VLC link fails at the lower bracket"));
    }
    if ok(hi)? {
        return Err(Error::invalid("hi", "VLC link still decodes at the upper bracket"));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if ok(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{attenuation_factor, WeatherCondition};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn outcome(v: f64, r: f64) -> TrialOutcome {
        TrialOutcome {
            sinr_vlc: v,
            sinr_rf: r,
            n_interferers_same: 0,
            n_interferers_perp: 0,
        }
    }

    #[test]
    fn sinr_examples() {
        assert!((sinr(1e-12, 0.0, 1e-13).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(sinr(0.0, 5.0, 1e-13).unwrap(), 0.0);
        assert!((sinr(1e-12, 1e-12, 1e-13).unwrap() - 1.0 / 1.1).abs() < 1e-12);
        assert!(sinr(1.0, 0.0, 0.0).is_err());
        assert!(sinr(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn success_truth_table() {
        let o = outcome(10.0, 0.1);
        assert!(success(&o, Mode::PureVlc, 1.0, 1.0));
        assert!(!success(&o, Mode::PureRf, 1.0, 1.0));
        assert!(success(&o, Mode::La, 1.0, 1.0));
        assert!(success(&o, Mode::NonLa, 1.0, 1.0));
        let low = outcome(0.5, 0.5);
        for m in Mode::ALL {
            assert!(!success(&low, m, 1.0, 1.0));
        }
    }

    #[test]
    fn prp_examples() {
        let all = vec![outcome(10.0, 10.0); 7];
        let e = prp(&all, Mode::La, 1.0, 1.0).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.stderr, 0.0);

        let coin: Vec<_> = (0..100)
            .map(|i| if i % 2 == 0 { outcome(2.0, 0.0) } else { outcome(0.5, 0.0) })
            .collect();
        let e = prp(&coin, Mode::PureVlc, 1.0, 1.0).unwrap();
        assert_eq!(e.value, 0.5);
        assert!((e.stderr - 0.05).abs() < 1e-15);
        assert!(prp(&[], Mode::La, 1.0, 1.0).is_err());
    }

    #[test]
    fn rate_examples() {
        let cfg = ScenarioConfig::default();
        let zero = outcome(0.0, 0.0);
        for m in Mode::ALL {
            assert_eq!(instantaneous_rate(&zero, m, &cfg), 0.0);
        }
        let o = outcome(15.0, 15.0);
        assert!((instantaneous_rate(&o, Mode::PureVlc, &cfg) - 72e6).abs() < 1e-6);
        assert!((instantaneous_rate(&o, Mode::PureRf, &cfg) - 72e6).abs() < 1e-6);
        assert!((instantaneous_rate(&o, Mode::La, &cfg) - 115.2e6).abs() < 1e-6);
        assert!((instantaneous_rate(&o, Mode::NonLa, &cfg) - 72e6).abs() < 1e-6);
    }

    #[test]
    fn dor_examples() {
        let cfg = ScenarioConfig::default();
        let o = [outcome(15.0, 15.0)];
        let mtt = min_transmission_time(cfg.payload_bits(), instantaneous_rate(&o[0], Mode::La, &cfg));
        assert!((mtt - 409_600.0 / 115.2e6).abs() < 1e-9);
        assert!((mtt - 3.556e-3).abs() < 1e-6);
        assert_eq!(dor(&o, Mode::La, &cfg, 3e-3).unwrap().value, 1.0);
        assert_eq!(dor(&o, Mode::La, &cfg, 4e-3).unwrap().value, 0.0);
        assert_eq!(dor(&o, Mode::La, &cfg, 1e6).unwrap().value, 0.0);
        assert_eq!(dor(&[outcome(0.0, 0.0)], Mode::La, &cfg, 1e6).unwrap().value, 1.0);
        assert!(dor(&o, Mode::La, &cfg, 0.0).is_err());
        assert!(dor(&[], Mode::La, &cfg, 1.0).is_err());
    }

    #[test]
    fn closed_form_oracle() {
        let rf = RfParams::default();
        assert_eq!(prp_rf_closed_form_no_interference(100.0, &rf, 0.0).unwrap(), 1.0);
        let d = 100.0;
        let theta = std::f64::consts::LN_2 * rf_mean_rx_power(d, &rf).unwrap() / rf_noise_power(&rf);
        assert!((prp_rf_closed_form_no_interference(d, &rf, theta).unwrap() - 0.5).abs() < 1e-12);
        let nak = RfParams {
            fading: Fading::Nakagami { m_shape: 2.0 },
            ..rf
        };
        assert!(matches!(
            prp_rf_closed_form_no_interference(d, &nak, 1.0),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn vlc_oracle_edges() {
        let cfg = ScenarioConfig::default().with_distance(40.0);
        assert_eq!(prp_vlc_no_interference(&cfg, f64::MIN_POSITIVE).unwrap(), 1.0);
        // RSU facing away from the desired lane
        let mut away = cfg.clone();
        away.geometry.rsu_pose = crate::scenario::Pose3::new(
            away.geometry.rsu_pose.position(),
            crate::scenario::Vec3::new(-1.0, 0.0, -1.0),
        )
        .unwrap();
        assert_eq!(prp_vlc_no_interference(&away, f64::MIN_POSITIVE).unwrap(), 0.0);
    }

    #[test]
    fn no_interference_vlc_is_deterministic() {
        let mut cfg = ScenarioConfig::default().with_distance(80.0);
        cfg.lambda_density = 0.0;
        let model = TrialModel::new(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let first = model.run(&mut rng).sinr_vlc;
        for _ in 0..1000 {
            assert_eq!(model.run(&mut rng).sinr_vlc, first);
        }
        assert_eq!(first, vlc_snr_no_interference(&cfg).unwrap());
    }

    #[test]
    fn snow_costs_twice_the_optical_loss() {
        let mut clear = ScenarioConfig::default().with_distance(60.0);
        clear.lambda_density = 0.0;
        let snow = clear.with_weather(WeatherCondition::dry_snow());
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        let a = run_trial(&clear, &mut r1).unwrap();
        let b = run_trial(&snow, &mut r2).unwrap();
        let f = attenuation_factor(131.0, desired_link_distance(&clear)).unwrap();
        let ratio = a.sinr_vlc / b.sinr_vlc;
        assert!((ratio / f.powi(-2) - 1.0).abs() < 1e-9);
        assert_eq!(a.sinr_rf, b.sinr_rf);
    }

    #[test]
    fn la_dominates_beta_scaled_non_la() {
        let cfg = ScenarioConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let o = outcome(rng.gen_range(0.0..1e3), rng.gen_range(0.0..1e3));
            let la = instantaneous_rate(&o, Mode::La, &cfg);
            let non_la = instantaneous_rate(&o, Mode::NonLa, &cfg);
            assert!(la >= cfg.beta_ov * non_la);
        }
    }

    #[test]
    fn la_beats_non_la_on_balanced_links() {
        // β_ov = 0.8: la ≥ non_la iff min ≥ 0.25 max
        let cfg = ScenarioConfig::default();
        let rp = RateParams::from(&cfg);
        for i in 0..=100 {
            let ratio = i as f64 / 100.0;
            let r_max = 80e6;
            let r_min = ratio * r_max;
            let la = rp.beta_ov * rp.rho_a * (r_max + r_min);
            let non_la = rp.rho_a * r_max;
            if ratio >= 0.25 {
                assert!(la >= non_la * (1.0 - 1e-15), "ratio {ratio}");
            } else {
                assert!(la < non_la, "ratio {ratio}");
            }
        }
    }
}
