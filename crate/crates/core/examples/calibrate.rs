//! Prints the calibration observables for the default scenario: the
//! clear-weather PRP crossover of the pure links and the LA mean rate
//! endpoints. Override parameters with environment variables, e.g.
//! `VLC_NOISE_PSD=1e-24 RF_TX_POWER=0.02 cargo run --release --example calibrate`.

use std::env;

use hybrid_v2x::engine::{run_sweep, Metric, SweepSpec};
use hybrid_v2x::metrics::{vlc_cutoff_distance, Mode};
use hybrid_v2x::scenario::{ScenarioConfig, WeatherKind};

fn env_f64(key: &str) -> Option<f64> {
    env::var(key).ok().map(|v| v.parse().expect("numeric override"))
}

fn main() {
    let mut cfg = ScenarioConfig::default();
    if let Some(v) = env_f64("VLC_NOISE_PSD") {
        cfg.vlc.noise_psd = v;
    }
    if let Some(v) = env_f64("RF_TX_POWER") {
        cfg.rf.tx_power = v;
    }
    if let Some(v) = env_f64("RF_ALPHA") {
        cfg.rf.path_loss_exponent = v;
    }
    if let Some(v) = env_f64("THETA_VLC_DB") {
        cfg.sinr_threshold_vlc_db = v;
    }
    if let Some(v) = env_f64("THETA_RF_DB") {
        cfg.sinr_threshold_rf_db = v;
    }
    let trials = env_f64("TRIALS").unwrap_or(100_000.0) as u64;

    let cutoff = vlc_cutoff_distance(&cfg, cfg.sinr_threshold_vlc(), 5.0, 1000.0, 1e-3).unwrap();
    println!("vlc interference-free cutoff: {cutoff:.2} m");

    let distances: Vec<f64> = (1..=25).map(|i| 10.0 * i as f64).collect();
    let mut spec = SweepSpec::distance(distances.clone());
    spec.modes = vec![Mode::PureVlc, Mode::PureRf, Mode::La, Mode::NonLa];
    spec.metrics = vec![Metric::Prp, Metric::Rate];
    spec.n_trials = trials;
    let table = run_sweep(&cfg, &spec).unwrap();

    println!("{:>6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}", "d", "prp_vlc", "prp_rf", "prp_la", "r_vlc", "r_rf", "r_la", "r_nonla");
    let mut crossover = None;
    for &d in &distances {
        let g = |m, k| table.get(d, WeatherKind::Clear, m, k).unwrap().value;
        let (pv, pr) = (g(Mode::PureVlc, Metric::Prp), g(Mode::PureRf, Metric::Prp));
        if crossover.is_none() && pr > pv {
            crossover = Some(d);
        }
        println!(
            "{:>6} {:>9.5} {:>9.5} {:>9.5} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
            d,
            pv,
            pr,
            g(Mode::La, Metric::Prp),
            g(Mode::PureVlc, Metric::Rate) / 1e6,
            g(Mode::PureRf, Metric::Rate) / 1e6,
            g(Mode::La, Metric::Rate) / 1e6,
            g(Mode::NonLa, Metric::Rate) / 1e6,
        );
    }
    println!("crossover: {crossover:?}");
}
