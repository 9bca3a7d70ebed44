//! Sub-6 GHz RF link: log-distance path loss with unit-mean small-scale fading.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::error::{Error, Result, Violation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fading {
    Rayleigh,
    Nakagami { m_shape: f64 },
}

impl fmt::Display for Fading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fading::Rayleigh => f.write_str("rayleigh"),
            Fading::Nakagami { m_shape } => write!(f, "nakagami({m_shape})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfParams {
    /// W
    pub tx_power: f64,
    pub path_loss_exponent: f64,
    /// m
    pub reference_distance: f64,
    /// dB
    pub reference_loss_db: f64,
    pub fading: Fading,
    /// W/Hz
    pub noise_psd: f64,
    /// dB
    pub noise_figure_db: f64,
    /// Hz
    pub bandwidth: f64,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            tx_power: DEFAULT_RF_TX_POWER,
            path_loss_exponent: 2.0,
            reference_distance: 1.0,
            reference_loss_db: 47.0,
            fading: Fading::Rayleigh,
            noise_psd: 4e-21,
            noise_figure_db: 9.0,
            bandwidth: 20e6,
        }
    }
}

/// Calibrated transmit power, W.
pub const DEFAULT_RF_TX_POWER: f64 = 0.016;

impl RfParams {
    pub(crate) fn violations(&self, out: &mut Vec<Violation>) {
        if !(self.tx_power > 0.0) || !self.tx_power.is_finite() {
            out.push(Violation::new("rf.tx_power", "must be > 0"));
        }
        if !(self.path_loss_exponent >= 2.0) || !self.path_loss_exponent.is_finite() {
            out.push(Violation::new("rf.path_loss_exponent", "must be >= 2"));
        }
        if !(self.reference_distance > 0.0) || !self.reference_distance.is_finite() {
            out.push(Violation::new("rf.reference_distance", "must be > 0"));
        }
        if !self.reference_loss_db.is_finite() {
            out.push(Violation::new("rf.reference_loss_db", "must be finite"));
        }
        if let Fading::Nakagami { m_shape } = self.fading {
            if !(m_shape >= 0.5) || !m_shape.is_finite() {
                out.push(Violation::new("rf.nakagami_m", "must be >= 0.5"));
            }
        }
        if !(self.noise_psd > 0.0) || !self.noise_psd.is_finite() {
            out.push(Violation::new("rf.noise_psd", "must be > 0"));
        }
        if !self.noise_figure_db.is_finite() {
            out.push(Violation::new("rf.noise_figure_db", "must be finite"));
        }
        if !(self.bandwidth > 0.0) || !self.bandwidth.is_finite() {
            out.push(Violation::new("rf.bandwidth", "must be > 0"));
        }
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        self.violations(&mut out);
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }
}

/// Mean received power `P_t · 10^(-L0/10) · (d/d0)^(-α)`.
pub fn rf_mean_rx_power(distance: f64, params: &RfParams) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::invalid("distance", "must be > 0"));
    }
    Ok(params.tx_power
        * 10f64.powf(-params.reference_loss_db / 10.0)
        * (distance / params.reference_distance).powf(-params.path_loss_exponent))
}

/// Unit-mean power fading gain.
#[derive(Debug, Clone, Copy)]
pub enum FadingSampler {
    Rayleigh,
    Nakagami(Gamma<f64>),
}

impl FadingSampler {
    pub fn new(fading: Fading) -> Result<Self> {
        match fading {
            Fading::Rayleigh => Ok(FadingSampler::Rayleigh),
            Fading::Nakagami { m_shape } => {
                if !(m_shape >= 0.5) {
                    return Err(Error::invalid("nakagami_m", "must be >= 0.5"));
                }
                Gamma::new(m_shape, 1.0 / m_shape)
                    .map(FadingSampler::Nakagami)
                    .map_err(|e| Error::invalid("nakagami_m", e.to_string()))
            }
        }
    }
}

impl Distribution<f64> for FadingSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FadingSampler::Rayleigh => Exp1.sample(rng),
            FadingSampler::Nakagami(g) => g.sample(rng),
        }
    }
}

/// Draws one fading power gain: exponential(1) for Rayleigh, gamma(m, 1/m)
/// for Nakagami-m.
pub fn sample_fading<R: Rng + ?Sized>(params: &RfParams, rng: &mut R) -> f64 {
    FadingSampler::new(params.fading)
        .expect("validated fading parameters")
        .sample(rng)
}

pub fn rf_noise_power(params: &RfParams) -> f64 {
    params.noise_psd * params.bandwidth * 10f64.powf(params.noise_figure_db / 10.0)
}
