//! Line-of-sight Lambertian VLC channel for an IM/DD link.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result, Violation};
use crate::scenario::Pose3;

#[derive(Debug, Clone, PartialEq)]
pub struct VlcParams {
    /// Optical transmit power, W.
    pub optical_tx_power: f64,
    /// Half-power semi-angle of the headlamp, degrees.
    pub semi_angle_half_power: f64,
    /// Photodetector area, m².
    pub pd_area: f64,
    /// Receiver field of view (half-angle), degrees.
    pub fov: f64,
    pub optical_filter_gain: f64,
    pub concentrator_refractive_index: f64,
    /// A/W
    pub responsivity: f64,
    /// Lumped shot + thermal + ambient noise PSD, A²/Hz.
    pub noise_psd: f64,
    /// Hz
    pub bandwidth: f64,
}

impl Default for VlcParams {
    fn default() -> Self {
        Self {
            optical_tx_power: 1.0,
            semi_angle_half_power: 30.0,
            pd_area: 1e-4,
            fov: 60.0,
            optical_filter_gain: 1.0,
            concentrator_refractive_index: 1.5,
            responsivity: 0.54,
            noise_psd: DEFAULT_VLC_NOISE_PSD,
            bandwidth: 20e6,
        }
    }
}

/// Calibrated so the clear-weather, interference-free VLC link drops below
/// the default decode threshold just under 120 m.
pub const DEFAULT_VLC_NOISE_PSD: f64 = 3.5e-22;

impl VlcParams {
    pub(crate) fn violations(&self, out: &mut Vec<Violation>) {
        let positive = [
            ("vlc.optical_tx_power", self.optical_tx_power),
            ("vlc.pd_area", self.pd_area),
            ("vlc.optical_filter_gain", self.optical_filter_gain),
            ("vlc.concentrator_refractive_index", self.concentrator_refractive_index),
            ("vlc.responsivity", self.responsivity),
            ("vlc.noise_psd", self.noise_psd),
            ("vlc.bandwidth", self.bandwidth),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                out.push(Violation::new(field, "must be > 0"));
            }
        }
        if !(self.semi_angle_half_power > 0.0 && self.semi_angle_half_power < 90.0) {
            out.push(Violation::new("vlc.semi_angle_half_power", "must lie in (0, 90) degrees"));
        }
        if !(self.fov > 0.0 && self.fov <= 90.0) {
            out.push(Violation::new("vlc.fov", "must lie in (0, 90] degrees"));
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

    /// Concentrator gain `n² / sin²(fov)` inside the field of view.
    pub fn concentrator_gain(&self) -> f64 {
        let s = self.fov.to_radians().sin();
        self.concentrator_refractive_index.powi(2) / (s * s)
    }
}

/// Lambertian order `m = -ln 2 / ln cos(Φ½)`.
pub fn lambertian_order(semi_angle_half_power: f64) -> Result<f64> {
    if !(semi_angle_half_power > 0.0 && semi_angle_half_power < 90.0) {
        return Err(Error::invalid(
            "semi_angle_half_power",
            "must lie in (0, 90) degrees",
        ));
    }
    Ok(-LN_2 / semi_angle_half_power.to_radians().cos().ln())
}

/// DC gain of the direct path from `tx` (boresight = axis) to `rx`
/// (normal = axis). Zero when the receiver sees the emitter outside its field
/// of view or the receiver is behind the emitter.
pub fn vlc_los_gain(tx: &Pose3, rx: &Pose3, params: &VlcParams) -> Result<f64> {
    let m = lambertian_order(params.semi_angle_half_power)?;
    los_gain_with_order(tx, rx, params, m)
}

pub(crate) fn los_gain_with_order(tx: &Pose3, rx: &Pose3, params: &VlcParams, m: f64) -> Result<f64> {
    let to_rx = rx.position().sub(tx.position());
    let d = to_rx.norm();
    if d == 0.0 {
        return Err(Error::invalid("rx", "coincides with tx"));
    }
    let cos_phi = tx.axis().dot(to_rx) / d;
    let cos_psi = -rx.axis().dot(to_rx) / d;
    if cos_phi < 0.0 || cos_psi < params.fov.to_radians().cos() {
        return Ok(0.0);
    }
    let gain = (m + 1.0) * params.pd_area / (2.0 * PI * d * d)
        * cos_phi.powf(m)
        * params.optical_filter_gain
        * params.concentrator_gain()
        * cos_psi;
    Ok(gain.max(0.0))
}

/// Electrical signal power `(R · P_t · H · w)²` after square-law detection.
pub fn vlc_rx_electrical_power(gain: f64, weather_factor: f64, params: &VlcParams) -> f64 {
    let i = params.responsivity * params.optical_tx_power * gain * weather_factor;
    i * i
}

pub fn vlc_noise_power(params: &VlcParams) -> f64 {
    params.noise_psd * params.bandwidth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Vec3;

    fn pose(p: [f64; 3], a: [f64; 3]) -> Pose3 {
        Pose3::new(Vec3::new(p[0], p[1], p[2]), Vec3::new(a[0], a[1], a[2])).unwrap()
    }

    fn unit_params() -> VlcParams {
        VlcParams {
            semi_angle_half_power: 60.0,
            pd_area: 1e-4,
            fov: 90.0,
            optical_filter_gain: 1.0,
            concentrator_refractive_index: 1.0,
            ..VlcParams::default()
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        ((a - b) / b).abs() < tol
    }

    #[test]
    fn lambertian_order_examples() {
        assert!((lambertian_order(60.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((lambertian_order(45.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((lambertian_order(30.0).unwrap() - 4.818_841_679_306_42).abs() < 1e-12);
        assert!(lambertian_order(0.0).is_err());
        assert!(lambertian_order(90.0).is_err());
        assert!(lambertian_order(-10.0).is_err());
    }

    #[test]
    fn aligned_gain_and_inverse_square() {
        let p = unit_params();
        let tx = pose([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let rx10 = pose([10.0, 0.0, 0.0], [-1.0, 0.0, 0.0]);
        let rx20 = pose([20.0, 0.0, 0.0], [-1.0, 0.0, 0.0]);
        let g10 = vlc_los_gain(&tx, &rx10, &p).unwrap();
        let g20 = vlc_los_gain(&tx, &rx20, &p).unwrap();
        assert!(close(g10, 3.183_098_861_837_907e-7, 1e-12));
        assert!(close(g20, g10 / 4.0, 1e-12));
    }

    #[test]
    fn outside_fov_is_zero() {
        let p = VlcParams {
            fov: 30.0,
            ..unit_params()
        };
        let tx = pose([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        // receiver normal 45 degrees away from the incoming ray
        let rx = pose([10.0, 0.0, 0.0], [-1.0, 1.0, 0.0]);
        assert_eq!(vlc_los_gain(&tx, &rx, &p).unwrap(), 0.0);
        // emitter facing away
        let tx_back = pose([0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]);
        let rx_ok = pose([10.0, 0.0, 0.0], [-1.0, 0.0, 0.0]);
        assert_eq!(vlc_los_gain(&tx_back, &rx_ok, &p).unwrap(), 0.0);
    }

    #[test]
    fn coincident_poses_rejected() {
        let a = pose([1.0, 2.0, 3.0], [1.0, 0.0, 0.0]);
        assert!(vlc_los_gain(&a, &a, &unit_params()).is_err());
    }

    #[test]
    fn symmetric_configuration_is_reciprocal() {
        let p = unit_params();
        let a = pose([0.0, 0.0, 1.0], [1.0, 0.3, 0.0]);
        let b = pose([8.0, 2.0, 3.0], [-1.0, 0.1, -0.2]);
        let ab = vlc_los_gain(&a, &b, &p).unwrap();
        let ba = vlc_los_gain(&b, &a, &p).unwrap();
        assert!(ab > 0.0);
        assert!(close(ab, ba, 1e-12));
    }

    #[test]
    fn electrical_power_examples() {
        let p = VlcParams {
            responsivity: 0.5,
            optical_tx_power: 1.0,
            ..VlcParams::default()
        };
        assert_eq!(vlc_rx_electrical_power(0.0, 1.0, &p), 0.0);
        let full = vlc_rx_electrical_power(3.1831e-7, 1.0, &p);
        assert!(close(full, (0.5 * 3.1831e-7f64).powi(2), 1e-12));
        assert!(close(full, 2.533e-14, 1e-3));
        let half = vlc_rx_electrical_power(3.1831e-7, 0.5, &p);
        assert!(close(half, full / 4.0, 1e-12));
    }

    #[test]
    fn noise_power_examples() {
        let p = VlcParams {
            noise_psd: 1e-21,
            bandwidth: 20e6,
            ..VlcParams::default()
        };
        assert!(close(vlc_noise_power(&p), 2e-14, 1e-12));
        let p2 = VlcParams {
            bandwidth: 40e6,
            ..p.clone()
        };
        assert!(close(vlc_noise_power(&p2), 2.0 * vlc_noise_power(&p), 1e-12));
        let bad = VlcParams {
            bandwidth: 0.0,
            ..p
        };
        assert!(bad.validate().is_err());
    }
}
