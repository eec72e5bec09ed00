//! Closed-form quantum predictions for atomic-cascade and down-conversion
//! photon-pair experiments, and the efficiency thresholds they imply.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::TwoChannelCounts;

/// Lens and detector parameters of a cascade source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    /// Lens half-aperture angle (rad).
    pub theta: f64,
    /// Detector quantum efficiency.
    pub zeta: f64,
    /// Pair production rate (1/s).
    pub r0: f64,
    /// Angular correlation parameter.
    #[serde(default = "one")]
    pub alpha: f64,
}

fn one() -> f64 {
    1.0
}

impl CascadeConfig {
    pub fn new(theta: f64, zeta: f64, r0: f64, alpha: f64) -> Result<Self> {
        let cfg = Self {
            theta,
            zeta,
            r0,
            alpha,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= FRAC_PI_2) {
            return Err(Error::InvalidInput(format!(
                "cascade theta = {} outside (0, pi/2]",
                self.theta
            )));
        }
        if !(0.0..=1.0).contains(&self.zeta) {
            return Err(Error::InvalidInput(format!(
                "zeta = {} outside [0, 1]",
                self.zeta
            )));
        }
        if !(self.r0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "r0 = {} must be positive",
                self.r0
            )));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "alpha = {} must be non-negative",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn optics(&self) -> CascadeOptics {
        cascade_optics(self.theta, self.zeta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeOptics {
    pub eta: f64,
    pub v: f64,
    pub alpha: f64,
}

/// Collection efficiency and visibility as functions of the lens aperture:
/// `eta = (1 - cos t) zeta / 2`, `V = 1 - (2/3)(1 - cos t)^2`, `alpha = 1`.
pub fn cascade_optics(theta: f64, zeta: f64) -> CascadeOptics {
    let u = 1.0 - theta.cos();
    CascadeOptics {
        eta: 0.5 * u * zeta,
        v: 1.0 - 2.0 / 3.0 * u * u,
        alpha: 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeRates {
    pub r1: f64,
    pub r2: f64,
    pub r12: f64,
}

/// Single and coincidence rates of a single-channel polarizer experiment.
pub fn cascade_rates(eta: f64, v: f64, alpha: f64, r0: f64, phi: f64) -> CascadeRates {
    let single = 0.5 * r0 * eta;
    CascadeRates {
        r1: single,
        r2: single,
        r12: 0.25 * r0 * eta * eta * alpha * (1.0 + v * (2.0 * phi).cos()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdcConfig {
    pub v: f64,
    pub eta: f64,
    pub r0: f64,
}

impl PdcConfig {
    pub fn new(v: f64, eta: f64, r0: f64) -> Result<Self> {
        let cfg = Self { v, eta, r0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.v) || !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidInput(format!(
                "pdc visibility {} and efficiency {} must lie in [0, 1]",
                self.v, self.eta
            )));
        }
        if !(self.r0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "r0 = {} must be positive",
                self.r0
            )));
        }
        Ok(())
    }
}

/// Two-channel coincidence rates `R++ = R-- = eta R0 (1 + V cos 2phi) / 2`,
/// `R+- = R-+ = R++(phi + pi/2)`.
pub fn two_channel_rates(cfg: &PdcConfig, phi: f64) -> TwoChannelCounts {
    let c = cfg.v * (2.0 * phi).cos();
    let same = 0.5 * cfg.eta * cfg.r0 * (1.0 + c);
    let diff = 0.5 * cfg.eta * cfg.r0 * (1.0 - c);
    TwoChannelCounts {
        ppp: same,
        ppm: diff,
        pmp: diff,
        pmm: same,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiMargin {
    pub lhs: f64,
    pub fulfilled: bool,
}

/// CH evaluated on the cascade prediction at optimal angles: `alpha eta (1 + sqrt2 V) <= 2`.
pub fn bi_margin(alpha: f64, eta: f64, v: f64) -> BiMargin {
    let lhs = alpha * eta * (1.0 + SQRT_2 * v);
    BiMargin {
        lhs,
        fulfilled: lhs <= 2.0,
    }
}

/// Smallest detector efficiency at which `zeta (1 + sqrt2 V) <= 2` can fail.
pub fn bi1_min_efficiency(v: f64) -> Result<f64> {
    if !(v > SQRT_2 / 2.0 && v <= 1.0) {
        return Err(Error::NoViolationPossible { visibility: v });
    }
    Ok(2.0 / (1.0 + SQRT_2 * v))
}

/// Signed angle differences for the pairs (A,B), (A,D), (C,B), (C,D).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSet {
    pub phi: [f64; 4],
}

impl AngleSet {
    /// Enforces `phi_AB + phi_CD = phi_AD + phi_CB`.
    pub fn new(phi: [f64; 4]) -> Result<Self> {
        let gap = phi[0] + phi[3] - phi[1] - phi[2];
        if gap.abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "angles {phi:?} violate phi1 + phi4 = phi2 + phi3 (gap {gap:.3e})"
            )));
        }
        Ok(Self { phi })
    }

    /// Angles realized by polarizer orientations `a, c` (side 1) and `b, d` (side 2).
    pub fn from_orientations(a: f64, c: f64, b: f64, d: f64) -> Self {
        Self {
            phi: [b - a, d - a, b - c, d - c],
        }
    }

    /// `cos 2phi1 + cos 2phi2 + cos 2phi3 - cos 2phi4`.
    pub fn objective(&self) -> f64 {
        let c = |x: f64| (2.0 * x).cos();
        c(self.phi[0]) + c(self.phi[1]) + c(self.phi[2]) - c(self.phi[3])
    }
}

/// The angle set maximizing the CHSH angular objective, and the maximum `2 sqrt2`.
pub fn optimal_angles() -> (AngleSet, f64) {
    let set = AngleSet {
        phi: [-FRAC_PI_8, FRAC_PI_8, FRAC_PI_8, 3.0 * FRAC_PI_8],
    };
    (set, 2.0 * SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeMaximum {
    pub max_lhs: f64,
    pub theta_star: f64,
}

const GOLDEN_TOLERANCE: f64 = 1e-10;

/// Stationary point of `u (1 + sqrt2 (1 - 2u^2/3)) / 2` in `u = 1 - cos theta`.
pub fn cascade_stationary_u() -> f64 {
    ((1.0 + SQRT_2) / (2.0 * SQRT_2)).sqrt()
}

/// Maximizes `alpha eta(theta) (1 + sqrt2 V(theta))` over the aperture
/// with golden-section search; doubles the result when either detector may
/// register either photon.
pub fn cascade_bi_maximum(zeta: f64, both_detectors: bool) -> Result<CascadeMaximum> {
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::InvalidInput(format!("zeta = {zeta} outside (0, 1]")));
    }
    let objective = |theta: f64| {
        let o = cascade_optics(theta, zeta);
        bi_margin(o.alpha, o.eta, o.v).lhs
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    while hi - lo > GOLDEN_TOLERANCE {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        }
    }
    let mut theta_star = 0.5 * (lo + hi);
    let mut best = objective(theta_star);

    let u = cascade_stationary_u();
    if u <= 1.0 {
        let closed_form = (1.0 - u).acos();
        let value = objective(closed_form);
        debug_assert!((closed_form - theta_star).abs() < 1e-4);
        if value > best {
            best = value;
            theta_star = closed_form;
        }
    }

    let factor = if both_detectors { 2.0 } else { 1.0 };
    Ok(CascadeMaximum {
        max_lhs: factor * best,
        theta_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityEstimates {
    /// Least-squares amplitude of `V cos 2phi`.
    pub v_fit: f64,
    /// Extremes of the coincidence curve: `(max - min) / (max + min)` on
    /// `R++ ~ 1 + E*`, i.e. `(E*max - E*min) / (E*max + E*min + 2)`.
    pub v_a: f64,
    /// `S* / (2 sqrt2)` from the samples nearest the canonical angles.
    pub v_b: f64,
}

pub fn v_b_from_s_star(s_star: f64) -> f64 {
    s_star / (2.0 * SQRT_2)
}

/// Folds an angle onto `[0, pi/2]` using the period and parity of `cos 2phi`.
fn fold(phi: f64) -> f64 {
    let r = phi.rem_euclid(std::f64::consts::PI);
    r.min(std::f64::consts::PI - r)
}

/// Three estimators of the visibility from `(phi, E*)` samples.
pub fn visibility_estimators(samples: &[(f64, f64)]) -> Result<VisibilityEstimates> {
    if samples.len() < 4 {
        return Err(Error::InsufficientCoverage(format!(
            "{} samples, need at least 4",
            samples.len()
        )));
    }
    let (min_phi, max_phi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(p, _)| {
            (lo.min(p), hi.max(p))
        });
    if max_phi - min_phi < FRAC_PI_2 - 1e-12 {
        return Err(Error::InsufficientCoverage(format!(
            "samples span {:.4} rad, need a half-period of pi/2",
            max_phi - min_phi
        )));
    }

    let (num, den) = samples.iter().fold((0.0, 0.0), |(n, d), &(phi, e)| {
        let c = (2.0 * phi).cos();
        (n + e * c, d + c * c)
    });
    let v_fit = num / den;

    let (e_min, e_max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, e)| {
            (lo.min(e), hi.max(e))
        });
    let v_a = (e_max - e_min) / (e_max + e_min + 2.0);

    let nearest = |target: f64| {
        samples
            .iter()
            .min_by(|a, b| {
                (fold(a.0) - target)
                    .abs()
                    .total_cmp(&(fold(b.0) - target).abs())
            })
            .map(|&(_, e)| e)
            .expect("non-empty")
    };
    let s_star = 3.0 * nearest(FRAC_PI_8) - nearest(3.0 * FRAC_PI_8);

    Ok(VisibilityEstimates {
        v_fit,
        v_a,
        v_b: v_b_from_s_star(s_star),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::renormalized_correlation;
    use std::f64::consts::PI;

    #[test]
    fn cascade_optics_examples() {
        let o = cascade_optics(PI / 3.0, 1.0);
        assert!((o.eta - 0.25).abs() < 1e-15);
        assert!((o.v - (1.0 - 2.0 / 3.0 * 0.25)).abs() < 1e-15);
        assert!((o.v - 0.8333).abs() < 1e-4);

        let o = cascade_optics(1e-9, 1.0);
        assert!(o.eta < 1e-15 && (o.v - 1.0).abs() < 1e-15);

        let o = cascade_optics(FRAC_PI_2, 1.0);
        assert!((o.eta - 0.5).abs() < 1e-15);
        assert!((o.v - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(o.alpha, 1.0);
    }

    #[test]
    fn cascade_config_rejects_bad_aperture() {
        assert!(CascadeConfig::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(CascadeConfig::new(2.0, 1.0, 1.0, 1.0).is_err());
        assert!(CascadeConfig::new(1.0, 1.1, 1.0, 1.0).is_err());
        assert!(CascadeConfig::new(1.0, 0.9, 1.0, 1.0).is_ok());
    }

    #[test]
    fn cascade_rates_examples() {
        let r = cascade_rates(1e-4, 0.85, 1.0, 1.0, 0.0);
        assert!((r.r12 - 4.625e-9).abs() < 1e-21);
        assert_eq!(r.r1, 0.5e-4);
        let a = cascade_rates(0.3, 0.0, 1.0, 10.0, 0.1).r12;
        let b = cascade_rates(0.3, 0.0, 1.0, 10.0, 1.3).r12;
        assert_eq!(a, b);
    }

    #[test]
    fn two_channel_rate_examples() {
        let cfg = PdcConfig::new(1.0, 0.2, 1000.0).unwrap();
        let r = two_channel_rates(&cfg, 0.0);
        assert_eq!((r.ppm, r.pmp), (0.0, 0.0));
        let r = two_channel_rates(&cfg, PI / 4.0);
        for x in r.as_array() {
            assert!((x - 0.5 * 0.2 * 1000.0).abs() < 1e-12);
        }
    }

    #[test]
    fn renormalized_round_trip() {
        let cfg = PdcConfig::new(1.0, 0.3, 1.0).unwrap();
        let e = renormalized_correlation(&two_channel_rates(&cfg, FRAC_PI_8)).unwrap();
        assert!((e - SQRT_2 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn bi_margin_examples() {
        let m = bi_margin(1.0, 1e-4, 0.85);
        assert!((m.lhs - 2.2021e-4).abs() < 1e-8);
        assert!(m.fulfilled);
        let m = bi_margin(1.0, 1.0, SQRT_2 / 2.0);
        assert!((m.lhs - 2.0).abs() < 1e-15 && m.fulfilled);
        let m = bi_margin(1.0, 1.0, 0.85);
        assert!((m.lhs - 2.2021).abs() < 1e-4 && !m.fulfilled);
    }

    #[test]
    fn bi1_threshold_examples() {
        assert!((bi1_min_efficiency(1.0).unwrap() - 2.0 * (SQRT_2 - 1.0)).abs() < 1e-15);
        assert!((bi1_min_efficiency(0.9).unwrap() - 0.8800).abs() < 1e-4);
        assert!((bi1_min_efficiency(SQRT_2 / 2.0 + 1e-15).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            bi1_min_efficiency(SQRT_2 / 2.0),
            Err(Error::NoViolationPossible { .. })
        ));
        assert!(bi1_min_efficiency(1.01).is_err());
    }

    #[test]
    fn optimal_angles_satisfy_constraint() {
        let (set, max) = optimal_angles();
        assert!(AngleSet::new(set.phi).is_ok());
        assert!((set.objective() - max).abs() < 1e-14);
        assert!((max - 2.82843).abs() < 1e-5);
        assert_eq!(AngleSet::new([0.0; 4]).unwrap().objective(), 2.0);
        assert!(AngleSet::new([0.1, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn orientations_always_satisfy_constraint() {
        let s = AngleSet::from_orientations(0.3, 1.1, -0.4, 0.9);
        assert!(AngleSet::new(s.phi).is_ok());
    }

    #[test]
    fn cascade_maximum_examples() {
        let single = cascade_bi_maximum(1.0, false).unwrap();
        assert!((single.max_lhs - 0.7436).abs() < 1e-3);
        let u = cascade_stationary_u();
        let closed = 0.5 * u * (1.0 + SQRT_2 * (1.0 - 2.0 / 3.0 * u * u));
        assert!((single.max_lhs - closed).abs() < 1e-12);
        assert!((1.0 - single.theta_star.cos() - 0.9239).abs() < 1e-4);
        let both = cascade_bi_maximum(1.0, true).unwrap();
        assert!((both.max_lhs - 2.0 * single.max_lhs).abs() < 1e-15);
        let half = cascade_bi_maximum(0.5, false).unwrap();
        assert!((half.max_lhs - 0.5 * single.max_lhs).abs() < 1e-12);
        assert!(cascade_bi_maximum(0.0, false).is_err());
    }

    #[test]
    fn visibility_on_exact_curve() {
        let samples: Vec<(f64, f64)> = (0..=16)
            .map(|k| {
                let phi = k as f64 * PI / 16.0;
                (phi, 0.9 * (2.0 * phi).cos())
            })
            .collect();
        let v = visibility_estimators(&samples).unwrap();
        assert!((v.v_fit - 0.9).abs() < 1e-9);
        assert!((v.v_a - 0.9).abs() < 1e-9);
        assert!((v.v_b - 0.9).abs() < 1e-9);
    }

    #[test]
    fn visibility_estimators_disagree_on_offset_curve() {
        // one full period, endpoint excluded, so sum of cos 2phi vanishes
        let samples: Vec<(f64, f64)> = (0..16)
            .map(|k| {
                let phi = k as f64 * PI / 16.0;
                (phi, 0.9 * (2.0 * phi).cos() + 0.02)
            })
            .collect();
        let v = visibility_estimators(&samples).unwrap();
        assert!((v.v_fit - 0.9).abs() < 1e-6);
        assert!((v.v_a - 1.8 / 2.04).abs() < 1e-12);
        assert!((v.v_fit - v.v_a).abs() > 1e-3);
    }

    #[test]
    fn visibility_coverage_errors() {
        assert!(visibility_estimators(&[(0.0, 1.0); 3]).is_err());
        let narrow: Vec<(f64, f64)> = (0..6).map(|k| (k as f64 * 0.1, 0.5)).collect();
        assert!(matches!(
            visibility_estimators(&narrow),
            Err(Error::InsufficientCoverage(_))
        ));
    }

    #[test]
    fn v_b_from_s() {
        assert!((v_b_from_s_star(2.5) - 0.88388).abs() < 1e-5);
    }
}
