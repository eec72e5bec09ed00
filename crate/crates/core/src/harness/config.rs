//! TOML configuration shared by every subcommand.

use std::f64::consts::FRAC_PI_8;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{cascade_optics, CascadeOptics, PdcConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub cascade: Option<CascadeSection>,
    pub pdc: Option<PdcSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    pub kinematics: Option<KinematicsSection>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = &self.cascade {
            c.optics()?;
        }
        if let Some(p) = &self.pdc {
            p.config()?;
        }
        if let Some(n) = self.analysis.emitted_pairs {
            if n == 0 {
                return Err(Error::InvalidInput(
                    "analysis.emitted_pairs must be positive".into(),
                ));
            }
        }
        if let Some(r) = self.analysis.production_rate {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidInput(
                    "analysis.production_rate must be positive".into(),
                ));
            }
        }
        if self.simulate.n_pairs == 0 {
            return Err(Error::InvalidInput(
                "simulate.n_pairs must be positive".into(),
            ));
        }
        for &eta in &self.search.eta {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "search.eta value {eta} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Cascade source. Either give `eta` and `v` directly, or the lens
/// half-angle `theta` and detector efficiency `zeta` from which they follow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeSection {
    pub theta: Option<f64>,
    pub zeta: Option<f64>,
    pub eta: Option<f64>,
    pub v: Option<f64>,
    #[serde(default = "unit")]
    pub alpha: f64,
    #[serde(default = "unit")]
    pub r0: f64,
}

impl CascadeSection {
    pub fn optics(&self) -> Result<CascadeOptics> {
        let mut optics = match (self.theta, self.zeta) {
            (Some(theta), Some(zeta)) => {
                crate::quantum::CascadeConfig::new(theta, zeta, self.r0, self.alpha)?;
                cascade_optics(theta, zeta)
            }
            (None, None) => CascadeOptics {
                eta: f64::NAN,
                v: f64::NAN,
                alpha: self.alpha,
            },
            _ => {
                return Err(Error::InvalidInput(
                    "cascade: theta and zeta must be given together".into(),
                ))
            }
        };
        if let Some(eta) = self.eta {
            optics.eta = eta;
        }
        if let Some(v) = self.v {
            optics.v = v;
        }
        optics.alpha = self.alpha;
        if optics.eta.is_nan() || optics.v.is_nan() {
            return Err(Error::InvalidInput(
                "cascade: give eta and v, or theta and zeta".into(),
            ));
        }
        if !(0.0..=1.0).contains(&optics.eta) || !(0.0..=1.0).contains(&optics.v) {
            return Err(Error::InvalidInput(format!(
                "cascade: eta = {} and v = {} must lie in [0, 1]",
                optics.eta, optics.v
            )));
        }
        if !(self.alpha >= 0.0) || !(self.r0 > 0.0) {
            return Err(Error::InvalidInput(
                "cascade: alpha >= 0 and r0 > 0 required".into(),
            ));
        }
        Ok(optics)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdcSection {
    pub v: f64,
    #[serde(default = "unit")]
    pub eta: f64,
    #[serde(default = "unit")]
    pub r0: f64,
}

impl PdcSection {
    pub fn config(&self) -> Result<PdcConfig> {
        PdcConfig::new(self.v, self.eta, self.r0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Pair production rate R0 (1/s); with row durations gives emitted pairs.
    pub production_rate: Option<f64>,
    /// Emitted pairs per setting pair, when known directly.
    pub emitted_pairs: Option<u64>,
    /// Relative polarizer angles of (A,B), (A,D), (C,B), (C,D).
    pub angles: Option<[f64; 4]>,
}

impl AnalysisSection {
    pub fn angles(&self) -> [f64; 4] {
        self.angles.unwrap_or(CANONICAL_ANGLES)
    }

    pub fn declares_normalization(&self) -> bool {
        self.production_rate.is_some() || self.emitted_pairs.is_some()
    }
}

pub const CANONICAL_ANGLES: [f64; 4] = [-FRAC_PI_8, FRAC_PI_8, FRAC_PI_8, 3.0 * FRAC_PI_8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    /// Detection efficiencies to optimize at.
    #[serde(default = "default_search_eta")]
    pub eta: Vec<f64>,
}

impl Default for SearchSection {
    fn default() -> Self {
        Self {
            eta: default_search_eta(),
        }
    }
}

fn default_search_eta() -> Vec<f64> {
    vec![1.0, 0.9, 0.8]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// Emitted pairs per setting pair.
    #[serde(default = "default_n_pairs")]
    pub n_pairs: u64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            n_pairs: default_n_pairs(),
            seed: 0,
        }
    }
}

fn default_n_pairs() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicsSection {
    /// Particle mass (kg).
    pub mass: f64,
    /// Particle speed (m/s).
    pub speed: f64,
    /// Source-to-analyzer distance (m).
    pub separation: Option<f64>,
    /// Duration of one measurement (s).
    pub measure_time: Option<f64>,
}

fn unit() -> f64 {
    1.0
}
