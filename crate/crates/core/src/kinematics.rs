//! Spacelike-separation constraints for spin-correlation tests with massive,
//! non-relativistic particles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicsInput {
    /// Particle mass (kg).
    pub mass: f64,
    /// Particle speed (m/s).
    pub speed: f64,
    /// Source-detector distance (m).
    #[serde(default)]
    pub separation: Option<f64>,
    /// Duration of one measurement (s).
    #[serde(default)]
    pub measure_time: Option<f64>,
}

impl KinematicsInput {
    pub fn new(mass: f64, speed: f64) -> Result<Self> {
        let k = Self {
            mass,
            speed,
            separation: None,
            measure_time: None,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn with_separation(mut self, l: f64) -> Self {
        self.separation = Some(l);
        self
    }

    pub fn with_measure_time(mut self, t: f64) -> Self {
        self.measure_time = Some(t);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::InvalidInput(format!(
                "mass {} must be positive",
                self.mass
            )));
        }
        if !(self.speed > 0.0 && self.speed < SPEED_OF_LIGHT) {
            return Err(Error::InvalidInput(format!(
                "speed {} must lie in (0, c)",
                self.speed
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacelikeConstraints {
    /// Minimum source-detector distance `2 hbar c^2 / (m v^3)` (m).
    pub l_min: f64,
    /// Arrival-time uncertainty `sqrt(2 hbar L / (m v^3))` (s), when L is given.
    pub dt_arrival: Option<f64>,
    /// Light-travel distance during one measurement `c t_m` (m), when t_m is given.
    pub l_meas: Option<f64>,
}

pub fn spacelike_constraints(k: &KinematicsInput) -> Result<SpacelikeConstraints> {
    k.validate()?;
    let mv3 = k.mass * k.speed.powi(3);
    Ok(SpacelikeConstraints {
        l_min: 2.0 * HBAR * SPEED_OF_LIGHT * SPEED_OF_LIGHT / mv3,
        dt_arrival: k.separation.map(|l| (2.0 * HBAR * l / mv3).sqrt()),
        l_meas: k.measure_time.map(|t| SPEED_OF_LIGHT * t),
    })
}
