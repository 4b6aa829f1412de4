use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Head orientation in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseLabel {
    pub pitch: f64,
    pub yaw: f64,
    pub roll: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Pitch,
    Yaw,
    Roll,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Pitch, Axis::Yaw, Axis::Roll];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Pitch => "pitch",
            Axis::Yaw => "yaw",
            Axis::Roll => "roll",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PoseLabel {
    pub fn new(pitch: f64, yaw: f64, roll: f64) -> Result<Self> {
        let p = Self { pitch, yaw, roll };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for axis in Axis::ALL {
            let v = self.get(axis);
            if !v.is_finite() || !(-180.0..=180.0).contains(&v) {
                return Err(Error::invalid(format!(
                    "{axis} angle {v} is outside [-180, 180]"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Pitch => self.pitch,
            Axis::Yaw => self.yaw,
            Axis::Roll => self.roll,
        }
    }
}
