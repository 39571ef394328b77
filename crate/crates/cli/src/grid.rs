use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// `points` values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    min: f64,
    max: f64,
    points: usize,
    spacing: Spacing,
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize, spacing: Spacing) -> Result<Self> {
        if points < 2 {
            return Err(CliError::Config(format!(
                "a grid needs at least 2 points, got {points}"
            )));
        }
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(CliError::Config(format!(
                "grid bounds [{min}, {max}] must be finite and increasing"
            )));
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err(CliError::Config(format!(
                "log grid needs positive bounds, got min = {min}"
            )));
        }
        Ok(Self {
            min,
            max,
            points,
            spacing,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn values(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == last {
                    return self.max;
                }
                let t = i as f64 / last as f64;
                match self.spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}
