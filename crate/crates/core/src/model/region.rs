use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Decomposition, Part};
use crate::error::{check_len, Error, Result};

/// An axis-aligned box `[lower, upper] ⊂ R^n`, the compact sampling region
/// used by every sampling-based check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_len("box upper corner", lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::input("box must have at least one dimension"));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::input(format!(
                    "box side {i} is not a finite interval: [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn from_intervals(sides: &[(f64, f64)]) -> Result<Self> {
        Self::new(sides.iter().map(|s| s.0).collect(), sides.iter().map(|s| s.1).collect())
    }

    /// The cube `[-h, h]^n`.
    pub fn symmetric(half_widths: &[f64]) -> Result<Self> {
        Self::new(half_widths.iter().map(|h| -h).collect(), half_widths.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Length of the main diagonal.
    pub fn diameter(&self) -> f64 {
        super::distance(&self.lower, &self.upper)
    }

    /// Maps a point of the unit cube affinely into the box.
    pub fn map_unit(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.dim());
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(t, (lo, hi))| lo + t * (hi - lo))
            .collect()
    }

    pub fn project(&self, d: &Decomposition, part: Part) -> Result<Self> {
        Ok(Self {
            lower: d.project(&self.lower, part)?,
            upper: d.project(&self.upper, part)?,
        })
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &BoxRegion) -> Self {
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        lower.extend_from_slice(&other.lower);
        upper.extend_from_slice(&other.upper);
        Self { lower, upper }
    }
}

impl fmt::Display for BoxRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{lo},{hi}")?;
        }
        Ok(())
    }
}

/// Parses `lo1,hi1;lo2,hi2;...`.
impl FromStr for BoxRegion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut sides = Vec::new();
        for (i, side) in s.split(';').enumerate() {
            let parts: Vec<&str> = side.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(Error::input(format!("box side {i} `{side}` must be `lo,hi`")));
            }
            let parse = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| Error::input(format!("box side {i}: `{t}` is not a number")))
            };
            sides.push((parse(parts[0])?, parse(parts[1])?));
        }
        Self::from_intervals(&sides)
    }
}
