//! Geometric sample grids, written `start:stop:xRatio` on the command line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points `start·ratio^j` for `j = 0, 1, …` not exceeding `stop` (with a
/// relative slack of 1e-6 so that `16:4096:x2` includes 4096).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricGrid {
    pub start: f64,
    pub stop: f64,
    pub ratio: f64,
}

impl GeometricGrid {
    pub const MIN_RATIO: f64 = 1.2;

    pub fn new(start: f64, stop: f64, ratio: f64) -> Result<Self> {
        if !(start > 0.0 && start.is_finite()) {
            return Err(Error::invalid(format!("grid start must be positive, got {start}")));
        }
        if !(stop >= start && stop.is_finite()) {
            return Err(Error::invalid(format!("grid stop {stop} below start {start}")));
        }
        if !(ratio >= Self::MIN_RATIO && ratio.is_finite()) {
            return Err(Error::invalid(format!(
                "grid ratio must be at least {}, got {ratio}",
                Self::MIN_RATIO
            )));
        }
        Ok(GeometricGrid { start, stop, ratio })
    }

    pub fn points(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut j = 0;
        loop {
            let x = self.start * self.ratio.powi(j);
            if x > self.stop * (1.0 + 1e-6) {
                break;
            }
            out.push(x);
            j += 1;
        }
        out
    }

    /// Points rounded to integers, duplicates removed.
    pub fn integer_points(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self.points().iter().map(|x| x.round() as u64).collect();
        out.dedup();
        out
    }
}

impl fmt::Display for GeometricGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:x{}", self.start, self.stop, self.ratio)
    }
}

impl FromStr for GeometricGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("grid '{s}' is not start:stop:xRatio")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("grid '{s}': cannot parse '{p}'")))
        };
        let ratio = parts[2].trim();
        let ratio = ratio.strip_prefix('x').unwrap_or(ratio);
        GeometricGrid::new(num(parts[0])?, num(parts[1])?, num(ratio)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_expands() {
        let g: GeometricGrid = "16:4096:x2".parse().unwrap();
        assert_eq!(g.integer_points(), vec![16, 32, 64, 128, 256, 512, 1024, 2048, 4096]);
        let g: GeometricGrid = "64:1024:x1.2599210498948732".parse().unwrap();
        assert_eq!(g.points().len(), 13);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!("1:2".parse::<GeometricGrid>().is_err());
        assert!("1:8:x1.1".parse::<GeometricGrid>().is_err());
        assert!("0:8:x2".parse::<GeometricGrid>().is_err());
        assert!("9:8:x2".parse::<GeometricGrid>().is_err());
    }
}
