//! Scale-Banach space models used throughout the crate.
//!
//! Two concrete scales live here: grid functions on the real line with the
//! weighted Sobolev levels `H^{i, delta_i}`, and finite sequences in an
//! abstract basis `(e_n)` whose level-`i` norm weights `e_n` by `n^{3i}`.

mod grid;
mod log_scalar;
mod seq;
mod tail;

pub use grid::{GridFunction, GridSpec, DEFAULT_SPACING};
pub use log_scalar::{LogScalar, LogSum};
pub use seq::SeqVector;
pub use tail::AnalyticTailFunction;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Index `i` of the space `E_i` in a scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Level(pub u32);

impl Level {
    pub fn index(self) -> u32 {
        self.0
    }

    pub fn shifted(self, by: u32) -> Level {
        Level(self.0 + by)
    }
}

impl From<u32> for Level {
    fn from(i: u32) -> Self {
        Level(i)
    }
}

/// Exponential weights `delta_0 < delta_1 < ...` of the grid-model scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSchedule {
    deltas: Vec<f64>,
}

impl WeightSchedule {
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(LabError::InvalidArgument("empty weight schedule".into()));
        }
        if !(deltas[0] >= 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "delta_0 must be non-negative, got {}",
                deltas[0]
            )));
        }
        if deltas.iter().any(|d| !d.is_finite()) {
            return Err(LabError::InvalidArgument("non-finite weight".into()));
        }
        if deltas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::InvalidArgument(
                "weights must be strictly increasing".into(),
            ));
        }
        Ok(WeightSchedule { deltas })
    }

    /// `delta_i = i / 10` for `i = 0..=max_level`.
    pub fn linear(max_level: u32) -> Self {
        WeightSchedule {
            deltas: (0..=max_level).map(|i| f64::from(i) / 10.0).collect(),
        }
    }

    pub fn delta(&self, level: Level) -> Result<f64> {
        self.deltas
            .get(level.0 as usize)
            .copied()
            .ok_or_else(|| {
                LabError::InvalidArgument(format!(
                    "level {} beyond weight schedule of length {}",
                    level.0,
                    self.deltas.len()
                ))
            })
    }

    pub fn max_level(&self) -> Level {
        Level(self.deltas.len() as u32 - 1)
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }
}

impl Default for WeightSchedule {
    fn default() -> Self {
        WeightSchedule::linear(3)
    }
}

/// Vectors of a scale: linear combinations and a norm per level.
pub trait ScaleVector: Clone {
    /// `a * self + b * other`.
    fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self>;

    fn level_norm(&self, level: Level, weights: &WeightSchedule) -> Result<f64>;

    /// Inner product behind the Gram matrices of a truncation. For grid
    /// functions this induces the quadratic variant of the level norm.
    fn level_inner(&self, other: &Self, level: Level, weights: &WeightSchedule) -> Result<f64>;
}

impl ScaleVector for f64 {
    fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        Ok(a * self + b * other)
    }

    fn level_norm(&self, _level: Level, _weights: &WeightSchedule) -> Result<f64> {
        Ok(self.abs())
    }

    fn level_inner(&self, other: &Self, _level: Level, _weights: &WeightSchedule) -> Result<f64> {
        Ok(self * other)
    }
}

impl ScaleVector for SeqVector {
    fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        Ok(self.combine(a, other, b))
    }

    fn level_norm(&self, level: Level, _weights: &WeightSchedule) -> Result<f64> {
        Ok(self.norm(level))
    }

    fn level_inner(&self, other: &Self, level: Level, _weights: &WeightSchedule) -> Result<f64> {
        Ok(self.inner(other, level))
    }
}

impl ScaleVector for GridFunction {
    fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        GridFunction::combine(self, a, other, b)
    }

    /// The sum-of-L2 norm `H^{i, delta_i}`.
    fn level_norm(&self, level: Level, weights: &WeightSchedule) -> Result<f64> {
        self.sobolev_norm(level.0 as usize, weights.delta(level)?)
    }

    fn level_inner(&self, other: &Self, level: Level, weights: &WeightSchedule) -> Result<f64> {
        self.sobolev_inner(other, level.0 as usize, weights.delta(level)?)
    }
}

/// Product with a real factor; the norm is Euclidean in the two components.
impl<X: ScaleVector> ScaleVector for (f64, X) {
    fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        Ok((a * self.0 + b * other.0, self.1.combine(a, &other.1, b)?))
    }

    fn level_norm(&self, level: Level, weights: &WeightSchedule) -> Result<f64> {
        Ok(self.0.hypot(self.1.level_norm(level, weights)?))
    }

    fn level_inner(&self, other: &Self, level: Level, weights: &WeightSchedule) -> Result<f64> {
        Ok(self.0 * other.0 + self.1.level_inner(&other.1, level, weights)?)
    }
}

impl<X: ScaleVector> ScaleVector for (f64, f64, X) {
    fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        Ok((
            a * self.0 + b * other.0,
            a * self.1 + b * other.1,
            self.2.combine(a, &other.2, b)?,
        ))
    }

    fn level_norm(&self, level: Level, weights: &WeightSchedule) -> Result<f64> {
        let rest = self.2.level_norm(level, weights)?;
        Ok((self.0 * self.0 + self.1 * self.1 + rest * rest).sqrt())
    }

    fn level_inner(&self, other: &Self, level: Level, weights: &WeightSchedule) -> Result<f64> {
        Ok(self.0 * other.0 + self.1 * other.1 + self.2.level_inner(&other.2, level, weights)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_starts_unweighted() {
        let w = WeightSchedule::default();
        assert_eq!(w.delta(Level(0)).unwrap(), 0.0);
        assert!((w.delta(Level(2)).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_increasing_weights() {
        assert!(WeightSchedule::new(vec![0.0, 0.1, 0.1]).is_err());
        assert!(WeightSchedule::new(vec![-0.1, 0.2]).is_err());
        assert!(WeightSchedule::new(vec![]).is_err());
    }

    #[test]
    fn level_beyond_schedule_errors() {
        assert!(WeightSchedule::linear(1).delta(Level(2)).is_err());
    }
}
