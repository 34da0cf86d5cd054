//! Real functions sampled on a local window of a global lattice `x_j = j * h`.
//!
//! Every grid shares the lattice for a given spacing, so two functions with
//! the same spacing always have aligned nodes and pairings reduce to sums over
//! the overlap of their windows. Values outside a window are zero.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Default lattice spacing, a power of two so node coordinates are exact.
pub const DEFAULT_SPACING: f64 = 1.0 / 1024.0;

/// Discretization parameters for grid materialization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub spacing: f64,
    /// Extra room on either side of a support interval.
    pub margin: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            spacing: DEFAULT_SPACING,
            margin: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    first: i64,
    spacing: f64,
    values: Vec<f64>,
}

fn spacing_matches(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

impl GridFunction {
    /// Samples on lattice nodes `first, first + 1, ...` of spacing `spacing`.
    pub fn new(first: i64, spacing: f64, values: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(LabError::InvalidArgument(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        if values.len() < 2 {
            return Err(LabError::InvalidArgument(format!(
                "grid needs at least 2 nodes, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(LabError::Unrepresentable(format!("grid sample {v}")));
        }
        Ok(GridFunction {
            first,
            spacing,
            values,
        })
    }

    /// Samples `f` on the smallest lattice window containing `[lo, hi]`.
    pub fn from_fn(lo: f64, hi: f64, spacing: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(LabError::InvalidArgument(format!(
                "bad window [{lo}, {hi}]"
            )));
        }
        let first = (lo / spacing).floor() as i64;
        let last = ((hi / spacing).ceil() as i64).max(first + 1);
        let values = (first..=last).map(|j| f(j as f64 * spacing)).collect();
        Self::new(first, spacing, values)
    }

    pub fn zeros(lo: f64, hi: f64, spacing: f64) -> Result<Self> {
        Self::from_fn(lo, hi, spacing, |_| 0.0)
    }

    pub fn zeros_like(other: &GridFunction) -> Self {
        GridFunction {
            first: other.first,
            spacing: other.spacing,
            values: vec![0.0; other.values.len()],
        }
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn first_index(&self) -> i64 {
        self.first
    }

    pub fn last_index(&self) -> i64 {
        self.first + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, j: usize) -> f64 {
        (self.first + j as i64) as f64 * self.spacing
    }

    pub fn window(&self) -> (f64, f64) {
        (
            self.first as f64 * self.spacing,
            self.last_index() as f64 * self.spacing,
        )
    }

    /// Value at lattice index `j`, zero outside the window.
    pub fn at_index(&self, j: i64) -> f64 {
        if j < self.first || j > self.last_index() {
            0.0
        } else {
            self.values[(j - self.first) as usize]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, a: f64) -> GridFunction {
        GridFunction {
            first: self.first,
            spacing: self.spacing,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    /// `a * self + b * other` on the union of the two windows.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        if !spacing_matches(self.spacing, other.spacing) {
            return Err(LabError::IncompatibleGrid {
                left: self.spacing,
                right: other.spacing,
            });
        }
        let first = self.first.min(other.first);
        let last = self.last_index().max(other.last_index());
        let values = (first..=last)
            .map(|j| a * self.at_index(j) + b * other.at_index(j))
            .collect();
        GridFunction::new(first, self.spacing, values)
    }

    /// Trapezoid rule for `int self * other * weight(x)^2` over the window overlap.
    fn weighted_pairing(&self, other: &GridFunction, weight: Option<&dyn Fn(f64) -> f64>) -> Result<f64> {
        let lo = self.first.max(other.first);
        let hi = self.last_index().min(other.last_index());
        if hi <= lo {
            return Ok(0.0);
        }
        if !spacing_matches(self.spacing, other.spacing) {
            return Err(LabError::IncompatibleGrid {
                left: self.spacing,
                right: other.spacing,
            });
        }
        let h = self.spacing;
        let mut sum = 0.0;
        for j in lo..=hi {
            let mut term = self.at_index(j) * other.at_index(j);
            if let Some(w) = weight {
                let wx = w(j as f64 * h);
                term *= wx * wx;
            }
            if j == lo || j == hi {
                term *= 0.5;
            }
            sum += term;
        }
        if !sum.is_finite() {
            return Err(LabError::Unrepresentable(
                "weighted pairing overflowed".into(),
            ));
        }
        Ok(sum * h)
    }

    /// `<f, g> = int f g dx` by the trapezoid rule; zero for disjoint windows.
    pub fn l2_inner(&self, other: &GridFunction) -> Result<f64> {
        self.weighted_pairing(other, None)
    }

    pub fn l2_norm(&self) -> f64 {
        self.weighted_pairing(self, None)
            .expect("self-pairing is always compatible")
            .max(0.0)
            .sqrt()
    }

    /// `<e^{delta|x|} f, e^{delta|x|} g>`.
    pub fn weighted_inner(&self, other: &GridFunction, delta: f64) -> Result<f64> {
        if delta == 0.0 {
            return self.l2_inner(other);
        }
        let w = move |x: f64| (delta * x.abs()).exp();
        self.weighted_pairing(other, Some(&w))
    }

    fn first_difference(&self) -> Vec<f64> {
        let f = &self.values;
        let n = f.len();
        let h = self.spacing;
        let mut d = vec![0.0; n];
        for j in 0..n {
            d[j] = if j == 0 {
                if n >= 3 {
                    (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
                } else {
                    (f[1] - f[0]) / h
                }
            } else if j == n - 1 {
                if n >= 3 {
                    (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
                } else {
                    (f[n - 1] - f[n - 2]) / h
                }
            } else if j >= 2 && j + 2 < n {
                (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * h)
            } else {
                (f[j + 1] - f[j - 1]) / (2.0 * h)
            };
        }
        d
    }

    fn second_difference(&self) -> Vec<f64> {
        let f = &self.values;
        let n = f.len();
        let h2 = self.spacing * self.spacing;
        let mut d = vec![0.0; n];
        for j in 0..n {
            d[j] = if j == 0 {
                if n >= 4 {
                    (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2
                } else {
                    (f[0] - 2.0 * f[1] + f[2]) / h2
                }
            } else if j == n - 1 {
                if n >= 4 {
                    (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2
                } else {
                    (f[n - 1] - 2.0 * f[n - 2] + f[n - 3]) / h2
                }
            } else if j >= 2 && j + 2 < n {
                (-f[j - 2] + 16.0 * f[j - 1] - 30.0 * f[j] + 16.0 * f[j + 1] - f[j + 2])
                    / (12.0 * h2)
            } else {
                (f[j - 1] - 2.0 * f[j] + f[j + 1]) / h2
            };
        }
        d
    }

    /// Finite-difference derivative of the given order on the same window.
    ///
    /// Fourth-order central stencils in the interior, lower-order one-sided
    /// stencils at the window edges.
    pub fn derivative(&self, order: usize) -> Result<GridFunction> {
        let needed = (2 * order + 1).max(3);
        if order > 0 && self.values.len() < needed {
            return Err(LabError::TooFewNodes {
                order,
                needed,
                found: self.values.len(),
            });
        }
        let mut out = self.clone();
        for _ in 0..order / 2 {
            out.values = out.second_difference();
        }
        if order % 2 == 1 {
            out.values = out.first_difference();
        }
        Ok(out)
    }

    fn weighted_derivative_norms(&self, k: usize, delta: f64) -> Result<Vec<f64>> {
        if !(delta >= 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "weight must be non-negative, got {delta}"
            )));
        }
        let needed = 2 * k + 1;
        if self.values.len() < needed {
            return Err(LabError::TooFewNodes {
                order: k,
                needed,
                found: self.values.len(),
            });
        }
        (0..=k)
            .map(|j| {
                let d = self.derivative(j)?;
                Ok(d.weighted_inner(&d, delta)?.max(0.0).sqrt())
            })
            .collect()
    }

    /// `||f||_{H^{k,delta}} = sum_{j<=k} ||e^{delta|x|} f^{(j)}||_{L2}`.
    pub fn sobolev_norm(&self, k: usize, delta: f64) -> Result<f64> {
        Ok(self.weighted_derivative_norms(k, delta)?.iter().sum())
    }

    /// Hilbert variant `sqrt(sum_j ||e^{delta|x|} f^{(j)}||^2)`, within a
    /// factor `sqrt(k+1)` of [`GridFunction::sobolev_norm`].
    pub fn sobolev_norm_quadratic(&self, k: usize, delta: f64) -> Result<f64> {
        Ok(self
            .weighted_derivative_norms(k, delta)?
            .iter()
            .map(|n| n * n)
            .sum::<f64>()
            .sqrt())
    }

    /// Inner product inducing [`GridFunction::sobolev_norm_quadratic`].
    pub fn sobolev_inner(&self, other: &GridFunction, k: usize, delta: f64) -> Result<f64> {
        let mut sum = 0.0;
        for j in 0..=k {
            sum += self
                .derivative(j)?
                .weighted_inner(&other.derivative(j)?, delta)?;
        }
        Ok(sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(h: f64) -> GridFunction {
        GridFunction::from_fn(-8.0, 8.0, h, |x| (-x * x).exp()).unwrap()
    }

    #[test]
    fn window_snaps_to_lattice() {
        let g = GridFunction::zeros(-1.3, 0.7, 0.25).unwrap();
        assert_eq!(g.window(), (-1.5, 0.75));
        assert_eq!(g.len(), 10);
    }

    #[test]
    fn disjoint_windows_pair_to_zero() {
        let a = GridFunction::from_fn(0.0, 1.0, 0.01, |_| 1.0).unwrap();
        let b = GridFunction::from_fn(2.0, 3.0, 0.01, |_| 1.0).unwrap();
        assert_eq!(a.l2_inner(&b).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_windows_ignore_spacing() {
        let a = GridFunction::from_fn(0.0, 1.0, 0.01, |_| 1.0).unwrap();
        let b = GridFunction::from_fn(2.0, 3.0, 0.02, |_| 1.0).unwrap();
        assert_eq!(a.l2_inner(&b).unwrap(), 0.0);
    }

    #[test]
    fn overlapping_mismatched_spacing_errors() {
        let a = GridFunction::from_fn(0.0, 1.0, 0.01, |_| 1.0).unwrap();
        let b = GridFunction::from_fn(0.5, 3.0, 0.02, |_| 1.0).unwrap();
        assert!(matches!(
            a.l2_inner(&b),
            Err(LabError::IncompatibleGrid { .. })
        ));
    }

    #[test]
    fn gaussian_l2_norm_matches_closed_form() {
        // int e^{-2x^2} = sqrt(pi/2)
        let g = gaussian(DEFAULT_SPACING);
        let expect = (std::f64::consts::PI / 2.0).sqrt().sqrt();
        assert!((g.l2_norm() - expect).abs() < 1e-12);
    }

    #[test]
    fn derivatives_of_gaussian() {
        let h = DEFAULT_SPACING;
        let g = gaussian(h);
        let d1 = g.derivative(1).unwrap();
        let d2 = g.derivative(2).unwrap();
        let d3 = g.derivative(3).unwrap();
        for j in (100..g.len() - 100).step_by(997) {
            let x = g.node(j);
            let e = (-x * x).exp();
            assert!((d1.values()[j] - (-2.0 * x * e)).abs() < 1e-9);
            assert!((d2.values()[j] - ((4.0 * x * x - 2.0) * e)).abs() < 1e-8);
            assert!((d3.values()[j] - ((12.0 * x - 8.0 * x * x * x) * e)).abs() < 1e-6);
        }
    }

    #[test]
    fn sobolev_norm_of_zero_is_zero() {
        let z = GridFunction::zeros(-2.0, 2.0, 0.01).unwrap();
        assert_eq!(z.sobolev_norm(3, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn order_too_large_for_nodes() {
        let g = GridFunction::from_fn(0.0, 0.04, 0.01, |x| x).unwrap();
        assert_eq!(g.len(), 5);
        assert!(g.sobolev_norm(2, 0.0).is_ok());
        assert!(matches!(
            g.sobolev_norm(3, 0.0),
            Err(LabError::TooFewNodes { .. })
        ));
    }

    #[test]
    fn combine_spans_union_window() {
        let a = GridFunction::from_fn(0.0, 1.0, 0.5, |_| 1.0).unwrap();
        let b = GridFunction::from_fn(2.0, 3.0, 0.5, |_| 2.0).unwrap();
        let c = a.combine(1.0, &b, -1.0).unwrap();
        assert_eq!(c.window(), (0.0, 3.0));
        assert_eq!(c.values(), &[1.0, 1.0, 1.0, 0.0, -2.0, -2.0, -2.0]);
    }

    #[test]
    fn weight_overflow_is_reported() {
        let g = GridFunction::from_fn(-1e4, -1e4 + 1.0, 0.1, |_| 1.0).unwrap();
        assert!(matches!(
            g.sobolev_norm(0, 1.0),
            Err(LabError::Unrepresentable(_))
        ));
    }
}
