use serde::{Deserialize, Serialize};

use super::Level;

/// Finite combination `sum_n x_n e_n` of the abstract basis, `n >= 1`.
///
/// Level `i` uses `<e_n, e_m>_i = (nm)^{3i} delta_{nm}`; trailing zero
/// coefficients are dropped so equal vectors compare equal.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeqVector {
    coeffs: Vec<f64>,
}

fn basis_weight(n: usize, level: Level) -> f64 {
    (n as f64).powi(3 * level.0 as i32)
}

impl SeqVector {
    /// `coeffs[0]` is the coefficient of `e_1`.
    pub fn from_coeffs(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        SeqVector { coeffs }
    }

    pub fn zero() -> Self {
        SeqVector::default()
    }

    /// The basis vector `e_n` (`n >= 1`).
    pub fn basis(n: usize) -> Self {
        assert!(n >= 1, "basis index starts at 1");
        let mut c = vec![0.0; n];
        c[n - 1] = 1.0;
        SeqVector { coeffs: c }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Number of stored coefficients (highest nonzero index).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient `x_n`, zero past the stored length.
    pub fn coeff(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.coeffs.get(n - 1).copied().unwrap_or(0.0)
    }

    pub fn inner(&self, other: &SeqVector, level: Level) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(j, (a, b))| basis_weight(j + 1, level).powi(2) * a * b)
            .sum()
    }

    pub fn norm(&self, level: Level) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| basis_weight(j + 1, level) * a)
            .fold(0.0f64, |acc, v| acc.hypot(v))
    }

    pub fn combine(&self, a: f64, other: &SeqVector, b: f64) -> SeqVector {
        let n = self.len().max(other.len());
        SeqVector::from_coeffs(
            (1..=n)
                .map(|k| a * self.coeff(k) + b * other.coeff(k))
                .collect(),
        )
    }

    pub fn scale(&self, a: f64) -> SeqVector {
        SeqVector::from_coeffs(self.coeffs.iter().map(|c| a * c).collect())
    }

    /// Coefficient-wise action `x_n -> d(n) x_n`.
    pub fn map_diagonal(&self, d: impl Fn(usize) -> f64) -> SeqVector {
        SeqVector::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| d(j + 1) * c)
                .collect(),
        )
    }

    /// Orthogonal projection `p_n(x) = <x, e_n>_0 e_n`.
    pub fn projection(&self, n: usize) -> SeqVector {
        if n == 0 || n > self.len() {
            return SeqVector::zero();
        }
        SeqVector::basis(n).scale(self.coeff(n))
    }

    /// Keeps the coefficients with index `n >= first`.
    pub fn tail_projection(&self, first: usize) -> SeqVector {
        assert!(first >= 1, "tail projection starts at n >= 1");
        self.map_diagonal(|n| if n >= first { 1.0 } else { 0.0 })
    }
}
