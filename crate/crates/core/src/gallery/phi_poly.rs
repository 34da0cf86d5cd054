use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::bump::phi_gate;
use crate::error::{LabError, Result};
use crate::scale::{LogScalar, LogSum};

/// Finite Laurent polynomial `sum_p c_p phi(t)^p` in the gate value at a
/// fixed `t`.
///
/// Coefficients of equal powers combine in plain `f64`, so quantities such as
/// `(y + phi a - y) / phi` come back as exactly `a` even when `phi` is far
/// below the float range.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhiPoly {
    coeffs: BTreeMap<i32, f64>,
}

impl PhiPoly {
    pub fn zero() -> Self {
        PhiPoly::default()
    }

    pub fn constant(c: f64) -> Self {
        PhiPoly::monomial(c, 0)
    }

    /// `c phi^p`.
    pub fn monomial(c: f64, p: i32) -> Self {
        let mut coeffs = BTreeMap::new();
        if c != 0.0 {
            coeffs.insert(p, c);
        }
        PhiPoly { coeffs }
    }

    /// The gate itself, `phi^1`.
    pub fn gate() -> Self {
        PhiPoly::monomial(1.0, 1)
    }

    pub fn coeff(&self, p: i32) -> f64 {
        self.coeffs.get(&p).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.coeffs.iter().map(|(&p, &c)| (p, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = PhiPoly::zero();
        for (p, c) in self.terms() {
            out.accumulate(p, a * c);
        }
        out
    }

    /// Multiply by `phi^p`.
    pub fn shift(&self, p: i32) -> Self {
        PhiPoly {
            coeffs: self.coeffs.iter().map(|(&q, &c)| (q + p, c)).collect(),
        }
    }

    fn accumulate(&mut self, p: i32, c: f64) {
        let v = self.coeff(p) + c;
        if v == 0.0 {
            self.coeffs.remove(&p);
        } else {
            self.coeffs.insert(p, v);
        }
    }

    /// Value at `t` in log form.
    pub fn value(&self, t: f64) -> Result<LogScalar> {
        if self.is_zero() {
            return Ok(LogScalar::ZERO);
        }
        let g = phi_gate(t);
        let mut sum = LogSum::zero();
        for (p, c) in self.terms() {
            if p == 0 {
                sum.push(LogScalar::from_f64(c));
                continue;
            }
            if g.is_zero() {
                if p < 0 {
                    return Err(LabError::InvalidArgument(format!(
                        "negative gate power {p} at t = {t} where the gate vanishes"
                    )));
                }
                continue;
            }
            sum.push(LogScalar::from_f64(c) * g.powi(p));
        }
        Ok(sum.value())
    }

    /// Value at `t` as a float when representable.
    pub fn to_f64(&self, t: f64) -> Result<f64> {
        let v = self.value(t)?;
        if !v.is_representable() {
            return Err(LabError::Unrepresentable(format!(
                "coefficient {v} at t = {t}"
            )));
        }
        Ok(v.to_f64())
    }
}

impl Add for &PhiPoly {
    type Output = PhiPoly;

    fn add(self, rhs: &PhiPoly) -> PhiPoly {
        let mut out = self.clone();
        for (p, c) in rhs.terms() {
            out.accumulate(p, c);
        }
        out
    }
}

impl Sub for &PhiPoly {
    type Output = PhiPoly;

    fn sub(self, rhs: &PhiPoly) -> PhiPoly {
        self + &(-rhs)
    }
}

impl Neg for &PhiPoly {
    type Output = PhiPoly;

    fn neg(self) -> PhiPoly {
        self.scale(-1.0)
    }
}

impl Mul for &PhiPoly {
    type Output = PhiPoly;

    fn mul(self, rhs: &PhiPoly) -> PhiPoly {
        let mut out = PhiPoly::zero();
        for (p, a) in self.terms() {
            for (q, b) in rhs.terms() {
                out.accumulate(p + q, a * b);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_tiny_gate() {
        let y = PhiPoly::constant(0.7);
        let a = PhiPoly::constant(0.3);
        let forward = &y + &a.shift(1);
        let back = (&forward - &y).shift(-1);
        assert_eq!(back, a);
        // phi(0.4) ~ e^{-518}: value survives in log form
        let v = forward.value(0.4).unwrap();
        assert!((v.to_f64() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn negative_powers_blow_up_in_log_form() {
        let p = PhiPoly::monomial(2.0, -1);
        let v = p.value(0.4).unwrap();
        assert!((v.logmag() - (2f64.ln() + 6.25f64.exp())).abs() < 1e-9);
        assert!(p.to_f64(0.35).is_err());
        assert!(p.value(-1.0).is_err());
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let g = PhiPoly::gate();
        assert!((&g - &g).is_zero());
        assert_eq!(PhiPoly::monomial(0.0, 3), PhiPoly::zero());
    }
}
