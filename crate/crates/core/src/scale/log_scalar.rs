//! Signed magnitudes stored as logarithms.
//!
//! Quantities like `exp(-exp(1/t^2))` leave the `f64` range long before `t`
//! gets small, so the gallery carries them as `(sign, ln|v|)` pairs. [`LogSum`]
//! keeps an unevaluated sum of such terms so that exact cancellations (the
//! same term added with opposite signs) survive where rounding would not.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogScalar {
    sign: i8,
    logmag: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar {
        sign: 0,
        logmag: f64::NEG_INFINITY,
    };
    pub const ONE: LogScalar = LogScalar {
        sign: 1,
        logmag: 0.0,
    };

    /// Builds `sign * exp(logmag)`. A zero sign or `logmag = -inf` gives zero.
    pub fn new(sign: i8, logmag: f64) -> Self {
        debug_assert!(!logmag.is_nan(), "NaN log-magnitude");
        if sign == 0 || logmag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogScalar {
                sign: sign.signum(),
                logmag,
            }
        }
    }

    /// Positive value `exp(logmag)`.
    pub fn from_log(logmag: f64) -> Self {
        Self::new(1, logmag)
    }

    pub fn from_f64(v: f64) -> Self {
        debug_assert!(!v.is_nan());
        if v == 0.0 {
            Self::ZERO
        } else {
            Self::new(if v > 0.0 { 1 } else { -1 }, v.abs().ln())
        }
    }

    /// Real value; saturates to `0` or `±inf` outside the `f64` range.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.logmag.exp(),
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn logmag(self) -> f64 {
        self.logmag
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        Self::new(self.sign.abs(), self.logmag)
    }

    /// True when the value fits in an `f64` without overflow.
    pub fn is_representable(self) -> bool {
        self.sign == 0 || self.logmag < f64::MAX.ln()
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        let sign = if n % 2 == 0 { 1 } else { self.sign };
        Self::new(sign, self.logmag * f64::from(n))
    }

    /// `None` when dividing by zero.
    pub fn checked_div(self, rhs: Self) -> Option<Self> {
        if rhs.is_zero() {
            None
        } else if self.is_zero() {
            Some(Self::ZERO)
        } else {
            Some(Self::new(self.sign * rhs.sign, self.logmag - rhs.logmag))
        }
    }

    /// `total_cmp`-style order that agrees with the order of the real values.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.logmag.total_cmp(&other.logmag),
                _ => other.logmag.total_cmp(&self.logmag),
            },
            ord => ord,
        }
    }

    /// True when `self` and `other` are exact negations of each other.
    pub fn cancels(&self, other: &Self) -> bool {
        self.sign != 0 && self.sign == -other.sign && self.logmag == other.logmag
    }
}

impl Default for LogScalar {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Display for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "exp({})", self.logmag),
            _ => write!(f, "-exp({})", self.logmag),
        }
    }
}

impl PartialOrd for LogScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl Mul for LogScalar {
    type Output = LogScalar;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            Self::ZERO
        } else {
            Self::new(self.sign * rhs.sign, self.logmag + rhs.logmag)
        }
    }
}

impl Div for LogScalar {
    type Output = LogScalar;

    /// Panics on a zero divisor; use [`LogScalar::checked_div`] otherwise.
    fn div(self, rhs: Self) -> Self {
        self.checked_div(rhs).expect("LogScalar division by zero")
    }
}

impl Neg for LogScalar {
    type Output = LogScalar;

    fn neg(self) -> Self {
        LogScalar {
            sign: -self.sign,
            logmag: self.logmag,
        }
    }
}

impl Add for LogScalar {
    type Output = LogScalar;

    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.logmag >= rhs.logmag {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let d = lo.logmag - hi.logmag;
        if hi.sign == lo.sign {
            Self::new(hi.sign, hi.logmag + d.exp().ln_1p())
        } else if d == 0.0 {
            Self::ZERO
        } else {
            Self::new(hi.sign, hi.logmag + (-d.exp_m1()).ln())
        }
    }
}

impl Sub for LogScalar {
    type Output = LogScalar;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// Unevaluated sum of [`LogScalar`] terms.
///
/// Adding a term that is the exact negation of a stored term removes both.
/// Everything else is stored as-is; [`LogSum::value`] collapses the sum.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LogSum {
    terms: Vec<LogScalar>,
}

impl LogSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_term(term: LogScalar) -> Self {
        let mut s = Self::zero();
        s.push(term);
        s
    }

    pub fn from_f64(v: f64) -> Self {
        Self::from_term(LogScalar::from_f64(v))
    }

    pub fn terms(&self) -> &[LogScalar] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: LogScalar) {
        if term.is_zero() {
            return;
        }
        if let Some(pos) = self.terms.iter().position(|t| t.cancels(&term)) {
            self.terms.remove(pos);
        } else {
            self.terms.push(term);
        }
    }

    pub fn scale(&self, factor: LogScalar) -> Self {
        let mut out = Self::zero();
        for &t in &self.terms {
            out.push(t * factor);
        }
        out
    }

    /// Divides every term; `None` for a zero divisor.
    pub fn div_scalar(&self, divisor: LogScalar) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        let mut out = Self::zero();
        for &t in &self.terms {
            out.push(t / divisor);
        }
        Some(out)
    }

    /// Collapses the sum, adding from the largest magnitude down.
    pub fn value(&self) -> LogScalar {
        let mut sorted = self.terms.clone();
        sorted.sort_by(|a, b| b.logmag.total_cmp(&a.logmag));
        sorted.into_iter().fold(LogScalar::ZERO, |acc, t| acc + t)
    }

    pub fn to_f64(&self) -> f64 {
        self.value().to_f64()
    }
}

impl From<LogScalar> for LogSum {
    fn from(term: LogScalar) -> Self {
        Self::from_term(term)
    }
}

impl Add for &LogSum {
    type Output = LogSum;

    fn add(self, rhs: &LogSum) -> LogSum {
        let mut out = self.clone();
        for &t in &rhs.terms {
            out.push(t);
        }
        out
    }
}

impl Sub for &LogSum {
    type Output = LogSum;

    fn sub(self, rhs: &LogSum) -> LogSum {
        let mut out = self.clone();
        for &t in &rhs.terms {
            out.push(-t);
        }
        out
    }
}

impl Neg for &LogSum {
    type Output = LogSum;

    fn neg(self) -> LogSum {
        LogSum {
            terms: self.terms.iter().map(|&t| -t).collect(),
        }
    }
}

impl Mul for &LogSum {
    type Output = LogSum;

    fn mul(self, rhs: &LogSum) -> LogSum {
        let mut out = LogSum::zero();
        for &a in &self.terms {
            for &b in &rhs.terms {
                out.push(a * b);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mul_adds_logs() {
        let p = LogScalar::from_log(2.0) * LogScalar::from_log(3.0);
        assert_eq!(p, LogScalar::from_log(5.0));
    }

    #[test]
    fn zero_is_additive_identity() {
        let x = LogScalar::new(-1, 7.5);
        assert_eq!(x + LogScalar::ZERO, x);
        assert_eq!(LogScalar::ZERO + x, x);
    }

    #[test]
    fn one_plus_one_is_log_two() {
        let s = LogScalar::ONE + LogScalar::ONE;
        assert_eq!(s.sign(), 1);
        assert!((s.logmag() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn exact_negation_cancels_to_zero() {
        let x = LogScalar::from_log(-518.25);
        assert!((x - x).is_zero());
    }

    #[test]
    fn sign_zero_iff_neg_infinity() {
        assert!(LogScalar::new(1, f64::NEG_INFINITY).is_zero());
        assert!(LogScalar::new(0, 3.0).is_zero());
        assert_eq!(LogScalar::ZERO.logmag(), f64::NEG_INFINITY);
    }

    #[test]
    fn handles_values_beyond_f64() {
        let tiny = LogScalar::from_log(-1e5);
        let huge = LogScalar::ONE / tiny;
        assert_eq!(huge.logmag(), 1e5);
        assert!(!huge.is_representable());
        assert_eq!(tiny.to_f64(), 0.0);
    }

    #[test]
    fn log_sum_keeps_tiny_terms_through_cancellation() {
        let phi = LogScalar::from_log(-518.0);
        let y = LogSum::from_f64(0.7);
        let a = LogScalar::from_f64(0.25);
        // (y + phi*a) * phi - y*phi == phi^2 * a, exactly in structure.
        let shifted = &y + &LogSum::from_term(phi * a);
        let left = &shifted.scale(phi) - &y.scale(phi);
        let back = left.div_scalar(phi * phi).unwrap().value();
        assert!((back.to_f64() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn log_sum_product_distributes() {
        let a = &LogSum::from_f64(2.0) + &LogSum::from_f64(-0.5);
        let b = LogSum::from_f64(4.0);
        assert!(((&a * &b).to_f64() - 6.0).abs() < 1e-14);
    }

    fn ulp(x: f64) -> f64 {
        let x = x.abs();
        f64::from_bits(x.to_bits() + 1) - x
    }

    proptest! {
        #[test]
        fn round_trip_is_tight(e in -300.0f64..300.0, m in 1.0f64..10.0, neg in any::<bool>()) {
            let v = if neg { -m * 10f64.powf(e) } else { m * 10f64.powf(e) };
            prop_assume!(v.abs() >= 1e-300 && v.abs() <= 1e300);
            let a = LogScalar::from_f64(v);
            let b = LogScalar::from_f64(a.to_f64());
            prop_assert_eq!(a.sign(), b.sign());
            // exp/ln each contribute at most half an ulp of a value of size max(|logmag|, 1)
            let slack = 2.0 * ulp(a.logmag().abs().max(1.0));
            prop_assert!((a.logmag() - b.logmag()).abs() <= slack);
        }

        #[test]
        fn comparison_matches_reals(x in -1e6f64..1e6, y in -1e6f64..1e6) {
            let (a, b) = (LogScalar::from_f64(x), LogScalar::from_f64(y));
            let real = x.partial_cmp(&y).unwrap();
            let logd = a.total_cmp(&b);
            // ln may merge neighbouring floats, never reorder them
            prop_assert!(logd == real || logd == Ordering::Equal);
        }

        #[test]
        fn addition_matches_reals(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            let s = (LogScalar::from_f64(x) + LogScalar::from_f64(y)).to_f64();
            prop_assert!((s - (x + y)).abs() <= 1e-12 * (x.abs() + y.abs()).max(1e-300));
        }
    }
}
