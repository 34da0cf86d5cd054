//! Truncated Taylor arithmetic for exact low-order derivatives of closed forms.
//!
//! A [`Jet`] stores `f(x0), f'(x0), f''(x0)/2!, ...` up to [`K_MAX`]. Arithmetic
//! on jets propagates all coefficients, so evaluating a formula on
//! `Jet::variable(x0)` yields its derivatives at `x0` without differencing.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order tracked.
pub const K_MAX: usize = 4;
const LEN: usize = K_MAX + 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; LEN],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Jet { c }
    }

    pub fn variable(x: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = x;
        c[1] = 1.0;
        Jet { c }
    }

    pub fn zero() -> Self {
        Jet { c: [0.0; LEN] }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        assert!(k <= K_MAX, "derivative order {k} beyond K_MAX = {K_MAX}");
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        self.c[k] * fact
    }

    pub fn exp(&self) -> Self {
        let mut e = [0.0; LEN];
        e[0] = self.c[0].exp();
        for k in 1..LEN {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Jet { c: e }
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0) / *self
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|v| *v *= a);
        Jet { c }
    }
}

impl Add for Jet {
    type Output = Jet;

    fn add(self, rhs: Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        Jet { c }
    }
}

impl Sub for Jet {
    type Output = Jet;

    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;

    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;

    fn mul(self, rhs: Jet) -> Jet {
        let mut c = [0.0; LEN];
        for (k, ck) in c.iter_mut().enumerate() {
            for j in 0..=k {
                *ck += self.c[j] * rhs.c[k - j];
            }
        }
        Jet { c }
    }
}

impl Div for Jet {
    type Output = Jet;

    fn div(self, rhs: Jet) -> Jet {
        assert!(rhs.c[0] != 0.0, "jet division by zero");
        let mut q = [0.0; LEN];
        for k in 0..LEN {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= rhs.c[j] * q[k - j];
            }
            q[k] = s / rhs.c[0];
        }
        Jet { c: q }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_variable() {
        let j = Jet::variable(0.3).exp();
        for k in 0..=K_MAX {
            assert!((j.derivative(k) - 0.3f64.exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn quotient_rule() {
        // 1/(1+x) at x = 1: derivatives (-1)^k k! / 2^{k+1}
        let x = Jet::variable(1.0);
        let q = Jet::constant(1.0) / (Jet::constant(1.0) + x);
        let mut fact = 1.0;
        for k in 0..=K_MAX {
            if k > 0 {
                fact *= k as f64;
            }
            let expect = (-1f64).powi(k as i32) * fact / 2f64.powi(k as i32 + 1);
            assert!((q.derivative(k) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn product_of_polynomials() {
        let x = Jet::variable(2.0);
        let p = x * x * x; // x^3
        assert_eq!(p.derivative(0), 8.0);
        assert_eq!(p.derivative(1), 12.0);
        assert_eq!(p.derivative(2), 12.0);
        assert_eq!(p.derivative(3), 6.0);
        assert_eq!(p.derivative(4), 0.0);
    }
}
