//! The bump `beta`, its far-left shifts `beta_t = beta(e^{1/t} + .)`, the gate
//! `phi(t) = e^{-e^{1/t^2}}` and the smooth step `f` with its rescalings `f_n`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::jet::{Jet, K_MAX};
use crate::scale::{AnalyticTailFunction, GridFunction, GridSpec, LogScalar, LogSum};

/// Largest shift `e^{1/t}` for which grid materialization is allowed.
pub const MAX_GRID_SHIFT: f64 = 1e6;

/// Below `e^{-MAX_NEG_EXPONENT}` a flat factor and all its derivatives are
/// treated as exactly zero.
const MAX_NEG_EXPONENT: f64 = 700.0;

/// `e^{-1/u}` as a jet, zero once it underflows.
fn flat_exp(u: Jet) -> Jet {
    if u.value() <= 0.0 || 1.0 / u.value() > MAX_NEG_EXPONENT {
        return Jet::zero();
    }
    (-u.recip()).exp()
}

/// `beta(x) = c exp(-1/(1 - x^2))` on `(-1, 1)` with `int beta^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    c: f64,
}

/// Trapezoid rule on `[-1, 1]` refined by factor 4 until two passes agree.
fn refine_trapezoid(f: impl Fn(f64) -> f64, rel_tol: f64) -> f64 {
    let eval = |n: usize| {
        let h = 2.0 / n as f64;
        let s: f64 = (1..n).map(|j| f(-1.0 + j as f64 * h)).sum();
        s * h
    };
    let mut n = 16;
    let mut prev = eval(n);
    loop {
        n *= 4;
        let next = eval(n);
        if (next - prev).abs() <= rel_tol * next.abs() || n > 1 << 22 {
            return next;
        }
        prev = next;
    }
}

pub fn make_bump() -> BumpProfile {
    static BUMP: OnceLock<BumpProfile> = OnceLock::new();
    *BUMP.get_or_init(|| {
        let sq = refine_trapezoid(|x| (-2.0 / (1.0 - x * x)).exp(), 1e-15);
        BumpProfile { c: 1.0 / sq.sqrt() }
    })
}

impl BumpProfile {
    pub fn normalization(&self) -> f64 {
        self.c
    }

    fn jet(&self, x: f64) -> Jet {
        if x.abs() >= 1.0 {
            return Jet::zero();
        }
        let v = Jet::variable(x);
        flat_exp(Jet::constant(1.0) - v * v).scale(self.c)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x).value()
    }

    /// `beta^{(order)}(x)` for `order <= K_MAX`.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        self.jet(x).derivative(order)
    }

    pub fn log_value(&self, x: f64) -> LogScalar {
        if x.abs() >= 1.0 {
            return LogScalar::ZERO;
        }
        LogScalar::from_log(self.c.ln() - 1.0 / (1.0 - x * x))
    }
}

/// `f(x) = 1/2 + 1/2 g(1-x) / (g(1-x) + g(x-1/2))`, `g(y) = e^{-1/y}` for
/// `y > 0`: identically 1 left of 1/2, identically 1/2 right of 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SmoothStep;

impl SmoothStep {
    fn jet(&self, x: f64) -> Jet {
        if x <= 0.5 {
            return Jet::constant(1.0);
        }
        if x >= 1.0 {
            return Jet::constant(0.5);
        }
        let v = Jet::variable(x);
        let a = flat_exp(Jet::constant(1.0) - v);
        let b = flat_exp(v - Jet::constant(0.5));
        if b.value() == 0.0 {
            return Jet::constant(1.0);
        }
        if a.value() == 0.0 {
            return Jet::constant(0.5);
        }
        Jet::constant(0.5) + (a / (a + b)).scale(0.5)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x).value()
    }

    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        self.jet(x).derivative(order)
    }

    /// `1 / f(x)`, in `[1, 2]`.
    pub fn inverse_value(&self, x: f64) -> f64 {
        1.0 / self.value(x)
    }
}

/// Argument of `f` in `f_n(t) = f((n(n+1)t + 1 - n) / 2)`.
fn step_argument(n: usize, t: f64) -> f64 {
    let nn = n as f64;
    0.5 * (nn * (nn + 1.0) * t + 1.0 - nn)
}

/// `f_n^{(order)}(t)`; equals 1 for `t <= 1/(n+1)` and 1/2 for `t >= 1/n`.
pub fn step_n(n: usize, t: f64, order: usize) -> f64 {
    assert!(n >= 1, "step index starts at 1");
    assert!(order <= K_MAX, "derivative order {order} beyond {K_MAX}");
    let nn = n as f64;
    let scale = (0.5 * nn * (nn + 1.0)).powi(order as i32);
    scale * SmoothStep.derivative(step_argument(n, t), order)
}

/// `e^{1/t}`, the distance of `beta_t`'s support centre from the origin.
pub fn shift(t: f64) -> f64 {
    (1.0 / t).exp()
}

fn check_representable(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "shifted bump needs t > 0, got {t}"
        )));
    }
    let s = shift(t);
    if !(s <= MAX_GRID_SHIFT) {
        return Err(LabError::Unrepresentable(format!(
            "e^(1/t) = {s:e} exceeds {MAX_GRID_SHIFT:e} at t = {t}; use the log-domain path"
        )));
    }
    Ok(s)
}

/// Support `[-e^{1/t} - 1, -e^{1/t} + 1]` of `beta_t`.
pub fn bump_support(t: f64) -> (f64, f64) {
    let s = shift(t);
    (-s - 1.0, -s + 1.0)
}

/// Grid samples of `beta^{(order)}(e^{1/t} + x)` around the support of `beta_t`.
pub fn shifted_bump(t: f64, order: usize, spec: GridSpec) -> Result<GridFunction> {
    if order > K_MAX {
        return Err(LabError::InvalidArgument(format!(
            "derivative order {order} beyond {K_MAX}"
        )));
    }
    let s = check_representable(t)?;
    let b = make_bump();
    GridFunction::from_fn(
        -s - 1.0 - spec.margin,
        -s + 1.0 + spec.margin,
        spec.spacing,
        |x| b.derivative(s + x, order),
    )
}

/// `<f, beta_t>`, zero without materializing when the windows are disjoint.
pub fn pair_with_bump(f: &GridFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "pairing with beta_t needs t > 0, got {t}"
        )));
    }
    let (lo, hi) = bump_support(t);
    let (a, b) = f.window();
    if b <= lo || a >= hi {
        return Ok(0.0);
    }
    let bt = shifted_bump(
        t,
        0,
        GridSpec {
            spacing: f.spacing(),
            margin: 0.0,
        },
    )?;
    f.l2_inner(&bt)
}

/// `log <f, beta_t>` for the analytic tail, by log-sum-exp trapezoid in the
/// bump variable `y = x + e^{1/t}`.
pub fn pair_tail_with_bump(f: &AnalyticTailFunction, t: f64) -> Result<LogScalar> {
    if !(t > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "pairing with beta_t needs t > 0, got {t}"
        )));
    }
    let s = shift(t);
    if !s.is_finite() {
        return Err(LabError::Unrepresentable(format!(
            "e^(1/t) overflows at t = {t}"
        )));
    }
    let b = make_bump();
    let eval = |n: usize| {
        let h = 2.0 / n as f64;
        let logs: Vec<f64> = (1..n)
            .map(|j| {
                let y = -1.0 + j as f64 * h;
                b.log_value(y).logmag() + f.log_eval(y - s).logmag()
            })
            .filter(|l| l.is_finite())
            .collect();
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.iter().map(|l| (l - m).exp()).sum();
        m + sum.ln() + h.ln()
    };
    let mut n = 64;
    let mut prev = eval(n);
    loop {
        n *= 4;
        let next = eval(n);
        if (next - prev).abs() <= 1e-13 * next.abs().max(1.0) || n > 1 << 20 {
            return Ok(LogScalar::from_log(next));
        }
        prev = next;
    }
}

/// `phi(t) = e^{-e^{1/t^2}}` for `t > 0`, zero otherwise.
///
/// When `e^{1/t^2}` overflows the log-magnitude saturates at `f64::MIN`.
pub fn phi_gate(t: f64) -> LogScalar {
    if !(t > 0.0) {
        return LogScalar::ZERO;
    }
    let e = (1.0 / (t * t)).exp();
    LogScalar::from_log(if e.is_finite() { -e } else { f64::MIN })
}

/// `phi^{(k)}(t)` from the jet of `log phi = -e^{1/t^2}`.
pub fn phi_gate_derivative(t: f64, k: usize) -> LogScalar {
    let base = phi_gate(t);
    if base.is_zero() || k == 0 {
        return base;
    }
    let v = Jet::variable(t);
    let log_phi = -(v * v).recip().exp();
    if !log_phi.derivative(k).is_finite() {
        return LogScalar::ZERO;
    }
    let ratio = (log_phi - Jet::constant(log_phi.value())).exp();
    LogScalar::from_f64(ratio.derivative(k)) * base
}

/// Central `k`-th difference of `phi` at `t` with step `h`, summed in log form.
pub fn phi_gate_fd_derivative(t: f64, k: usize, h: f64) -> LogScalar {
    let mut acc = LogSum::zero();
    let mut binom = 1.0;
    for j in 0..=k {
        let x = t + (0.5 * k as f64 - j as f64) * h;
        let mut term = phi_gate(x) * LogScalar::from_f64(binom);
        if j % 2 == 1 {
            term = -term;
        }
        acc.push(term);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    acc.value() / LogScalar::from_f64(h).powi(k as i32)
}

/// `log( t^{-l} e^{delta e^{1/t}/2 + m/t^2 + n/t} phi(t) )` on each grid point.
pub fn log_limit_probe(l: u32, m: u32, n: u32, delta: f64, t_grid: &[f64]) -> Vec<LogScalar> {
    t_grid
        .iter()
        .map(|&t| {
            let g = phi_gate(t);
            if g.is_zero() {
                return LogScalar::ZERO;
            }
            let log = -f64::from(l) * t.ln()
                + 0.5 * delta * shift(t)
                + f64::from(m) / (t * t)
                + f64::from(n) / t
                + g.logmag();
            LogScalar::from_log(log)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_support_and_sign() {
        let b = make_bump();
        for x in [-1.5, -1.0, 1.0, 1.5] {
            assert_eq!(b.value(x), 0.0);
        }
        for i in -99..100 {
            assert!(b.value(i as f64 / 100.0) > 0.0);
        }
    }

    #[test]
    fn bump_is_unit_in_l2() {
        let g = shifted_bump(0.5, 0, GridSpec::default()).unwrap();
        assert!((g.l2_norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bump_derivative_matches_difference_quotient() {
        let b = make_bump();
        let h = 1e-5;
        for &x in &[-0.7, -0.2, 0.1, 0.55] {
            let fd = (b.value(x + h) - b.value(x - h)) / (2.0 * h);
            assert!((fd - b.derivative(x, 1)).abs() < 1e-8);
        }
    }

    #[test]
    fn log_value_agrees() {
        let b = make_bump();
        for &x in &[-0.9, 0.0, 0.95] {
            assert!((b.log_value(x).to_f64() - b.value(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn shifted_window_centre() {
        let g = shifted_bump(0.5, 0, GridSpec::default()).unwrap();
        let (a, b) = g.window();
        let centre = 0.5 * (a + b);
        assert!((centre + 0.5f64.recip().exp()).abs() < 2.0 * GridSpec::default().spacing);
    }

    #[test]
    fn tiny_t_is_refused_on_grids() {
        assert!(matches!(
            shifted_bump(0.05, 0, GridSpec::default()),
            Err(LabError::Unrepresentable(_))
        ));
    }

    #[test]
    fn pairing_with_far_function_is_zero() {
        let f = GridFunction::from_fn(0.0, 3.0, DEFAULT, |x| x).unwrap();
        assert_eq!(pair_with_bump(&f, 0.9).unwrap(), 0.0);
        // no materialization needed for tiny t
        assert_eq!(pair_with_bump(&f, 0.01).unwrap(), 0.0);
    }

    const DEFAULT: f64 = crate::scale::DEFAULT_SPACING;

    #[test]
    fn disjoint_shifts_are_orthogonal() {
        let spec = GridSpec::default();
        let a = shifted_bump(0.5, 0, spec).unwrap();
        let b = shifted_bump(0.2, 0, spec).unwrap();
        assert_eq!(a.l2_inner(&b).unwrap(), 0.0);
    }

    #[test]
    fn gate_values() {
        assert!((phi_gate(0.5).logmag() + 4f64.exp()).abs() < 1e-12);
        assert!(phi_gate(-1.0).is_zero());
        assert!(phi_gate(0.0).is_zero());
        assert!(phi_gate(0.4) < phi_gate(0.5));
        assert_eq!(phi_gate(1e-3).logmag(), f64::MIN);
    }

    #[test]
    fn gate_derivative_agrees_with_differences() {
        for &t in &[0.5, 0.6, 0.8] {
            for k in 1..=3 {
                let a = phi_gate_derivative(t, k);
                let rate = 2.0 / (t * t * t) * (1.0 / (t * t)).exp();
                let d = phi_gate_fd_derivative(t, k, 1e-2 / (1.0 + rate));
                assert_eq!(a.sign(), d.sign(), "t = {t}, k = {k}");
                assert!((a.logmag() - d.logmag()).abs() < 1e-3, "t = {t}, k = {k}");
            }
        }
    }

    #[test]
    fn step_plateaus() {
        assert_eq!(step_n(2, 1.0 / 3.0, 0), 1.0);
        assert_eq!(step_n(3, 1.0 / 3.0, 0), 0.5);
        for n in 1..6 {
            for &t in &[-1.0, 0.0, 1.0 / (n as f64 + 1.0), 1.0 / n as f64, 2.0] {
                for k in 1..=3 {
                    assert_eq!(step_n(n, t, k), 0.0);
                }
            }
        }
        let s = SmoothStep;
        assert_eq!(s.value(0.5), 1.0);
        assert_eq!(s.value(1.0), 0.5);
        assert!((s.value(0.75) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn step_is_monotone_in_transition() {
        let s = SmoothStep;
        let mut prev = 1.0;
        for j in 1..1000 {
            let v = s.value(0.5 + j as f64 / 2000.0);
            assert!(v <= prev);
            assert!(s.derivative(0.5 + j as f64 / 2000.0, 1) <= 0.0);
            prev = v;
        }
    }

    #[test]
    fn limit_probe_reduces_to_gate() {
        let v = log_limit_probe(0, 0, 0, 0.0, &[0.5]);
        assert!((v[0].logmag() + 4f64.exp()).abs() < 1e-12);
    }
}
