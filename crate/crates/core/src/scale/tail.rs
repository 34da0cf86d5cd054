use serde::{Deserialize, Serialize};

use super::LogScalar;

/// `f(x) = e^{-delta |x|} x^{-2}` for `|x| > 1`, held at the constant
/// `e^{-delta}` on `[-1, 1]`.
///
/// Only the tail is ever paired against far-shifted bumps, so the interior
/// piece just joins the two branches continuously.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTailFunction {
    delta: f64,
}

impl AnalyticTailFunction {
    pub fn new(delta: f64) -> Self {
        assert!(delta >= 0.0, "decay must be non-negative");
        AnalyticTailFunction { delta }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn log_eval(&self, x: f64) -> LogScalar {
        let ax = x.abs();
        if ax > 1.0 {
            LogScalar::from_log(-self.delta * ax - 2.0 * ax.ln())
        } else {
            LogScalar::from_log(-self.delta)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax > 1.0 {
            (-self.delta * ax).exp() / (x * x)
        } else {
            (-self.delta).exp()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluators_agree_where_representable() {
        let f = AnalyticTailFunction::new(0.1);
        for &x in &[-5000.0, -30.0, -2.5, -1.0, 0.0, 0.3, 1.5, 80.0] {
            let direct = f.eval(x);
            let via_log = f.log_eval(x).to_f64();
            assert!((direct - via_log).abs() <= 1e-13 * direct, "x = {x}");
        }
    }

    #[test]
    fn log_path_survives_underflow() {
        let f = AnalyticTailFunction::new(0.1);
        let x = -1e6;
        assert_eq!(f.eval(x), 0.0);
        let l = f.log_eval(x).logmag();
        assert!((l - (-1e5 - 2.0 * 1e6f64.ln())).abs() < 1e-9);
    }
}
