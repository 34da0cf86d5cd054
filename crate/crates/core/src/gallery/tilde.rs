use serde::{Deserialize, Serialize};

use super::retract::pair_with_bump_dt;
use super::split::{bump_multiple, SplitFunction};
use super::{MapId, PhiPoly, ScMap};
use crate::bump::{pair_tail_with_bump, pair_with_bump, phi_gate, phi_gate_derivative};
use crate::error::Result;
use crate::gallery::retract::dbeta_dt;
use crate::scale::{AnalyticTailFunction, GridFunction, LogScalar};

impl SplitFunction {
    /// Splits `f` into its `beta_t`-orthogonal part and `<f, beta_t>`.
    pub fn decompose(f: &GridFunction, t: f64) -> Result<Self> {
        if t <= 0.0 {
            return Ok(SplitFunction::plain(f.clone(), t));
        }
        let a = pair_with_bump(f, t)?;
        let orth = if a == 0.0 {
            f.clone()
        } else {
            f.combine(1.0, &bump_multiple(t, a, f)?, -1.0)?
        };
        Ok(SplitFunction {
            orth,
            t,
            coeff: PhiPoly::constant(a),
        })
    }
}

/// `(t, y, f)` with the `y` slot and the `beta_t` coefficient held as
/// gate polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct STildeImage {
    pub t: f64,
    pub y: PhiPoly,
    pub f: SplitFunction,
}

/// `(t, y + phi(t)<f, beta_t>, f - <f, beta_t> beta_t + y phi(t) beta_t)`,
/// the identity for `t <= 0`.
pub fn s_tilde_eval(t: f64, y: &PhiPoly, f: &SplitFunction) -> STildeImage {
    if t <= 0.0 {
        return STildeImage {
            t,
            y: y.clone(),
            f: f.clone(),
        };
    }
    STildeImage {
        t,
        y: y + &f.coeff.shift(1),
        f: SplitFunction {
            orth: f.orth.clone(),
            t,
            coeff: y.shift(1),
        },
    }
}

/// Inverse of [`s_tilde_eval`]: `y = <f, beta_t> / phi(t)`.
pub fn s_tilde_inv(t: f64, y: &PhiPoly, f: &SplitFunction) -> STildeImage {
    if t <= 0.0 {
        return STildeImage {
            t,
            y: y.clone(),
            f: f.clone(),
        };
    }
    let y0 = f.coeff.shift(-1);
    let a = (y - &y0).shift(-1);
    STildeImage {
        t,
        y: y0,
        f: SplitFunction {
            orth: f.orth.clone(),
            t,
            coeff: a,
        },
    }
}

/// `pr_y s~^{-1}(t, 0, f) = <f, beta_t> / phi(t)` for the analytic tail.
pub fn s_tilde_inv_tail_y(t: f64, f: &AnalyticTailFunction) -> Result<LogScalar> {
    let pair = pair_tail_with_bump(f, t)?;
    Ok(pair / phi_gate(t))
}

/// Float version of `s~` on `R x R x L2` for difference checks where the
/// gate is representable.
#[derive(Clone, Copy, Debug, Default)]
pub struct STilde;

impl ScMap for STilde {
    type Domain = (f64, f64, GridFunction);
    type Codomain = (f64, f64, GridFunction);

    fn id(&self) -> MapId {
        MapId::STilde
    }

    fn eval(&self, x: &Self::Domain) -> Result<Self::Codomain> {
        let (t, y, f) = x;
        if *t <= 0.0 {
            return Ok(x.clone());
        }
        let phi = phi_gate(*t).to_f64();
        let a = pair_with_bump(f, *t)?;
        let c = y * phi - a;
        let g = if c == 0.0 {
            f.clone()
        } else {
            f.combine(1.0, &bump_multiple(*t, c, f)?, 1.0)?
        };
        Ok((*t, y + phi * a, g))
    }

    fn differential(&self, base: &Self::Domain, dir: &Self::Domain) -> Result<Self::Codomain> {
        let (t, y, f) = base;
        let (big_t, big_y, big_f) = dir;
        if *t <= 0.0 {
            return Ok(dir.clone());
        }
        let phi = phi_gate(*t).to_f64();
        let dphi = phi_gate_derivative(*t, 1).to_f64();
        let a = pair_with_bump(f, *t)?;
        let b = pair_with_bump_dt(f, *t)?;
        let big_a = pair_with_bump(big_f, *t)?;
        let dy = big_y + phi * big_a + big_t * (dphi * a + phi * b);
        let bt_coeff = -big_a + big_y * phi + big_t * (-b + y * dphi);
        let dbt_coeff = big_t * (-a + y * phi);
        let mut g = big_f.combine(1.0, &bump_multiple(*t, bt_coeff, big_f)?, 1.0)?;
        if dbt_coeff != 0.0 {
            g = g.combine(1.0, &dbeta_dt(*t, big_f.spacing())?, dbt_coeff)?;
        }
        Ok((*big_t, dy, g))
    }
}
