use serde::{Deserialize, Serialize};

use super::split::{bump_multiple, meets_bump};
use super::{MapId, ScMap};
use crate::bump::{pair_with_bump, shift, shifted_bump};
use crate::error::Result;
use crate::scale::{GridFunction, GridSpec};

/// A point `(t, s beta_t)` of the retract, `s = 0` when `t <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetractPoint {
    pub t: f64,
    pub coeff: f64,
}

impl RetractPoint {
    pub fn new(t: f64, coeff: f64) -> Self {
        RetractPoint {
            t,
            coeff: if t > 0.0 { coeff } else { 0.0 },
        }
    }

    /// Retract coordinates of `rho(t, f)`.
    pub fn of(t: f64, f: &GridFunction) -> Result<Self> {
        let c = if t > 0.0 { pair_with_bump(f, t)? } else { 0.0 };
        Ok(RetractPoint::new(t, c))
    }
}

/// `d/dt beta_t = -e^{1/t} t^{-2} beta'(e^{1/t} + .)` on the support window.
pub fn dbeta_dt(t: f64, spacing: f64) -> Result<GridFunction> {
    let g = shifted_bump(
        t,
        1,
        GridSpec {
            spacing,
            margin: 0.0,
        },
    )?;
    Ok(g.scale(-shift(t) / (t * t)))
}

/// `<f, d/dt beta_t>`.
pub fn pair_with_bump_dt(f: &GridFunction, t: f64) -> Result<f64> {
    if !meets_bump(f, t) {
        return Ok(0.0);
    }
    f.l2_inner(&dbeta_dt(t, f.spacing())?)
}

/// `rho(t, f) = (t, <f, beta_t> beta_t)` for `t > 0`, `(t, 0)` otherwise.
pub fn rho_eval(t: f64, f: &GridFunction) -> Result<(f64, GridFunction)> {
    if t <= 0.0 {
        return Ok((t, GridFunction::zeros_like(f)));
    }
    let a = pair_with_bump(f, t)?;
    Ok((t, bump_multiple(t, a, f)?))
}

/// `d rho(t, 0)(T, F) = (T, <F, beta_t> beta_t)` for `t > 0`, `(T, 0)` otherwise.
pub fn rho_diff(t: f64, big_t: f64, big_f: &GridFunction) -> Result<(f64, GridFunction)> {
    let (_, g) = rho_eval(t, big_f)?;
    Ok((big_t, g))
}

/// `s(t, f) = (t, f - <f, beta_t> beta_t)` for `t > 0`, `(t, f)` otherwise.
pub fn s_proj(t: f64, f: &GridFunction) -> Result<(f64, GridFunction)> {
    if t <= 0.0 {
        return Ok((t, f.clone()));
    }
    let a = pair_with_bump(f, t)?;
    if a == 0.0 {
        return Ok((t, f.clone()));
    }
    Ok((t, f.combine(1.0, &bump_multiple(t, a, f)?, -1.0)?))
}

/// Part of `d/dt (<f, beta_t> beta_t)` applied to `T`, zero for `t <= 0`.
fn moving_bump_term(t: f64, f: &GridFunction, big_t: f64) -> Result<Option<GridFunction>> {
    if t <= 0.0 || big_t == 0.0 || !meets_bump(f, t) {
        return Ok(None);
    }
    let a = pair_with_bump(f, t)?;
    let b = pair_with_bump_dt(f, t)?;
    let bt = bump_multiple(t, 1.0, f)?;
    let dbt = dbeta_dt(t, f.spacing())?;
    Ok(Some(bt.combine(b * big_t, &dbt, a * big_t)?))
}

/// Differential of [`s_proj`] at `(t, f)` in direction `(T, F)`.
///
/// At `f = 0` this is `(T, F - <F, beta_t> beta_t)`, whose kernel contains
/// `(0, beta_t)`.
pub fn s_proj_diff(
    t: f64,
    f: &GridFunction,
    big_t: f64,
    big_f: &GridFunction,
) -> Result<(f64, GridFunction)> {
    let (_, mut g) = s_proj(t, big_f)?;
    if let Some(m) = moving_bump_term(t, f, big_t)? {
        g = g.combine(1.0, &m, -1.0)?;
    }
    Ok((big_t, g))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Rho;

impl ScMap for Rho {
    type Domain = (f64, GridFunction);
    type Codomain = (f64, GridFunction);

    fn id(&self) -> MapId {
        MapId::Rho
    }

    fn eval(&self, x: &Self::Domain) -> Result<Self::Codomain> {
        rho_eval(x.0, &x.1)
    }

    fn differential(&self, base: &Self::Domain, dir: &Self::Domain) -> Result<Self::Codomain> {
        let (t, f) = base;
        let (big_t, mut g) = rho_diff(*t, dir.0, &dir.1)?;
        if let Some(m) = moving_bump_term(*t, f, big_t)? {
            g = g.combine(1.0, &m, 1.0)?;
        }
        Ok((big_t, g))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SProj;

impl ScMap for SProj {
    type Domain = (f64, GridFunction);
    type Codomain = (f64, GridFunction);

    fn id(&self) -> MapId {
        MapId::SProj
    }

    fn eval(&self, x: &Self::Domain) -> Result<Self::Codomain> {
        s_proj(x.0, &x.1)
    }

    fn differential(&self, base: &Self::Domain, dir: &Self::Domain) -> Result<Self::Codomain> {
        s_proj_diff(base.0, &base.1, dir.0, &dir.1)
    }
}
