use serde::{Deserialize, Serialize};

use super::PhiPoly;
use crate::bump::{bump_support, shifted_bump};
use crate::error::Result;
use crate::scale::{GridFunction, GridSpec};

/// `orth + coeff(phi(t)) beta_t`, with the `beta_t` coefficient kept
/// symbolic until it is representable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFunction {
    pub orth: GridFunction,
    pub t: f64,
    pub coeff: PhiPoly,
}

impl SplitFunction {
    pub fn plain(f: GridFunction, t: f64) -> Self {
        SplitFunction {
            orth: f,
            t,
            coeff: PhiPoly::zero(),
        }
    }

    /// The grid function, skipping `beta_t` when its coefficient vanishes.
    pub fn materialize(&self) -> Result<GridFunction> {
        if self.coeff.is_zero() {
            return Ok(self.orth.clone());
        }
        let c = self.coeff.to_f64(self.t)?;
        if c == 0.0 {
            return Ok(self.orth.clone());
        }
        let bt = shifted_bump(
            self.t,
            0,
            GridSpec {
                spacing: self.orth.spacing(),
                margin: 0.0,
            },
        )?;
        self.orth.combine(1.0, &bt, c)
    }
}

/// `a beta_t` on the spacing of `like`, or zero on `like`'s window when
/// `a = 0` so no far-away window is built.
pub fn bump_multiple(t: f64, a: f64, like: &GridFunction) -> Result<GridFunction> {
    if a == 0.0 {
        return Ok(GridFunction::zeros_like(like));
    }
    Ok(shifted_bump(
        t,
        0,
        GridSpec {
            spacing: like.spacing(),
            margin: 0.0,
        },
    )?
    .scale(a))
}

/// Whether `f`'s window meets the support of `beta_t`.
pub fn meets_bump(f: &GridFunction, t: f64) -> bool {
    let (lo, hi) = bump_support(t);
    let (a, b) = f.window();
    b > lo && a < hi
}
