use super::{MapId, ScMap};
use crate::bump::step_n;
use crate::error::{LabError, Result};
use crate::jet::K_MAX;
use crate::scale::SeqVector;

/// Number of basis vectors kept in sequence-model truncations.
pub const DEFAULT_TRUNCATION: usize = 32;

/// `s_t(sum x_n e_n) = sum f_n(t) x_n e_n`, the identity for `t <= 0`.
pub fn seq_diffeo(t: f64, x: &SeqVector) -> SeqVector {
    if t <= 0.0 {
        return x.clone();
    }
    x.map_diagonal(|n| step_n(n, t, 0))
}

pub fn seq_diffeo_inv(t: f64, y: &SeqVector) -> SeqVector {
    if t <= 0.0 {
        return y.clone();
    }
    y.map_diagonal(|n| 1.0 / step_n(n, t, 0))
}

/// `rho_k(t, x) = sum f_n^{(k)}(t) x_n e_n`.
///
/// For `k >= 1` and `t > 0` only `n = floor(1/t)` can survive; at `t = 1/n`
/// exactly every coefficient sits on a plateau and vanishes.
pub fn rho_k_eval(k: usize, t: f64, x: &SeqVector) -> Result<SeqVector> {
    if k > K_MAX {
        return Err(LabError::InvalidArgument(format!(
            "derivative order {k} beyond {K_MAX}"
        )));
    }
    if k == 0 {
        return Ok(seq_diffeo(t, x));
    }
    if t <= 0.0 {
        return Ok(SeqVector::zero());
    }
    Ok(x.map_diagonal(|n| step_n(n, t, k)))
}

/// `D rho_k(t, x)(T, X) = rho_k(t, X) + T rho_{k+1}(t, x)`.
pub fn rho_k_tangent(k: usize, t: f64, x: &SeqVector, big_t: f64, big_x: &SeqVector) -> Result<SeqVector> {
    let a = rho_k_eval(k, t, big_x)?;
    let b = rho_k_eval(k + 1, t, x)?;
    Ok(a.combine(1.0, &b, big_t))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SeqDiffeo;

impl ScMap for SeqDiffeo {
    type Domain = (f64, SeqVector);
    type Codomain = SeqVector;

    fn id(&self) -> MapId {
        MapId::SeqDiffeo
    }

    fn eval(&self, x: &Self::Domain) -> Result<Self::Codomain> {
        Ok(seq_diffeo(x.0, &x.1))
    }

    fn differential(&self, base: &Self::Domain, dir: &Self::Domain) -> Result<Self::Codomain> {
        rho_k_tangent(0, base.0, &base.1, dir.0, &dir.1)
    }
}

/// `(t, x) -> rho_k(t, x)` for a fixed order.
#[derive(Clone, Copy, Debug)]
pub struct RhoK {
    pub k: usize,
}

impl ScMap for RhoK {
    type Domain = (f64, SeqVector);
    type Codomain = SeqVector;

    fn id(&self) -> MapId {
        MapId::RhoK
    }

    fn eval(&self, x: &Self::Domain) -> Result<Self::Codomain> {
        rho_k_eval(self.k, x.0, &x.1)
    }

    fn differential(&self, base: &Self::Domain, dir: &Self::Domain) -> Result<Self::Codomain> {
        rho_k_tangent(self.k, base.0, &base.1, dir.0, &dir.1)
    }
}
