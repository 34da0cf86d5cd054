use serde::{Deserialize, Serialize};

use super::retract::{dbeta_dt, pair_with_bump_dt};
use super::split::{bump_multiple, SplitFunction};
use super::{MapId, PhiPoly, ScMap};
use crate::bump::{pair_with_bump, phi_gate, shifted_bump};
use crate::error::{LabError, Result};
use crate::scale::{GridFunction, GridSpec, LogScalar};

/// A family `phi_t` acting on the `beta_t` coefficient of `h_t`.
///
/// Arguments and results are gate polynomials so fixed points such as
/// `x = phi(t)` are checked without rounding.
pub trait PhiFamily {
    fn value(&self, t: f64, x: &PhiPoly) -> PhiPoly;

    /// `phi_t'(x)`.
    fn dx(&self, t: f64, x: &PhiPoly) -> PhiPoly;

    /// `(d/dt phi_t)(x)`.
    fn dt(&self, t: f64, x: &PhiPoly) -> PhiPoly;

    /// `x - phi_t(x)`.
    fn residual(&self, t: f64, x: &PhiPoly) -> PhiPoly {
        x - &self.value(t, x)
    }

    /// Solution of `phi_t'(x) = 1` when `phi_t'` is affine in `x`.
    fn failure_locus(&self, t: f64) -> Option<PhiPoly> {
        let d0 = &self.dx(t, &PhiPoly::zero()) - &PhiPoly::constant(1.0);
        let slope = &self.dx(t, &PhiPoly::constant(1.0)) - &self.dx(t, &PhiPoly::zero());
        let s = slope.coeff(0);
        if s == 0.0 || slope.terms().any(|(p, _)| p != 0) {
            return None;
        }
        let x = d0.scale(-1.0 / s);
        (self.dx(t, &x) == PhiPoly::constant(1.0)).then_some(x)
    }
}

/// `phi_t(x) = x (1 - e^{-e^{1/t^2}} + x)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BranchingPhi;

impl PhiFamily for BranchingPhi {
    fn value(&self, _t: f64, x: &PhiPoly) -> PhiPoly {
        &(x + &(x * x)) - &x.shift(1)
    }

    /// `x phi - x^2`, without the cancelling `x - x`.
    fn residual(&self, _t: f64, x: &PhiPoly) -> PhiPoly {
        &x.shift(1) - &(x * x)
    }

    fn dx(&self, _t: f64, x: &PhiPoly) -> PhiPoly {
        &(&PhiPoly::constant(1.0) + &x.scale(2.0)) - &PhiPoly::gate()
    }

    /// `-(2/t^3) e^{1/t^2} phi(t) x`, zero for `t <= 0`.
    fn dt(&self, t: f64, x: &PhiPoly) -> PhiPoly {
        if t <= 0.0 {
            return PhiPoly::zero();
        }
        let c = -2.0 / (t * t * t) * (1.0 / (t * t)).exp();
        x.scale(c).shift(1)
    }
}

/// `phi_t(x) = slope x`, for exploring other families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearPhi {
    pub slope: f64,
}

impl PhiFamily for LinearPhi {
    fn value(&self, _t: f64, x: &PhiPoly) -> PhiPoly {
        x.scale(self.slope)
    }

    fn dx(&self, _t: f64, _x: &PhiPoly) -> PhiPoly {
        PhiPoly::constant(self.slope)
    }

    fn dt(&self, _t: f64, _x: &PhiPoly) -> PhiPoly {
        PhiPoly::zero()
    }
}

/// `x - phi_t(x)`; its zeros are the `beta_t` coefficients of `h_t^{-1}(0)`.
pub fn fixed_point_residual(phi: &impl PhiFamily, t: f64, x: &PhiPoly) -> PhiPoly {
    phi.residual(t, x)
}

/// `h_t(f) = f - phi_t(<f, beta_t>) beta_t` for `t > 0`, `f` otherwise.
pub fn h_eval(phi: &impl PhiFamily, t: f64, f: &SplitFunction) -> SplitFunction {
    if t <= 0.0 {
        return f.clone();
    }
    SplitFunction {
        orth: f.orth.clone(),
        t,
        coeff: fixed_point_residual(phi, t, &f.coeff),
    }
}

/// Differential of `h` at `(t, f)` in direction `(T, F)`.
pub fn h_diff(
    phi: &impl PhiFamily,
    t: f64,
    f: &GridFunction,
    big_t: f64,
    big_f: &GridFunction,
) -> Result<GridFunction> {
    if t <= 0.0 {
        return Ok(big_f.clone());
    }
    let a = PhiPoly::constant(pair_with_bump(f, t)?);
    let big_a = pair_with_bump(big_f, t)?;
    let slope = phi.dx(t, &a).to_f64(t)?;
    let mut bt_coeff = slope * big_a;
    let mut dbt_coeff = 0.0;
    if big_t != 0.0 {
        let b = pair_with_bump_dt(f, t)?;
        bt_coeff += big_t * (phi.dt(t, &a).to_f64(t)? + slope * b);
        dbt_coeff = big_t * phi.value(t, &a).to_f64(t)?;
    }
    let mut g = big_f.combine(1.0, &bump_multiple(t, bt_coeff, big_f)?, -1.0)?;
    if dbt_coeff != 0.0 {
        g = g.combine(1.0, &dbeta_dt(t, big_f.spacing())?, -dbt_coeff)?;
    }
    Ok(g)
}

/// `(t, c)` with `z(t) = c beta_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub t: f64,
    pub coeff: LogScalar,
}

/// The nonzero branch `z(t) = e^{-e^{1/t^2}} beta_t`, zero for `t <= 0`.
pub fn h_zero_branch(t: f64) -> BranchPoint {
    BranchPoint {
        t,
        coeff: phi_gate(t),
    }
}

impl BranchPoint {
    pub fn poly(&self) -> PhiPoly {
        if self.t > 0.0 {
            PhiPoly::gate()
        } else {
            PhiPoly::zero()
        }
    }
}

/// Roots of `x - phi_t(x)` located by sign changes over `x = +-c phi(t)`
/// and `x = +-c` for log-spaced `c`, plus `x = 0`.
pub fn sampled_root_count(phi: &impl PhiFamily, t: f64) -> Result<usize> {
    let mut samples: Vec<PhiPoly> = vec![PhiPoly::zero()];
    for j in -40..=40 {
        let c = 10f64.powf(j as f64 / 4.0);
        for s in [-1.0, 1.0] {
            samples.push(PhiPoly::monomial(s * c, 1));
            samples.push(PhiPoly::constant(s * c * 1e-3));
        }
    }
    let mut pts = samples
        .iter()
        .map(|x| {
            let r = fixed_point_residual(phi, t, x).value(t)?;
            Ok((x.value(t)?, r.sign()))
        })
        .collect::<Result<Vec<_>>>()?;
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut roots = 0;
    let mut last = 0i8;
    let mut seen_zero = false;
    for (_, s) in pts {
        if s == 0 {
            roots += 1;
            seen_zero = true;
            continue;
        }
        if last != 0 && s != last && !seen_zero {
            roots += 1;
        }
        last = s;
        seen_zero = false;
    }
    Ok(roots)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransversalityData {
    pub t: f64,
    /// `x_t` with `phi_t'(x_t) = 1`.
    pub failure_poly: PhiPoly,
    pub failure_coeff: LogScalar,
    /// `x_t` is exactly half the branch coefficient.
    pub midpoint_identity: bool,
    /// `(1/t^3) e^{1/t^2 - 2 e^{1/t^2}}` from the closed form.
    pub witness_value: LogScalar,
    /// `(d/dt phi_t)(x_t) <beta_t, beta_t>`.
    pub witness_route2: LogScalar,
    pub logmag_gap: f64,
}

pub fn h_transversality_data(phi: &impl PhiFamily, t: f64) -> Result<TransversalityData> {
    if t <= 0.0 {
        return Err(LabError::InvalidArgument(format!(
            "no transversality failure for t = {t} <= 0"
        )));
    }
    let x = phi.failure_locus(t).ok_or_else(|| {
        LabError::InvalidArgument("family has no affine failure locus".into())
    })?;
    let failure_coeff = x.value(t)?;
    let half = h_zero_branch(t).poly().scale(0.5);
    let half_log = h_zero_branch(t).coeff * LogScalar::from_f64(0.5);
    let midpoint_identity = x == half && failure_coeff == half_log;
    let witness_value = LogScalar::from_log(
        -3.0 * t.ln() + 1.0 / (t * t) - 2.0 * (1.0 / (t * t)).exp(),
    );
    let bt = shifted_bump(t, 0, GridSpec::default())?;
    let norm_sq = bt.l2_inner(&bt)?;
    let witness_route2 = phi.dt(t, &x).value(t)? * LogScalar::from_f64(norm_sq);
    let logmag_gap = (witness_value.logmag() - witness_route2.logmag()).abs();
    Ok(TransversalityData {
        t,
        failure_poly: x,
        failure_coeff,
        midpoint_identity,
        witness_value,
        witness_route2,
        logmag_gap,
    })
}

/// `h` on `R x L2` with grid outputs, for difference checks.
#[derive(Clone, Copy, Debug, Default)]
pub struct HFamily<P: PhiFamily = BranchingPhi> {
    pub phi: P,
}

impl<P: PhiFamily> ScMap for HFamily<P> {
    type Domain = (f64, GridFunction);
    type Codomain = GridFunction;

    fn id(&self) -> MapId {
        MapId::HFamily
    }

    fn eval(&self, x: &Self::Domain) -> Result<Self::Codomain> {
        let (t, f) = x;
        h_eval(&self.phi, *t, &SplitFunction::decompose(f, *t)?).materialize()
    }

    fn differential(&self, base: &Self::Domain, dir: &Self::Domain) -> Result<Self::Codomain> {
        h_diff(&self.phi, base.0, &base.1, dir.0, &dir.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::shift;
    use crate::sampling::{random_bump_mixture, rng};
    use crate::scale::DEFAULT_SPACING;

    #[test]
    fn zero_and_branch_are_fixed_points() {
        for t in [0.3, 0.4, 0.5, 0.6] {
            assert!(fixed_point_residual(&BranchingPhi, t, &PhiPoly::zero()).is_zero());
            let z = h_zero_branch(t).poly();
            assert!(fixed_point_residual(&BranchingPhi, t, &z).is_zero());
        }
    }

    #[test]
    fn branch_vanishes_for_nonpositive_t() {
        assert!(h_zero_branch(-0.5).coeff.is_zero());
        assert!(h_zero_branch(0.0).coeff.is_zero());
        assert_eq!(h_zero_branch(0.7).coeff.sign(), 1);
    }

    #[test]
    fn exactly_two_roots() {
        for t in [0.3, 0.5, 0.9] {
            assert_eq!(sampled_root_count(&BranchingPhi, t).unwrap(), 2);
        }
        assert_eq!(sampled_root_count(&LinearPhi { slope: 2.0 }, 0.5).unwrap(), 1);
    }

    #[test]
    fn transversality_at_half() {
        let d = h_transversality_data(&BranchingPhi, 0.5).unwrap();
        assert!(d.midpoint_identity);
        assert!((d.failure_coeff.logmag() - (-(4f64.exp()) + 0.5f64.ln())).abs() < 1e-12);
        assert!(d.logmag_gap <= 1e-12 * d.witness_value.logmag().abs());
        assert!(h_transversality_data(&BranchingPhi, -0.1).is_err());
    }

    #[test]
    fn h_is_identity_off_the_positive_axis() {
        let f = random_bump_mixture(&mut rng(4), 0.0, DEFAULT_SPACING).unwrap();
        let g = HFamily::<BranchingPhi>::default()
            .eval(&(-1.0, f.clone()))
            .unwrap();
        assert_eq!(g, f);
        let zero = GridFunction::zeros(-1.0, 1.0, DEFAULT_SPACING).unwrap();
        let g = HFamily::<BranchingPhi>::default().eval(&(0.5, zero)).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn differential_matches_difference_quotient() {
        let t = 0.7;
        let f = random_bump_mixture(&mut rng(8), -shift(t), DEFAULT_SPACING).unwrap();
        let dir = random_bump_mixture(&mut rng(9), -shift(t), DEFAULT_SPACING).unwrap();
        let m = HFamily::<BranchingPhi>::default();
        let h = 1e-4;
        let p = m.eval(&(t + h * 0.5, f.combine(1.0, &dir, h).unwrap())).unwrap();
        let q = m.eval(&(t - h * 0.5, f.combine(1.0, &dir, -h).unwrap())).unwrap();
        let fd = p.combine(0.5 / h, &q, -0.5 / h).unwrap();
        let an = m.differential(&(t, f), &(0.5, dir)).unwrap();
        let err = fd.combine(1.0, &an, -1.0).unwrap().l2_norm();
        assert!(err < 1e-5 * an.l2_norm(), "err = {err}");
    }
}
