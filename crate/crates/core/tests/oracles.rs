//! Frozen values from the independent high-precision oracle in
//! `tests/oracles/oracle_values.py`.

#![allow(clippy::excessive_precision)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sclab::bump::{make_bump, pair_tail_with_bump, phi_gate, shift, SmoothStep};
use sclab::experiments::{run, ExperimentConfig};
use sclab::gallery::s_tilde_inv_tail_y;
use sclab::operator::{opnorm_dichotomy, OperatorHandle};
use sclab::scale::Level;
use sclab::scale::{AnalyticTailFunction, GridFunction, DEFAULT_SPACING};

const BUMP_C: f64 = 2.7411551457069723135;
const BUMP_L1: f64 = 1.2170559338512064711;
const SOBOLEV_SUM: f64 = 2.9035513614763267973;
const SOBOLEV_QUAD: f64 = 2.1384184241022180015;
const L2_DBETA: f64 = 1.7543115832803980989;
const PHI_GATE_HALF_LOG: f64 = -54.598150033144239078;
const OPNORM_UPPER_LOG: f64 = -1.1182493960703473438;

/// `(t, log <f, beta_t>, log pr_y, lower bound)` at `delta = 0.1`.
const TAIL: [(f64, f64, f64, f64); 5] = [
    (0.5, -4.5286482684251017065, 50.069501764719137372, 47.734044452238218414),
    (0.45, -5.1609759407468972053, 134.36790406120402587, 131.85257832595868315),
    (0.4, -6.0152230790784810153, 511.99760158926354492, 509.19003151508144063),
    (0.35, -7.2548483292265259854, 3502.3730751086094616, 3499.0450017497648526),
    (0.3, -9.270871970598506311, 66901.22421931563824, 66896.835805279544963),
];

/// `sup |f^{(k)}|` of the smooth step on the oracle's sample grid.
const STEP_SUP: [(usize, f64); 3] = [(1, 4.0), (2, 47.7310133876), (3, 1664.0)];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn beta_grid(h: f64) -> GridFunction {
    let b = make_bump();
    GridFunction::from_fn(-1.5, 1.5, h, |x| b.value(x)).unwrap()
}

#[test]
fn bump_normalization_constant() {
    assert!(rel(make_bump().normalization(), BUMP_C) < 1e-13);
}

#[test]
fn bump_integral() {
    let g = beta_grid(1.0 / 4096.0);
    let integral: f64 = g.values().iter().sum::<f64>() * g.spacing();
    assert!(rel(integral, BUMP_L1) < 1e-12, "{integral}");
}

#[test]
fn bump_unit_l2_norm() {
    assert!((beta_grid(DEFAULT_SPACING).l2_norm() - 1.0).abs() < 1e-12);
}

#[test]
fn weighted_sobolev_norms_of_bump() {
    let g = beta_grid(DEFAULT_SPACING);
    let sum = g.sobolev_norm(1, 0.1).unwrap();
    let quad = g.sobolev_norm_quadratic(1, 0.1).unwrap();
    assert!(rel(sum, SOBOLEV_SUM) < 1e-8, "{sum}");
    assert!(rel(quad, SOBOLEV_QUAD) < 1e-8, "{quad}");
    let d = g.derivative(1).unwrap().l2_norm();
    assert!(rel(d, L2_DBETA) < 1e-9, "{d}");
}

#[test]
fn sobolev_error_shrinks_with_spacing() {
    let err = |h: f64| rel(beta_grid(h).sobolev_norm(1, 0.1).unwrap(), SOBOLEV_SUM);
    let (coarse, fine) = (err(1.0 / 512.0), err(1.0 / 2048.0));
    // at least second order
    assert!(fine < coarse / 12.0, "{coarse:e} -> {fine:e}");
}

#[test]
fn gate_at_one_half() {
    let g = phi_gate(0.5);
    assert_eq!(g.sign(), 1);
    assert!((g.logmag() - PHI_GATE_HALF_LOG).abs() < 1e-12);
}

#[test]
fn tail_pairings_and_blowup() {
    let f = AnalyticTailFunction::new(0.1);
    for (t, log_pair, log_pr_y, bound) in TAIL {
        let p = pair_tail_with_bump(&f, t).unwrap();
        assert!((p.logmag() - log_pair).abs() < 1e-10, "t = {t}: {}", p.logmag());
        let y = s_tilde_inv_tail_y(t, &f).unwrap();
        assert!(rel(y.logmag(), log_pr_y) < 1e-12, "t = {t}: {}", y.logmag());
        let b = (1.0 / (t * t)).exp() - 0.2 * shift(t) - 2.0 / t - 4f64.ln();
        assert!(rel(b, bound) < 1e-13);
    }
}

#[test]
fn smooth_step_derivative_suprema() {
    let n = 2000;
    for (k, want) in STEP_SUP {
        let best = (1..n)
            .map(|j| SmoothStep.derivative(0.5 + j as f64 / (2 * n) as f64, k).abs())
            .fold(0.0, f64::max);
        assert!(rel(best, want) < 1e-9, "k = {k}: {best}");
    }
}

#[test]
fn dichotomy_upper_bound_at_04() {
    let rows = opnorm_dichotomy(&[0.4], 0.1, 8, 1).unwrap();
    assert!((rows[0].log_upper_bound - OPNORM_UPPER_LOG).abs() < 1e-12);
}

#[test]
fn inverse_blowup_report_matches_oracle() {
    let r = run("inverse-blowup", &ExperimentConfig::default()).unwrap();
    for (t, _, log_pr_y, _) in TAIL {
        let c = r.check(&format!("blowup_t{t}")).unwrap();
        assert!(rel(c.measured.unwrap(), log_pr_y) < 1e-12);
    }
}

fn random_matrix(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| r.sample::<f64, _>(StandardNormal))
}

fn random_spd(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let b = random_matrix(r, n);
    &b * b.transpose() + DMatrix::identity(n, n) * 0.5
}

#[test]
fn truncation_opnorm_against_brute_force() {
    let n = 5;
    let mut r = ChaCha8Rng::seed_from_u64(0xb007);
    for _ in 0..3 {
        let a = random_matrix(&mut r, n);
        let gd = random_spd(&mut r, n);
        let gc = random_spd(&mut r, n);
        let op = OperatorHandle::new(a.clone(), gd.clone(), gc.clone(), Level(0), Vec::new()).unwrap();
        let exact = op.truncation_opnorm().unwrap();
        let ratio = |v: &DVector<f64>| {
            let av = &a * v;
            ((av.transpose() * &gc * &av)[(0, 0)] / (v.transpose() * &gd * v)[(0, 0)]).sqrt()
        };
        let gauss = |r: &mut ChaCha8Rng| DVector::from_fn(n, |_, _| r.sample::<f64, _>(StandardNormal));
        // global random search, then random local refinement of the best point
        let mut arg = gauss(&mut r);
        let mut best = ratio(&arg);
        for _ in 0..20_000 {
            let v = gauss(&mut r);
            let q = ratio(&v);
            if q > best {
                (arg, best) = (v, q);
            }
        }
        let mut step = 0.1;
        for _ in 0..80_000 {
            let v = &arg + gauss(&mut r) * (step * arg.norm());
            let q = ratio(&v);
            if q > best {
                (arg, best) = (v, q);
            } else {
                step = (step * 0.999).max(1e-6);
            }
        }
        assert!(best <= exact * (1.0 + 1e-12), "{best} > {exact}");
        assert!(rel(best, exact) < 1e-3, "{best} vs {exact}");
    }
}
