use rand::Rng;

use super::{Checks, ExperimentConfig, Provenance};
use crate::error::Result;
use crate::gallery::{rho_k_eval, rho_k_tangent, seq_diffeo, seq_diffeo_inv, RhoK};
use crate::operator::{finite_diff_differential, OperatorHandle, DEFAULT_STEPS};
use crate::sampling::{random_seq, rng};
use crate::scale::{Level, SeqVector, WeightSchedule};

const LEVELS: [u32; 3] = [0, 1, 2];

/// Truncation of `s_{1/n} - s_0` on `e_1, ..., e_N`.
fn jump_operator(n: usize, truncation: usize, level: Level) -> Result<OperatorHandle> {
    let basis: Vec<SeqVector> = (1..=truncation).map(SeqVector::basis).collect();
    let labels = (1..=truncation).map(|m| format!("e_{m}")).collect();
    let t = 1.0 / n as f64;
    OperatorHandle::from_images(
        &basis,
        |v| Ok(seq_diffeo(t, v).combine(1.0, v, -1.0)),
        level,
        &WeightSchedule::default(),
        labels,
    )
}

pub(super) fn seq_discontinuity(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let tol = cfg.exact_tol;
    for i in LEVELS {
        let worst = (2..=10usize)
            .map(|n| {
                let e = SeqVector::basis(n);
                let d = seq_diffeo(1.0 / n as f64, &e).combine(1.0, &e, -1.0);
                (d.norm(Level(i)) / e.norm(Level(i)) - 0.5).abs()
            })
            .fold(0.0, f64::max);
        c.record(
            format!("ratio_half_level_{i}"),
            format!("|ratio - 1/2| <= {tol:e}, n = 2..10"),
            Provenance::Stated,
            Ok((worst, worst <= tol)),
        );
    }

    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut sandwich = true;
    let mut points = Vec::new();
    let mut failure = None;
    for i in LEVELS {
        for n in 2..=10usize {
            match jump_operator(n, cfg.truncation.max(n), Level(i)).and_then(|op| {
                let mut v = vec![0.0; op.dim()];
                v[n - 1] = 1.0;
                Ok((op.truncation_opnorm()?, op.witness_lower_bound(&v)?))
            }) {
                Ok((norm, witness)) => {
                    lo = lo.min(norm);
                    hi = hi.max(norm);
                    sandwich &= witness <= norm + 1e-10;
                    if i == 0 {
                        points.push((n as f64, norm));
                    }
                }
                Err(e) => failure = Some(e),
            }
        }
    }
    let measured = |v: f64| match &failure {
        Some(e) => Err(crate::error::LabError::InvalidArgument(e.to_string())),
        None => Ok(v),
    };
    c.record(
        "opnorm_lower",
        "min truncation norm >= 1/2",
        Provenance::Stated,
        measured(lo).map(|v| (v, v >= 0.5 - tol)),
    );
    c.record(
        "opnorm_upper",
        "max truncation norm <= 1",
        Provenance::Derived,
        measured(hi).map(|v| (v, v <= 1.0 + tol)),
    );
    c.record(
        "witness_below_truncation",
        "witness <= truncation norm",
        Provenance::Elementary,
        Ok((f64::from(u8::from(sandwich)), sandwich)),
    );
    c.series("opnorm", "n", "truncation_norm_level0", points);

    let mut r = rng(cfg.seed);
    let mut worst = 0.0f64;
    for j in 0..200 {
        let t = -0.2 + j as f64 / 200.0;
        let x = random_seq(&mut r, cfg.truncation);
        let back = seq_diffeo_inv(t, &seq_diffeo(t, &x));
        for n in 1..=cfg.truncation {
            let d = (back.coeff(n) - x.coeff(n)).abs() / x.coeff(n).abs().max(f64::MIN_POSITIVE);
            worst = worst.max(d);
        }
    }
    c.record(
        "round_trip",
        "max relative error of s^{-1}(s x) <= 1e-14",
        Provenance::Elementary,
        Ok((worst, worst <= 1e-14)),
    );
    Ok(())
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

pub(super) fn seq_tail_bounds(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let n_max = cfg.truncation;
    let tol = cfg.exact_tol;
    let mut r = rng(cfg.seed);
    let x = random_seq(&mut r, n_max);

    let mut worst = 0.0f64;
    for n in 1..=n_max {
        let p = x.projection(n);
        for k in 0..=2u32 {
            for i in LEVELS {
                let lhs = p.norm(Level(i));
                let rhs = (n as f64).powi(-3 * k as i32) * p.norm(Level(i + k));
                worst = worst.max(rel_gap(lhs, rhs));
            }
        }
    }
    c.record(
        "projection_identity",
        format!("relative gap <= {tol:e}, n <= {n_max}, k <= 2, i <= 2"),
        Provenance::Stated,
        Ok((worst, worst <= tol)),
    );

    let mut slack = f64::INFINITY;
    let mut equality = 0.0f64;
    for trial in 0..8 {
        let x = if trial == 0 { x.clone() } else { random_seq(&mut r, n_max) };
        for big_n in 1..=n_max {
            let e = SeqVector::basis(big_n);
            for k in 0..=2u32 {
                let f = (big_n as f64).powi(-3 * k as i32);
                for i in LEVELS {
                    let lhs = x.tail_projection(big_n).norm(Level(i));
                    let rhs = f * x.norm(Level(i + k));
                    slack = slack.min((rhs * (1.0 + tol) + tol - lhs) / rhs.max(1.0));
                    if trial == 0 {
                        let le = e.tail_projection(big_n).norm(Level(i));
                        let re = f * e.norm(Level(i + k));
                        equality = equality.max(rel_gap(le, re));
                    }
                }
            }
        }
    }
    c.record(
        "tail_bound",
        "||(1-P_N) x||_i <= N^{-3k} ||x||_{i+k} (min slack >= 0)",
        Provenance::Stated,
        Ok((slack, slack >= 0.0)),
    );
    c.record(
        "tail_bound_equality",
        format!("equality at x = e_N to {tol:e}"),
        Provenance::Elementary,
        Ok((equality, equality <= tol)),
    );

    let mut worst_ratio = 0.0f64;
    for _ in 0..1000 {
        let t: f64 = r.random_range(-0.5..1.5);
        let len = r.random_range(1..=n_max);
        let x = random_seq(&mut r, len);
        let y = rho_k_eval(0, t, &x)?;
        for i in LEVELS {
            worst_ratio = worst_ratio.max(y.norm(Level(i)) / x.norm(Level(i)));
        }
    }
    c.record(
        "rho0_bounded",
        "||rho_0(t,x)||_i <= 2 ||x||_i over 1000 samples",
        Provenance::Stated,
        Ok((worst_ratio, worst_ratio <= 2.0)),
    );
    Ok(())
}

/// Base points inside `(1/(n+1), 1/n)` for `n = 1..=4`, five each.
pub fn tangent_base_points() -> Vec<f64> {
    let mut out = Vec::with_capacity(20);
    for n in 1..=4u32 {
        let (a, b) = (1.0 / f64::from(n + 1), 1.0 / f64::from(n));
        for j in 0..5 {
            out.push(a + (f64::from(j) + 0.5) / 5.0 * (b - a));
        }
    }
    out
}

pub(super) fn seq_tangent_check(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let weights = cfg.weights()?;
    let len = cfg.truncation.min(8);
    let mut r = rng(cfg.seed);
    for k in 0..=1usize {
        let m = RhoK { k };
        let mut worst = 0.0f64;
        let mut worst_at = 0.0;
        let mut err = None;
        for t in tangent_base_points() {
            let x = random_seq(&mut r, len);
            let big_x = random_seq(&mut r, len);
            let big_t: f64 = r.random_range(-1.0..1.0);
            match finite_diff_differential(
                &m,
                &(t, x),
                &(big_t, big_x),
                Level(0),
                &weights,
                &DEFAULT_STEPS,
                &format!("t = {t}"),
            ) {
                Ok(rep) => {
                    if rep.relative_mismatch > worst {
                        worst = rep.relative_mismatch;
                        worst_at = t;
                    }
                }
                Err(e) => err = Some(e),
            }
        }
        let measured = match err {
            Some(e) => Err(e),
            None => Ok((worst, worst <= cfg.fd_tol)),
        };
        c.noted(
            format!("tangent_rho_{k}"),
            format!("relative mismatch <= {:e} at 20 base points", cfg.fd_tol),
            Provenance::Stated,
            measured,
            format!("worst at t = {worst_at:.6}"),
        );
    }

    let x = random_seq(&mut r, len);
    let big_x = random_seq(&mut r, len);
    let d0 = rho_k_tangent(0, 0.0, &x, 0.7, &big_x)?;
    let gap0 = d0.combine(1.0, &big_x, -1.0).norm(Level(0));
    c.record(
        "tangent_at_zero_k0",
        "D rho_0(0,x)(T,X) = X",
        Provenance::Stated,
        Ok((gap0, gap0 == 0.0)),
    );
    let d1 = rho_k_tangent(1, 0.0, &x, 0.7, &big_x)?;
    let n1 = d1.norm(Level(0));
    c.record(
        "tangent_at_zero_k1",
        "D rho_1(0,x)(T,X) = 0",
        Provenance::Stated,
        Ok((n1, n1 == 0.0)),
    );
    Ok(())
}
