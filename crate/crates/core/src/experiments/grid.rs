use rand::Rng;
use rand_distr::StandardNormal;

use super::{Checks, ExperimentConfig, Provenance};
use crate::bump::{
    log_limit_probe, pair_with_bump, shift, shifted_bump, MAX_GRID_SHIFT,
};
use crate::error::Result;
use crate::gallery::{
    rho_diff, s_proj, s_proj_diff, s_tilde_inv_tail_y, BranchingPhi, HFamily, SProj,
};
use crate::operator::{finite_diff_differential, OperatorHandle, DEFAULT_STEPS};
use crate::sampling::{random_bump_mixture, rng};
use crate::scale::{AnalyticTailFunction, GridFunction, GridSpec, Level, ScaleVector};

fn spec(cfg: &ExperimentConfig) -> GridSpec {
    GridSpec {
        spacing: cfg.spacing,
        margin: 0.0,
    }
}

pub(super) fn retract_image_gap(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let ts = cfg.t_grid_or(&[0.3, 0.4, 0.5]);
    let mut r = rng(cfg.seed);
    for &t in &ts {
        let orth = (|| -> Result<f64> {
            let mut worst = 0.0f64;
            for _ in 0..100 {
                let f = random_bump_mixture(&mut r, -shift(t), cfg.spacing)?;
                let (_, g) = s_proj(t, &f)?;
                worst = worst.max(pair_with_bump(&g, t)?.abs() / f.l2_norm());
            }
            Ok(worst)
        })();
        c.record(
            format!("orthogonality_t{t}"),
            format!("|<pr_2 s(t,f), beta_t>| / ||f|| <= {:e}", cfg.orth_tol),
            Provenance::Stated,
            orth.map(|w| (w, w <= cfg.orth_tol)),
        );

        let witness = shifted_bump(t, 0, spec(cfg)).and_then(|b| {
            let tb = b.scale(t);
            tb.l2_inner(&b)
        });
        c.record(
            format!("retract_witness_t{t}"),
            "<t beta_t, beta_t> = t +- 1e-6",
            Provenance::Stated,
            witness.map(|v| (v, (v - t).abs() <= 1e-6)),
        );

        let kernel = shifted_bump(t, 0, spec(cfg)).and_then(|b| {
            let zero = GridFunction::zeros_like(&b);
            let (dt, g) = s_proj_diff(t, &zero, 0.0, &b)?;
            Ok(dt.abs().max(g.l2_norm()))
        });
        c.record(
            format!("kernel_witness_t{t}"),
            format!("||ds(t,0)(0, beta_t)|| <= {:e}", cfg.orth_tol),
            Provenance::Stated,
            kernel.map(|v| (v, v <= cfg.orth_tol)),
        );
    }

    let weights = cfg.weights()?;
    let ds = identity_fd(&SProj, cfg, 1);
    c.record(
        "ds00_identity",
        format!("relative mismatch of ds(0,0) vs id <= {:e}", cfg.fd_tol),
        Provenance::Stated,
        ds.map(|v| (v, v <= cfg.fd_tol)),
    );

    // numerical rank of the truncated drho(t,0)
    for t in [0.4, 0.0, -0.3] {
        let rank = (|| -> Result<usize> {
            let basis = span_at(0.4, cfg)?;
            let op = OperatorHandle::from_images(
                &basis,
                |v| rho_diff(t, v.0, &v.1),
                Level(0),
                &weights,
                Vec::new(),
            )?;
            op.numerical_rank()
        })();
        let want = if t > 0.0 { 2 } else { 1 };
        c.record(
            format!("drho_rank_t{t}"),
            format!("numerical rank = {want}"),
            Provenance::Elementary,
            rank.map(|k| (k as f64, k == want)),
        );
    }
    Ok(())
}

/// `{(1,0), (0,beta_t), (0,beta_t'), (0,g1), (0,g2)}`.
fn span_at(t: f64, cfg: &ExperimentConfig) -> Result<Vec<(f64, GridFunction)>> {
    let bt = shifted_bump(t, 0, spec(cfg))?;
    let dbt = shifted_bump(t, 1, spec(cfg))?;
    let mut r = rng(cfg.seed ^ 0x5a5a);
    let g1 = random_bump_mixture(&mut r, -shift(t), cfg.spacing)?;
    let g2 = random_bump_mixture(&mut r, -shift(t), cfg.spacing)?;
    Ok(vec![
        (1.0, GridFunction::zeros_like(&bt)),
        (0.0, bt),
        (0.0, dbt),
        (0.0, g1),
        (0.0, g2),
    ])
}

fn random_direction(r: &mut impl Rng, cfg: &ExperimentConfig) -> Result<(f64, GridFunction)> {
    let big_t: f64 = r.sample(StandardNormal);
    Ok((big_t, random_bump_mixture(r, 0.0, cfg.spacing)?))
}

/// Worst relative mismatch between difference quotients at the origin and
/// the identity, over `count` random directions, at level 0.
fn identity_fd<M>(m: &M, cfg: &ExperimentConfig, count: usize) -> Result<f64>
where
    M: crate::gallery::ScMap<Domain = (f64, GridFunction)>,
    M::Codomain: IntoPair,
{
    let weights = cfg.weights()?;
    let mut r = rng(cfg.seed.wrapping_add(1));
    let mut worst = 0.0f64;
    for j in 0..count {
        let dir = random_direction(&mut r, cfg)?;
        let zero = (0.0, GridFunction::zeros_like(&dir.1));
        let rep = finite_diff_differential(
            m,
            &zero,
            &dir,
            Level(0),
            &weights,
            &DEFAULT_STEPS,
            &format!("origin, direction {j}"),
        )?;
        let analytic = m.differential(&zero, &dir)?.into_pair(dir.0);
        let gap = analytic
            .combine(1.0, &dir, -1.0)?
            .level_norm(Level(0), &weights)?
            / dir.level_norm(Level(0), &weights)?;
        worst = worst.max(rep.relative_mismatch).max(gap);
    }
    Ok(worst)
}

/// Lifts a codomain value into `R x L2` for comparison with a direction.
trait IntoPair {
    fn into_pair(self, t: f64) -> (f64, GridFunction);
}

impl IntoPair for (f64, GridFunction) {
    fn into_pair(self, _t: f64) -> (f64, GridFunction) {
        self
    }
}

impl IntoPair for GridFunction {
    fn into_pair(self, t: f64) -> (f64, GridFunction) {
        (t, self)
    }
}

pub(super) fn identity_differential(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let s = identity_fd(&SProj, cfg, 10);
    c.record(
        "ds00_identity",
        format!("s: worst relative mismatch over 10 directions <= {:e}", cfg.fd_tol),
        Provenance::Stated,
        s.map(|v| (v, v <= cfg.fd_tol)),
    );
    let h = identity_fd(&HFamily::<BranchingPhi>::default(), cfg, 10);
    c.record(
        "dh00_identity",
        format!("h: worst relative mismatch over 10 directions <= {:e}", cfg.fd_tol),
        Provenance::Stated,
        h.map(|v| (v, v <= cfg.fd_tol)),
    );
    Ok(())
}

/// `e^{1/t^2} - 2 delta e^{1/t} - 2/t - log 4`.
pub fn blowup_lower_bound(t: f64, delta: f64) -> f64 {
    (1.0 / (t * t)).exp() - 2.0 * delta * shift(t) - 2.0 / t - 4f64.ln()
}

pub(super) fn inverse_blowup(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let ts = cfg.t_grid_or(&[0.5, 0.45, 0.4, 0.35, 0.3]);
    let delta = cfg.weights()?.delta(Level(1))?;
    let tail = AnalyticTailFunction::new(delta);
    let mut logs = Vec::with_capacity(ts.len());
    for &t in &ts {
        let y = s_tilde_inv_tail_y(t, &tail);
        let bound = blowup_lower_bound(t, delta);
        let measured = y.map(|v| {
            let l = v.logmag();
            (l, v.sign() > 0 && l.is_finite() && l >= bound)
        });
        if let Ok((l, _)) = measured {
            logs.push((t, l));
        }
        c.noted(
            format!("blowup_t{t}"),
            format!("log pr_y >= {bound:.12}"),
            Provenance::Derived,
            measured,
            format!("delta = {delta}, log-domain only"),
        );
    }
    let min_step = logs
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::INFINITY, f64::min);
    let complete = logs.len() == ts.len() && ts.len() >= 2;
    c.record(
        "blowup_growth",
        "increase per step >= log 10",
        Provenance::Derived,
        Ok((min_step, complete && min_step >= 10f64.ln())),
    );
    c.series("log_pr_y", "t", "log_pr_y", logs);
    Ok(())
}

pub(super) fn g0_smoothness(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let ts = cfg.t_grid_or(&[0.5, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15]);
    for delta in [0.0, 0.2] {
        let mut decreasing = true;
        let mut worst_end = f64::NEG_INFINITY;
        for l in 0..=3 {
            for m in 0..=3 {
                for n in 0..=3 {
                    let v: Vec<f64> = log_limit_probe(l, m, n, delta, &ts)
                        .iter()
                        .map(|x| x.logmag())
                        .collect();
                    decreasing &= v.windows(2).all(|w| w[1] < w[0]);
                    worst_end = worst_end.max(*v.last().unwrap_or(&f64::INFINITY));
                    if (l, m, n) == (3, 3, 3) {
                        c.series(
                            &format!("probe333_delta{delta}"),
                            "t",
                            "log_probe",
                            ts.iter().copied().zip(v.iter().copied()).collect(),
                        );
                    }
                }
            }
        }
        c.record(
            format!("strictly_decreasing_delta{delta}"),
            "log probe strictly decreasing as t decreases, (l,m,n) in {0..3}^3",
            Provenance::Stated,
            Ok((f64::from(u8::from(decreasing)), decreasing)),
        );
        c.record(
            format!("below_minus_1000_delta{delta}"),
            format!("max log probe at t = {} < -1000", ts.last().copied().unwrap_or(f64::NAN)),
            Provenance::Derived,
            Ok((worst_end, worst_end < -1000.0)),
        );
    }
    Ok(())
}

pub(super) fn noncompact_zeroset(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    for (n, m) in [(2u32, 5u32), (3, 7)] {
        let d = (|| -> Result<f64> {
            let (tn, tm) = (1.0 / f64::from(n), 1.0 / f64::from(m));
            if shift(tm) > MAX_GRID_SHIFT {
                return Err(crate::error::LabError::Unrepresentable(format!("t = {tm}")));
            }
            let a = shifted_bump(tn, 0, spec(cfg))?;
            let b = shifted_bump(tm, 0, spec(cfg))?;
            Ok(a.combine(1.0, &b, -1.0)?.l2_norm())
        })();
        c.noted(
            format!("separation_{n}_{m}"),
            "||beta_{1/n} - beta_{1/m}||_{L2} = sqrt(2) +- 1e-8",
            Provenance::Derived,
            d.map(|v| (v, (v - std::f64::consts::SQRT_2).abs() <= 1e-8)),
            "the squared norm is 2; the distance itself is sqrt(2)",
        );
    }
    Ok(())
}
