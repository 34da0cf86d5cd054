use super::{Checks, ExperimentConfig, Provenance};
use crate::error::Result;
use crate::gallery::{
    fixed_point_residual, h_transversality_data, h_zero_branch, sampled_root_count, BranchingPhi,
    PhiPoly,
};
use crate::operator;
use crate::scale::Level;

const BRANCH_TS: [f64; 4] = [0.3, 0.4, 0.5, 0.6];

/// `log |x - phi_t(x)| - log |x|`, or `-inf` for an exact zero.
fn log_relative_residual(t: f64, x: &PhiPoly) -> Result<f64> {
    let r = fixed_point_residual(&BranchingPhi, t, x).value(t)?;
    if r.is_zero() {
        return Ok(f64::NEG_INFINITY);
    }
    let scale = x.value(t)?;
    Ok(r.logmag() - if scale.is_zero() { 0.0 } else { scale.logmag() })
}

pub(super) fn branching_zeroset(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let ts = cfg.t_grid_or(&BRANCH_TS);
    let limit = cfg.exact_tol.ln();
    for &t in &ts {
        for (label, x) in [("zero", PhiPoly::zero()), ("gate", PhiPoly::gate())] {
            let res = log_relative_residual(t, &x);
            c.noted(
                format!("fixed_point_{label}_t{t}"),
                format!("log-relative residual <= log {:e}", cfg.exact_tol),
                Provenance::Stated,
                res.map(|v| (v, v <= limit)),
                "measured is -inf (reported empty) for an exact zero",
            );
        }
        let n = sampled_root_count(&BranchingPhi, t);
        c.record(
            format!("root_count_t{t}"),
            "exactly two sampled roots",
            Provenance::Stated,
            n.map(|k| (k as f64, k == 2)),
        );
    }
    for t in [-0.5, 0.0] {
        let z = h_zero_branch(t);
        let vanishes = z.coeff.is_zero() && z.poly().is_zero();
        c.record(
            format!("branch_vanishes_t{t}"),
            "z(t) = 0 for t <= 0",
            Provenance::Stated,
            Ok((z.coeff.to_f64(), vanishes)),
        );
    }
    Ok(())
}

pub(super) fn transversality_witness(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let ts = cfg.t_grid_or(&BRANCH_TS);
    let mut points = Vec::new();
    for &t in &ts {
        let d = h_transversality_data(&BranchingPhi, t);
        let midpoint = d.as_ref().map(|d| d.midpoint_identity);
        c.record(
            format!("failure_is_half_branch_t{t}"),
            "x_t = z(t)/2 exactly",
            Provenance::Stated,
            match midpoint {
                Ok(m) => Ok((f64::from(u8::from(m)), m)),
                Err(e) => Err(crate::error::LabError::InvalidArgument(e.to_string())),
            },
        );
        let gap = d.map(|d| {
            let l = d.witness_value.logmag();
            points.push((t, l));
            let allowed = cfg.exact_tol * l.abs().max(1.0);
            (d.logmag_gap, d.logmag_gap <= allowed)
        });
        c.noted(
            format!("witness_routes_t{t}"),
            format!("|logmag gap| <= {:e} max(1, |L|)", cfg.exact_tol),
            Provenance::Stated,
            gap,
            "tolerance is relative to the log-magnitude L",
        );
    }
    c.series("witness", "t", "log_witness", points);
    Ok(())
}

pub(super) fn opnorm_dichotomy(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let ts = cfg.t_grid_or(&[0.5, 0.45, 0.4, 0.35, 0.3, 0.25]);
    let delta = cfg.weights()?.delta(Level(1))?;
    let rows = match operator::opnorm_dichotomy(&ts, delta, cfg.samples, cfg.seed) {
        Ok(r) => r,
        Err(e) => {
            c.record("dichotomy_table", "table computed", Provenance::Elementary, Err(e));
            return Ok(());
        }
    };
    for row in &rows {
        if [0.3, 0.35, 0.4].contains(&row.t) {
            c.record(
                format!("l2_witness_t{}", row.t),
                "L2 witness lower bound >= 0.999",
                Provenance::Derived,
                Ok((row.l2_witness, row.l2_witness >= 0.999)),
            );
        }
        let upper = row.log_upper_bound.exp();
        c.noted(
            format!("h1_sampled_below_upper_t{}", row.t),
            "sampled H^{1,delta} ratio <= e^{-delta(e^{1/t}-1)} |phi_t'(0)|",
            Provenance::Stated,
            Ok((row.sampled_h1_lower, row.sampled_h1_lower <= upper)),
            format!("upper bound {upper:.6e}"),
        );
    }
    let decreasing = rows.windows(2).all(|w| w[1].log_upper_bound < w[0].log_upper_bound);
    let last = rows.last().map_or(f64::NAN, |r| r.log_upper_bound);
    c.noted(
        "upper_bound_decreasing",
        "log upper bound strictly decreasing as t decreases",
        Provenance::Stated,
        Ok((last, decreasing && rows.len() >= 2)),
        "measured is the log upper bound at the last t",
    );
    c.series(
        "upper",
        "t",
        "log_upper_bound",
        rows.iter().map(|r| (r.t, r.log_upper_bound)).collect(),
    );
    c.series(
        "sampled",
        "t",
        "sampled_h1_lower",
        rows.iter().map(|r| (r.t, r.sampled_h1_lower)).collect(),
    );
    c.series(
        "l2_witness",
        "t",
        "l2_witness",
        rows.iter().map(|r| (r.t, r.l2_witness)).collect(),
    );
    Ok(())
}
