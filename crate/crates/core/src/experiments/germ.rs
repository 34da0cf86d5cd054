use super::{Checks, ExperimentConfig, Provenance};
use crate::error::Result;
use crate::germs::{
    branching_pseudo_germ, certify, germ_continuity_report, openness_probe, quadratic_pairing_germ,
    replay, s_proj_pseudo_germ, scaled_pairing_germ, BasicGerm,
};
use crate::scale::{GridFunction, Level};

pub const RADII: [f64; 4] = [1.0, 0.5, 0.25, 0.125];
pub const EPSILONS: [f64; 3] = [0.5, 0.25, 0.1];
/// Probe ceiling at the smallest radius.
pub const SMALL_PROBE: f64 = 0.05;

fn instance_germs(cfg: &ExperimentConfig) -> [BasicGerm<GridFunction>; 2] {
    [
        scaled_pairing_germ(cfg.germ_spacing),
        quadratic_pairing_germ(cfg.germ_spacing),
    ]
}

pub(super) fn germ_continuity(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let weights = cfg.weights()?;
    let level = Level(cfg.germ_level);
    for g in instance_germs(cfg) {
        let id = g.id.clone();
        let rep = germ_continuity_report(&g, level, &weights, &RADII, &EPSILONS, cfg.samples, cfg.seed);
        let rep = match rep {
            Ok(r) => r,
            Err(e) => {
                c.record(format!("{id}: report"), "report computed", Provenance::Elementary, Err(e));
                continue;
            }
        };
        let certified = rep.certificate.as_ref().map_or(0, |k| k.pairs.len());
        c.record(
            format!("{id}: certified"),
            "radius found for every epsilon in {0.5, 0.25, 0.1}",
            Provenance::Stated,
            Ok((certified as f64, certified == EPSILONS.len())),
        );
        if let Some(cert) = &rep.certificate {
            let rows = replay(cert, &g, &weights);
            c.record(
                format!("{id}: replay"),
                "every certified ratio replays bit-exactly",
                Provenance::Elementary,
                rows.map(|r| {
                    let bad = r.iter().filter(|x| !(x.exact && x.within)).count();
                    (bad as f64, bad == 0)
                }),
            );
            for row in &rep.two_eps {
                c.noted(
                    format!("{id}: probe_at_delta_eps{}", row.epsilon),
                    format!("sup ||d_W B|| <= 2 eps + 1e-8 = {}", 2.0 * row.epsilon + 1e-8),
                    Provenance::Stated,
                    Ok((row.probe, row.holds)),
                    format!("delta = {}", row.delta),
                )
            }
        }
        let small = *rep.probe.last().unwrap_or(&f64::NAN);
        c.noted(
            format!("{id}: probe_small_radius"),
            format!("sup ||d_W B|| < {SMALL_PROBE} at radius {}", RADII[RADII.len() - 1]),
            Provenance::Stated,
            Ok((small, small < SMALL_PROBE)),
            "the probe scales like the radius for these germs",
        );
        let decreasing = rep.probe.windows(2).all(|w| w[1] <= w[0]);
        c.record(
            format!("{id}: probe_decreasing"),
            "probe non-increasing as the radius shrinks",
            Provenance::Stated,
            Ok((f64::from(u8::from(decreasing)), decreasing)),
        );
        let sname = id.replace(|ch: char| !ch.is_ascii_alphanumeric(), "_");
        c.series(
            &format!("{sname}_modulus"),
            "radius",
            "modulus",
            RADII.iter().copied().zip(rep.modulus.iter().copied()).collect(),
        );
        c.series(
            &format!("{sname}_probe"),
            "radius",
            "probe",
            RADII.iter().copied().zip(rep.probe.iter().copied()).collect(),
        );
    }

    let adv = branching_pseudo_germ(cfg.germ_spacing);
    let rep = germ_continuity_report(&adv, level, &weights, &RADII, &[], cfg.samples, cfg.seed);
    c.record(
        "branching-pseudo: non_contracting",
        "modulus >= 0.9 at every radius",
        Provenance::Stated,
        rep.map(|r| {
            let m = r.modulus.iter().copied().fold(f64::INFINITY, f64::min);
            (m, r.non_contracting)
        }),
    );
    Ok(())
}

pub(super) fn germ_openness(c: &mut Checks, cfg: &ExperimentConfig) -> Result<()> {
    let weights = cfg.weights()?;
    let level = Level(cfg.germ_level);
    let eps = EPSILONS[EPSILONS.len() - 1];
    for g in instance_germs(cfg) {
        let id = g.id.clone();
        let res = certify(&g, level, &weights, &EPSILONS, cfg.samples, cfg.seed).and_then(|cert| {
            let delta = cert.pairs.last().map_or(1.0, |p| p.delta);
            openness_probe(&g, level, &weights, delta, cfg.samples.min(16), cfg.seed)
        });
        match res {
            Ok(o) => c.noted(
                format!("{id}: open"),
                "cond <= 2 cond(0) on the certified ball",
                Provenance::Stated,
                Ok((o.worst_cond, o.pass)),
                format!("radius {} (eps = {eps}), cond(0) = {:.6}", o.radius, o.cond_at_zero),
            ),
            Err(e) => {
                c.record(format!("{id}: open"), "cond <= 2 cond(0)", Provenance::Stated, Err(e));
            }
        }
    }
    let s = s_proj_pseudo_germ(cfg.germ_spacing);
    for r in RADII {
        let res = openness_probe(&s, level, &weights, r, cfg.samples.min(16), cfg.seed);
        c.noted(
            format!("s-proj-pseudo: fails_radius{r}"),
            "openness probe fails",
            Provenance::Stated,
            res.map(|o| (o.worst_cond, !o.pass)),
            "the truncated differential is singular at t > 0",
        );
    }
    Ok(())
}
