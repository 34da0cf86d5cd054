//! Basic germs `(c, w) -> (a(c, w), w - B(c, w))` and sampled checks of the
//! contraction property of `B`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bump::{make_bump, pair_with_bump, shift, MAX_GRID_SHIFT};
use crate::error::{LabError, Result};
use crate::gallery::{bump_multiple, BranchingPhi, PhiFamily, PhiPoly};
use crate::operator::OperatorHandle;
use crate::sampling::{random_bump_mixture, random_unit, rng};
use crate::scale::{GridFunction, Level, ScaleVector, WeightSchedule};

pub type AFn<W> = Box<dyn Fn(&[f64], &W) -> Result<Vec<f64>> + Send + Sync>;
pub type BFn<W> = Box<dyn Fn(&[f64], &W) -> Result<W> + Send + Sync>;
/// `(c, w, v) -> d_W B(c, w) v`.
pub type DbFn<W> = Box<dyn Fn(&[f64], &W, &W) -> Result<W> + Send + Sync>;
pub type BasisFn<W> = Box<dyn Fn(&[f64]) -> Result<Vec<W>> + Send + Sync>;
/// Draws a parameter `c` with `|c| < radius`.
pub type CSampler = Box<dyn Fn(&mut ChaCha8Rng, f64) -> Vec<f64> + Send + Sync>;

/// Step for difference fallbacks of germ differentials.
const FD_STEP: f64 = 1e-6;

pub struct BasicGerm<W> {
    pub id: String,
    /// Dimension of the parameter `c`.
    pub k: usize,
    /// Dimension of `a(c, w)`.
    pub n: usize,
    a: AFn<W>,
    b: BFn<W>,
    db: Option<DbFn<W>>,
    basis: BasisFn<W>,
    c_sampler: Option<CSampler>,
}

impl<W: ScaleVector> BasicGerm<W> {
    pub fn new(id: &str, k: usize, n: usize, a: AFn<W>, b: BFn<W>, basis: BasisFn<W>) -> Self {
        BasicGerm {
            id: id.to_string(),
            k,
            n,
            a,
            b,
            db: None,
            basis,
            c_sampler: None,
        }
    }

    pub fn with_w_differential(mut self, db: DbFn<W>) -> Self {
        self.db = Some(db);
        self
    }

    pub fn with_c_sampler(mut self, s: CSampler) -> Self {
        self.c_sampler = Some(s);
        self
    }

    fn check_c(&self, c: &[f64]) -> Result<()> {
        if c.len() != self.k {
            return Err(LabError::DimensionMismatch {
                expected: self.k,
                found: c.len(),
            });
        }
        Ok(())
    }

    pub fn a(&self, c: &[f64], w: &W) -> Result<Vec<f64>> {
        self.check_c(c)?;
        (self.a)(c, w)
    }

    pub fn b(&self, c: &[f64], w: &W) -> Result<W> {
        self.check_c(c)?;
        (self.b)(c, w)
    }

    /// `d_W B(c, w) v`, by central differences when no closed form is given.
    pub fn d_w_b(&self, c: &[f64], w: &W, v: &W) -> Result<W> {
        self.check_c(c)?;
        if let Some(db) = &self.db {
            return db(c, w, v);
        }
        let p = (self.b)(c, &w.combine(1.0, v, FD_STEP)?)?;
        let m = (self.b)(c, &w.combine(1.0, v, -FD_STEP)?)?;
        p.combine(0.5 / FD_STEP, &m, -0.5 / FD_STEP)
    }

    /// Truncation basis of `W` used at parameter `c`.
    pub fn basis(&self, c: &[f64]) -> Result<Vec<W>> {
        self.check_c(c)?;
        (self.basis)(c)
    }

    fn sample_c(&self, r: &mut ChaCha8Rng, radius: f64) -> Vec<f64> {
        if let Some(s) = &self.c_sampler {
            return s(r, radius);
        }
        if self.k == 0 {
            return Vec::new();
        }
        let u: f64 = r.random();
        random_unit(r, self.k)
            .into_iter()
            .map(|x| x * radius * u)
            .collect()
    }
}

/// `(a(c, w), w - B(c, w))`.
pub fn germ_eval<W: ScaleVector>(g: &BasicGerm<W>, c: &[f64], w: &W) -> Result<(Vec<f64>, W)> {
    let a = g.a(c, w)?;
    let b = g.b(c, w)?;
    Ok((a, w.combine(1.0, &b, -1.0)?))
}

/// Point of `R^N x W` with the Euclidean-product norm.
#[derive(Clone, Debug)]
struct Pair<W> {
    r: Vec<f64>,
    w: W,
}

impl<W: ScaleVector> ScaleVector for Pair<W> {
    fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        Ok(Pair {
            r: self.r.iter().zip(&other.r).map(|(x, y)| a * x + b * y).collect(),
            w: self.w.combine(a, &other.w, b)?,
        })
    }

    fn level_norm(&self, level: Level, weights: &WeightSchedule) -> Result<f64> {
        let e: f64 = self.r.iter().map(|x| x * x).sum();
        Ok(e.sqrt().hypot(self.w.level_norm(level, weights)?))
    }

    fn level_inner(&self, other: &Self, level: Level, weights: &WeightSchedule) -> Result<f64> {
        let e: f64 = self.r.iter().zip(&other.r).map(|(x, y)| x * y).sum();
        Ok(e + self.w.level_inner(&other.w, level, weights)?)
    }
}

fn combo<W: ScaleVector>(basis: &[W], coeffs: &[f64]) -> Result<W> {
    let mut w = basis[0].combine(coeffs[0], &basis[0], 0.0)?;
    for (b, c) in basis.iter().zip(coeffs).skip(1) {
        w = w.combine(1.0, b, *c)?;
    }
    Ok(w)
}

/// Random element of the span with level norm `radius * scale`.
fn sample_in_ball<W: ScaleVector>(
    r: &mut ChaCha8Rng,
    basis: &[W],
    radius: f64,
    scale: f64,
    level: Level,
    weights: &WeightSchedule,
) -> Result<W> {
    let coeffs: Vec<f64> = (0..basis.len()).map(|_| r.sample(StandardNormal)).collect();
    normalized(&combo(basis, &coeffs)?, radius * scale, level, weights)
}

fn normalized<W: ScaleVector>(w: &W, norm: f64, level: Level, weights: &WeightSchedule) -> Result<W> {
    let n = w.level_norm(level, weights)?;
    if !(n > 0.0) {
        return Err(LabError::ZeroVector);
    }
    w.combine(norm / n, w, 0.0)
}

/// Largest strictly-inside-ball fraction used for boundary samples.
const BOUNDARY: f64 = 0.999;

/// `(c, w1, w2)` for sample `idx`: both on the boundary, both interior,
/// antipodal, or a small perturbation of a scaled basis vector.
fn sample_triple<W: ScaleVector>(
    g: &BasicGerm<W>,
    r: &mut ChaCha8Rng,
    idx: usize,
    radius: f64,
    level: Level,
    weights: &WeightSchedule,
) -> Result<(Vec<f64>, W, W)> {
    let c = g.sample_c(r, radius);
    let basis = g.basis(&c)?;
    let (w1, w2) = match idx % 4 {
        0 => (
            sample_in_ball(r, &basis, radius, BOUNDARY, level, weights)?,
            sample_in_ball(r, &basis, radius, BOUNDARY, level, weights)?,
        ),
        1 => {
            let (u1, u2): (f64, f64) = (r.random(), r.random());
            (
                sample_in_ball(r, &basis, radius, u1 * BOUNDARY, level, weights)?,
                sample_in_ball(r, &basis, radius, u2 * BOUNDARY, level, weights)?,
            )
        }
        2 => {
            let w = sample_in_ball(r, &basis, radius, BOUNDARY, level, weights)?;
            let m = w.combine(-1.0, &w, 0.0)?;
            (w, m)
        }
        _ => {
            let j = r.random_range(0..basis.len());
            let m = if r.random::<bool>() { j } else { r.random_range(0..basis.len()) };
            let w1 = normalized(&basis[j], radius * 0.99, level, weights)?;
            let p = normalized(&basis[m], radius * 1e-3, level, weights)?;
            let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
            let w2 = w1.combine(1.0, &p, sign)?;
            (w1, w2)
        }
    };
    Ok((c, w1, w2))
}

/// Worst sampled `||B(c,w1) - B(c,w2)||_i / ||w1 - w2||_i` over the radius ball.
pub fn contraction_modulus<W: ScaleVector>(
    g: &BasicGerm<W>,
    level: Level,
    weights: &WeightSchedule,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if !(radius > 0.0) || samples == 0 {
        return Err(LabError::InvalidArgument(
            "need a positive radius and at least one sample".into(),
        ));
    }
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    let mut used = 0;
    for idx in 0..samples {
        let (c, w1, w2) = sample_triple(g, &mut r, idx, radius, level, weights)?;
        let den = w1.combine(1.0, &w2, -1.0)?.level_norm(level, weights)?;
        if !(den > 0.0) {
            continue;
        }
        let num = g
            .b(&c, &w1)?
            .combine(1.0, &g.b(&c, &w2)?, -1.0)?
            .level_norm(level, weights)?;
        worst = worst.max(num / den);
        used += 1;
    }
    if used == 0 {
        return Err(LabError::DegenerateSamples);
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedPair {
    pub epsilon: f64,
    pub delta: f64,
    pub worst_ratio: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    pub germ_id: String,
    pub level: u32,
    pub pairs: Vec<CertifiedPair>,
}

/// Smallest radius tried before giving up on an epsilon.
const MIN_RADIUS: f64 = 1.0 / (1u64 << 20) as f64;

/// For each epsilon (largest first) halves the radius, starting from the
/// previous certified one, until the sampled modulus is at most epsilon.
pub fn certify<W: ScaleVector>(
    g: &BasicGerm<W>,
    level: Level,
    weights: &WeightSchedule,
    epsilons: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ContractionCertificate> {
    let mut eps: Vec<f64> = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let mut delta = 1.0;
    let mut pairs = Vec::with_capacity(eps.len());
    for e in eps {
        loop {
            let m = contraction_modulus(g, level, weights, delta, samples, seed)?;
            if m <= e {
                pairs.push(CertifiedPair {
                    epsilon: e,
                    delta,
                    worst_ratio: m,
                    samples,
                    seed,
                });
                break;
            }
            delta *= 0.5;
            if delta < MIN_RADIUS {
                return Err(LabError::InvalidArgument(format!(
                    "no radius down to {MIN_RADIUS:e} certifies epsilon = {e} for {}",
                    g.id
                )));
            }
        }
    }
    Ok(ContractionCertificate {
        germ_id: g.id.clone(),
        level: level.0,
        pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayRow {
    pub epsilon: f64,
    pub delta: f64,
    pub stored: f64,
    pub replayed: f64,
    /// Bit-identical to the stored ratio.
    pub exact: bool,
    pub within: bool,
}

pub fn replay<W: ScaleVector>(
    cert: &ContractionCertificate,
    g: &BasicGerm<W>,
    weights: &WeightSchedule,
) -> Result<Vec<ReplayRow>> {
    cert.pairs
        .iter()
        .map(|p| {
            let m = contraction_modulus(g, Level(cert.level), weights, p.delta, p.samples, p.seed)?;
            Ok(ReplayRow {
                epsilon: p.epsilon,
                delta: p.delta,
                stored: p.worst_ratio,
                replayed: m,
                exact: m.to_bits() == p.worst_ratio.to_bits(),
                within: m <= p.epsilon,
            })
        })
        .collect()
}

/// Largest truncation norm of `d_W B(c, w)` over sampled base points.
pub fn dw_opnorm_probe<W: ScaleVector>(
    g: &BasicGerm<W>,
    level: Level,
    weights: &WeightSchedule,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for idx in 0..samples.max(1) {
        let c = g.sample_c(&mut r, radius);
        let basis = g.basis(&c)?;
        let scale = if idx % 2 == 0 { BOUNDARY } else { r.random::<f64>() * BOUNDARY };
        let w = sample_in_ball(&mut r, &basis, radius, scale, level, weights)?;
        let op = OperatorHandle::from_images(
            &basis,
            |v| g.d_w_b(&c, &w, v),
            level,
            weights,
            Vec::new(),
        )?;
        worst = worst.max(op.truncation_opnorm()?);
    }
    Ok(worst)
}

/// Truncated differential of the whole germ on `R^k x span(basis(c))`.
fn germ_differential<W: ScaleVector>(
    g: &BasicGerm<W>,
    c: &[f64],
    w: &W,
    level: Level,
    weights: &WeightSchedule,
) -> Result<OperatorHandle> {
    let basis = g.basis(c)?;
    let f = |c: &[f64], w: &W| -> Result<Pair<W>> {
        let (a, v) = germ_eval(g, c, w)?;
        Ok(Pair { r: a, w: v })
    };
    let mut domain: Vec<Pair<W>> = Vec::new();
    let mut images: Vec<Pair<W>> = Vec::new();
    let zero_w = w.combine(0.0, w, 0.0)?;
    for j in 0..g.k {
        let mut cp = c.to_vec();
        let mut cm = c.to_vec();
        cp[j] += FD_STEP;
        cm[j] -= FD_STEP;
        let col = f(&cp, w)?.combine(0.5 / FD_STEP, &f(&cm, w)?, -0.5 / FD_STEP)?;
        images.push(col);
        let mut e = vec![0.0; g.k];
        e[j] = 1.0;
        domain.push(Pair {
            r: e,
            w: zero_w.clone(),
        });
    }
    for b in &basis {
        let p = f(c, &w.combine(1.0, b, FD_STEP)?)?;
        let m = f(c, &w.combine(1.0, b, -FD_STEP)?)?;
        images.push(p.combine(0.5 / FD_STEP, &m, -0.5 / FD_STEP)?);
        domain.push(Pair {
            r: vec![0.0; g.k],
            w: b.clone(),
        });
    }
    // square up: the a-component lives in R^n, the c-directions in R^k
    let pad = |mut p: Pair<W>, n: usize| {
        p.r.resize(n, 0.0);
        p
    };
    let dim = g.k.max(g.n);
    let domain: Vec<Pair<W>> = domain.into_iter().map(|p| pad(p, dim)).collect();
    let images: Vec<Pair<W>> = images.into_iter().map(|p| pad(p, dim)).collect();
    OperatorHandle::from_image_vectors(&domain, &images, level, weights, Vec::new())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpennessResult {
    pub radius: f64,
    pub cond_at_zero: f64,
    pub worst_cond: f64,
    pub pass: bool,
}

/// Whether the truncated differential stays invertible on the sampled
/// ball with condition number at most twice its value at the origin.
pub fn openness_probe<W: ScaleVector>(
    g: &BasicGerm<W>,
    level: Level,
    weights: &WeightSchedule,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<OpennessResult> {
    let c0 = vec![0.0; g.k];
    let basis0 = g.basis(&c0)?;
    let w0 = basis0[0].combine(0.0, &basis0[0], 0.0)?;
    let cond0 = germ_differential(g, &c0, &w0, level, weights)?.condition_number()?;
    let mut r = rng(seed);
    let mut worst = cond0;
    for idx in 0..samples.max(1) {
        let c = g.sample_c(&mut r, radius);
        let basis = g.basis(&c)?;
        let scale = if idx % 2 == 0 { BOUNDARY } else { r.random::<f64>() * BOUNDARY };
        let w = sample_in_ball(&mut r, &basis, radius, scale, level, weights)?;
        let cond = germ_differential(g, &c, &w, level, weights)?.condition_number()?;
        worst = worst.max(cond);
    }
    Ok(OpennessResult {
        radius,
        cond_at_zero: cond0,
        worst_cond: worst,
        pass: cond0.is_finite() && worst <= 2.0 * cond0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoEpsRow {
    pub epsilon: f64,
    pub delta: f64,
    pub probe: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GermContinuityReport {
    pub germ_id: String,
    pub level: u32,
    pub radii: Vec<f64>,
    pub modulus: Vec<f64>,
    pub probe: Vec<f64>,
    pub certificate: Option<ContractionCertificate>,
    pub two_eps: Vec<TwoEpsRow>,
    /// `sup ||Da(c,w) - Da(0,0)||` per radius; only at levels `>= 1`.
    pub da_variation: Option<Vec<f64>>,
    pub two_eps_violated: bool,
    /// Modulus at least 0.9 at every radius.
    pub non_contracting: bool,
}

fn a_jacobian<W: ScaleVector>(g: &BasicGerm<W>, c: &[f64], w: &W) -> Result<Vec<f64>> {
    let basis = g.basis(c)?;
    let mut out = Vec::new();
    for j in 0..g.k {
        let mut cp = c.to_vec();
        let mut cm = c.to_vec();
        cp[j] += FD_STEP;
        cm[j] -= FD_STEP;
        let (p, m) = (g.a(&cp, w)?, g.a(&cm, w)?);
        out.extend(p.iter().zip(&m).map(|(x, y)| (x - y) / (2.0 * FD_STEP)));
    }
    for b in &basis {
        let p = g.a(c, &w.combine(1.0, b, FD_STEP)?)?;
        let m = g.a(c, &w.combine(1.0, b, -FD_STEP)?)?;
        out.extend(p.iter().zip(&m).map(|(x, y)| (x - y) / (2.0 * FD_STEP)));
    }
    Ok(out)
}

/// Modulus and `d_W B` sweeps over `radii`, the `2 epsilon` comparison at
/// certified radii, and the variation of `Da` near the origin.
pub fn germ_continuity_report<W: ScaleVector>(
    g: &BasicGerm<W>,
    level: Level,
    weights: &WeightSchedule,
    radii: &[f64],
    epsilons: &[f64],
    samples: usize,
    seed: u64,
) -> Result<GermContinuityReport> {
    let mut modulus = Vec::with_capacity(radii.len());
    let mut probe = Vec::with_capacity(radii.len());
    for &r in radii {
        modulus.push(contraction_modulus(g, level, weights, r, samples, seed)?);
        probe.push(dw_opnorm_probe(g, level, weights, r, samples, seed)?);
    }
    let certificate = certify(g, level, weights, epsilons, samples, seed).ok();
    let mut two_eps = Vec::new();
    if let Some(cert) = &certificate {
        for p in &cert.pairs {
            let pr = dw_opnorm_probe(g, level, weights, p.delta, samples, seed)?;
            two_eps.push(TwoEpsRow {
                epsilon: p.epsilon,
                delta: p.delta,
                probe: pr,
                holds: pr <= 2.0 * p.epsilon + 1e-8,
            });
        }
    }
    let da_variation = if level.0 >= 1 {
        let c0 = vec![0.0; g.k];
        let basis0 = g.basis(&c0)?;
        let w0 = basis0[0].combine(0.0, &basis0[0], 0.0)?;
        let j0 = a_jacobian(g, &c0, &w0)?;
        let mut out = Vec::new();
        for &rad in radii {
            let mut r = rng(seed);
            let mut worst = 0.0f64;
            for _ in 0..samples.clamp(1, 16) {
                let c = g.sample_c(&mut r, rad);
                let basis = g.basis(&c)?;
                let w = sample_in_ball(&mut r, &basis, rad, BOUNDARY, level, weights)?;
                let j = a_jacobian(g, &c, &w)?;
                let d = j.iter().zip(&j0).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                worst = worst.max(d);
            }
            out.push(worst);
        }
        Some(out)
    } else {
        None
    };
    Ok(GermContinuityReport {
        germ_id: g.id.clone(),
        level: level.0,
        radii: radii.to_vec(),
        two_eps_violated: two_eps.iter().any(|r| !r.holds),
        non_contracting: modulus.iter().all(|&m| m >= 0.9),
        modulus,
        probe,
        certificate,
        two_eps,
        da_variation,
    })
}

/// `{beta, beta', g1, g2}` on `[-3, 3]`.
fn centred_basis(spacing: f64) -> Result<Vec<GridFunction>> {
    let b = make_bump();
    let beta = GridFunction::from_fn(-3.0, 3.0, spacing, |x| b.value(x))?;
    let dbeta = GridFunction::from_fn(-3.0, 3.0, spacing, |x| b.derivative(x, 1))?;
    let mut r = rng(0x5eed);
    let g1 = random_bump_mixture(&mut r, 0.0, spacing)?;
    let g2 = random_bump_mixture(&mut r, 0.0, spacing)?;
    Ok(vec![beta, dbeta, g1, g2])
}

/// `{beta_t, beta_t', g1, g2}` around the support of `beta_t`.
fn shifted_basis(t: f64, spacing: f64) -> Result<Vec<GridFunction>> {
    let s = shift(t);
    let mut r = rng(0x5eed);
    let g1 = random_bump_mixture(&mut r, -s, spacing)?;
    let g2 = random_bump_mixture(&mut r, -s, spacing)?;
    // all four on the mixture window
    let lo = g1.window().0;
    let hi = g1.window().1;
    let b = make_bump();
    let beta = GridFunction::from_fn(lo, hi, spacing, |x| b.value(s + x))?;
    let dbeta = GridFunction::from_fn(lo, hi, spacing, |x| b.derivative(s + x, 1))?;
    Ok(vec![beta, dbeta, g1, g2])
}

fn beta_on(w: &GridFunction) -> Result<GridFunction> {
    let b = make_bump();
    let (lo, hi) = w.window();
    GridFunction::from_fn(lo.min(-1.0), hi.max(1.0), w.spacing(), |x| b.value(x))
}

/// Smallest parameter with a representable shift `e^{1/c}`.
pub fn min_grid_parameter() -> f64 {
    1.0 / MAX_GRID_SHIFT.ln()
}

pub fn identity_germ(spacing: f64) -> BasicGerm<GridFunction> {
    BasicGerm::new(
        "identity",
        0,
        0,
        Box::new(|_, _| Ok(Vec::new())),
        Box::new(|_, w: &GridFunction| Ok(GridFunction::zeros_like(w))),
        Box::new(move |_| centred_basis(spacing)),
    )
    .with_w_differential(Box::new(|_, _, v: &GridFunction| Ok(GridFunction::zeros_like(v))))
}

/// `B(c, w) = c <w, beta> beta`, `a(c, w) = c`.
pub fn scaled_pairing_germ(spacing: f64) -> BasicGerm<GridFunction> {
    BasicGerm::new(
        "c<w,beta>beta",
        1,
        1,
        Box::new(|c, _| Ok(vec![c[0]])),
        Box::new(|c, w: &GridFunction| {
            let beta = beta_on(w)?;
            Ok(beta.scale(c[0] * w.l2_inner(&beta)?))
        }),
        Box::new(move |_| centred_basis(spacing)),
    )
    .with_w_differential(Box::new(|c, _, v: &GridFunction| {
        let beta = beta_on(v)?;
        Ok(beta.scale(c[0] * v.l2_inner(&beta)?))
    }))
}

/// `B(w) = <w, beta> w` with no parameter.
pub fn quadratic_pairing_germ(spacing: f64) -> BasicGerm<GridFunction> {
    BasicGerm::new(
        "<w,beta>w",
        0,
        0,
        Box::new(|_, _| Ok(Vec::new())),
        Box::new(|_, w: &GridFunction| {
            let beta = beta_on(w)?;
            Ok(w.scale(w.l2_inner(&beta)?))
        }),
        Box::new(move |_| centred_basis(spacing)),
    )
    .with_w_differential(Box::new(|_, w: &GridFunction, v: &GridFunction| {
        let beta = beta_on(w)?;
        w.scale(v.l2_inner(&beta)?)
            .combine(1.0, &v.scale(w.l2_inner(&beta)?), 1.0)
    }))
}

/// `<w, beta_c>` for `c > 0`, zero otherwise; exact zero when the supports
/// are disjoint, however far away `beta_c` sits.
fn pairing(c: f64, w: &GridFunction) -> Result<f64> {
    if c <= 0.0 {
        return Ok(0.0);
    }
    pair_with_bump(w, c)
}

/// Positive parameters in `[max(c_min, radius/2), radius)`, or `radius`
/// itself when the ball holds no grid-representable parameter.
fn positive_sampler(mixed: bool) -> CSampler {
    Box::new(move |r: &mut ChaCha8Rng, radius: f64| {
        let u: f64 = r.random();
        if mixed && r.random::<bool>() {
            return vec![-radius * BOUNDARY * u];
        }
        let lo = min_grid_parameter().max(0.5 * radius);
        let hi = radius * BOUNDARY;
        if lo >= hi {
            return vec![radius];
        }
        vec![lo + (hi - lo) * u]
    })
}

/// `B(c, w) = phi_c(<w, beta_c>) beta_c` for `c > 0`, zero otherwise: the
/// branching family in germ coordinates. Not a basic germ.
pub fn branching_pseudo_germ(spacing: f64) -> BasicGerm<GridFunction> {
    BasicGerm::new(
        "branching-pseudo",
        1,
        1,
        Box::new(|c, _| Ok(vec![c[0]])),
        Box::new(|c, w: &GridFunction| {
            let a = pairing(c[0], w)?;
            if a == 0.0 {
                return Ok(GridFunction::zeros_like(w));
            }
            let coeff = BranchingPhi.value(c[0], &PhiPoly::constant(a)).to_f64(c[0])?;
            bump_multiple(c[0], coeff, w)
        }),
        Box::new(move |c| {
            if c[0] > 0.0 {
                shifted_basis(c[0], spacing)
            } else {
                centred_basis(spacing)
            }
        }),
    )
    .with_w_differential(Box::new(|c, w: &GridFunction, v: &GridFunction| {
        let pv = pairing(c[0], v)?;
        if pv == 0.0 {
            return Ok(GridFunction::zeros_like(v));
        }
        let a = PhiPoly::constant(pairing(c[0], w)?);
        let slope = BranchingPhi.dx(c[0], &a).to_f64(c[0])?;
        bump_multiple(c[0], slope * pv, v)
    }))
    .with_c_sampler(positive_sampler(false))
}

/// The projection map `s(t, f) = (t, f - <f, beta_t> beta_t)` written as
/// `B(c, w) = <w, beta_c> beta_c` for `c > 0`.
pub fn s_proj_pseudo_germ(spacing: f64) -> BasicGerm<GridFunction> {
    BasicGerm::new(
        "s-proj-pseudo",
        1,
        1,
        Box::new(|c, _| Ok(vec![c[0]])),
        Box::new(|c, w: &GridFunction| {
            bump_multiple(c[0], pairing(c[0], w)?, w)
        }),
        Box::new(move |c| {
            if c[0] > 0.0 {
                shifted_basis(c[0], spacing)
            } else {
                centred_basis(spacing)
            }
        }),
    )
    .with_c_sampler(positive_sampler(true))
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = 1.0 / 256.0;

    fn w0() -> WeightSchedule {
        WeightSchedule::default()
    }

    #[test]
    fn identity_germ_evaluates_to_w() {
        let g = identity_germ(H);
        let w = centred_basis(H).unwrap()[2].clone();
        let (a, v) = germ_eval(&g, &[], &w).unwrap();
        assert!(a.is_empty());
        assert_eq!(v, w);
        assert!(matches!(
            germ_eval(&g, &[1.0], &w),
            Err(LabError::DimensionMismatch { .. })
        ));
        assert_eq!(contraction_modulus(&g, Level(0), &w0(), 0.5, 16, 1).unwrap(), 0.0);
        assert_eq!(dw_opnorm_probe(&g, Level(0), &w0(), 0.5, 4, 1).unwrap(), 0.0);
    }

    #[test]
    fn scaled_pairing_vanishes_at_zero_parameter() {
        let g = scaled_pairing_germ(H);
        let w = centred_basis(H).unwrap()[3].clone();
        let (a, v) = germ_eval(&g, &[0.0], &w).unwrap();
        assert_eq!(a, vec![0.0]);
        assert_eq!(v, w);
    }

    #[test]
    fn quadratic_pairing_kills_beta() {
        let g = quadratic_pairing_germ(H);
        let beta = centred_basis(H).unwrap()[0].clone();
        let (_, v) = germ_eval(&g, &[], &beta).unwrap();
        assert!(v.l2_norm() < 1e-9);
    }

    #[test]
    fn moduli_respect_lipschitz_bounds() {
        let w = w0();
        for d in [0.5, 0.25] {
            let m1 = contraction_modulus(&scaled_pairing_germ(H), Level(0), &w, d, 32, 3).unwrap();
            assert!(m1 <= d);
            let m2 = contraction_modulus(&quadratic_pairing_germ(H), Level(0), &w, d, 32, 3).unwrap();
            assert!(m2 <= 2.0 * d);
        }
    }

    #[test]
    fn modulus_grows_with_radius() {
        let g = quadratic_pairing_germ(H);
        let w = w0();
        let a = contraction_modulus(&g, Level(0), &w, 0.125, 16, 9).unwrap();
        let b = contraction_modulus(&g, Level(0), &w, 0.25, 16, 9).unwrap();
        assert!(a <= b);
    }

    #[test]
    fn certificate_replays_bit_exactly() {
        let g = scaled_pairing_germ(H);
        let w = w0();
        let cert = certify(&g, Level(0), &w, &[0.5, 0.25], 16, 42).unwrap();
        assert!(cert.pairs.windows(2).all(|p| p[1].delta <= p[0].delta));
        for row in replay(&cert, &g, &w).unwrap() {
            assert!(row.exact && row.within);
        }
        let json = serde_json::to_value(&cert).unwrap();
        for key in ["germ_id", "level", "pairs"] {
            assert!(json.get(key).is_some());
        }
    }

    #[test]
    fn fd_fallback_matches_closed_form() {
        let g = quadratic_pairing_germ(H);
        let b = centred_basis(H).unwrap();
        let exact = g.d_w_b(&[], &b[0], &b[2]).unwrap();
        let g2 = BasicGerm::new(
            "fd",
            0,
            0,
            Box::new(|_, _| Ok(Vec::new())),
            Box::new(|_, w: &GridFunction| {
                let beta = beta_on(w)?;
                Ok(w.scale(w.l2_inner(&beta)?))
            }),
            Box::new(move |_| centred_basis(H)),
        );
        let fd = g2.d_w_b(&[], &b[0], &b[2]).unwrap();
        assert!(fd.combine(1.0, &exact, -1.0).unwrap().l2_norm() < 1e-8);
    }

    #[test]
    fn identity_germ_is_open() {
        let r = openness_probe(&identity_germ(H), Level(0), &w0(), 1.0, 4, 1).unwrap();
        assert!(r.pass);
        assert!((r.cond_at_zero - 1.0).abs() < 1e-6);
    }
}
