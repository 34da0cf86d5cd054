//! Operator norms on finite truncations and difference checks of closed-form
//! differentials.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bump::{shift, shifted_bump};
use crate::error::{LabError, Result};
use crate::gallery::{h_diff, BranchingPhi, PhiFamily, PhiPoly, ScMap};
use crate::sampling::{random_bump_mixture, random_unit, rng};
use crate::scale::{GridFunction, GridSpec, Level, ScaleVector, WeightSchedule};

/// Default step sweep for central differences.
pub const DEFAULT_STEPS: [f64; 7] = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5];

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Relative size below which a Gram-Schmidt residual is treated as roundoff.
pub const SPAN_DROP_TOL: f64 = 1e-13;

/// A linear map on a finite basis: `matrix` sends domain coefficients to
/// codomain coefficients, and each side carries its level Gram matrix.
#[derive(Clone, Debug)]
pub struct OperatorHandle {
    matrix: DMatrix<f64>,
    domain_gram: DMatrix<f64>,
    codomain_gram: DMatrix<f64>,
    level: Level,
    basis: Vec<String>,
}

fn check_gram(g: &DMatrix<f64>, what: &str) -> Result<()> {
    if !g.is_square() {
        return Err(LabError::DimensionMismatch {
            expected: g.nrows(),
            found: g.ncols(),
        });
    }
    let scale = g.amax().max(f64::MIN_POSITIVE);
    if (g - g.transpose()).amax() > 1e-10 * scale {
        return Err(LabError::NotPositiveDefinite(format!("{what} Gram is not symmetric")));
    }
    Ok(())
}

fn cholesky_upper(g: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let sym = (g + g.transpose()) * 0.5;
    let c = sym
        .cholesky()
        .ok_or_else(|| LabError::NotPositiveDefinite(format!("{what} Gram")))?;
    Ok(c.l().transpose())
}

impl OperatorHandle {
    pub fn new(
        matrix: DMatrix<f64>,
        domain_gram: DMatrix<f64>,
        codomain_gram: DMatrix<f64>,
        level: Level,
        basis: Vec<String>,
    ) -> Result<Self> {
        check_gram(&domain_gram, "domain")?;
        check_gram(&codomain_gram, "codomain")?;
        if matrix.ncols() != domain_gram.nrows() {
            return Err(LabError::DimensionMismatch {
                expected: domain_gram.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() != codomain_gram.nrows() {
            return Err(LabError::DimensionMismatch {
                expected: codomain_gram.nrows(),
                found: matrix.nrows(),
            });
        }
        Ok(OperatorHandle {
            matrix,
            domain_gram,
            codomain_gram,
            level,
            basis,
        })
    }

    /// Operator known only through the Gram matrix `M_jk = <A b_j, A b_k>`
    /// of the images of the domain basis.
    pub fn from_image_gram(
        image_gram: DMatrix<f64>,
        domain_gram: DMatrix<f64>,
        level: Level,
        basis: Vec<String>,
    ) -> Result<Self> {
        check_gram(&image_gram, "image")?;
        let n = image_gram.nrows();
        let eig = ((&image_gram + image_gram.transpose()) * 0.5).symmetric_eigen();
        let root = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
        let matrix = root * eig.eigenvectors.transpose();
        OperatorHandle::new(matrix, domain_gram, DMatrix::identity(n, n), level, basis)
    }

    /// Images of `basis` under `op`; see [`OperatorHandle::from_image_vectors`].
    pub fn from_images<X: ScaleVector, Y: ScaleVector>(
        domain_basis: &[X],
        op: impl Fn(&X) -> Result<Y>,
        level: Level,
        weights: &WeightSchedule,
        labels: Vec<String>,
    ) -> Result<Self> {
        let images = domain_basis.iter().map(&op).collect::<Result<Vec<_>>>()?;
        OperatorHandle::from_image_vectors(domain_basis, &images, level, weights, labels)
    }

    /// Operator with `A b_j = images[j]`, written in an orthonormal basis of
    /// the image span built by twice-repeated modified Gram-Schmidt.
    ///
    /// Unlike [`OperatorHandle::from_image_gram`] this keeps full relative
    /// precision in small singular values. Residuals below
    /// [`SPAN_DROP_TOL`] times the largest image norm add no direction.
    pub fn from_image_vectors<X: ScaleVector, Y: ScaleVector>(
        domain_basis: &[X],
        images: &[Y],
        level: Level,
        weights: &WeightSchedule,
        labels: Vec<String>,
    ) -> Result<Self> {
        if images.len() != domain_basis.len() {
            return Err(LabError::DimensionMismatch {
                expected: domain_basis.len(),
                found: images.len(),
            });
        }
        let dg = gram_matrix(domain_basis, level, weights)?;
        let norm = |y: &Y| -> Result<f64> { Ok(y.level_inner(y, level, weights)?.max(0.0).sqrt()) };
        let mut scale = 0.0f64;
        for y in images {
            scale = scale.max(norm(y)?);
        }
        let mut q: Vec<Y> = Vec::new();
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(images.len());
        for y in images {
            let mut coeffs = vec![0.0; q.len()];
            let mut r = y.clone();
            for _ in 0..2 {
                for (k, qk) in q.iter().enumerate() {
                    let c = r.level_inner(qk, level, weights)?;
                    r = r.combine(1.0, qk, -c)?;
                    coeffs[k] += c;
                }
            }
            let rn = norm(&r)?;
            if scale > 0.0 && rn > SPAN_DROP_TOL * scale {
                q.push(r.combine(1.0 / rn, &r, 0.0)?);
                coeffs.push(rn);
            }
            cols.push(coeffs);
        }
        let m = q.len().max(1);
        let mut matrix = DMatrix::zeros(m, images.len());
        for (j, c) in cols.iter().enumerate() {
            for (k, v) in c.iter().enumerate() {
                matrix[(k, j)] = *v;
            }
        }
        OperatorHandle::new(matrix, dg, DMatrix::identity(m, m), level, labels)
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.domain_gram.nrows()
    }

    fn quad(g: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
        (v.transpose() * g * v)[(0, 0)]
    }

    /// `||A v||_i / ||v||_i` for a coefficient vector `v`.
    pub fn witness_lower_bound(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.dim() {
            return Err(LabError::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let v = DVector::from_column_slice(v);
        let den = Self::quad(&self.domain_gram, &v);
        if !(den > 0.0) {
            return Err(LabError::ZeroVector);
        }
        let av = &self.matrix * &v;
        Ok((Self::quad(&self.codomain_gram, &av).max(0.0) / den).sqrt())
    }

    /// Singular values of `R_c A R_d^{-1}` with `G = R^T R`, descending.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let rd = cholesky_upper(&self.domain_gram, "domain")?;
        let rc = cholesky_upper(&self.codomain_gram, "codomain")?;
        let rd_inv = rd
            .try_inverse()
            .ok_or_else(|| LabError::NotPositiveDefinite("domain Gram".into()))?;
        let w = rc * &self.matrix * rd_inv;
        let mut s: Vec<f64> = w.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }

    /// Exact operator norm on the truncation.
    pub fn truncation_opnorm(&self) -> Result<f64> {
        Ok(self.singular_values()?.first().copied().unwrap_or(0.0))
    }

    pub fn numerical_rank(&self) -> Result<usize> {
        let s = self.singular_values()?;
        let top = s.first().copied().unwrap_or(0.0);
        Ok(s.iter().filter(|&&v| v > RANK_TOL * top).count())
    }

    /// `sigma_max / sigma_min`, infinite for a singular truncation.
    pub fn condition_number(&self) -> Result<f64> {
        let s = self.singular_values()?;
        let (top, bottom) = (s[0], *s.last().unwrap());
        if !(bottom > RANK_TOL * top) {
            return Ok(f64::INFINITY);
        }
        Ok(top / bottom)
    }
}

/// `G_jk = <b_j, b_k>_i`.
pub fn gram_matrix<X: ScaleVector>(basis: &[X], level: Level, weights: &WeightSchedule) -> Result<DMatrix<f64>> {
    let n = basis.len();
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let v = basis[j].level_inner(&basis[k], level, weights)?;
            g[(j, k)] = v;
            g[(k, j)] = v;
        }
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub map: String,
    pub base: String,
    pub level: u32,
    pub steps: Vec<f64>,
    /// `||central difference - analytic||_i` per step.
    pub mismatches: Vec<f64>,
    pub analytic_norm: f64,
    pub best_step: f64,
    pub best_mismatch: f64,
    /// Best mismatch divided by the analytic norm (absolute if that is 0).
    pub relative_mismatch: f64,
    pub richardson_mismatch: Option<f64>,
    /// Least-squares slope of `log mismatch` against `log h` over the
    /// leading run of decreasing mismatches.
    pub order: Option<f64>,
}

fn estimate_order(steps: &[f64], mism: &[f64]) -> Option<f64> {
    let mut run = 1;
    while run < mism.len()
        && mism[run] > 0.0
        && mism[run] < mism[run - 1]
        && mism[run] > 1e3 * f64::EPSILON * mism[0].max(f64::MIN_POSITIVE).min(1.0)
    {
        run += 1;
    }
    if run < 2 || !(mism[0] > 0.0) {
        return None;
    }
    let pts: Vec<(f64, f64)> = (0..run).map(|j| (steps[j].ln(), mism[j].ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Central differences of `m` at `base` along `dir`, compared in the
/// level-`i` norm with the closed-form differential.
pub fn finite_diff_differential<M: ScMap>(
    m: &M,
    base: &M::Domain,
    dir: &M::Domain,
    level: Level,
    weights: &WeightSchedule,
    steps: &[f64],
    base_label: &str,
) -> Result<DiffReport> {
    if steps.is_empty() || steps.windows(2).any(|w| !(w[1] < w[0])) || steps[0] <= 0.0 {
        return Err(LabError::InvalidArgument(
            "steps must be positive and decreasing".into(),
        ));
    }
    let analytic = m.differential(base, dir)?;
    let analytic_norm = analytic.level_norm(level, weights)?;
    let mut diffs = Vec::with_capacity(steps.len());
    let mut mismatches = Vec::with_capacity(steps.len());
    for &h in steps {
        let plus = m.eval(&base.combine(1.0, dir, h)?)?;
        let minus = m.eval(&base.combine(1.0, dir, -h)?)?;
        let central = plus.combine(0.5 / h, &minus, -0.5 / h)?;
        mismatches.push(central.combine(1.0, &analytic, -1.0)?.level_norm(level, weights)?);
        diffs.push(central);
    }
    let (best_idx, best_mismatch) = mismatches
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let mut richardson: Option<f64> = None;
    for j in 0..steps.len().saturating_sub(2) {
        let consistent = mismatches[j + 1] < mismatches[j] && mismatches[j + 2] < mismatches[j + 1];
        if !consistent {
            continue;
        }
        let r2 = (steps[j] / steps[j + 1]).powi(2);
        let extrap = diffs[j + 1].combine(r2 / (r2 - 1.0), &diffs[j], -1.0 / (r2 - 1.0))?;
        let e = extrap.combine(1.0, &analytic, -1.0)?.level_norm(level, weights)?;
        richardson = Some(richardson.map_or(e, |r: f64| r.min(e)));
    }
    let overall = richardson.map_or(best_mismatch, |r| r.min(best_mismatch));
    let relative_mismatch = if analytic_norm > 0.0 {
        overall / analytic_norm
    } else {
        overall
    };
    Ok(DiffReport {
        map: m.id().to_string(),
        base: base_label.to_string(),
        level: level.0,
        steps: steps.to_vec(),
        order: estimate_order(steps, &mismatches),
        mismatches,
        analytic_norm,
        best_step: steps[best_idx],
        best_mismatch,
        relative_mismatch,
        richardson_mismatch: richardson,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyRow {
    pub t: f64,
    /// `||(dh(t,0) - dh(0,0))(0, beta_t)||_{L2}` over `||(0, beta_t)||`.
    pub l2_witness: f64,
    /// Largest ratio over sampled directions with the `H^{1,delta}` sum-norm.
    pub sampled_h1_lower: f64,
    /// Truncation norm with the quadratic `H^{1,delta}` Gram.
    pub truncation_h1: f64,
    /// `log( e^{-delta(e^{1/t} - 1)} |phi_t'(0)| )`.
    pub log_upper_bound: f64,
}

/// Norm of `dh(t,0) - dh(0,0)` from `R x L2` versus from `R x H^{1,delta}`,
/// on the span of `(1,0), (0,beta_t), (0,beta_t'), (0,g1), (0,g2)`.
pub fn opnorm_dichotomy(t_grid: &[f64], delta: f64, samples: usize, seed: u64) -> Result<Vec<DichotomyRow>> {
    let weights_l2 = WeightSchedule::new(vec![0.0])?;
    let weights_h1 = WeightSchedule::new(vec![0.0, delta])?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for (idx, &t) in t_grid.iter().enumerate() {
        let spec = GridSpec::default();
        let s = shift(t);
        let bt = shifted_bump(t, 0, spec)?;
        let dbt = shifted_bump(t, 1, spec)?;
        let mut r = rng(seed.wrapping_add(idx as u64));
        let g1 = random_bump_mixture(&mut r, -s, spec.spacing)?;
        let g2 = random_bump_mixture(&mut r, -s, spec.spacing)?;
        let zero = GridFunction::zeros_like(&bt);
        let domain: Vec<(f64, GridFunction)> = vec![
            (1.0, zero.clone()),
            (0.0, bt.clone()),
            (0.0, dbt),
            (0.0, g1),
            (0.0, g2),
        ];
        let labels = ["(1,0)", "(0,beta_t)", "(0,beta_t')", "(0,g1)", "(0,g2)"]
            .map(String::from)
            .to_vec();
        let diff_op = |v: &(f64, GridFunction)| -> Result<GridFunction> {
            let a = h_diff(&BranchingPhi, t, &zero, v.0, &v.1)?;
            let b = h_diff(&BranchingPhi, 0.0, &zero, v.0, &v.1)?;
            a.combine(1.0, &b, -1.0)
        };
        let images = domain.iter().map(diff_op).collect::<Result<Vec<_>>>()?;
        let image_gram = gram_matrix(&images, Level(0), &weights_l2)?;
        let l2 = OperatorHandle::from_image_gram(
            image_gram.clone(),
            gram_matrix(&domain, Level(0), &weights_l2)?,
            Level(0),
            labels.clone(),
        )?;
        let h1 = OperatorHandle::from_image_gram(
            image_gram,
            gram_matrix(&domain, Level(1), &weights_h1)?,
            Level(1),
            labels,
        )?;
        let l2_witness = l2.witness_lower_bound(&[0.0, 1.0, 0.0, 0.0, 0.0])?;
        let mut sampled = 0.0f64;
        let mut dirs = vec![vec![0.0, 1.0, 0.0, 0.0, 0.0]];
        dirs.extend((0..samples).map(|_| random_unit(&mut r, domain.len())));
        for v in dirs {
            let mut x = (0.0, zero.clone());
            for (c, b) in v.iter().zip(&domain) {
                x = x.combine(1.0, b, *c)?;
            }
            let num = diff_op(&x)?.l2_norm();
            let den = x.level_norm(Level(1), &weights_h1)?;
            if den > 0.0 {
                sampled = sampled.max(num / den);
            }
        }
        let slope = BranchingPhi.dx(t, &PhiPoly::zero()).value(t)?;
        rows.push(DichotomyRow {
            t,
            l2_witness,
            sampled_h1_lower: sampled,
            truncation_h1: h1.truncation_opnorm()?,
            log_upper_bound: -delta * (s - 1.0) + slope.abs().logmag(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{RhoK, SeqDiffeo};
    use crate::scale::SeqVector;

    #[test]
    fn identity_with_equal_grams() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let a = OperatorHandle::new(DMatrix::identity(2, 2), g.clone(), g, Level(0), vec![]).unwrap();
        assert!((a.truncation_opnorm().unwrap() - 1.0).abs() < 1e-14);
        assert!((a.witness_lower_bound(&[0.3, -2.0]).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(a.witness_lower_bound(&[0.0, 0.0]), Err(LabError::ZeroVector)));
    }

    #[test]
    fn diagonal_in_orthonormal_basis() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -3.0, 1.0]));
        let id = DMatrix::identity(3, 3);
        let a = OperatorHandle::new(m, id.clone(), id, Level(0), vec![]).unwrap();
        assert!((a.truncation_opnorm().unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(a.numerical_rank().unwrap(), 3);
    }

    #[test]
    fn non_spd_gram_is_rejected() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let a = OperatorHandle::new(DMatrix::identity(2, 2), bad, DMatrix::identity(2, 2), Level(0), vec![])
            .unwrap();
        assert!(matches!(a.truncation_opnorm(), Err(LabError::NotPositiveDefinite(_))));
    }

    #[test]
    fn image_gram_matches_explicit_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let id = DMatrix::identity(2, 2);
        let a = OperatorHandle::new(m.clone(), id.clone(), id.clone(), Level(0), vec![]).unwrap();
        let b = OperatorHandle::from_image_gram(m.transpose() * &m, id, Level(0), vec![]).unwrap();
        assert!((a.truncation_opnorm().unwrap() - b.truncation_opnorm().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn image_vectors_drop_dependent_directions() {
        let w = WeightSchedule::default();
        let basis: Vec<SeqVector> = (1..=3).map(SeqVector::basis).collect();
        let x = SeqVector::from_coeffs(vec![1.0, -2.0, 0.5]);
        let images = vec![x.scale(3.0), x.scale(-0.1), SeqVector::basis(2).scale(1e-6)];
        let op = OperatorHandle::from_image_vectors(&basis, &images, Level(0), &w, vec![]).unwrap();
        assert_eq!(op.numerical_rank().unwrap(), 2);
        // the repeated direction adds no row at all
        assert_eq!(op.singular_values().unwrap().len(), 2);
    }

    #[test]
    fn linear_map_has_exact_differences() {
        let base = (0.0, SeqVector::from_coeffs(vec![1.0, 2.0]));
        let dir = (0.0, SeqVector::from_coeffs(vec![0.5, -1.0, 3.0]));
        let w = WeightSchedule::default();
        let r = finite_diff_differential(&SeqDiffeo, &base, &dir, Level(1), &w, &DEFAULT_STEPS, "t=0").unwrap();
        assert!(r.mismatches.iter().all(|&m| m < 1e-8));
    }

    #[test]
    fn smooth_map_shows_second_order() {
        let base = (0.4, SeqVector::from_coeffs(vec![1.0, 1.0, 1.0]));
        let dir = (1.0, SeqVector::from_coeffs(vec![0.0, 1.0]));
        let w = WeightSchedule::default();
        let r = finite_diff_differential(&RhoK { k: 0 }, &base, &dir, Level(0), &w, &DEFAULT_STEPS, "t=0.4").unwrap();
        assert!(r.relative_mismatch < 1e-6, "{r:?}");
        assert!(r.order.unwrap() > 1.9, "{r:?}");
    }

    #[test]
    fn dichotomy_at_point_four() {
        let rows = opnorm_dichotomy(&[0.4], 0.1, 20, 1).unwrap();
        let r = &rows[0];
        assert!(r.l2_witness >= 0.999);
        assert!((r.log_upper_bound + 1.1182493960703473438).abs() < 1e-12);
        assert!(r.sampled_h1_lower <= r.log_upper_bound.exp());
        assert!(r.truncation_h1 <= r.log_upper_bound.exp());
    }
}
