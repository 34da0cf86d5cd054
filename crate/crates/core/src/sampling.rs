//! Seeded random test inputs shared by experiments and germ sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bump::make_bump;
use crate::error::Result;
use crate::scale::{GridFunction, SeqVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sum of three stretched bumps with random centres in `centre +- 1.5`,
/// sampled on `[centre - 3, centre + 3]` and vanishing at both ends.
pub fn random_bump_mixture(rng: &mut impl Rng, centre: f64, spacing: f64) -> Result<GridFunction> {
    let b = make_bump();
    let parts: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            let width = rng.random_range(0.3..1.5);
            let c = centre + rng.random_range(-1.5..1.5);
            let amp: f64 = rng.sample(StandardNormal);
            (c, width, amp)
        })
        .collect();
    GridFunction::from_fn(centre - 3.0, centre + 3.0, spacing, |x| {
        parts
            .iter()
            .map(|&(c, w, a)| a * b.value((x - c) / w))
            .sum()
    })
}

/// Standard normal coefficients on `e_1..e_n`.
pub fn random_seq(rng: &mut impl Rng, n: usize) -> SeqVector {
    SeqVector::from_coeffs((0..n).map(|_| StandardNormal.sample(rng)).collect())
}

/// Unit vector in `R^n` under the Euclidean norm.
pub fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
