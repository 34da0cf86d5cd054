use proptest::prelude::*;

use sclab::bump::{pair_with_bump, shift};
use sclab::gallery::{s_proj, seq_diffeo, seq_diffeo_inv, PhiPoly};
use sclab::operator::OperatorHandle;
use sclab::scale::{GridFunction, Level, LogScalar, SeqVector, WeightSchedule};

fn seq_vector(max_len: usize) -> impl Strategy<Value = SeqVector> {
    prop::collection::vec(-10.0f64..10.0, 1..max_len).prop_map(SeqVector::from_coeffs)
}

fn phi_poly() -> impl Strategy<Value = PhiPoly> {
    prop::collection::vec((-3i32..=3, 0.1f64..5.0), 1..5).prop_map(|terms| {
        terms
            .into_iter()
            .fold(PhiPoly::zero(), |acc, (p, c)| &acc + &PhiPoly::monomial(c, p))
    })
}

fn diffeo_truncation(t: f64, len: usize, level: Level) -> OperatorHandle {
    let basis: Vec<SeqVector> = (1..=len).map(SeqVector::basis).collect();
    OperatorHandle::from_images(
        &basis,
        |v| Ok(seq_diffeo(t, v)),
        level,
        &WeightSchedule::default(),
        Vec::new(),
    )
    .unwrap()
}

/// Smooth test function on a window covering the support of `beta_t`.
fn wave(t: f64, amps: &[f64]) -> GridFunction {
    let s = shift(t);
    GridFunction::from_fn(-s - 3.0, 1.0, 1.0 / 512.0, |x| {
        amps.iter()
            .enumerate()
            .map(|(k, a)| a * ((k + 1) as f64 * x).sin())
            .sum()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_poly_product_evaluates_to_product(a in phi_poly(), b in phi_poly(), t in 0.4f64..1.5) {
        // positive coefficients: no cancellation in the log-domain sums
        let lhs = (&a * &b).value(t).unwrap();
        let rhs = a.value(t).unwrap() * b.value(t).unwrap();
        prop_assert_eq!(lhs.sign(), 1);
        prop_assert!((lhs.logmag() - rhs.logmag()).abs() <= 1e-12 * rhs.logmag().abs().max(1.0));
    }

    #[test]
    fn seq_diffeo_round_trip(x in seq_vector(32), t in -1.0f64..1.0) {
        let back = seq_diffeo_inv(t, &seq_diffeo(t, &x));
        for n in 1..=x.len() {
            prop_assert!((back.coeff(n) - x.coeff(n)).abs() <= 1e-13 * x.coeff(n).abs().max(1.0));
        }
    }

    #[test]
    fn seq_diffeo_bounded_by_two(x in seq_vector(32), t in -1.0f64..1.0, i in 0u32..3) {
        let l = Level(i);
        prop_assert!(seq_diffeo(t, &x).norm(l) <= 2.0 * x.norm(l) * (1.0 + 1e-15));
    }

    #[test]
    fn witness_below_opnorm(v in prop::collection::vec(-1.0f64..1.0, 8), t in 0.05f64..1.0, i in 0u32..3) {
        prop_assume!(v.iter().any(|c| *c != 0.0));
        let op = diffeo_truncation(t, 8, Level(i));
        let w = op.witness_lower_bound(&v).unwrap();
        prop_assert!(w <= op.truncation_opnorm().unwrap() + 1e-10);
    }

    #[test]
    fn truncation_norm_monotone(t in 0.05f64..1.0, len in 1usize..16, i in 0u32..3) {
        let small = diffeo_truncation(t, len, Level(i)).truncation_opnorm().unwrap();
        let large = diffeo_truncation(t, len + 1, Level(i)).truncation_opnorm().unwrap();
        prop_assert!(small <= large * (1.0 + 1e-12));
    }

    #[test]
    fn s_proj_orthogonal_to_bump(amps in prop::collection::vec(-2.0f64..2.0, 1..5), t in 0.3f64..1.0) {
        let f = wave(t, &amps);
        let (_, g) = s_proj(t, &f).unwrap();
        let scale = f.l2_norm().max(1e-300);
        prop_assert!(pair_with_bump(&g, t).unwrap().abs() <= 1e-10 * scale);
    }

    #[test]
    fn log_scalar_product_matches_reals(x in -1e6f64..1e6, y in -1e6f64..1e6) {
        let p = (LogScalar::from_f64(x) * LogScalar::from_f64(y)).to_f64();
        prop_assert!((p - x * y).abs() <= 1e-13 * (x * y).abs());
    }
}
