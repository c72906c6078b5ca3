//! Brute-force series oracle for the residue engine.
//!
//! The oracle expands every denominator factor at once to a generous
//! fixed depth, multiplies the full product, and reads off the
//! coefficient of `prod z_i^{-1}` — no staging, no adaptive bounds.
//! Agreement with the staged evaluator on random terms validates the
//! per-variable truncation logic.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tautres_core::linear::{expand_inverse_linear, LinearForm};
use tautres_core::poly::{Monomial, MultiPoly};
use tautres_core::registry::{VarId, VarKind, VarRegistry};
use tautres_core::residue::{iterated_residue, RationalTerm};

fn brute_force_residue(term: &RationalTerm, depth: u32) -> MultiPoly {
    let registry = term.numerator.registry().clone();
    let rank: BTreeMap<VarId, usize> = term
        .z_order
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, i))
        .collect();
    let mut product = term.numerator.clone();
    for (form, mult) in &term.factors {
        let expansion = expand_inverse_linear(&registry, form, &rank, depth).unwrap();
        for _ in 0..*mult {
            product = &product * &expansion;
        }
    }
    let mut value = product;
    for v in &term.z_order {
        value = value.coefficient_of(*v, -1);
    }
    if term.z_order.len() % 2 == 1 {
        value.neg()
    } else {
        value
    }
}

fn zvars(registry: &Arc<VarRegistry>, d: u32) -> Vec<VarId> {
    (1..=d)
        .map(|pos| registry.register(VarKind::ResidueZ { block: 1, pos }))
        .collect()
}

#[test]
fn frozen_two_variable_example() {
    // Res Res (z1 - z2) dz1 dz2 / (z1 z2 (2 z1 - z2)):
    // the brute-force expansion gives 1; frozen.
    let registry = Arc::new(VarRegistry::new());
    let zs = zvars(&registry, 2);
    let num = &MultiPoly::var(&registry, zs[0]) - &MultiPoly::var(&registry, zs[1]);
    let mut coeffs = BTreeMap::new();
    coeffs.insert(zs[0], BigRational::from_integer(2.into()));
    coeffs.insert(zs[1], -BigRational::one());
    let mixed = LinearForm::new(BigRational::zero(), coeffs).unwrap();
    let term = RationalTerm {
        numerator: num,
        factors: vec![
            (LinearForm::var(zs[0]), 1),
            (LinearForm::var(zs[1]), 1),
            (mixed, 1),
        ],
        z_order: zs,
    };
    let oracle = brute_force_residue(&term, 12);
    assert_eq!(oracle, MultiPoly::one(&registry));
    assert_eq!(iterated_residue(&term).unwrap(), oracle);
}

#[test]
fn staged_evaluator_matches_brute_force_on_random_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for case in 0..60 {
        let registry = Arc::new(VarRegistry::new());
        let d = rng.gen_range(1..=3u32);
        let zs = zvars(&registry, d);
        let lam = MultiPoly::var(
            &registry,
            registry.register(VarKind::TorusLambda { pos: 1 }),
        );

        // random Laurent numerator in the z's and lambda
        let mut numerator = MultiPoly::zero(&registry);
        for _ in 0..rng.gen_range(1..=4) {
            let mut mono = Monomial::one();
            for &z in &zs {
                mono = mono.mul(&Monomial::var(z, rng.gen_range(-1..=3i64)));
            }
            let c = rng.gen_range(-3i64..=3);
            let lam_pow = rng.gen_range(0..=2u32);
            let t = MultiPoly::monomial(&registry, mono, BigRational::from_integer(c.into()));
            numerator = &numerator + &(&t * &lam.pow(lam_pow));
        }

        // random denominator factors: pure powers plus mixed forms whose
        // dominant variable is the highest present
        let mut factors: Vec<(LinearForm, u32)> = Vec::new();
        for &z in &zs {
            factors.push((LinearForm::var(z), rng.gen_range(1..=2u32)));
        }
        if d >= 2 && rng.gen_bool(0.7) {
            let hi = rng.gen_range(1..d as usize);
            let lo = rng.gen_range(0..hi);
            let mut coeffs = BTreeMap::new();
            coeffs.insert(
                zs[lo],
                BigRational::from_integer(rng.gen_range(1..=2i64).into()),
            );
            coeffs.insert(zs[hi], BigRational::from_integer((-1i64).into()));
            factors.push((LinearForm::new(BigRational::zero(), coeffs).unwrap(), 1));
        }
        if rng.gen_bool(0.5) {
            // an affine factor z_i - lambda
            let i = rng.gen_range(0..zs.len());
            let form =
                LinearForm::try_from_poly(&(&MultiPoly::var(&registry, zs[i]) - &lam)).unwrap();
            factors.push((form, 1));
        }

        let term = RationalTerm {
            numerator,
            factors,
            z_order: zs,
        };
        let fast = iterated_residue(&term).unwrap();
        let slow = brute_force_residue(&term, 14);
        assert_eq!(fast, slow, "case {case}");
    }
}

#[test]
fn flag_identity_frozen_small_cases() {
    use tautres_core::ratfun::RationalFunction;
    use tautres_core::residue::flag_sum_to_residue_check;
    // d = 1, m = 2, Q = z: both sides equal -1
    let registry = Arc::new(VarRegistry::new());
    let zs = zvars(&registry, 1);
    let lambdas: Vec<MultiPoly> = (1..=2)
        .map(|pos| MultiPoly::var(&registry, registry.register(VarKind::TorusLambda { pos })))
        .collect();
    let q = MultiPoly::var(&registry, zs[0]);
    let (left, right) = flag_sum_to_residue_check(&q, &lambdas, 1, &zs).unwrap();
    assert_eq!(right, MultiPoly::constant(&registry, -BigRational::one()));
    assert!(left.equiv(&RationalFunction::from_poly(right)));

    // Q = 1: degree too low, both sides vanish
    let q = MultiPoly::one(&registry);
    let (left, right) = flag_sum_to_residue_check(&q, &lambdas, 1, &zs).unwrap();
    assert!(right.is_zero());
    assert!(left.is_zero() || left.equiv(&RationalFunction::from_poly(right.clone())));

    // Q = z^{m-1}: the partial-fraction sum telescopes to (-1)^{m-1}
    // (computed by the oracle sum itself; the sign alternates with m)
    for m in 2..=4u32 {
        let registry = Arc::new(VarRegistry::new());
        let zs = zvars(&registry, 1);
        let lambdas: Vec<MultiPoly> = (1..=m)
            .map(|pos| MultiPoly::var(&registry, registry.register(VarKind::TorusLambda { pos })))
            .collect();
        let q = MultiPoly::var(&registry, zs[0]).pow(m - 1);
        let (left, right) = flag_sum_to_residue_check(&q, &lambdas, 1, &zs).unwrap();
        let want = if m % 2 == 0 {
            -BigRational::one()
        } else {
            BigRational::one()
        };
        assert_eq!(right, MultiPoly::constant(&registry, want));
        assert!(left.equiv(&RationalFunction::from_poly(right)), "m = {m}");
    }
}

#[test]
fn precheck_never_lies_on_random_terms() {
    use tautres_core::residue::vanishing_precheck;
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut prechecked = 0;
    for _ in 0..80 {
        let registry = Arc::new(VarRegistry::new());
        let d = rng.gen_range(1..=3u32);
        let zs = zvars(&registry, d);
        let mut numerator = MultiPoly::zero(&registry);
        for _ in 0..rng.gen_range(1..=3) {
            let mut mono = Monomial::one();
            for &z in &zs {
                if rng.gen_bool(0.6) {
                    mono = mono.mul(&Monomial::var(z, rng.gen_range(0..=2i64)));
                }
            }
            numerator = &numerator
                + &MultiPoly::monomial(
                    &registry,
                    mono,
                    BigRational::from_integer(rng.gen_range(-3i64..=3).into()),
                );
        }
        let mut factors: Vec<(LinearForm, u32)> = Vec::new();
        for &z in &zs {
            factors.push((LinearForm::var(z), rng.gen_range(1..=3u32)));
        }
        let term = RationalTerm {
            numerator,
            factors,
            z_order: zs,
        };
        if vanishing_precheck(&term) {
            prechecked += 1;
            assert!(
                iterated_residue(&term).unwrap().is_zero(),
                "precheck claimed zero but the residue is not"
            );
        }
    }
    assert!(prechecked > 0, "test never exercised the precheck");
}
