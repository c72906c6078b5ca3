//! Engine benchmarks: raw polynomial arithmetic, a deepest-term residue,
//! a full partition-sum integral, and the localization oracle.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use num::BigRational;
use std::collections::BTreeMap;
use tautres_core::chern::parse_phi;
use tautres_core::linear::LinearForm;
use tautres_core::oracle::{ab_integrate, ToricSurfaceChart};
use tautres_core::poly::MultiPoly;
use tautres_core::registry::{VarKind, VarRegistry};
use tautres_core::residue::{iterated_residue, RationalTerm};
use tautres_core::tautint::{integrate_ghilb, IntegrateOptions, ProblemSpec};

fn poly_mul(c: &mut Criterion) {
    let registry = Arc::new(VarRegistry::new());
    let vars: Vec<MultiPoly> = (1..=4)
        .map(|pos| {
            MultiPoly::var(
                &registry,
                registry.register(VarKind::ChernRootTheta { factor: 1, pos }),
            )
        })
        .collect();
    let sum = vars
        .iter()
        .fold(MultiPoly::one(&registry), |acc, v| &acc + v);
    let a = sum.pow(5);
    let b = (&sum + &MultiPoly::one(&registry)).pow(4);
    c.bench_function("poly_mul_330x70_terms", |bench| {
        bench.iter(|| std::hint::black_box(&a) * std::hint::black_box(&b))
    });
}

fn deepest_residue_k3(c: &mut Criterion) {
    let registry = Arc::new(VarRegistry::new());
    let z1 = registry.register(VarKind::ResidueZ { block: 1, pos: 1 });
    let z2 = registry.register(VarKind::ResidueZ { block: 1, pos: 2 });
    let theta = MultiPoly::var(
        &registry,
        registry.register(VarKind::ChernRootTheta { factor: 1, pos: 1 }),
    );
    let roots = vec![
        theta.clone(),
        &theta + &MultiPoly::var(&registry, z1),
        &theta + &MultiPoly::var(&registry, z2),
    ];
    let phi = parse_phi("c1^6").unwrap();
    let phi_poly = tautres_core::chern::phi_eval_on_roots(&registry, &phi, &roots).unwrap();
    let numerator = &phi_poly * &(&MultiPoly::var(&registry, z1) - &MultiPoly::var(&registry, z2));
    let mut mixed = BTreeMap::new();
    mixed.insert(z1, BigRational::from_integer(2.into()));
    mixed.insert(z2, BigRational::from_integer((-1).into()));
    let term = RationalTerm {
        numerator,
        factors: vec![
            (LinearForm::var(z1), 3),
            (LinearForm::var(z2), 3),
            (
                LinearForm::new(BigRational::from_integer(0.into()), mixed).unwrap(),
                1,
            ),
        ],
        z_order: vec![z1, z2],
    };
    c.bench_function("residue_k3_deepest_n2", |bench| {
        bench.iter(|| iterated_residue(std::hint::black_box(&term)).unwrap())
    });
}

fn integrate_k3(c: &mut Criterion) {
    let spec = ProblemSpec::manifold(2, 3, 1, parse_phi("c1^4*c2").unwrap());
    let opts = IntegrateOptions::default();
    c.bench_function("integrate_ghilb_n2_k3", |bench| {
        bench.iter(|| integrate_ghilb(std::hint::black_box(&spec), None, &opts).unwrap())
    });
}

fn oracle_k3(c: &mut Criterion) {
    let surface = ToricSurfaceChart::p2(2);
    let phi = parse_phi("c1^6").unwrap();
    c.bench_function("oracle_p2_k3", |bench| {
        bench.iter(|| ab_integrate(std::hint::black_box(&surface), 3, &phi).unwrap())
    });
}

criterion_group!(
    benches,
    poly_mul,
    deepest_residue_k3,
    integrate_k3,
    oracle_k3
);
criterion_main!(benches);
