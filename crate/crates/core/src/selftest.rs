//! The acceptance suite: ten criteria, each an exact check (zero
//! tolerance) runnable from tests or the `selftest` CLI command.

use std::sync::Arc;
use std::time::Instant;

use num::{BigInt, BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chern::ChernExpr;
use crate::genfun::{series_coefficients, MultiplicativeClass, MultiplicativeClassSpec};
use crate::jsonio::{to_stable_string, universal_integral_to_json};
use crate::linear::LinearForm;
use crate::oracle::{ab_integrate, ToricSurfaceChart};
use crate::poly::{Monomial, MultiPoly};
use crate::registry::{VarId, VarKind, VarRegistry};
use crate::residue::{flag_sum_to_residue_check, iterated_residue, RationalTerm};
use crate::tautint::positivity::chern_monomials;
use crate::tautint::{
    closed::{closed_form_k2, closed_form_k3},
    integrate_ghilb, q_polynomial, IntegrateOptions, IntersectionTable, ProblemSpec, QTable,
};

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Criterion = (u32, &'static str, fn() -> Result<String, String>);

/// Run every criterion (or a single one), in order.
pub fn run_selftest(only: Option<u32>) -> Vec<CriterionResult> {
    let criteria: Vec<Criterion> = vec![
        (1, "k=1 reduction", criterion_1),
        (2, "closed-form k=2 equivalence", criterion_2),
        (3, "closed-form k=3 equivalence", criterion_3),
        (4, "surface oracle agreement", criterion_4),
        (5, "flag-sum/residue identity", criterion_5),
        (6, "degree bookkeeping", criterion_6),
        (7, "pruning neutrality", criterion_7),
        (8, "exponential-formula identity", criterion_8),
        (9, "Q-table fidelity", criterion_9),
        (10, "residue convention", criterion_10),
    ];
    let mut out = Vec::new();
    for (id, name, f) in criteria {
        if let Some(only) = only {
            if only != id {
                continue;
            }
        }
        let start = Instant::now();
        let (passed, detail) = match f() {
            Ok(d) => (true, d),
            Err(e) => (false, e),
        };
        out.push(CriterionResult {
            id,
            name,
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    out
}

// ---------------------------------------------------------------------
// shared helpers

/// Deterministic generic intersection table: every degree-n monomial in
/// the classes of `X` and a rank-`r` bundle gets a distinct exact value.
pub fn generic_table(n: u32, rank: usize, seed: u64) -> IntersectionTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = IntersectionTable::new();
    for m in class_monomials(n, rank) {
        let num = rng.gen_range(-40i64..=40);
        let den = rng.gen_range(1i64..=7);
        table.insert(m, BigRational::new(BigInt::from(num), BigInt::from(den)));
    }
    table
}

/// All degree-`n` monomials in `{c_1(X)..c_n(X), c_1(V)..c_r(V)}`.
pub fn class_monomials(n: u32, rank: usize) -> Vec<Vec<(VarKind, i64)>> {
    let kinds: Vec<(VarKind, i64)> = (1..=n)
        .map(|d| {
            (
                VarKind::FormalClassX {
                    factor: 1,
                    degree: d,
                },
                d as i64,
            )
        })
        .chain((1..=rank as u32).map(|d| {
            (
                VarKind::FormalClassV {
                    factor: 1,
                    degree: d,
                },
                d as i64,
            )
        }))
        .collect();
    fn walk(
        kinds: &[(VarKind, i64)],
        idx: usize,
        remaining: i64,
        current: &mut Vec<(VarKind, i64)>,
        out: &mut Vec<Vec<(VarKind, i64)>>,
    ) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        if idx >= kinds.len() {
            return;
        }
        let (kind, deg) = kinds[idx];
        for e in (0..=remaining / deg).rev() {
            if e > 0 {
                current.push((kind, e));
            }
            walk(kinds, idx + 1, remaining - e * deg, current, out);
            if e > 0 {
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(&kinds, 0, n as i64, &mut Vec::new(), &mut out);
    out
}

/// The `P^2` table for `V = O(d)`.
pub fn p2_table(d: i64) -> IntersectionTable {
    let mut table = IntersectionTable::new();
    let cx1 = VarKind::FormalClassX {
        factor: 1,
        degree: 1,
    };
    let cx2 = VarKind::FormalClassX {
        factor: 1,
        degree: 2,
    };
    let cv1 = VarKind::FormalClassV {
        factor: 1,
        degree: 1,
    };
    table.insert(vec![(cx1, 2)], BigRational::from_integer(9.into()));
    table.insert(vec![(cx2, 1)], BigRational::from_integer(3.into()));
    table.insert(
        vec![(cx1, 1), (cv1, 1)],
        BigRational::from_integer((3 * d).into()),
    );
    table.insert(vec![(cv1, 2)], BigRational::from_integer((d * d).into()));
    table
}

/// A random homogeneous Chern polynomial of the given weighted degree in
/// `c_1..c_max_index`.
pub fn random_phi(rng: &mut ChaCha8Rng, degree: u32, max_index: u32) -> ChernExpr {
    let monomials = chern_monomials(degree, max_index);
    let count = rng.gen_range(1..=3.min(monomials.len()));
    // accumulate per monomial so repeated picks cannot cancel to zero
    let mut coeffs: std::collections::BTreeMap<usize, i64> = Default::default();
    for _ in 0..count {
        let pick = rng.gen_range(0..monomials.len());
        let c = rng.gen_range(-5i64..=5);
        *coeffs.entry(pick).or_insert(0) += c;
    }
    coeffs.retain(|_, c| *c != 0);
    if coeffs.is_empty() {
        coeffs.insert(rng.gen_range(0..monomials.len()), 1);
    }
    let mut terms: Vec<ChernExpr> = coeffs
        .into_iter()
        .map(|(pick, c)| {
            ChernExpr::Product(vec![
                ChernExpr::Rational(BigRational::from_integer(c.into())),
                monomials[pick].0.clone(),
            ])
        })
        .collect();
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        ChernExpr::Sum(terms)
    }
}

/// Direct `k = 1` evaluation: the degree-`n` part of `Phi(V)` contracted
/// with the table, computed without the residue machinery.
fn k1_direct(
    n: u32,
    rank: usize,
    phi: &ChernExpr,
    table: &IntersectionTable,
) -> Result<BigRational, String> {
    let registry = Arc::new(VarRegistry::new());
    let c = crate::chern::formal_v_classes(&registry, 1, rank);
    let expanded = phi.eval(&registry, &mut |i| {
        if (i as usize) <= rank {
            c[i as usize - 1].clone()
        } else {
            MultiPoly::zero(&registry)
        }
    });
    let mut want = std::collections::BTreeMap::new();
    want.insert(1u32, n as i64);
    let graded = expanded.graded_part(&want);
    table.contract(&graded).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------
// criteria

fn criterion_1() -> Result<String, String> {
    let mut checks = 0;
    for n in 1..=3u32 {
        for rank in 1..=2usize {
            let table = generic_table(n, rank, 100 + n as u64 * 10 + rank as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(4200 + n as u64 * 10 + rank as u64);
            for _ in 0..10 {
                let phi = random_phi(&mut rng, n, rank as u32);
                let spec = ProblemSpec::manifold(n, 1, rank, phi.clone());
                let ui = integrate_ghilb(&spec, Some(&table), &IntegrateOptions::default())
                    .map_err(|e| format!("integrate failed (n={n}, r={rank}): {e}"))?;
                let direct = k1_direct(n, rank, &phi, &table)?;
                let got = ui.total.unwrap();
                if got != direct {
                    return Err(format!(
                        "k=1 mismatch at n={n}, r={rank}, phi={}: engine {got}, direct {direct}",
                        phi.to_source()
                    ));
                }
                checks += 1;
            }
        }
    }
    Ok(format!(
        "{checks} random integrands matched the direct contraction"
    ))
}

fn criterion_2() -> Result<String, String> {
    let mut checks = 0;
    for n in 1..=3u32 {
        for rank in 1..=2usize {
            let table = generic_table(n, rank, 200 + n as u64 * 10 + rank as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(4300 + n as u64 * 10 + rank as u64);
            for _ in 0..10 {
                let phi = random_phi(&mut rng, 2 * n, 2 * rank as u32);
                let spec = ProblemSpec::manifold(n, 2, rank, phi.clone());
                let opts = IntegrateOptions::default();
                let a = integrate_ghilb(&spec, Some(&table), &opts)
                    .map_err(|e| format!("integrate failed (n={n}, r={rank}): {e}"))?;
                let b = closed_form_k2(&spec, Some(&table), &opts)
                    .map_err(|e| format!("closed form failed (n={n}, r={rank}): {e}"))?;
                if !a.same_class_data(&b) {
                    return Err(format!(
                        "k=2 class data mismatch at n={n}, r={rank}, phi={}",
                        phi.to_source()
                    ));
                }
                if a.total != b.total {
                    return Err(format!(
                        "k=2 total mismatch at n={n}, r={rank}, phi={}: {:?} vs {:?}",
                        phi.to_source(),
                        a.total,
                        b.total
                    ));
                }
                checks += 1;
            }
        }
    }
    Ok(format!(
        "{checks} random integrands matched the closed k=2 formula exactly"
    ))
}

fn criterion_3() -> Result<String, String> {
    let mut checks = 0;
    for n in 1..=2u32 {
        let rank = 1usize;
        let table = generic_table(n, rank, 300 + n as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(4400 + n as u64);
        for _ in 0..5 {
            let phi = random_phi(&mut rng, 3 * n, 3);
            let spec = ProblemSpec::manifold(n, 3, rank, phi.clone());
            let opts = IntegrateOptions::default();
            let a = integrate_ghilb(&spec, Some(&table), &opts)
                .map_err(|e| format!("integrate failed (n={n}): {e}"))?;
            let b = closed_form_k3(&spec, Some(&table), &opts)
                .map_err(|e| format!("closed form failed (n={n}): {e}"))?;
            if !a.same_class_data(&b) {
                return Err(format!(
                    "k=3 class data mismatch at n={n}, phi={}",
                    phi.to_source()
                ));
            }
            if a.total != b.total {
                return Err(format!(
                    "k=3 total mismatch at n={n}, phi={}: {:?} vs {:?}",
                    phi.to_source(),
                    a.total,
                    b.total
                ));
            }
            checks += 1;
        }
    }
    Ok(format!(
        "{checks} random integrands matched the closed k=3 formula exactly"
    ))
}

fn criterion_4() -> Result<String, String> {
    let mut checks = 0;
    for k in 2..=4u32 {
        let monomials: Vec<_> = chern_monomials(2 * k, k).into_iter().take(10).collect();
        for (phi, source) in &monomials {
            let spec = ProblemSpec::manifold(2, k, 1, phi.clone());
            let ui = integrate_ghilb(&spec, None, &IntegrateOptions::default())
                .map_err(|e| format!("integrate failed (k={k}, phi={source}): {e}"))?;
            for d in 1..=3i64 {
                let table = p2_table(d);
                let engine = ui.contract(&table).map_err(|e| e.to_string())?;
                let surface = ToricSurfaceChart::p2(d);
                let oracle = ab_integrate(&surface, k, phi)
                    .map_err(|e| format!("oracle failed (k={k}, d={d}, phi={source}): {e}"))?
                    .as_rational()
                    .ok_or_else(|| {
                        format!("oracle value not rational (k={k}, d={d}, phi={source})")
                    })?;
                if engine != oracle {
                    return Err(format!(
                        "oracle mismatch at k={k}, d={d}, phi={source}: engine {engine}, oracle {oracle}"
                    ));
                }
                checks += 1;
            }
        }
    }
    Ok(format!(
        "{checks} (k, d, phi) combinations matched the localization oracle exactly"
    ))
}

fn criterion_5() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let mut checks = 0;
    let mut remaining = 20;
    'outer: for d in 1..=3usize {
        for m in (d.max(2))..=5usize {
            if remaining == 0 {
                break 'outer;
            }
            let registry = Arc::new(VarRegistry::new());
            let z_vars: Vec<VarId> = (1..=d as u32)
                .map(|pos| registry.register(VarKind::ResidueZ { block: 1, pos }))
                .collect();
            let lambdas: Vec<MultiPoly> = (1..=m as u32)
                .map(|pos| {
                    MultiPoly::var(&registry, registry.register(VarKind::TorusLambda { pos }))
                })
                .collect();
            let degree = rng.gen_range(0..=6u32);
            let q = random_homogeneous_z_poly(&mut rng, &registry, &z_vars, degree);
            let (left, right) = flag_sum_to_residue_check(&q, &lambdas, d, &z_vars)
                .map_err(|e| format!("flag check failed (d={d}, m={m}): {e}"))?;
            let right_rf = crate::ratfun::RationalFunction::from_poly(right);
            if !left.equiv(&right_rf) {
                return Err(format!(
                    "flag-sum identity failed at d={d}, m={m}, Q degree {degree}"
                ));
            }
            checks += 1;
            remaining -= 1;
        }
    }
    // exhaust the remaining random draws on the largest case
    while remaining > 0 {
        let registry = Arc::new(VarRegistry::new());
        let d = 3usize;
        let m = 5usize;
        let z_vars: Vec<VarId> = (1..=d as u32)
            .map(|pos| registry.register(VarKind::ResidueZ { block: 1, pos }))
            .collect();
        let lambdas: Vec<MultiPoly> = (1..=m as u32)
            .map(|pos| MultiPoly::var(&registry, registry.register(VarKind::TorusLambda { pos })))
            .collect();
        let degree = rng.gen_range(0..=6u32);
        let q = random_homogeneous_z_poly(&mut rng, &registry, &z_vars, degree);
        let (left, right) = flag_sum_to_residue_check(&q, &lambdas, d, &z_vars)
            .map_err(|e| format!("flag check failed (d={d}, m={m}): {e}"))?;
        let right_rf = crate::ratfun::RationalFunction::from_poly(right);
        if !left.equiv(&right_rf) {
            return Err(format!(
                "flag-sum identity failed at d={d}, m={m}, Q degree {degree}"
            ));
        }
        checks += 1;
        remaining -= 1;
    }
    Ok(format!(
        "{checks} random (d, m, Q) instances agreed exactly"
    ))
}

fn random_homogeneous_z_poly(
    rng: &mut ChaCha8Rng,
    registry: &Arc<VarRegistry>,
    z_vars: &[VarId],
    degree: u32,
) -> MultiPoly {
    if degree == 0 {
        return MultiPoly::one(registry);
    }
    let mut acc = MultiPoly::zero(registry);
    for _ in 0..3 {
        // random exponent vector summing to `degree`
        let mut exps = vec![0i64; z_vars.len()];
        for _ in 0..degree {
            exps[rng.gen_range(0..z_vars.len())] += 1;
        }
        let mut mono = Monomial::one();
        for (v, e) in z_vars.iter().zip(&exps) {
            mono = mono.mul(&Monomial::var(*v, *e));
        }
        let c = rng.gen_range(-4i64..=4);
        acc = &acc + &MultiPoly::monomial(registry, mono, BigRational::from_integer(c.into()));
    }
    if acc.is_zero() {
        MultiPoly::monomial(
            registry,
            Monomial::var(z_vars[0], degree as i64),
            BigRational::one(),
        )
    } else {
        acc
    }
}

fn criterion_6() -> Result<String, String> {
    // the degree assertions are built into the pipeline (any violation is
    // an InternalConsistency error); rerun a representative sample and
    // verify the recorded integrand degrees match (n+1)s - k
    let mut terms_checked = 0;
    let samples: Vec<(u32, u32, usize, u32)> = vec![
        // (n, k, rank, phi-degree)
        (1, 2, 1, 2),
        (2, 2, 2, 4),
        (3, 2, 1, 6),
        (1, 3, 1, 3),
        (2, 3, 1, 6),
        (2, 4, 1, 8),
    ];
    for (n, k, rank, degree) in samples {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + (n * 100 + k * 10) as u64 + rank as u64);
        let phi = random_phi(&mut rng, degree, (rank as u32) * k.min(3));
        let spec = ProblemSpec::manifold(n, k, rank, phi);
        let ui = integrate_ghilb(&spec, None, &IntegrateOptions::default())
            .map_err(|e| format!("degree assertions failed at n={n}, k={k}, r={rank}: {e}"))?;
        for term in &ui.per_partition {
            let s = term.partition.num_blocks() as i64;
            let expected = (n as i64 + 1) * s - k as i64;
            if term.integrand_degree != expected {
                return Err(format!(
                    "integrand degree {} != (n+1)s-k = {expected} at n={n}, k={k}, partition {:?}",
                    term.integrand_degree,
                    term.partition.blocks()
                ));
            }
            terms_checked += 1;
        }
    }
    Ok(format!(
        "{terms_checked} partition terms carried degree (n+1)s-k; all built-in assertions passed"
    ))
}

fn criterion_7() -> Result<String, String> {
    let mut compared = 0;
    let samples: Vec<(u32, u32, usize)> = vec![(1, 2, 1), (2, 2, 2), (2, 3, 1), (2, 4, 1)];
    for (n, k, rank) in samples {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + (n * 100 + k * 10) as u64 + rank as u64);
        let phi = random_phi(&mut rng, n * k, (rank as u32) * k.min(3));
        let spec = ProblemSpec::manifold(n, k, rank, phi);
        let table = generic_table(n, rank, 900 + n as u64 + k as u64);
        let pruned = integrate_ghilb(
            &spec,
            Some(&table),
            &IntegrateOptions {
                prune: true,
                q_table: QTable::new(),
            },
        )
        .map_err(|e| e.to_string())?;
        let unpruned = integrate_ghilb(
            &spec,
            Some(&table),
            &IntegrateOptions {
                prune: false,
                q_table: QTable::new(),
            },
        )
        .map_err(|e| e.to_string())?;
        let left = to_stable_string(&universal_integral_to_json(&pruned));
        let right = to_stable_string(&universal_integral_to_json(&unpruned));
        if left != right {
            return Err(format!(
                "pruning changed the output at n={n}, k={k}, r={rank}"
            ));
        }
        compared += 1;
    }
    Ok(format!(
        "{compared} specs produced byte-identical output with pruning on and off"
    ))
}

fn criterion_8() -> Result<String, String> {
    let spec = MultiplicativeClassSpec::new(MultiplicativeClass::Segre, 2, 4);
    let report = series_coefficients(&spec, 2, 1, 4, &IntegrateOptions::default(), None)
        .map_err(|e| format!("series computation failed: {e}"))?;
    if !report.all_agree {
        let bad: Vec<u32> = report
            .coefficients
            .iter()
            .filter(|c| !c.agree)
            .map(|c| c.k)
            .collect();
        return Err(format!(
            "direct and exponential routes disagree at k = {bad:?}"
        ));
    }
    Ok(
        "direct partition sum and exponential formula agree for k <= 4 (n=2, r=1, Segre)"
            .to_string(),
    )
}

fn criterion_9() -> Result<String, String> {
    let registry = Arc::new(VarRegistry::new());
    let zvars: Vec<VarId> = (1..=5u32)
        .map(|pos| registry.register(VarKind::ResidueZ { block: 1, pos }))
        .collect();
    // known factored forms, re-expanded independently by the parser
    let expected = [
        (2u32, "1"),
        (3, "1"),
        (4, "2*z1 + z2 - z4"),
        (5, "(2*z1 + z2 - z5)*(2*z1^2 + 3*z1*z2 - 2*z1*z5 + 2*z2*z3 - z2*z4 - z2*z5 - z3*z4 + z4*z5)"),
    ];
    for (j, source) in expected {
        let want = crate::tautint::qpoly::parse_z_expression(&registry, source, &zvars)
            .map_err(|e| e.to_string())?;
        let got = q_polynomial(&registry, j).map_err(|e| e.to_string())?;
        if got != want || got.to_string() != want.to_string() {
            return Err(format!("Q_{j} mismatch: got `{got}`, expected `{want}`"));
        }
    }
    Ok("Q_2..Q_5 byte-match the known factored forms".to_string())
}

fn criterion_10() -> Result<String, String> {
    for d in 1..=3usize {
        let registry = Arc::new(VarRegistry::new());
        let zs: Vec<VarId> = (1..=d as u32)
            .map(|pos| registry.register(VarKind::ResidueZ { block: 1, pos }))
            .collect();
        let term = RationalTerm {
            numerator: MultiPoly::one(&registry),
            factors: zs.iter().map(|z| (LinearForm::var(*z), 1)).collect(),
            z_order: zs.clone(),
        };
        let value = iterated_residue(&term).map_err(|e| e.to_string())?;
        let want = if d % 2 == 1 {
            -BigRational::one()
        } else {
            BigRational::one()
        };
        if value.as_constant() != Some(want.clone()) {
            return Err(format!(
                "orientation failed at d={d}: got {value}, expected {want}"
            ));
        }
        // monomial integrands: z^a dz / z^b has residue -[a - b == -1]
        if d == 1 {
            for (a, b) in [(0u32, 1u32), (0, 2), (1, 2), (2, 2), (3, 4)] {
                let term = RationalTerm {
                    numerator: MultiPoly::var(&registry, zs[0]).pow(a),
                    factors: vec![(LinearForm::var(zs[0]), b)],
                    z_order: zs.clone(),
                };
                let value = iterated_residue(&term).map_err(|e| e.to_string())?;
                let want = if a as i64 - b as i64 == -1 {
                    -BigRational::one()
                } else {
                    BigRational::zero()
                };
                if value.as_constant() != Some(want.clone()) {
                    return Err(format!(
                        "monomial residue z^{a}/z^{b} gave {value}, expected {want}"
                    ));
                }
            }
        }
    }
    Ok("Res dz/z = -1 and the (-1)^d orientation hold for d <= 3".to_string())
}
