//! Generating functions of multiplicative-class integrals.
//!
//! Series coefficients are computed two independent ways: the direct
//! partition sum with the truncated class as integrand, and the
//! exponential formula built from connected (single-block) terms. Both
//! are returned for comparison; the difference tests the multiplicative
//! bookkeeping of the whole assembly end to end.

use std::sync::Arc;

use num::{BigRational, One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::chern::{
    chern_expr_from_c_poly, formal_v_classes, segre_from_chern, segre_in_inverse_z,
    symmetric_reduce, ChernError, ChernExpr,
};
use crate::linear::LinearForm;
use crate::poly::{Monomial, MultiPoly, PolyError};
use crate::registry::{VarId, VarKind, VarRegistry};
use crate::residue::RationalTerm;
use crate::setpart::{SetPartError, SetPartition};
use crate::tautint::{
    evaluate_partition, integrate_ghilb, IntegrateOptions, IntersectionTable, PartitionTerm,
    ProblemSpec, QTable, TautError, UniversalIntegral,
};

#[derive(Debug, Error)]
pub enum GenFunError {
    #[error(transparent)]
    Taut(#[from] TautError),
    #[error(transparent)]
    Chern(#[from] ChernError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    SetPart(#[from] SetPartError),
    #[error("custom multiplicative class must start with a_0 = 1")]
    BadLeadingCoefficient,
}

/// A multiplicative characteristic class `prod_roots f(root)`.
#[derive(Clone, Debug, PartialEq)]
pub enum MultiplicativeClass {
    /// `f(x) = 1/(1+x)` (total Segre class).
    Segre,
    /// `f(x) = 1 + x` (total Chern class).
    Chern,
    /// Polynomial `f(x) = sum a_t x^t` with `a_0 = 1`.
    Custom(Vec<BigRational>),
}

impl MultiplicativeClass {
    pub fn name(&self) -> &'static str {
        match self {
            MultiplicativeClass::Segre => "segre",
            MultiplicativeClass::Chern => "chern",
            MultiplicativeClass::Custom(_) => "custom",
        }
    }

    fn validate(&self) -> Result<(), GenFunError> {
        if let MultiplicativeClass::Custom(a) = self {
            if a.first().map(|c| !c.is_one()).unwrap_or(true) {
                return Err(GenFunError::BadLeadingCoefficient);
            }
        }
        Ok(())
    }
}

/// Named class with its series truncation order.
#[derive(Clone, Debug)]
pub struct MultiplicativeClassSpec {
    pub class: MultiplicativeClass,
    pub truncation: usize,
}

impl MultiplicativeClassSpec {
    /// Default truncation `n * k_max + 1`: everything above the total
    /// cohomological budget vanishes.
    pub fn new(class: MultiplicativeClass, n: u32, k_max: u32) -> Self {
        MultiplicativeClassSpec {
            class,
            truncation: (n as usize) * (k_max as usize) + 1,
        }
    }
}

/// The weighted-degree-`degree` part of the total class of a rank
/// `rank_total` bundle, as a Chern polynomial in `c_1..c_{rank_total}`.
pub fn class_phi(
    class: &MultiplicativeClass,
    rank_total: usize,
    degree: u32,
) -> Result<ChernExpr, GenFunError> {
    class.validate()?;
    if degree == 0 {
        return Ok(ChernExpr::Rational(BigRational::one()));
    }
    match class {
        MultiplicativeClass::Chern => Ok(if degree as usize <= rank_total {
            ChernExpr::Class(degree)
        } else {
            ChernExpr::Rational(BigRational::zero())
        }),
        MultiplicativeClass::Segre => {
            let registry = Arc::new(VarRegistry::new());
            let c = formal_v_classes(&registry, 1, rank_total);
            let series = segre_from_chern(&registry, &c, degree as usize);
            Ok(chern_expr_from_c_poly(
                &series.coefficients[degree as usize],
            ))
        }
        MultiplicativeClass::Custom(coeffs) => {
            // expand prod_i f(x_i) over scratch roots and reduce
            let registry = Arc::new(VarRegistry::new());
            let roots: Vec<VarId> = (1..=rank_total as u32)
                .map(|pos| registry.register(VarKind::ChernRootTheta { factor: 1, pos }))
                .collect();
            let mut total = MultiPoly::one(&registry);
            for &x in &roots {
                let mut f = MultiPoly::zero(&registry);
                for (t, a) in coeffs.iter().enumerate() {
                    f = &f + &MultiPoly::var(&registry, x).pow(t as u32).scale(a);
                }
                total = &total * &f;
                // degrees above the requested part never matter
                total = total.truncate_factor_degree(degree as i64);
            }
            let mut want = std::collections::BTreeMap::new();
            want.insert(1u32, degree as i64);
            let graded = total.graded_part(&want);
            let targets: Vec<VarId> = (1..=rank_total as u32)
                .map(|d| {
                    registry.register(VarKind::FormalClassV {
                        factor: 1,
                        degree: d,
                    })
                })
                .collect();
            let reduced = symmetric_reduce(&graded, &roots, &targets)?;
            Ok(chern_expr_from_c_poly(&reduced))
        }
    }
}

/// The connected (single-block) class term for `j` points: the
/// trivial-partition contribution with the degree-`nj` part of the total
/// class as integrand, as a class polynomial on one factor.
pub fn connected_term(
    class: &MultiplicativeClass,
    n: u32,
    rank: usize,
    j: u32,
    opts: &IntegrateOptions,
) -> Result<MultiPoly, GenFunError> {
    let phi = class_phi(class, rank * j as usize, n * j)?;
    let spec = ProblemSpec::manifold(n, j, rank, phi);
    spec.validate()?;
    let registry = Arc::new(VarRegistry::new());
    let term = evaluate_partition(&spec, &registry, &SetPartition::trivial(j)?, opts)?;
    // single factor: the products are monomials on factor 1
    let mut acc = MultiPoly::zero(&registry);
    for p in &term.products {
        debug_assert_eq!(p.blocks.len(), 1);
        acc = &acc + &p.blocks[0].scale(&p.coeff);
    }
    Ok(acc)
}

/// One series coefficient computed both ways.
#[derive(Clone, Debug)]
pub struct SeriesCoefficient {
    pub k: u32,
    /// Direct partition sum (the full integral machinery).
    pub direct: UniversalIntegral,
    /// Product-of-connected-terms joint polynomial per partition.
    pub connected_per_partition: Vec<(SetPartition, MultiPoly)>,
    /// Per-partition agreement of the two routes.
    pub agree: bool,
    /// Contracted values of both routes, when a table is available.
    pub direct_total: Option<BigRational>,
    pub connected_total: Option<BigRational>,
}

/// Full report over `k <= k_max`.
#[derive(Clone, Debug)]
pub struct SeriesReport {
    pub class_name: String,
    pub n: u32,
    pub rank: usize,
    pub coefficients: Vec<SeriesCoefficient>,
    pub all_agree: bool,
    /// `sum_k total_k q^k` when a table is available.
    pub q_series: Option<MultiPoly>,
}

fn compute_coefficient(
    spec: &MultiplicativeClassSpec,
    n: u32,
    rank: usize,
    k: u32,
    connected: &[MultiPoly],
    opts: &IntegrateOptions,
    table: Option<&IntersectionTable>,
) -> Result<SeriesCoefficient, GenFunError> {
    let phi = class_phi(&spec.class, rank * k as usize, n * k)?;
    let pspec = ProblemSpec::manifold(n, k, rank, phi);
    let direct = integrate_ghilb(&pspec, table, opts)?;

    // product route: per partition, tensor the connected terms
    let registry = Arc::new(VarRegistry::new());
    let mut connected_per_partition = Vec::new();
    let mut agree = true;
    for term in &direct.per_partition {
        let mut joint_b = MultiPoly::one(&registry);
        for (idx, block) in term.partition.blocks().iter().enumerate() {
            let r_j = &connected[block.len() - 1];
            joint_b = &joint_b * &rebase_to_factor(r_j, &registry, idx as u32 + 1);
        }
        let joint_a = rebase_joint(term, &registry);
        if joint_a != joint_b {
            agree = false;
        }
        connected_per_partition.push((term.partition.clone(), joint_b));
    }

    let (direct_total, connected_total) = match table {
        Some(table) => {
            let d = direct.total.clone();
            let mut acc = BigRational::zero();
            for (_, joint) in &connected_per_partition {
                acc += contract_joint(joint, table)?;
            }
            (d, Some(acc * &direct.normalization))
        }
        None => (None, None),
    };
    Ok(SeriesCoefficient {
        k,
        direct,
        connected_per_partition,
        agree,
        direct_total,
        connected_total,
    })
}

fn rebase_to_factor(p: &MultiPoly, registry: &Arc<VarRegistry>, factor: u32) -> MultiPoly {
    p.rename_vars(registry, |kind| match kind {
        VarKind::FormalClassX { degree, .. } => VarKind::FormalClassX { factor, degree },
        VarKind::FormalClassV { degree, .. } => VarKind::FormalClassV { factor, degree },
        other => other,
    })
}

/// Compute series coefficients for `k = 1..k_max` via the direct
/// partition sum and via products of connected terms, and compare.
pub fn series_coefficients(
    spec: &MultiplicativeClassSpec,
    n: u32,
    rank: usize,
    k_max: u32,
    opts: &IntegrateOptions,
    table: Option<&IntersectionTable>,
) -> Result<SeriesReport, GenFunError> {
    spec.class.validate()?;
    // connected terms R_j, j = 1..k_max
    let mut connected: Vec<MultiPoly> = Vec::with_capacity(k_max as usize);
    for j in 1..=k_max {
        connected.push(connected_term(&spec.class, n, rank, j, opts)?);
    }

    let ks: Vec<u32> = (1..=k_max).collect();
    let computed: Vec<Result<SeriesCoefficient, GenFunError>> = ks
        .par_iter()
        .map(|&k| compute_coefficient(spec, n, rank, k, &connected, opts, table))
        .collect();
    let mut coefficients = Vec::with_capacity(k_max as usize);
    let mut all_agree = true;
    for c in computed {
        let c = c?;
        all_agree &= c.agree;
        coefficients.push(c);
    }
    coefficients.sort_by_key(|c| c.k);

    let q_series = table.map(|_| {
        let registry = Arc::new(VarRegistry::new());
        let q = registry.register(VarKind::FormalSeriesQ);
        let mut acc = MultiPoly::zero(&registry);
        for c in &coefficients {
            if let Some(v) = &c.direct_total {
                acc =
                    &acc + &MultiPoly::monomial(&registry, Monomial::var(q, c.k as i64), v.clone());
            }
        }
        acc
    });

    Ok(SeriesReport {
        class_name: spec.class.name().to_string(),
        n,
        rank,
        coefficients,
        all_agree,
        q_series,
    })
}

fn rebase_joint(term: &PartitionTerm, registry: &Arc<VarRegistry>) -> MultiPoly {
    term.joint_polynomial(registry)
}

fn contract_joint(joint: &MultiPoly, table: &IntersectionTable) -> Result<BigRational, TautError> {
    // split each monomial by factor and contract factorwise
    let registry = joint.registry();
    let mut acc = BigRational::zero();
    for (m, c) in joint.terms() {
        let mut by_factor: std::collections::BTreeMap<u32, Vec<(VarId, i64)>> = Default::default();
        for (v, e) in m.iter() {
            let f = registry.kind(v).factor().expect("class variable");
            by_factor.entry(f).or_default().push((v, e));
        }
        let mut v = c.clone();
        for (_, part) in by_factor {
            let mono = Monomial(part);
            let p = MultiPoly::monomial(registry, mono, BigRational::one());
            v *= table.contract(&p)?;
        }
        acc += v;
    }
    Ok(acc)
}

/// The literal connected-term residue integrand of the top Segre series:
/// Vandermonde x `Q_{k-1}` x `s_V` x `prod_i S(1/z_i) s_X(1/z_i)` over
/// the mixed factors and `(z_1..z_{k-1})^{r+n+1}`. The `S` series is
/// truncated at `s_depth` powers of `1/z`.
pub fn segre_kernel(
    registry: &Arc<VarRegistry>,
    k: u32,
    n: u32,
    rank: usize,
    q_table: &QTable,
    s_depth: u32,
) -> Result<RationalTerm, GenFunError> {
    let d = k - 1;
    let z_vars: Vec<VarId> = (1..=d)
        .map(|pos| registry.register(VarKind::ResidueZ { block: 1, pos }))
        .collect();

    // total Segre class of V up to degree n, in formal classes
    let v_classes = formal_v_classes(registry, 1, rank);
    let sv_series = segre_from_chern(registry, &v_classes, n as usize);
    let mut s_v = MultiPoly::zero(registry);
    for c in &sv_series.coefficients {
        s_v = &s_v + c;
    }

    if d == 0 {
        // no residue variables: the kernel is the degree-n part of s(V)
        let mut want = std::collections::BTreeMap::new();
        want.insert(1u32, n as i64);
        return Ok(RationalTerm {
            numerator: s_v.graded_part(&want),
            factors: Vec::new(),
            z_order: z_vars,
        });
    }

    let mut numerator = s_v;
    // Vandermonde and Q
    for i in 0..d as usize {
        for j in i + 1..d as usize {
            numerator = &numerator
                * &(&MultiPoly::var(registry, z_vars[i]) - &MultiPoly::var(registry, z_vars[j]));
        }
    }
    numerator = &numerator * &q_table.polynomial(registry, d, &z_vars)?;

    // S(1/z_i) = prod_j sum_t (-1)^t (1 + theta_j)^t / z^t, reduced to
    // classes of V; and the Segre factor of X
    let theta: Vec<VarId> = (1..=rank as u32)
        .map(|pos| registry.register(VarKind::ChernRootTheta { factor: 1, pos }))
        .collect();
    let targets: Vec<VarId> = v_classes.iter().map(|p| p.variables()[0]).collect();
    let x_classes = crate::chern::formal_x_classes(registry, 1, n as usize);
    let sx_series = segre_from_chern(registry, &x_classes, n as usize);
    for &z in &z_vars {
        let mut s_factor = MultiPoly::one(registry);
        for &t in &theta {
            let one_plus = &MultiPoly::one(registry) + &MultiPoly::var(registry, t);
            let mut series = MultiPoly::zero(registry);
            for power in 0..=s_depth {
                let mut piece = one_plus.pow(power).truncate_factor_degree(n as i64);
                piece = piece.mul_term(&Monomial::var(z, -(power as i64)), &BigRational::one());
                if power % 2 == 1 {
                    piece = piece.neg();
                }
                series = &series + &piece;
            }
            s_factor = (&s_factor * &series).truncate_factor_degree(n as i64);
        }
        let s_factor = symmetric_reduce(&s_factor, &theta, &targets)?;
        numerator = &numerator * &s_factor;
        numerator = &numerator * &segre_in_inverse_z(&sx_series, z);
        numerator = numerator.truncate_factor_degree(n as i64);
    }

    let mut factors: Vec<(LinearForm, u32)> = Vec::new();
    for i in 1..=d {
        for j in i..=d {
            for q in (i + j)..=d {
                let mut coeffs: std::collections::BTreeMap<VarId, BigRational> = Default::default();
                for (v, delta) in [
                    (z_vars[i as usize - 1], 1i64),
                    (z_vars[j as usize - 1], 1),
                    (z_vars[q as usize - 1], -1),
                ] {
                    *coeffs.entry(v).or_insert_with(BigRational::zero) +=
                        BigRational::from_integer(delta.into());
                }
                factors.push((LinearForm::new(BigRational::zero(), coeffs)?, 1));
            }
        }
    }
    for &z in &z_vars {
        factors.push((LinearForm::var(z), rank as u32 + n + 1));
    }
    Ok(RationalTerm {
        numerator,
        factors,
        z_order: z_vars,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_phi_segre_small() {
        // rank 2: sigma_2 = c1^2 - c2
        let phi = class_phi(&MultiplicativeClass::Segre, 2, 2).unwrap();
        assert_eq!(phi.homogeneous_degree().unwrap(), 2);
        let registry = Arc::new(VarRegistry::new());
        let c = formal_v_classes(&registry, 1, 2);
        let p = phi.eval(&registry, &mut |i| c[i as usize - 1].clone());
        let want = &c[0].pow(2) - &c[1];
        assert_eq!(p, want);
    }

    #[test]
    fn class_phi_chern_is_single_class() {
        let phi = class_phi(&MultiplicativeClass::Chern, 4, 3).unwrap();
        assert_eq!(phi, ChernExpr::Class(3));
        let phi = class_phi(&MultiplicativeClass::Chern, 2, 3).unwrap();
        assert_eq!(phi, ChernExpr::Rational(BigRational::zero()));
    }

    #[test]
    fn custom_class_matches_chern() {
        // f = 1 + x reproduces the Chern class
        let ones = vec![BigRational::one(), BigRational::one()];
        for degree in 1..=3u32 {
            let custom = class_phi(&MultiplicativeClass::Custom(ones.clone()), 3, degree).unwrap();
            let chern = class_phi(&MultiplicativeClass::Chern, 3, degree).unwrap();
            let registry = Arc::new(VarRegistry::new());
            let c = formal_v_classes(&registry, 1, 3);
            let a = custom.eval(&registry, &mut |i| c[i as usize - 1].clone());
            let b = chern.eval(&registry, &mut |i| c[i as usize - 1].clone());
            assert_eq!(a, b, "degree {degree}");
        }
    }

    #[test]
    fn segre_multiplicativity_at_k1() {
        // s(V' + V'') = s(V') s(V''): check the degree-n kernel for k = 1
        // on a split bundle against the product of the parts
        let registry = Arc::new(VarRegistry::new());
        let n = 2usize;
        // V' rank 1 with class a1; V'' rank 1 with class b1: represent the
        // split bundle by explicit root variables
        let a = MultiPoly::var(
            &registry,
            registry.register(VarKind::ChernRootTheta { factor: 1, pos: 1 }),
        );
        let b = MultiPoly::var(
            &registry,
            registry.register(VarKind::ChernRootTheta { factor: 1, pos: 2 }),
        );
        // chern classes of the sum: e1 = a+b, e2 = ab
        let c_sum = vec![&a + &b, &a * &b];
        let s_sum = segre_from_chern(&registry, &c_sum, n);
        let s_a = segre_from_chern(&registry, std::slice::from_ref(&a), n);
        let s_b = segre_from_chern(&registry, std::slice::from_ref(&b), n);
        // compare total series coefficients up to degree n
        for d in 0..=n {
            let mut conv = MultiPoly::zero(&registry);
            for i in 0..=d {
                conv = &conv + &(&s_a.coefficients[i] * &s_b.coefficients[d - i]);
            }
            assert_eq!(s_sum.coefficients[d], conv, "degree {d}");
        }
    }

    #[test]
    fn point_base_higher_coefficients_vanish() {
        // n = 0: all k >= 2 coefficients of the Segre series vanish
        let spec = MultiplicativeClassSpec::new(MultiplicativeClass::Segre, 0, 4);
        let mut table = IntersectionTable::new();
        table.insert(Vec::new(), BigRational::one());
        let report =
            series_coefficients(&spec, 0, 1, 4, &IntegrateOptions::default(), Some(&table))
                .unwrap();
        assert!(report.all_agree);
        let totals: Vec<BigRational> = report
            .coefficients
            .iter()
            .map(|c| c.direct_total.clone().unwrap())
            .collect();
        assert_eq!(totals[0], BigRational::one()); // k = 1: s_0 of a point
        for (i, t) in totals.iter().enumerate().skip(1) {
            assert!(t.is_zero(), "k = {} must vanish on a point, got {t}", i + 1);
        }
    }

    #[test]
    fn segre_kernel_bookkeeping_matches_assembly() {
        // the literal connected kernel carries the z-power r+n+1 where the
        // truncated-integrand assembly has n+1: the twisted total Segre
        // class contributes z^{-r} per variable, shifted into the
        // denominator. Vandermonde, Q and the mixed factors coincide.
        use crate::tautint::{block_integrand, Mode, XData};
        let (k, n, rank) = (3u32, 2u32, 1usize);
        let registry = Arc::new(VarRegistry::new());
        let kernel = segre_kernel(&registry, k, n, rank, &QTable::new(), 4).unwrap();
        let registry2 = Arc::new(VarRegistry::new());
        let parts = block_integrand(
            &registry2,
            1,
            k,
            n,
            Mode::Manifold,
            &XData::Formal { n },
            &QTable::new(),
        )
        .unwrap();
        let pure_power = |factors: &[(crate::linear::LinearForm, u32)]| -> Vec<u32> {
            let mut powers: Vec<u32> = factors
                .iter()
                .filter(|(f, _)| f.coefficients.len() == 1)
                .map(|(_, m)| *m)
                .collect();
            powers.sort_unstable();
            powers
        };
        assert_eq!(
            pure_power(&kernel.factors),
            vec![rank as u32 + n + 1; (k - 1) as usize]
        );
        assert_eq!(
            pure_power(&parts.den_factors),
            vec![n + 1; (k - 1) as usize]
        );
        // identical mixed-factor structure
        let mixed = |factors: &[(crate::linear::LinearForm, u32)]| {
            factors
                .iter()
                .filter(|(f, _)| f.coefficients.len() > 1)
                .count()
        };
        assert_eq!(mixed(&kernel.factors), mixed(&parts.den_factors));
    }

    #[test]
    fn segre_kernel_shapes() {
        let registry = Arc::new(VarRegistry::new());
        // k = 1: degree-n part of s(V)
        let kernel = segre_kernel(&registry, 1, 2, 1, &QTable::new(), 4).unwrap();
        assert!(kernel.factors.is_empty());
        assert!(kernel.z_order.is_empty());
        assert_eq!(kernel.numerator.homogeneous_degree(), Some(2));
        // k = 2, r = 1: denominator power on z is r + n + 1 = n + 2
        let registry = Arc::new(VarRegistry::new());
        let kernel = segre_kernel(&registry, 2, 2, 1, &QTable::new(), 4).unwrap();
        let z = registry
            .lookup(VarKind::ResidueZ { block: 1, pos: 1 })
            .unwrap();
        let power = kernel
            .factors
            .iter()
            .find(|(f, _)| f.contains(z) && f.coefficients.len() == 1)
            .map(|(_, m)| *m)
            .unwrap();
        assert_eq!(power, 4); // 1 + 2 + 1
    }
}
