//! Assembly and evaluation of the main integration formula.
//!
//! For each set partition of the `k` points, one block builds a rational
//! term (Vandermonde x kernel polynomial x Segre factors over mixed
//! linear denominators and `z`-powers), the blocks are multiplied with
//! the integrand evaluated on the twisted Chern roots, the iterated
//! residue is taken, and the result is reduced to formal Chern classes,
//! graded to degree `n` per factor, and optionally contracted with an
//! intersection-number table.

pub mod closed;
pub mod positivity;
pub mod qpoly;

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::chern::{
    self, segre_from_chern, segre_in_inverse_z, symmetric_reduce, BundlePresentation, BundleSpec,
    ChernError, ChernExpr,
};
use crate::linear::LinearForm;
use crate::poly::{Monomial, MultiPoly, PolyError};
use crate::ratfun::RationalFunction;
use crate::registry::{VarId, VarKind, VarRegistry};
use crate::residue::{iterated_residue, vanishing_precheck, RationalTerm, ResidueError};
use crate::setpart::{enumerate_partitions, SetPartError, SetPartition};

pub use qpoly::{q_polynomial, QTable};

#[derive(Debug, Error)]
pub enum TautError {
    #[error("integrand degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: i64, found: i64 },
    #[error("Q_{0} unknown; supply via --q-poly")]
    MissingQ(u32),
    #[error("invalid problem spec: {0}")]
    BadSpec(String),
    #[error("missing intersection-table entry for {0}")]
    MissingTableEntry(String),
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error(transparent)]
    Chern(#[from] ChernError),
    #[error(transparent)]
    SetPart(#[from] SetPartError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Evaluation mode: geometric (formal classes of `X`) or equivariant
/// over affine space with explicit torus weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Manifold,
    Equivariant,
}

/// Everything needed to evaluate one tautological integral.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub n: u32,
    pub k: u32,
    pub bundle: BundleSpec,
    pub x_tangent: BundleSpec,
    pub phi: ChernExpr,
    pub mode: Mode,
}

impl ProblemSpec {
    /// Geometric-mode spec with formal classes everywhere.
    pub fn manifold(n: u32, k: u32, rank: usize, phi: ChernExpr) -> Self {
        ProblemSpec {
            n,
            k,
            bundle: BundleSpec::formal(rank),
            x_tangent: BundleSpec::formal(n as usize),
            phi,
            mode: Mode::Manifold,
        }
    }

    pub fn validate(&self) -> Result<(), TautError> {
        if self.k == 0 {
            return Err(TautError::BadSpec("k must be at least 1".into()));
        }
        if self.x_tangent.rank != self.n as usize {
            return Err(TautError::BadSpec(format!(
                "tangent bundle rank {} does not match n = {}",
                self.x_tangent.rank, self.n
            )));
        }
        let expected = (self.n as i64) * (self.k as i64);
        let found = self.phi.homogeneous_degree()?;
        if found != expected {
            return Err(TautError::DegreeMismatch { expected, found });
        }
        let max_index = self.phi.max_index() as usize;
        if max_index > self.bundle.rank * self.k as usize {
            return Err(TautError::BadSpec(format!(
                "phi uses c{max_index} but rank(V^[k]) = {}",
                self.bundle.rank * self.k as usize
            )));
        }
        match self.mode {
            Mode::Manifold => {
                if !matches!(self.bundle.presentation, BundlePresentation::FormalClasses) {
                    return Err(TautError::BadSpec(
                        "manifold mode requires a formal-class bundle presentation".into(),
                    ));
                }
                if !matches!(
                    self.x_tangent.presentation,
                    BundlePresentation::FormalClasses
                ) {
                    return Err(TautError::BadSpec(
                        "manifold mode requires formal tangent classes".into(),
                    ));
                }
            }
            Mode::Equivariant => {
                if !matches!(
                    self.bundle.presentation,
                    BundlePresentation::ExplicitWeights(_)
                ) {
                    return Err(TautError::BadSpec(
                        "equivariant mode requires explicit bundle weights".into(),
                    ));
                }
                if !matches!(
                    self.x_tangent.presentation,
                    BundlePresentation::ExplicitWeights(_)
                ) {
                    return Err(TautError::BadSpec(
                        "equivariant mode requires explicit torus weights for the tangent bundle"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// One additive summand of a partition's contribution: a rational
/// coefficient times a product of per-block class polynomials, each
/// homogeneous of degree `n` in the canonical (factor-1) classes.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockProduct {
    pub coeff: BigRational,
    pub blocks: Vec<MultiPoly>,
}

/// The contribution of one set partition.
#[derive(Clone, Debug)]
pub struct PartitionTerm {
    pub partition: SetPartition,
    pub products: Vec<BlockProduct>,
    /// Weighted degree of the assembled integrand, asserted equal to
    /// `(n+1)s - k`.
    pub integrand_degree: i64,
    /// Whether the vanishing precheck skipped the residue computation.
    pub pruned: bool,
}

impl PartitionTerm {
    /// Reassemble the joint polynomial over per-factor variables: the sum
    /// over products of `coeff * prod_l (block_l rebased to factor l)`.
    pub fn joint_polynomial(&self, registry: &Arc<VarRegistry>) -> MultiPoly {
        let mut acc = MultiPoly::zero(registry);
        for product in &self.products {
            let mut prod = MultiPoly::constant(registry, product.coeff.clone());
            for (idx, block) in product.blocks.iter().enumerate() {
                let factor = idx as u32 + 1;
                let moved = block.rename_vars(registry, |kind| match kind {
                    VarKind::FormalClassX { degree, .. } => {
                        VarKind::FormalClassX { factor, degree }
                    }
                    VarKind::FormalClassV { degree, .. } => {
                        VarKind::FormalClassV { factor, degree }
                    }
                    other => other,
                });
                prod = &prod * &moved;
            }
            acc = &acc + &prod;
        }
        acc
    }
}

/// The universal integral: per-partition class data plus the contracted
/// total when a table is available. Per-partition data is stored exactly
/// as the formula produces it; the `1/k!` unordered normalization is
/// applied in `total` and recorded in `normalization`.
#[derive(Clone, Debug)]
pub struct UniversalIntegral {
    pub n: u32,
    pub k: u32,
    pub rank: usize,
    pub per_partition: Vec<PartitionTerm>,
    pub normalization: BigRational,
    pub total: Option<BigRational>,
}

/// Intersection numbers of degree-`n` monomials in the classes of `X`
/// and `V`, keyed by registry-independent canonical monomials.
#[derive(Clone, Debug, Default)]
pub struct IntersectionTable {
    entries: BTreeMap<Vec<(VarKind, i64)>, BigRational>,
}

impl IntersectionTable {
    pub fn new() -> Self {
        IntersectionTable::default()
    }

    /// Insert the value of a monomial given as `(kind, exponent)` pairs;
    /// kinds are normalized to factor 1.
    pub fn insert(&mut self, monomial: Vec<(VarKind, i64)>, value: BigRational) {
        let mut key: Vec<(VarKind, i64)> = monomial
            .into_iter()
            .map(|(k, e)| (normalize_kind(k), e))
            .collect();
        key.sort();
        self.entries.insert(key, value);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<(VarKind, i64)>, &BigRational)> {
        self.entries.iter()
    }

    /// Contract a class polynomial (in factor-1 classes) to a rational.
    pub fn contract(&self, p: &MultiPoly) -> Result<BigRational, TautError> {
        let registry = p.registry();
        let mut acc = BigRational::zero();
        for (m, c) in p.terms() {
            let mut key: Vec<(VarKind, i64)> = m
                .iter()
                .map(|(v, e)| (normalize_kind(registry.kind(v)), e))
                .collect();
            key.sort();
            match self.entries.get(&key) {
                Some(v) => acc += c * v,
                None => {
                    return Err(TautError::MissingTableEntry(format_table_key(&key)));
                }
            }
        }
        Ok(acc)
    }
}

fn normalize_kind(kind: VarKind) -> VarKind {
    match kind {
        VarKind::FormalClassX { degree, .. } => VarKind::FormalClassX { factor: 1, degree },
        VarKind::FormalClassV { degree, .. } => VarKind::FormalClassV { factor: 1, degree },
        other => other,
    }
}

/// Render a table key in the external `c1(X)^2*c1(V)` syntax.
pub fn format_table_key(key: &[(VarKind, i64)]) -> String {
    if key.is_empty() {
        return "1".to_string();
    }
    let mut parts: Vec<String> = Vec::new();
    let mut sorted = key.to_vec();
    sorted.sort();
    for (kind, exp) in sorted {
        let base = match kind {
            VarKind::FormalClassX { degree, .. } => format!("c{degree}(X)"),
            VarKind::FormalClassV { degree, .. } => format!("c{degree}(V)"),
            other => other.display_name(),
        };
        if exp == 1 {
            parts.push(base);
        } else {
            parts.push(format!("{base}^{exp}"));
        }
    }
    parts.join("*")
}

/// Parse the external table-key syntax.
pub fn parse_table_key(s: &str) -> Result<Vec<(VarKind, i64)>, TautError> {
    let s = s.trim();
    if s == "1" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for factor in s.split('*') {
        let factor = factor.trim();
        let (base, exp) = match factor.split_once('^') {
            Some((b, e)) => (
                b.trim(),
                e.trim()
                    .parse::<i64>()
                    .map_err(|_| TautError::BadSpec(format!("bad exponent in table key `{s}`")))?,
            ),
            None => (factor, 1),
        };
        let kind = parse_class_name(base)
            .ok_or_else(|| TautError::BadSpec(format!("bad class `{base}` in table key `{s}`")))?;
        out.push((kind, exp));
    }
    Ok(out)
}

fn parse_class_name(base: &str) -> Option<VarKind> {
    let rest = base.strip_prefix('c')?;
    let open = rest.find('(')?;
    let degree: u32 = rest[..open].parse().ok()?;
    match &rest[open..] {
        "(X)" => Some(VarKind::FormalClassX { factor: 1, degree }),
        "(V)" => Some(VarKind::FormalClassV { factor: 1, degree }),
        _ => None,
    }
}

/// Evaluation options.
#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    /// Skip residues that the vanishing conditions prove zero.
    pub prune: bool,
    pub q_table: QTable,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            prune: true,
            q_table: QTable::new(),
        }
    }
}

fn factorial(k: u32) -> BigRational {
    let mut acc = BigInt::one();
    for i in 2..=k as i64 {
        acc *= i;
    }
    BigRational::from_integer(acc)
}

/// Per-block weight `(b-1)!` carried by a block of size `b`.
///
/// The residue kernel of a size-`b` block comes with the flag-ordering
/// multiplicity of its `b-1` residue variables. The value is pinned by
/// exact cross-checks against fixed-point localization (`Hilb^k` of
/// `P^1`, `P^2` and the affine plane for k = 2, 3, 4) together with the
/// oriented residue convention and the global `1/k!` normalization.
pub(crate) fn block_multiplicity(block_size: u32) -> BigRational {
    factorial(block_size.saturating_sub(1))
}

/// Number of mixed denominator factors for a block with `d` residue
/// variables: pairs `i <= j` with `i + j <= q <= d`.
fn mixed_triples(d: u32) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for i in 1..=d {
        for j in i..=d {
            for q in (i + j)..=d {
                out.push((i, j, q));
            }
        }
    }
    out
}

/// Per-block residue data produced by [`block_integrand`].
pub struct BlockParts {
    pub numerator_factors: Vec<MultiPoly>,
    pub den_factors: Vec<(LinearForm, u32)>,
    pub z_vars: Vec<VarId>,
}

/// Assemble the residue kernel of one block: Vandermonde and `Q`
/// polynomial in the numerator; mixed factors, `z`-powers and (in
/// equivariant mode) torus-weight factors in the denominator. In
/// manifold mode the Segre series of `X` enters the numerator as a
/// Laurent polynomial in `1/z_i`.
pub fn block_integrand(
    registry: &Arc<VarRegistry>,
    factor: u32,
    block_size: u32,
    n: u32,
    mode: Mode,
    x_data: &XData,
    q_table: &QTable,
) -> Result<BlockParts, TautError> {
    let d = block_size - 1;
    let z_vars: Vec<VarId> = (1..=d)
        .map(|pos| registry.register(VarKind::ResidueZ { block: factor, pos }))
        .collect();
    if d == 0 {
        return Ok(BlockParts {
            numerator_factors: Vec::new(),
            den_factors: Vec::new(),
            z_vars,
        });
    }
    let mut numerator_factors = Vec::new();
    // Vandermonde prod_{i<j} (z_i - z_j)
    for i in 0..d as usize {
        for j in i + 1..d as usize {
            numerator_factors
                .push(&MultiPoly::var(registry, z_vars[i]) - &MultiPoly::var(registry, z_vars[j]));
        }
    }
    numerator_factors.push(q_table.polynomial(registry, d, &z_vars)?);

    let mut den_factors: Vec<(LinearForm, u32)> = Vec::new();
    for (i, j, q) in mixed_triples(d) {
        let mut coeffs: BTreeMap<VarId, BigRational> = BTreeMap::new();
        for (v, delta) in [
            (z_vars[i as usize - 1], 1i64),
            (z_vars[j as usize - 1], 1),
            (z_vars[q as usize - 1], -1),
        ] {
            *coeffs.entry(v).or_insert_with(BigRational::zero) +=
                BigRational::from_integer(delta.into());
        }
        den_factors.push((LinearForm::new(BigRational::zero(), coeffs)?, 1));
    }
    match mode {
        Mode::Manifold => {
            let series = x_data.segre_series(registry, factor, n);
            for &z in &z_vars {
                numerator_factors.push(segre_in_inverse_z(&series, z));
                den_factors.push((LinearForm::var(z), n + 1));
            }
        }
        Mode::Equivariant => {
            let weights = x_data.weights();
            for &z in &z_vars {
                den_factors.push((LinearForm::var(z), 1));
                for w in weights {
                    let diff = w - &MultiPoly::var(registry, z);
                    den_factors.push((
                        LinearForm::try_from_poly(&diff).map_err(TautError::Poly)?,
                        1,
                    ));
                }
            }
        }
    }
    Ok(BlockParts {
        numerator_factors,
        den_factors,
        z_vars,
    })
}

/// Tangent data of `X` in a form usable by [`block_integrand`].
pub enum XData {
    Formal { n: u32 },
    Weights(Vec<MultiPoly>),
}

impl XData {
    fn segre_series(&self, registry: &Arc<VarRegistry>, factor: u32, n: u32) -> chern::SegreSeries {
        match self {
            XData::Formal { .. } => {
                let classes = chern::formal_x_classes(registry, factor, n as usize);
                segre_from_chern(registry, &classes, n as usize)
            }
            XData::Weights(_) => unreachable!("segre series only used in manifold mode"),
        }
    }

    fn weights(&self) -> &[MultiPoly] {
        match self {
            XData::Weights(w) => w,
            XData::Formal { .. } => unreachable!("weights only used in equivariant mode"),
        }
    }
}

struct AssembledTerm {
    term: RationalTerm,
    integrand_degree: i64,
}

/// The Chern roots of the twisted bundle on one factor: `theta_j` and
/// `theta_j + z_i` for every residue variable of the block. In
/// equivariant mode the twist direction flips to `theta_j - z_i`: the
/// geometric kernel is the image of the equivariant one under
/// `z -> -z` (which also turns the torus-weight denominators into the
/// Segre series), and both conventions are pinned by the corresponding
/// localization oracles.
fn factor_roots(
    registry: &Arc<VarRegistry>,
    theta: &[MultiPoly],
    z_vars: &[VarId],
    mode: Mode,
) -> Vec<MultiPoly> {
    let mut roots: Vec<MultiPoly> = theta.to_vec();
    for &z in z_vars {
        let zp = match mode {
            Mode::Manifold => MultiPoly::var(registry, z),
            Mode::Equivariant => MultiPoly::var(registry, z).neg(),
        };
        roots.extend(chern::twist_roots(theta, &zp));
    }
    roots
}

fn assemble_partition_term(
    spec: &ProblemSpec,
    registry: &Arc<VarRegistry>,
    partition: &SetPartition,
    opts: &IntegrateOptions,
) -> Result<AssembledTerm, TautError> {
    let n = spec.n;
    let r = spec.bundle.rank;
    let s = partition.num_blocks();
    let x_data = match (&spec.mode, &spec.x_tangent.presentation) {
        (Mode::Manifold, _) => XData::Formal { n },
        (Mode::Equivariant, BundlePresentation::ExplicitWeights(w)) => XData::Weights(w.clone()),
        _ => unreachable!("validated"),
    };

    let mut roots: Vec<MultiPoly> = Vec::with_capacity(r * spec.k as usize);
    let mut numerator_factors: Vec<MultiPoly> = Vec::new();
    let mut den_factors: Vec<(LinearForm, u32)> = Vec::new();
    let mut z_order: Vec<VarId> = Vec::new();
    let mut factors_sizes = Vec::with_capacity(s);

    for (idx, block) in partition.blocks().iter().enumerate() {
        let factor = idx as u32 + 1;
        let block_size = block.len() as u32;
        factors_sizes.push(block_size);
        let parts = block_integrand(
            registry,
            factor,
            block_size,
            n,
            spec.mode,
            &x_data,
            &opts.q_table,
        )?;
        let theta: Vec<MultiPoly> = match (&spec.mode, &spec.bundle.presentation) {
            (Mode::Manifold, _) => (1..=r as u32)
                .map(|pos| {
                    MultiPoly::var(
                        registry,
                        registry.register(VarKind::ChernRootTheta { factor, pos }),
                    )
                })
                .collect(),
            (Mode::Equivariant, BundlePresentation::ExplicitWeights(w)) => w.clone(),
            _ => unreachable!("validated"),
        };
        roots.extend(factor_roots(registry, &theta, &parts.z_vars, spec.mode));
        numerator_factors.extend(parts.numerator_factors);
        den_factors.extend(parts.den_factors);
        z_order.extend(parts.z_vars);
    }

    let phi_poly = chern::phi_eval_on_roots(registry, &spec.phi, &roots)?;
    let mut numerator = phi_poly;
    if spec.mode == Mode::Manifold {
        numerator = numerator.truncate_factor_degree(n as i64);
    }
    for f in &numerator_factors {
        numerator = numerator.try_mul(f)?;
        if spec.mode == Mode::Manifold {
            numerator = numerator.truncate_factor_degree(n as i64);
        }
    }
    let weight: BigRational = factors_sizes
        .iter()
        .map(|&b| block_multiplicity(b))
        .product();
    numerator = numerator.scale(&weight);

    // degree bookkeeping: nk - (n+1)(k - s)
    let expected = (n as i64) * (spec.k as i64) - (n as i64 + 1) * (spec.k as i64 - s as i64);
    let den_degree: i64 = den_factors.iter().map(|(_, m)| *m as i64).sum();
    if let Some(num_degree) = numerator.homogeneous_degree() {
        let found = num_degree - den_degree;
        if found != expected {
            return Err(TautError::InternalConsistency(format!(
                "assembled integrand for {:?} has total degree {found}, expected {expected}",
                partition.blocks()
            )));
        }
    } else if !numerator.is_zero() {
        return Err(TautError::InternalConsistency(format!(
            "assembled integrand for {:?} is not homogeneous",
            partition.blocks()
        )));
    }

    Ok(AssembledTerm {
        term: RationalTerm {
            numerator,
            factors: den_factors,
            z_order,
        },
        integrand_degree: expected,
    })
}

/// Reduce a residue value over `s` factors to per-factor classes, grade
/// to degree `n` per factor, and split into block products.
pub(crate) fn reduce_value_to_products(
    spec: &ProblemSpec,
    registry: &Arc<VarRegistry>,
    s: usize,
    value: MultiPoly,
) -> Result<Vec<BlockProduct>, TautError> {
    let n = spec.n as i64;
    let r = spec.bundle.rank;

    // the residue output must be homogeneous of total degree n*s
    if !value.is_zero() {
        match value.homogeneous_degree() {
            Some(d) if d == n * s as i64 => {}
            Some(d) => {
                return Err(TautError::InternalConsistency(format!(
                    "residue output over {s} factors has degree {d}, expected {}",
                    n * s as i64
                )));
            }
            None => {
                return Err(TautError::InternalConsistency(format!(
                    "residue output over {s} factors is not homogeneous"
                )));
            }
        }
    }

    // eliminate each factor's theta block in favor of formal V classes
    let mut reduced = value;
    for factor in 1..=s as u32 {
        let block: Vec<VarId> = (1..=r as u32)
            .map(|pos| registry.register(VarKind::ChernRootTheta { factor, pos }))
            .collect();
        let targets: Vec<VarId> = (1..=r as u32)
            .map(|degree| registry.register(VarKind::FormalClassV { factor, degree }))
            .collect();
        reduced = symmetric_reduce(&reduced, &block, &targets).map_err(|e| match e {
            ChernError::NotSymmetric(a, b) => TautError::InternalConsistency(format!(
                "residue output asymmetric in factor {factor}: {a} <-> {b}"
            )),
            other => TautError::Chern(other),
        })?;
    }

    // degree-n part in every factor
    let want: BTreeMap<u32, i64> = (1..=s as u32).map(|f| (f, n)).collect();
    let graded = reduced.graded_part(&want);

    // split monomials into per-factor pieces, rebased to factor 1
    let mut grouped: BTreeMap<Vec<Monomial>, BigRational> = BTreeMap::new();
    let canonical = |kind: VarKind| -> VarKind {
        match kind {
            VarKind::FormalClassX { degree, .. } => VarKind::FormalClassX { factor: 1, degree },
            VarKind::FormalClassV { degree, .. } => VarKind::FormalClassV { factor: 1, degree },
            other => other,
        }
    };
    for (m, c) in graded.terms() {
        let mut pieces: Vec<Vec<(VarId, i64)>> = vec![Vec::new(); s];
        for (v, e) in m.iter() {
            let kind = registry.kind(v);
            let factor = kind.factor().ok_or_else(|| {
                TautError::InternalConsistency(format!(
                    "residue output contains non-class variable {}",
                    kind.display_name()
                ))
            })?;
            let id = registry.register(canonical(kind));
            pieces[factor as usize - 1].push((id, e));
        }
        let key: Vec<Monomial> = pieces
            .into_iter()
            .map(|mut p| {
                p.sort_by_key(|&(v, _)| v);
                Monomial(p)
            })
            .collect();
        let entry = grouped.entry(key).or_insert_with(BigRational::zero);
        *entry += c;
    }
    let mut products = Vec::new();
    for (key, coeff) in grouped {
        if coeff.is_zero() {
            continue;
        }
        let blocks: Vec<MultiPoly> = key
            .into_iter()
            .map(|m| MultiPoly::monomial(registry, m, BigRational::one()))
            .collect();
        products.push(BlockProduct { coeff, blocks });
    }
    Ok(products)
}

/// Evaluate one partition's contribution: assemble, optionally prune,
/// take the iterated residue, reduce to classes and grade.
pub fn evaluate_partition(
    spec: &ProblemSpec,
    registry: &Arc<VarRegistry>,
    partition: &SetPartition,
    opts: &IntegrateOptions,
) -> Result<PartitionTerm, TautError> {
    let assembled = assemble_partition_term(spec, registry, partition, opts)?;
    let pruned = opts.prune && vanishing_precheck(&assembled.term);
    let value = if pruned {
        MultiPoly::zero(registry)
    } else {
        iterated_residue(&assembled.term)?
    };
    let products = reduce_value_to_products(spec, registry, partition.num_blocks(), value)?;
    Ok(PartitionTerm {
        partition: partition.clone(),
        products,
        integrand_degree: assembled.integrand_degree,
        pruned,
    })
}

/// Evaluate the universal integral over the geometric component.
pub fn integrate_ghilb(
    spec: &ProblemSpec,
    table: Option<&IntersectionTable>,
    opts: &IntegrateOptions,
) -> Result<UniversalIntegral, TautError> {
    spec.validate()?;
    if spec.mode != Mode::Manifold {
        return Err(TautError::BadSpec(
            "integrate_ghilb runs in manifold mode; use integrate_equivariant".into(),
        ));
    }
    let registry = Arc::new(VarRegistry::new());
    let partitions = enumerate_partitions(spec.k)?;

    let terms: Vec<Result<PartitionTerm, TautError>> = partitions
        .par_iter()
        .map(|partition| evaluate_partition(spec, &registry, partition, opts))
        .collect();
    let mut per_partition = Vec::with_capacity(terms.len());
    for t in terms {
        per_partition.push(t?);
    }
    per_partition.sort_by(|a, b| a.partition.cmp(&b.partition));

    let normalization = BigRational::one() / factorial(spec.k);
    let total = match table {
        Some(table) => {
            let mut acc = BigRational::zero();
            for term in &per_partition {
                for product in &term.products {
                    let mut v = product.coeff.clone();
                    for b in &product.blocks {
                        v *= table.contract(b)?;
                    }
                    acc += v;
                }
            }
            Some(acc * &normalization)
        }
        None => None,
    };

    Ok(UniversalIntegral {
        n: spec.n,
        k: spec.k,
        rank: spec.bundle.rank,
        per_partition,
        normalization,
        total,
    })
}

/// Result of an equivariant evaluation: a rational function in the torus
/// weights, kept as `numerator / (prod lambda_i)^s` structure summed over
/// partitions.
#[derive(Clone, Debug)]
pub struct EquivariantResult {
    pub value: RationalFunction,
    pub per_partition: Vec<(SetPartition, MultiPoly)>,
    pub normalization: BigRational,
}

/// Evaluate the equivariant integral over affine space. The result is a
/// rational function: each partition contributes its residue value
/// divided by the Euler factor `(prod weights)^s`.
pub fn integrate_equivariant(
    spec: &ProblemSpec,
    opts: &IntegrateOptions,
) -> Result<EquivariantResult, TautError> {
    spec.validate()?;
    if spec.mode != Mode::Equivariant {
        return Err(TautError::BadSpec(
            "integrate_equivariant requires equivariant mode".into(),
        ));
    }
    let BundlePresentation::ExplicitWeights(x_weights) = &spec.x_tangent.presentation else {
        unreachable!("validated")
    };
    let registry = x_weights
        .first()
        .map(|w| w.registry().clone())
        .ok_or_else(|| {
            TautError::BadSpec("equivariant mode needs at least one tangent weight".into())
        })?;
    let partitions = enumerate_partitions(spec.k)?;

    let results: Vec<Result<(SetPartition, MultiPoly), TautError>> = partitions
        .par_iter()
        .map(|partition| {
            let assembled = assemble_partition_term(spec, &registry, partition, opts)?;
            let pruned = opts.prune && vanishing_precheck(&assembled.term);
            let value = if pruned {
                MultiPoly::zero(&registry)
            } else {
                iterated_residue(&assembled.term)?
            };
            Ok((partition.clone(), value))
        })
        .collect();

    let euler_point: Vec<LinearForm> = x_weights
        .iter()
        .map(|w| LinearForm::try_from_poly(w).map_err(TautError::Poly))
        .collect::<Result<_, _>>()?;

    let mut acc = RationalFunction::zero(&registry);
    let mut per_partition = Vec::new();
    for r in results {
        let (partition, value) = r?;
        let s = partition.num_blocks() as u32;
        let den: Vec<(LinearForm, u32)> = euler_point.iter().map(|f| (f.clone(), s)).collect();
        acc = acc.add(&RationalFunction::new(value.clone(), den));
        per_partition.push((partition, value));
    }
    per_partition.sort_by(|a, b| a.0.cmp(&b.0));
    let normalization = BigRational::one() / factorial(spec.k);
    let value = acc.scale(&normalization);

    Ok(EquivariantResult {
        value,
        per_partition,
        normalization,
    })
}

impl UniversalIntegral {
    /// All partition contributions as one joint statement: the sum over
    /// partitions of products, contracted with `table`, normalized.
    pub fn contract(&self, table: &IntersectionTable) -> Result<BigRational, TautError> {
        let mut acc = BigRational::zero();
        for term in &self.per_partition {
            for product in &term.products {
                let mut v = product.coeff.clone();
                for b in &product.blocks {
                    v *= table.contract(b)?;
                }
                acc += v;
            }
        }
        Ok(acc * &self.normalization)
    }

    /// Exact structural equality of per-partition data (partition list,
    /// products, coefficients).
    pub fn same_class_data(&self, other: &UniversalIntegral) -> bool {
        if self.per_partition.len() != other.per_partition.len() {
            return false;
        }
        self.per_partition
            .iter()
            .zip(&other.per_partition)
            .all(|(a, b)| a.partition == b.partition && a.products == b.products)
    }
}
