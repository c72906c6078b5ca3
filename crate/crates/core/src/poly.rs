//! Sparse multivariate Laurent polynomials over exact rationals.
//!
//! Terms are stored as `monomial -> coefficient` in a `BTreeMap`, so the
//! canonical form is unique and iteration order is deterministic. No zero
//! coefficients are ever stored. Negative exponents are permitted only on
//! residue (`z`) variables; everything else is polynomial-only.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::registry::{VarId, VarKind, VarRegistry};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("operands belong to different variable registries")]
    RegistryMismatch,
    #[error("negative exponent on non-residue variable {0}")]
    NegativeExponent(String),
    #[error("cannot substitute into negative exponent of {0}")]
    SubstituteIntoNegative(String),
    #[error("linear form has no variable of nonzero coefficient")]
    ConstantForm,
    #[error("linear form has no ranked residue variable")]
    NoResidueVariable,
}

/// Exponent vector, stored sparsely as a sorted `(var, exponent)` list
/// with all exponents nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub(crate) Vec<(VarId, i64)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId, exp: i64) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, exp)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent_of(&self, v: VarId) -> i64 {
        self.0
            .binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, i64)> + '_ {
        self.0.iter().copied()
    }

    /// Product of two monomials (exponents add, zeros dropped).
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.0[i].1 + other.0[j].1;
                    if e != 0 {
                        out.push((self.0[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Remove a variable from the exponent vector entirely.
    pub fn without(&self, v: VarId) -> Monomial {
        Monomial(self.0.iter().copied().filter(|&(w, _)| w != v).collect())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Deterministic total order: by variable id, then exponent. Not a
/// monomial order in the division-theory sense; used only for canonical
/// storage and reproducible output.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

/// Immutable-after-construction sparse polynomial over `BigRational`.
#[derive(Clone)]
pub struct MultiPoly {
    registry: Arc<VarRegistry>,
    terms: BTreeMap<Monomial, BigRational>,
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        if self.registry.id() == other.registry.id() {
            return self.terms == other.terms;
        }
        // cross-registry comparison resolves ids to kinds
        self.canonical_kind_terms() == other.canonical_kind_terms()
    }
}

impl Eq for MultiPoly {}

impl MultiPoly {
    pub fn zero(registry: &Arc<VarRegistry>) -> Self {
        MultiPoly {
            registry: Arc::clone(registry),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(registry: &Arc<VarRegistry>, value: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(Monomial::one(), value);
        }
        MultiPoly {
            registry: Arc::clone(registry),
            terms,
        }
    }

    pub fn one(registry: &Arc<VarRegistry>) -> Self {
        Self::constant(registry, BigRational::one())
    }

    pub fn from_int(registry: &Arc<VarRegistry>, value: i64) -> Self {
        Self::constant(registry, BigRational::from_integer(value.into()))
    }

    pub fn var(registry: &Arc<VarRegistry>, v: VarId) -> Self {
        Self::monomial(registry, Monomial::var(v, 1), BigRational::one())
    }

    /// Laurent power of a single variable. Panics if a negative exponent
    /// is requested on a variable kind that does not allow it.
    pub fn var_pow(registry: &Arc<VarRegistry>, v: VarId, exp: i64) -> Self {
        if exp < 0 {
            assert!(
                registry.kind(v).allows_negative_exponent(),
                "negative exponent on non-residue variable {}",
                registry.display_name(v)
            );
        }
        Self::monomial(registry, Monomial::var(v, exp), BigRational::one())
    }

    pub fn monomial(registry: &Arc<VarRegistry>, m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            debug_assert!(m.0.windows(2).all(|w| w[0].0 < w[1].0), "unsorted monomial");
            terms.insert(m, c);
        }
        MultiPoly {
            registry: Arc::clone(registry),
            terms,
        }
    }

    pub fn registry(&self) -> &Arc<VarRegistry> {
        &self.registry
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The constant term.
    pub fn constant_term(&self) -> BigRational {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// If the polynomial is a constant, return it.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    fn check_same_registry(&self, other: &MultiPoly) -> Result<(), PolyError> {
        if self.registry.id() == other.registry.id() {
            Ok(())
        } else {
            Err(PolyError::RegistryMismatch)
        }
    }

    fn insert_term(terms: &mut BTreeMap<Monomial, BigRational>, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn try_add(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_same_registry(other)?;
        let (mut big, small) = if self.terms.len() >= other.terms.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.terms {
            Self::insert_term(&mut big.terms, m.clone(), c.clone());
        }
        Ok(big)
    }

    pub fn try_sub(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_same_registry(other)?;
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                Self::insert_term(&mut terms, ma.mul(mb), ca * cb);
            }
        }
        Ok(MultiPoly {
            registry: Arc::clone(&self.registry),
            terms,
        })
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            registry: Arc::clone(&self.registry),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.registry);
        }
        MultiPoly {
            registry: Arc::clone(&self.registry),
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(&self.registry);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Multiply by a single monomial term.
    pub fn mul_term(&self, m: &Monomial, c: &BigRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.registry);
        }
        MultiPoly {
            registry: Arc::clone(&self.registry),
            terms: self
                .terms
                .iter()
                .map(|(mm, cc)| (mm.mul(m), cc * c))
                .collect(),
        }
    }

    /// Weighted degree of one monomial (exponent times variable degree).
    pub fn term_weighted_degree(&self, m: &Monomial) -> i64 {
        m.iter().map(|(v, e)| e * self.registry.degree(v)).sum()
    }

    /// Maximum weighted degree over all terms; `None` for the zero polynomial.
    pub fn max_weighted_degree(&self) -> Option<i64> {
        self.terms
            .keys()
            .map(|m| self.term_weighted_degree(m))
            .max()
    }

    /// `Some(d)` if all terms share weighted degree `d` (zero counts as
    /// homogeneous of any degree and returns `None`).
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| self.term_weighted_degree(m));
        let first = it.next()?;
        if it.all(|d| d == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.homogeneous_degree().is_some()
    }

    /// Largest exponent of `v` over all terms (0 if `v` does not occur).
    pub fn degree_in(&self, v: VarId) -> i64 {
        self.terms
            .keys()
            .map(|m| m.exponent_of(v))
            .max()
            .unwrap_or(0)
    }

    /// Smallest exponent of `v` over all terms (0 if `v` does not occur).
    pub fn min_exponent_in(&self, v: VarId) -> i64 {
        self.terms
            .keys()
            .map(|m| m.exponent_of(v))
            .min()
            .unwrap_or(0)
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.terms.keys().any(|m| m.exponent_of(v) != 0)
    }

    /// All variables occurring with nonzero exponent.
    pub fn variables(&self) -> Vec<VarId> {
        let mut vs: Vec<VarId> = Vec::new();
        for m in self.terms.keys() {
            for (v, _) in m.iter() {
                if let Err(i) = vs.binary_search(&v) {
                    vs.insert(i, v);
                }
            }
        }
        vs
    }

    /// The coefficient of `v^exponent`, as a polynomial free of `v`.
    pub fn coefficient_of(&self, v: VarId, exponent: i64) -> MultiPoly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.exponent_of(v) == exponent {
                Self::insert_term(&mut terms, m.without(v), c.clone());
            }
        }
        MultiPoly {
            registry: Arc::clone(&self.registry),
            terms,
        }
    }

    /// Weighted degree of a monomial restricted to the variables of one
    /// `X^s` factor.
    pub fn term_factor_degree(&self, m: &Monomial, factor: u32) -> i64 {
        m.iter()
            .filter(|&(v, _)| self.registry.kind(v).factor() == Some(factor))
            .map(|(v, e)| e * self.registry.degree(v))
            .sum()
    }

    /// Keep exactly the terms whose weighted degree in each listed
    /// factor's variables matches the requested value.
    pub fn graded_part(&self, degrees: &BTreeMap<u32, i64>) -> MultiPoly {
        let mut terms = BTreeMap::new();
        'outer: for (m, c) in &self.terms {
            for (&factor, &want) in degrees {
                if self.term_factor_degree(m, factor) != want {
                    continue 'outer;
                }
            }
            terms.insert(m.clone(), c.clone());
        }
        MultiPoly {
            registry: Arc::clone(&self.registry),
            terms,
        }
    }

    /// Drop terms whose weighted degree in some factor's variables
    /// exceeds `max`. Sound as a pre-truncation before a final
    /// [`MultiPoly::graded_part`] because factor degrees only accumulate
    /// under multiplication.
    pub fn truncate_factor_degree(&self, max: i64) -> MultiPoly {
        let mut terms = BTreeMap::new();
        'outer: for (m, c) in &self.terms {
            let mut by_factor: HashMap<u32, i64> = HashMap::new();
            for (v, e) in m.iter() {
                if let Some(f) = self.registry.kind(v).factor() {
                    *by_factor.entry(f).or_insert(0) += e * self.registry.degree(v);
                }
            }
            for (_, d) in by_factor {
                if d > max {
                    continue 'outer;
                }
            }
            terms.insert(m.clone(), c.clone());
        }
        MultiPoly {
            registry: Arc::clone(&self.registry),
            terms,
        }
    }

    /// Simultaneous substitution of variables by polynomials (over the
    /// same registry). Substituting into a variable that occurs with a
    /// negative exponent is an error.
    pub fn substitute(&self, bindings: &HashMap<VarId, MultiPoly>) -> Result<MultiPoly, PolyError> {
        for p in bindings.values() {
            self.check_same_registry(p)?;
        }
        let mut acc = MultiPoly::zero(&self.registry);
        // cache powers of each binding
        let mut powers: HashMap<VarId, Vec<MultiPoly>> = HashMap::new();
        for (m, c) in &self.terms {
            let mut fixed = Monomial::one();
            let mut factor = MultiPoly::constant(&self.registry, c.clone());
            for (v, e) in m.iter() {
                if let Some(b) = bindings.get(&v) {
                    if e < 0 {
                        return Err(PolyError::SubstituteIntoNegative(
                            self.registry.display_name(v),
                        ));
                    }
                    let pows = powers
                        .entry(v)
                        .or_insert_with(|| vec![MultiPoly::one(&self.registry), b.clone()]);
                    while (pows.len() as i64) <= e {
                        let next = &pows[pows.len() - 1] * b;
                        pows.push(next);
                    }
                    factor = &factor * &pows[e as usize];
                } else {
                    fixed = fixed.mul(&Monomial::var(v, e));
                }
            }
            acc = &acc + &factor.mul_term(&fixed, &BigRational::one());
        }
        Ok(acc)
    }

    /// Rebuild this polynomial over `target`, mapping each variable
    /// through `map` (used, e.g., to re-express per-factor classes in a
    /// canonical presentation). Variables must map to polynomial values
    /// whenever they occur with negative exponents only if the image is a
    /// single variable; in practice callers map class variables, which
    /// are polynomial-only.
    pub fn map_vars<F>(&self, target: &Arc<VarRegistry>, mut map: F) -> MultiPoly
    where
        F: FnMut(VarKind) -> MultiPoly,
    {
        let mut acc = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut factor = MultiPoly::constant(target, c.clone());
            for (v, e) in m.iter() {
                let image = map(self.registry.kind(v));
                if e >= 0 {
                    factor = &factor * &image.pow(e as u32);
                } else {
                    // only legal when the image is a plain variable
                    let mut vars: Vec<(VarId, i64)> = Vec::new();
                    for (mm, cc) in image.terms() {
                        assert!(
                            cc.is_one() && mm.0.len() == 1,
                            "negative exponent through non-variable image"
                        );
                        vars.push(mm.0[0]);
                    }
                    assert_eq!(
                        vars.len(),
                        1,
                        "negative exponent through non-variable image"
                    );
                    factor = factor.mul_term(
                        &Monomial::var(vars[0].0, e * vars[0].1),
                        &BigRational::one(),
                    );
                }
            }
            acc = &acc + &factor;
        }
        acc
    }

    /// Rename variables through a kind map, registering images in the
    /// target registry. A thin wrapper over [`MultiPoly::map_vars`] for
    /// pure renamings.
    pub fn rename_vars<F>(&self, target: &Arc<VarRegistry>, mut rename: F) -> MultiPoly
    where
        F: FnMut(VarKind) -> VarKind,
    {
        self.map_vars(target, |kind| {
            let id = target.register(rename(kind));
            MultiPoly::var(target, id)
        })
    }

    /// Registry-independent canonical form, used for cross-registry
    /// equality.
    pub fn canonical_kind_terms(&self) -> BTreeMap<Vec<(VarKind, i64)>, BigRational> {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut key: Vec<(VarKind, i64)> =
                    m.iter().map(|(v, e)| (self.registry.kind(v), e)).collect();
                key.sort();
                (key, c.clone())
            })
            .collect()
    }

    /// Validate the Laurent invariant: negative exponents only on
    /// residue variables.
    pub fn check_laurent_invariant(&self) -> Result<(), PolyError> {
        for m in self.terms.keys() {
            for (v, e) in m.iter() {
                if e < 0 && !self.registry.kind(v).allows_negative_exponent() {
                    return Err(PolyError::NegativeExponent(self.registry.display_name(v)));
                }
            }
        }
        Ok(())
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl std::ops::$trait<&MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                self.$try(rhs).expect("registry mismatch")
            }
        }
        impl std::ops::$trait<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$try(&rhs).expect("registry mismatch")
            }
        }
    };
}

impl_binop!(Add, add, try_add);
impl_binop!(Sub, sub, try_sub);
impl_binop!(Mul, mul, try_mul);

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
                first = false;
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                let mut firstv = true;
                for (v, e) in m.iter() {
                    if !firstv {
                        f.write_str("*")?;
                    }
                    firstv = false;
                    let name = self.registry.display_name(v);
                    if e == 1 {
                        write!(f, "{name}")?;
                    } else {
                        write!(f, "{name}^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sum a list of polynomials in a fixed order.
pub fn poly_sum(
    registry: &Arc<VarRegistry>,
    polys: impl IntoIterator<Item = MultiPoly>,
) -> MultiPoly {
    let mut acc = MultiPoly::zero(registry);
    for p in polys {
        acc = &acc + &p;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Arc<VarRegistry>, VarId, VarId, VarId) {
        let reg = Arc::new(VarRegistry::new());
        let x = reg.register(VarKind::ChernRootTheta { factor: 1, pos: 1 });
        let y = reg.register(VarKind::ChernRootTheta { factor: 1, pos: 2 });
        let z = reg.register(VarKind::ResidueZ { block: 1, pos: 1 });
        (reg, x, y, z)
    }

    #[test]
    fn add_cancels_inverse() {
        let (reg, x, _, _) = setup();
        let p = MultiPoly::var(&reg, x);
        let q = p.neg();
        assert!((&p + &q).is_zero());
    }

    #[test]
    fn add_collects() {
        let (reg, x, y, _) = setup();
        let p = &MultiPoly::var(&reg, x) + &MultiPoly::var(&reg, y);
        let q = MultiPoly::var(&reg, y);
        let s = &p + &q;
        assert_eq!(s.to_string(), "theta[1,1] + 2*theta[1,2]");
    }

    #[test]
    fn mul_difference_of_squares() {
        let (reg, x, y, _) = setup();
        let xp = MultiPoly::var(&reg, x);
        let yp = MultiPoly::var(&reg, y);
        let p = &(&xp + &yp) * &(&xp - &yp);
        let expect = &(&xp * &xp) - &(&yp * &yp);
        assert_eq!(p, expect);
    }

    #[test]
    fn mul_by_zero() {
        let (reg, x, _, _) = setup();
        let p = MultiPoly::var(&reg, x);
        assert!((&p * &MultiPoly::zero(&reg)).is_zero());
    }

    #[test]
    fn homogeneous_grading_adds_under_mul() {
        let (reg, x, y, _) = setup();
        let p = &MultiPoly::var(&reg, x) + &MultiPoly::var(&reg, y); // deg 1
        let q = &MultiPoly::var(&reg, x) * &MultiPoly::var(&reg, y); // deg 2
        assert_eq!((&p * &q).homogeneous_degree(), Some(3));
    }

    #[test]
    fn registry_mismatch_rejected() {
        let (reg1, x1, _, _) = setup();
        let (reg2, x2, _, _) = setup();
        let p = MultiPoly::var(&reg1, x1);
        let q = MultiPoly::var(&reg2, x2);
        assert_eq!(p.try_add(&q), Err(PolyError::RegistryMismatch));
        assert_eq!(p.try_mul(&q), Err(PolyError::RegistryMismatch));
    }

    #[test]
    fn coefficient_extraction() {
        let (reg, x, _, z) = setup();
        // 3*z^-1*x + z
        let p = &MultiPoly::var(&reg, x)
            .mul_term(&Monomial::var(z, -1), &BigRational::from_integer(3.into()))
            + &MultiPoly::var(&reg, z);
        assert_eq!(
            p.coefficient_of(z, -1),
            MultiPoly::var(&reg, x).scale(&BigRational::from_integer(3.into()))
        );
        // no z at all -> zero
        let q = MultiPoly::var(&reg, x);
        assert!(q.coefficient_of(z, -1).is_zero());
        // (x+z)^2, coefficient of z^0 is x^2
        let s = (&MultiPoly::var(&reg, x) + &MultiPoly::var(&reg, z)).pow(2);
        assert_eq!(s.coefficient_of(z, 0), MultiPoly::var(&reg, x).pow(2));
    }

    #[test]
    fn substitute_basics() {
        let (reg, x, y, z) = setup();
        // identity bindings leave p unchanged
        let p = &MultiPoly::var(&reg, x) + &MultiPoly::var(&reg, y).pow(2);
        let mut id = HashMap::new();
        id.insert(x, MultiPoly::var(&reg, x));
        assert_eq!(p.substitute(&id).unwrap(), p);
        // z^2 with z -> 0 gives 0
        let q = MultiPoly::var(&reg, z).pow(2);
        let mut zero = HashMap::new();
        zero.insert(z, MultiPoly::zero(&reg));
        assert!(q.substitute(&zero).unwrap().is_zero());
        // substituting into z^-1 errors
        let l = MultiPoly::var_pow(&reg, z, -1);
        assert!(matches!(
            l.substitute(&zero),
            Err(PolyError::SubstituteIntoNegative(_))
        ));
    }

    #[test]
    fn graded_part_examples() {
        let reg = Arc::new(VarRegistry::new());
        let c1 = reg.register(VarKind::FormalClassX {
            factor: 1,
            degree: 1,
        });
        let c2 = reg.register(VarKind::FormalClassX {
            factor: 1,
            degree: 2,
        });
        let p = &MultiPoly::var(&reg, c1).pow(2) + &MultiPoly::var(&reg, c2);
        let mut want = BTreeMap::new();
        want.insert(1u32, 2i64);
        assert_eq!(p.graded_part(&want), p);
        // beyond the degree of p
        let mut over = BTreeMap::new();
        over.insert(1u32, 5i64);
        assert!(p.graded_part(&over).is_zero());

        // two factors
        let t1 = reg.register(VarKind::ChernRootTheta { factor: 1, pos: 1 });
        let t2 = reg.register(VarKind::ChernRootTheta { factor: 2, pos: 1 });
        let q = &MultiPoly::var(&reg, t1) * &MultiPoly::var(&reg, t2);
        let mut want2 = BTreeMap::new();
        want2.insert(1u32, 1i64);
        want2.insert(2u32, 1i64);
        assert_eq!(q.graded_part(&want2), q);
    }

    #[test]
    fn graded_parts_sum_to_whole() {
        let reg = Arc::new(VarRegistry::new());
        let c1 = reg.register(VarKind::FormalClassX {
            factor: 1,
            degree: 1,
        });
        let t1 = reg.register(VarKind::ChernRootTheta { factor: 1, pos: 1 });
        let p = (&MultiPoly::var(&reg, c1) + &MultiPoly::var(&reg, t1).pow(2)).pow(3);
        let degrees: std::collections::BTreeSet<i64> =
            p.terms().map(|(m, _)| p.term_factor_degree(m, 1)).collect();
        let mut acc = MultiPoly::zero(&reg);
        for d in degrees {
            let mut want = BTreeMap::new();
            want.insert(1u32, d);
            acc = &acc + &p.graded_part(&want);
        }
        assert_eq!(acc, p);
    }
}
