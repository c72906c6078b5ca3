//! Rational functions as a polynomial numerator over an explicit multiset
//! of linear denominator factors.
//!
//! There is no general field-of-fractions type: denominators stay in
//! factored form, sums go through a factor-multiset common denominator,
//! and after each sum the numerator is reduced by exact division against
//! the remaining factors. For localization sums over compact spaces this
//! cancels the denominator entirely.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigRational, One, Zero};

use crate::linear::LinearForm;
use crate::poly::{Monomial, MultiPoly};
use crate::registry::{VarId, VarRegistry};

/// Canonical denominator key: a linear form scaled so its trailing
/// (largest-id) coefficient is one.
type DenKey = Vec<(Option<VarId>, BigRational)>;

fn den_key(form: &LinearForm) -> (BigRational, DenKey) {
    let (scale, normd) = form.normalized();
    let mut key: DenKey = Vec::with_capacity(normd.coefficients.len() + 1);
    if !normd.constant.is_zero() {
        key.push((None, normd.constant.clone()));
    }
    for (v, c) in &normd.coefficients {
        key.push((Some(*v), c.clone()));
    }
    (scale, key)
}

fn key_to_form(key: &DenKey) -> LinearForm {
    let mut constant = BigRational::zero();
    let mut coefficients = BTreeMap::new();
    for (v, c) in key {
        match v {
            None => constant = c.clone(),
            Some(v) => {
                coefficients.insert(*v, c.clone());
            }
        }
    }
    LinearForm {
        constant,
        coefficients,
    }
}

/// `num / prod factor^mult`, factors stored in canonical scale.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    registry: Arc<VarRegistry>,
    num: MultiPoly,
    den: BTreeMap<DenKey, u32>,
}

impl RationalFunction {
    pub fn zero(registry: &Arc<VarRegistry>) -> Self {
        RationalFunction {
            registry: Arc::clone(registry),
            num: MultiPoly::zero(registry),
            den: BTreeMap::new(),
        }
    }

    pub fn from_poly(num: MultiPoly) -> Self {
        let registry = num.registry().clone();
        RationalFunction {
            registry,
            num,
            den: BTreeMap::new(),
        }
    }

    /// Build `num / prod forms`, folding the normalization scalars into
    /// the numerator and reducing.
    pub fn new(num: MultiPoly, den: Vec<(LinearForm, u32)>) -> Self {
        let registry = num.registry().clone();
        let mut scale = BigRational::one();
        let mut denmap: BTreeMap<DenKey, u32> = BTreeMap::new();
        for (form, mult) in den {
            let (s, key) = den_key(&form);
            for _ in 0..mult {
                scale *= &s;
            }
            *denmap.entry(key).or_insert(0) += mult;
        }
        let mut rf = RationalFunction {
            registry,
            num: num.scale(&(BigRational::one() / scale)),
            den: denmap,
        };
        rf.reduce();
        rf
    }

    pub fn numerator(&self) -> &MultiPoly {
        &self.num
    }

    pub fn denominator_factors(&self) -> Vec<(LinearForm, u32)> {
        self.den.iter().map(|(k, m)| (key_to_form(k), *m)).collect()
    }

    pub fn denominator_poly(&self) -> MultiPoly {
        let mut acc = MultiPoly::one(&self.registry);
        for (key, mult) in &self.den {
            let f = key_to_form(key).to_poly(&self.registry);
            acc = &acc * &f.pow(*mult);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `Some(polynomial)` if the denominator has fully cancelled.
    pub fn as_poly(&self) -> Option<&MultiPoly> {
        if self.den.is_empty() {
            Some(&self.num)
        } else {
            None
        }
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        assert_eq!(self.registry.id(), other.registry.id(), "registry mismatch");
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // common denominator: multiset max
        let mut union: BTreeMap<DenKey, u32> = self.den.clone();
        for (k, m) in &other.den {
            let e = union.entry(k.clone()).or_insert(0);
            *e = (*e).max(*m);
        }
        let lift = |rf: &RationalFunction, union: &BTreeMap<DenKey, u32>| -> MultiPoly {
            let mut acc = rf.num.clone();
            for (k, m) in union {
                let have = rf.den.get(k).copied().unwrap_or(0);
                if *m > have {
                    let f = key_to_form(k).to_poly(&rf.registry);
                    acc = &acc * &f.pow(*m - have);
                }
            }
            acc
        };
        let num = &lift(self, &union) + &lift(other, &union);
        let mut rf = RationalFunction {
            registry: self.registry.clone(),
            num,
            den: union,
        };
        rf.reduce();
        rf
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction {
            registry: self.registry.clone(),
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> RationalFunction {
        let mut rf = RationalFunction {
            registry: self.registry.clone(),
            num: self.num.scale(c),
            den: self.den.clone(),
        };
        if rf.num.is_zero() {
            rf.den.clear();
        }
        rf
    }

    pub fn mul_poly(&self, p: &MultiPoly) -> RationalFunction {
        let mut rf = RationalFunction {
            registry: self.registry.clone(),
            num: &self.num * p,
            den: self.den.clone(),
        };
        rf.reduce();
        rf
    }

    /// Divide by one more linear factor.
    pub fn div_form(&self, form: &LinearForm) -> RationalFunction {
        let (s, key) = den_key(form);
        let mut den = self.den.clone();
        *den.entry(key).or_insert(0) += 1;
        let mut rf = RationalFunction {
            registry: self.registry.clone(),
            num: self.num.scale(&(BigRational::one() / s)),
            den,
        };
        rf.reduce();
        rf
    }

    /// Exact cross-multiplied equality.
    pub fn equiv(&self, other: &RationalFunction) -> bool {
        let lhs = &self.num * &other.denominator_poly();
        let rhs = &other.num * &self.denominator_poly();
        lhs == rhs
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        let keys: Vec<DenKey> = self.den.keys().cloned().collect();
        for k in keys {
            let form = key_to_form(&k);
            while self.den.get(&k).copied().unwrap_or(0) > 0 {
                match div_exact_linear(&self.num, &form) {
                    Some(q) => {
                        self.num = q;
                        let m = self.den.get_mut(&k).unwrap();
                        *m -= 1;
                        if *m == 0 {
                            self.den.remove(&k);
                            break;
                        }
                    }
                    None => break,
                }
            }
        }
    }
}

/// Exact division of a polynomial by a linear form; `None` if it does not
/// divide. Synthetic division with respect to the form's largest variable.
pub fn div_exact_linear(p: &MultiPoly, form: &LinearForm) -> Option<MultiPoly> {
    let registry = p.registry().clone();
    if p.is_zero() {
        return Some(p.clone());
    }
    let (&pivot, lead) = form.coefficients.iter().next_back()?;
    // rest = form - lead * pivot
    let mut rest = MultiPoly::constant(&registry, form.constant.clone());
    for (v, c) in &form.coefficients {
        if *v != pivot {
            rest = &rest + &MultiPoly::var(&registry, *v).scale(c);
        }
    }
    // view p in A[pivot]: p = sum_i p_i pivot^i, divide by lead*pivot + rest
    let dmax = p.degree_in(pivot);
    let dmin = p.min_exponent_in(pivot);
    if dmin < 0 {
        return None; // Laurent in the pivot: not a polynomial division
    }
    if dmax == 0 {
        return None; // no pivot at all (and p nonzero): cannot divide
    }
    let inv_lead = BigRational::one() / lead.clone();
    let mut quotient = MultiPoly::zero(&registry);
    let mut remainder_terms: Vec<MultiPoly> =
        (0..=dmax).map(|i| p.coefficient_of(pivot, i)).collect();
    for i in (1..=dmax).rev() {
        let qi = remainder_terms[i as usize].scale(&inv_lead);
        if qi.is_zero() {
            continue;
        }
        quotient = &quotient + &qi.mul_term(&Monomial::var(pivot, i - 1), &BigRational::one());
        // p_{i-1} -= q_i * rest
        let adj = &qi * &rest;
        remainder_terms[(i - 1) as usize] = &remainder_terms[(i - 1) as usize] - &adj;
        remainder_terms[i as usize] = MultiPoly::zero(&registry);
    }
    if remainder_terms[0].is_zero() {
        Some(quotient)
    } else {
        None
    }
}

/// Deterministic pairwise-tree sum (stable reduction order regardless of
/// how contributions were computed).
pub fn tree_sum(registry: &Arc<VarRegistry>, mut items: Vec<RationalFunction>) -> RationalFunction {
    if items.is_empty() {
        return RationalFunction::zero(registry);
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.add(&b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::VarKind;

    fn lam(registry: &Arc<VarRegistry>, pos: u32) -> MultiPoly {
        MultiPoly::var(registry, registry.register(VarKind::TorusLambda { pos }))
    }

    #[test]
    fn exact_linear_division() {
        let registry = Arc::new(VarRegistry::new());
        let a = lam(&registry, 1);
        let b = lam(&registry, 2);
        let p = &(&a * &a) - &(&b * &b);
        let form = LinearForm::try_from_poly(&(&a - &b)).unwrap();
        let q = div_exact_linear(&p, &form).unwrap();
        assert_eq!(q, &a + &b);
        let not_div = div_exact_linear(&(&p + &MultiPoly::one(&registry)), &form);
        assert!(not_div.is_none());
    }

    #[test]
    fn telescoping_sum_cancels() {
        // a/(a-b) + b/(b-a) = 1
        let registry = Arc::new(VarRegistry::new());
        let a = lam(&registry, 1);
        let b = lam(&registry, 2);
        let f_ab = LinearForm::try_from_poly(&(&a - &b)).unwrap();
        let f_ba = LinearForm::try_from_poly(&(&b - &a)).unwrap();
        let r1 = RationalFunction::new(a.clone(), vec![(f_ab, 1)]);
        let r2 = RationalFunction::new(b.clone(), vec![(f_ba, 1)]);
        let sum = r1.add(&r2);
        assert_eq!(sum.as_poly(), Some(&MultiPoly::one(&registry)));
    }

    #[test]
    fn cross_multiplied_equivalence() {
        let registry = Arc::new(VarRegistry::new());
        let a = lam(&registry, 1);
        let b = lam(&registry, 2);
        let f = LinearForm::try_from_poly(&(&a - &b)).unwrap();
        // (a^2 - b^2)/(a-b) == a + b
        let r1 = RationalFunction::new(&(&a * &a) - &(&b * &b), vec![(f, 1)]);
        let r2 = RationalFunction::from_poly(&a + &b);
        assert!(r1.equiv(&r2));
    }

    #[test]
    fn tree_sum_matches_sequential() {
        let registry = Arc::new(VarRegistry::new());
        let a = lam(&registry, 1);
        let b = lam(&registry, 2);
        let forms: Vec<RationalFunction> = (1..=5i64)
            .map(|i| {
                let f = LinearForm::try_from_poly(
                    &(&a.scale(&BigRational::from_integer(i.into())) - &b),
                )
                .unwrap();
                RationalFunction::new(MultiPoly::one(&registry), vec![(f, 1)])
            })
            .collect();
        let tree = tree_sum(&registry, forms.clone());
        let mut seq = RationalFunction::zero(&registry);
        for f in forms {
            seq = seq.add(&f);
        }
        assert!(tree.equiv(&seq));
    }
}
