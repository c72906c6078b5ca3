//! Affine-linear denominator factors and their `1/omega` expansions.
//!
//! A factor `omega = a^0 + sum_j a^j x_j` is inverted as a Laurent series
//! in its highest-ranked residue variable `z_q`:
//!
//! `1/omega = sum_{j>=0} (-1)^j (rest)^j / (a^q z_q)^{j+1}`
//!
//! where `rest = omega - a^q z_q`. The ranking is supplied by the caller
//! (contour order), and truncation is always explicit.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigRational, One, Zero};

use crate::poly::{Monomial, MultiPoly, PolyError};
use crate::registry::{VarId, VarRegistry};

/// `constant + sum coefficients[v] * v`, with at least one nonzero
/// variable coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForm {
    pub constant: BigRational,
    pub coefficients: BTreeMap<VarId, BigRational>,
}

impl LinearForm {
    pub fn new(
        constant: BigRational,
        coefficients: BTreeMap<VarId, BigRational>,
    ) -> Result<Self, PolyError> {
        let coefficients: BTreeMap<_, _> = coefficients
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        if coefficients.is_empty() {
            return Err(PolyError::ConstantForm);
        }
        Ok(LinearForm {
            constant,
            coefficients,
        })
    }

    /// Single variable `v`.
    pub fn var(v: VarId) -> Self {
        let mut coefficients = BTreeMap::new();
        coefficients.insert(v, BigRational::one());
        LinearForm {
            constant: BigRational::zero(),
            coefficients,
        }
    }

    /// Build from a degree-one polynomial (affine-linear in its variables).
    pub fn try_from_poly(p: &MultiPoly) -> Result<Self, PolyError> {
        let mut constant = BigRational::zero();
        let mut coefficients = BTreeMap::new();
        for (m, c) in p.terms() {
            if m.is_one() {
                constant = c.clone();
            } else {
                let vars: Vec<(VarId, i64)> = m.iter().collect();
                if vars.len() != 1 || vars[0].1 != 1 {
                    return Err(PolyError::ConstantForm);
                }
                coefficients.insert(vars[0].0, c.clone());
            }
        }
        LinearForm::new(constant, coefficients)
    }

    pub fn to_poly(&self, registry: &Arc<VarRegistry>) -> MultiPoly {
        let mut acc = MultiPoly::constant(registry, self.constant.clone());
        for (v, c) in &self.coefficients {
            acc = &acc + &MultiPoly::var(registry, *v).scale(c);
        }
        acc
    }

    pub fn coefficient(&self, v: VarId) -> BigRational {
        self.coefficients
            .get(&v)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.coefficients.contains_key(&v)
    }

    /// The highest-ranked variable with nonzero coefficient, under the
    /// given ranking. Variables absent from the ranking are never
    /// dominant (they belong to the "rest").
    pub fn dominant_var(&self, rank: &BTreeMap<VarId, usize>) -> Option<VarId> {
        self.coefficients
            .keys()
            .filter(|v| rank.contains_key(v))
            .max_by_key(|v| rank[v])
            .copied()
    }

    /// Scale so the dominant-most coefficient (largest VarId) is one,
    /// returning the extracted scalar. Used to canonicalize denominator
    /// factor multisets.
    pub fn normalized(&self) -> (BigRational, LinearForm) {
        let (_, lead) = self
            .coefficients
            .iter()
            .next_back()
            .map(|(v, c)| (*v, c.clone()))
            .unwrap();
        let inv = BigRational::one() / lead.clone();
        let form = LinearForm {
            constant: &self.constant * &inv,
            coefficients: self
                .coefficients
                .iter()
                .map(|(v, c)| (*v, c * &inv))
                .collect(),
        };
        (lead, form)
    }
}

/// Expand `1/omega` as a truncated Laurent series in the dominant
/// variable `z_q` of `omega`:
/// `sum_{j=0..truncation} (-1)^j rest^j / (a^q z_q)^{j+1}`.
///
/// The product with `omega` equals `1` plus a single remainder term whose
/// `z_q`-exponent is `-(truncation+1)`, i.e. the expansion is exact above
/// the truncation order.
pub fn expand_inverse_linear(
    registry: &Arc<VarRegistry>,
    omega: &LinearForm,
    order_rank: &BTreeMap<VarId, usize>,
    truncation: u32,
) -> Result<MultiPoly, PolyError> {
    let q = omega
        .dominant_var(order_rank)
        .ok_or(PolyError::NoResidueVariable)?;
    let aq = omega.coefficient(q);
    // rest = omega - a^q z_q
    let mut rest = MultiPoly::constant(registry, omega.constant.clone());
    for (v, c) in &omega.coefficients {
        if *v != q {
            rest = &rest + &MultiPoly::var(registry, *v).scale(c);
        }
    }
    let mut acc = MultiPoly::zero(registry);
    let mut rest_pow = MultiPoly::one(registry);
    let mut aq_pow = aq.clone();
    for j in 0..=truncation {
        let sign = if j % 2 == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        };
        let coeff = sign / aq_pow.clone();
        let term = rest_pow.mul_term(&Monomial::var(q, -((j as i64) + 1)), &coeff);
        acc = &acc + &term;
        if rest.is_zero() {
            break; // pure power: expansion is exact with one term
        }
        rest_pow = &rest_pow * &rest;
        aq_pow *= &aq;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::VarKind;

    fn zreg() -> (Arc<VarRegistry>, VarId, VarId) {
        let reg = Arc::new(VarRegistry::new());
        let z1 = reg.register(VarKind::ResidueZ { block: 1, pos: 1 });
        let z2 = reg.register(VarKind::ResidueZ { block: 1, pos: 2 });
        (reg, z1, z2)
    }

    fn rank_of(vars: &[VarId]) -> BTreeMap<VarId, usize> {
        vars.iter().enumerate().map(|(i, v)| (*v, i)).collect()
    }

    #[test]
    fn expansion_matches_omegaexp_shape() {
        // omega = -z2 + 2 z1, z2 dominant: -sum_j 2^j z1^j z2^{-j-1}
        let (reg, z1, z2) = zreg();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(z1, BigRational::from_integer(2.into()));
        coeffs.insert(z2, BigRational::from_integer((-1).into()));
        let omega = LinearForm::new(BigRational::zero(), coeffs).unwrap();
        let rank = rank_of(&[z1, z2]);
        let exp = expand_inverse_linear(&reg, &omega, &rank, 2).unwrap();
        let mut want = MultiPoly::zero(&reg);
        for j in 0..=2i64 {
            let c = -BigRational::from_integer(num::BigInt::from(2).pow(j as u32));
            let m = Monomial::var(z1, j).mul(&Monomial::var(z2, -j - 1));
            want = &want + &MultiPoly::monomial(&reg, m, c);
        }
        assert_eq!(exp, want);
    }

    #[test]
    fn single_variable_is_exact() {
        let (reg, z1, _) = zreg();
        let omega = LinearForm::var(z1);
        let rank = rank_of(&[z1]);
        for trunc in [0u32, 3, 10] {
            let exp = expand_inverse_linear(&reg, &omega, &rank, trunc).unwrap();
            assert_eq!(exp, MultiPoly::var_pow(&reg, z1, -1));
        }
    }

    #[test]
    fn product_with_omega_is_one_up_to_truncation() {
        // omega = z - a with a a torus weight
        let (reg, z1, _) = zreg();
        let a = reg.register(VarKind::TorusLambda { pos: 1 });
        let mut coeffs = BTreeMap::new();
        coeffs.insert(z1, BigRational::one());
        let omega = LinearForm {
            constant: BigRational::zero(),
            coefficients: coeffs,
        };
        let mut omega = omega;
        omega.coefficients.insert(a, -BigRational::one());
        let omega = LinearForm::new(BigRational::zero(), omega.coefficients).unwrap();
        let rank = rank_of(&[z1]);
        let trunc = 4u32;
        let exp = expand_inverse_linear(&reg, &omega, &rank, trunc).unwrap();
        let prod = &exp * &omega.to_poly(&reg);
        let diff = &prod - &MultiPoly::one(&reg);
        // the leftover is a single term with z-exponent exactly -(trunc+1)
        assert!(!diff.is_zero());
        for (m, _) in diff.terms() {
            assert_eq!(m.exponent_of(z1), -(trunc as i64) - 1);
        }
    }

    #[test]
    fn constant_form_rejected() {
        let (reg, z1, _) = zreg();
        let res = LinearForm::new(BigRational::one(), BTreeMap::new());
        assert_eq!(res.unwrap_err(), PolyError::ConstantForm);
        // form without ranked variable
        let a = reg.register(VarKind::TorusLambda { pos: 1 });
        let mut coeffs = BTreeMap::new();
        coeffs.insert(a, BigRational::one());
        let omega = LinearForm::new(BigRational::zero(), coeffs).unwrap();
        let rank = rank_of(&[z1]);
        assert_eq!(
            expand_inverse_linear(&reg, &omega, &rank, 3).unwrap_err(),
            PolyError::NoResidueVariable
        );
    }
}
