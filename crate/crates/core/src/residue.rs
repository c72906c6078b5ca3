//! Iterated residues at infinity.
//!
//! A [`RationalTerm`] is a Laurent-polynomial numerator over a product of
//! affine-linear denominator factors, together with the contour order of
//! its residue variables (`z_order[0]` innermost, last outermost). The
//! evaluator eliminates variables from the outermost inward: at each
//! stage every factor dominated by the current variable is expanded by
//! the dominance rule and the coefficient of `(current)^{-1}` is
//! extracted. The final value carries the orientation `(-1)^d`, so that
//! `Res_{z=inf} dz/z = -1`.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::linear::{expand_inverse_linear, LinearForm};
use crate::poly::{MultiPoly, PolyError};
use crate::registry::{VarId, VarRegistry};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResidueError {
    #[error("residue variable {0} appears in the term but not in z_order")]
    UnlistedVariable(String),
    #[error("denominator factor {0} contains no residue variable from z_order")]
    FactorWithoutResidueVar(usize),
    #[error("z_order lists {0} twice")]
    DuplicateVariable(String),
    #[error("polynomial error: {0}")]
    Poly(#[from] PolyError),
    #[error("internal: residue output still contains {0}; truncation bound computation is wrong")]
    TruncationExceeded(String),
}

/// Numerator over a product of linear factors with multiplicities.
#[derive(Clone, Debug)]
pub struct RationalTerm {
    pub numerator: MultiPoly,
    pub factors: Vec<(LinearForm, u32)>,
    pub z_order: Vec<VarId>,
}

/// Evaluation transcript: the residue value plus the per-variable
/// truncation order used for the dominance expansions.
#[derive(Clone, Debug)]
pub struct ResidueReport {
    pub value: MultiPoly,
    pub truncation_orders: BTreeMap<VarId, u32>,
}

impl RationalTerm {
    pub fn registry(&self) -> &Arc<VarRegistry> {
        self.numerator.registry()
    }

    fn rank(&self) -> BTreeMap<VarId, usize> {
        self.z_order
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, i))
            .collect()
    }

    fn validate(&self) -> Result<(), ResidueError> {
        let registry = self.registry();
        self.numerator.check_laurent_invariant()?;
        let rank = self.rank();
        if rank.len() != self.z_order.len() {
            let dup = self
                .z_order
                .iter()
                .find(|v| self.z_order.iter().filter(|w| w == v).count() > 1)
                .unwrap();
            return Err(ResidueError::DuplicateVariable(registry.display_name(*dup)));
        }
        for v in self.numerator.variables() {
            if registry.kind(v).allows_negative_exponent() && !rank.contains_key(&v) {
                return Err(ResidueError::UnlistedVariable(registry.display_name(v)));
            }
        }
        for (i, (f, _)) in self.factors.iter().enumerate() {
            let mut has_ranked = false;
            for v in f.coefficients.keys() {
                if rank.contains_key(v) {
                    has_ranked = true;
                } else if registry.kind(*v).allows_negative_exponent() {
                    return Err(ResidueError::UnlistedVariable(registry.display_name(*v)));
                }
            }
            if !has_ranked {
                return Err(ResidueError::FactorWithoutResidueVar(i));
            }
        }
        Ok(())
    }
}

/// Evaluate the iterated residue at infinity, returning the transcript.
pub fn iterated_residue_report(term: &RationalTerm) -> Result<ResidueReport, ResidueError> {
    term.validate()?;
    let registry = term.registry().clone();
    let rank = term.rank();
    let mut current = term.numerator.clone();
    let mut truncation_orders = BTreeMap::new();

    // group factors by dominant variable
    let mut by_dominant: BTreeMap<usize, Vec<(LinearForm, u32)>> = BTreeMap::new();
    for (f, mult) in &term.factors {
        let dom = f.dominant_var(&rank).expect("validated");
        by_dominant
            .entry(rank[&dom])
            .or_default()
            .push((f.clone(), *mult));
    }

    for (pos, v) in term.z_order.iter().enumerate().rev() {
        let v = *v;
        let factors = by_dominant.remove(&pos).unwrap_or_default();
        // Expansion depth: a factor copy's terms below
        // -(deg_v(current)+1) can never reach v^{-1} because every other
        // expanded copy only lowers the exponent further.
        let deg_v = current.degree_in(v).max(0) as u32;
        truncation_orders.insert(v, deg_v + 1);
        if factors.is_empty() {
            current = current.coefficient_of(v, -1);
            continue;
        }
        // Exact reachability pruning: with `remaining` factor copies still
        // to multiply (each contributing v-exponent <= -1, unbounded
        // below), a term of exponent e can land on -1 iff e >= remaining - 1.
        let mut remaining: u32 = factors.iter().map(|(_, m)| *m).sum();
        for (form, mult) in &factors {
            let expansion = expand_inverse_linear(&registry, form, &rank, deg_v + 1)?;
            for _ in 0..*mult {
                remaining -= 1;
                current = current.try_mul(&expansion)?;
                current = drop_below(&current, v, remaining as i64 - 1);
            }
        }
        current = current.coefficient_of(v, -1);
    }

    for v in &term.z_order {
        if current.contains_var(*v) {
            return Err(ResidueError::TruncationExceeded(registry.display_name(*v)));
        }
    }
    // orientation: Res dz_1...dz_d / (z_1...z_d) = (-1)^d
    if term.z_order.len() % 2 == 1 {
        current = current.neg();
    }
    Ok(ResidueReport {
        value: current,
        truncation_orders,
    })
}

/// Evaluate the iterated residue at infinity.
pub fn iterated_residue(term: &RationalTerm) -> Result<MultiPoly, ResidueError> {
    Ok(iterated_residue_report(term)?.value)
}

fn drop_below(p: &MultiPoly, v: VarId, cutoff: i64) -> MultiPoly {
    let registry = p.registry().clone();
    let mut acc = MultiPoly::zero(&registry);
    for (m, c) in p.terms() {
        if m.exponent_of(v) >= cutoff {
            acc = &acc + &MultiPoly::monomial(&registry, m.clone(), c.clone());
        }
    }
    acc
}

/// Sufficient conditions for the residue to vanish, checked per variable:
/// every denominator factor containing `z_l` must have `z_l` as its
/// dominant variable (no mixed factor can pump positive `z_l` powers into
/// the expansion), and the numerator's `z_l`-degree must satisfy
/// `deg(p; l) + 1 < deg(q; l)`. Returns `true` only when the residue is
/// provably zero; `false` means "unknown, compute it".
pub fn vanishing_precheck(term: &RationalTerm) -> bool {
    let rank = term.rank();
    'vars: for v in &term.z_order {
        let mut den_degree = 0i64;
        for (f, mult) in &term.factors {
            if f.contains(*v) {
                match f.dominant_var(&rank) {
                    Some(d) if d == *v => den_degree += *mult as i64,
                    _ => continue 'vars, // mixed factor with higher dominant variable
                }
            }
        }
        let num_degree = if term.numerator.contains_var(*v) {
            term.numerator.degree_in(*v)
        } else if term.numerator.is_zero() {
            return true;
        } else {
            0
        };
        if num_degree + 1 < den_degree {
            return true;
        }
    }
    false
}

/// Both sides of the fixed-point/residue identity: the left-hand flag
/// localization sum over ordered `d`-element subsets of the weights, and
/// the right-hand iterated residue with Vandermonde numerator. Callers
/// assert equality.
pub fn flag_sum_to_residue_check(
    q_poly: &MultiPoly,
    lambdas: &[MultiPoly],
    d: usize,
    z_vars: &[VarId],
) -> Result<(crate::ratfun::RationalFunction, MultiPoly), ResidueError> {
    use crate::ratfun::RationalFunction;
    let registry = q_poly.registry().clone();
    let m = lambdas.len();
    assert!(d <= m, "d must not exceed the number of weights");
    assert_eq!(z_vars.len(), d);

    // left: sum over injective tuples (t_1..t_d)
    let mut tuple: Vec<usize> = Vec::new();
    let mut contributions: Vec<RationalFunction> = Vec::new();
    fn walk(
        q_poly: &MultiPoly,
        lambdas: &[MultiPoly],
        z_vars: &[VarId],
        d: usize,
        tuple: &mut Vec<usize>,
        acc: &mut Vec<crate::ratfun::RationalFunction>,
    ) {
        if tuple.len() == d {
            // numerator: Q(lambda_{t_1}, ..., lambda_{t_d})
            let mut bind = std::collections::HashMap::new();
            for (j, &t) in tuple.iter().enumerate() {
                bind.insert(z_vars[j], lambdas[t].clone());
            }
            let num = q_poly.substitute(&bind).expect("same registry");
            // denominator: prod_{j=1..d} prod_{t not in {t_1..t_j}} (lambda_t - lambda_{t_j})
            let mut den: Vec<(LinearForm, u32)> = Vec::new();
            for j in 0..d {
                for t in 0..lambdas.len() {
                    if tuple[..=j].contains(&t) {
                        continue;
                    }
                    let diff = &lambdas[t] - &lambdas[tuple[j]];
                    den.push((
                        LinearForm::try_from_poly(&diff).expect("degree-one weight difference"),
                        1,
                    ));
                }
            }
            acc.push(crate::ratfun::RationalFunction::new(num, den));
            return;
        }
        for t in 0..lambdas.len() {
            if tuple.contains(&t) {
                continue;
            }
            tuple.push(t);
            walk(q_poly, lambdas, z_vars, d, tuple, acc);
            tuple.pop();
        }
    }
    walk(q_poly, lambdas, z_vars, d, &mut tuple, &mut contributions);
    let left = crate::ratfun::tree_sum(&registry, contributions);

    // right: Res prod_{i<j}(z_i - z_j) Q(z) dz / prod_i prod_j (lambda_j - z_i);
    // the Vandermonde orientation follows the main integral formula (the
    // flag-localization display prints it reversed; the sum itself pins
    // the sign).
    let mut numerator = q_poly.clone();
    for i in 0..d {
        for j in i + 1..d {
            let diff =
                &MultiPoly::var(&registry, z_vars[i]) - &MultiPoly::var(&registry, z_vars[j]);
            numerator = numerator.try_mul(&diff)?;
        }
    }
    let mut factors = Vec::new();
    for &z in z_vars.iter().take(d) {
        for lam in lambdas.iter().take(m) {
            let diff = lam - &MultiPoly::var(&registry, z);
            factors.push((
                LinearForm::try_from_poly(&diff).expect("degree-one form"),
                1,
            ));
        }
    }
    let term = RationalTerm {
        numerator,
        factors,
        z_order: z_vars.to_vec(),
    };
    let right = iterated_residue(&term)?;
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::VarKind;
    use num::{BigRational, One};

    fn setup(dz: usize) -> (Arc<VarRegistry>, Vec<VarId>) {
        let registry = Arc::new(VarRegistry::new());
        let zs = (1..=dz as u32)
            .map(|pos| registry.register(VarKind::ResidueZ { block: 1, pos }))
            .collect();
        (registry, zs)
    }

    #[test]
    fn res_dz_over_z_is_minus_one() {
        let (registry, zs) = setup(1);
        let term = RationalTerm {
            numerator: MultiPoly::one(&registry),
            factors: vec![(LinearForm::var(zs[0]), 1)],
            z_order: zs,
        };
        let v = iterated_residue(&term).unwrap();
        assert_eq!(v, MultiPoly::constant(&registry, -BigRational::one()));
    }

    #[test]
    fn res_dz_over_z_squared_is_zero() {
        let (registry, zs) = setup(1);
        let term = RationalTerm {
            numerator: MultiPoly::one(&registry),
            factors: vec![(LinearForm::var(zs[0]), 2)],
            z_order: zs,
        };
        assert!(iterated_residue(&term).unwrap().is_zero());
    }

    #[test]
    fn two_variable_example() {
        // Res Res (z1 - z2) dz1 dz2 / (z1 z2 (2 z1 - z2)) = 1
        // (value frozen from the brute-force series oracle in tests/)
        let (registry, zs) = setup(2);
        let num = &MultiPoly::var(&registry, zs[0]) - &MultiPoly::var(&registry, zs[1]);
        let mut coeffs = BTreeMap::new();
        coeffs.insert(zs[0], BigRational::from_integer(2.into()));
        coeffs.insert(zs[1], -BigRational::one());
        let mixed = LinearForm::new(num::Zero::zero(), coeffs).unwrap();
        let term = RationalTerm {
            numerator: num,
            factors: vec![
                (LinearForm::var(zs[0]), 1),
                (LinearForm::var(zs[1]), 1),
                (mixed, 1),
            ],
            z_order: zs,
        };
        let v = iterated_residue(&term).unwrap();
        assert_eq!(v, MultiPoly::one(&registry));
    }

    #[test]
    fn orientation_for_d_up_to_3() {
        for d in 1..=3usize {
            let (registry, zs) = setup(d);
            let term = RationalTerm {
                numerator: MultiPoly::one(&registry),
                factors: zs.iter().map(|z| (LinearForm::var(*z), 1)).collect(),
                z_order: zs,
            };
            let v = iterated_residue(&term).unwrap();
            let want = if d % 2 == 1 {
                -BigRational::one()
            } else {
                BigRational::one()
            };
            assert_eq!(v, MultiPoly::constant(&registry, want), "d = {d}");
        }
    }

    #[test]
    fn linearity() {
        let (registry, zs) = setup(2);
        let z1 = MultiPoly::var(&registry, zs[0]);
        let z2 = MultiPoly::var(&registry, zs[1]);
        let factors = vec![(LinearForm::var(zs[0]), 2), (LinearForm::var(zs[1]), 1)];
        let n1 = &z1 * &z2;
        let n2 = z1.clone();
        let mk = |num: MultiPoly| RationalTerm {
            numerator: num,
            factors: factors.clone(),
            z_order: zs.clone(),
        };
        let a = BigRational::from_integer(3.into());
        let b = BigRational::from_integer((-7).into());
        let lhs = iterated_residue(&mk(&n1.scale(&a) + &n2.scale(&b))).unwrap();
        let rhs = &iterated_residue(&mk(n1)).unwrap().scale(&a)
            + &iterated_residue(&mk(n2)).unwrap().scale(&b);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn order_independence_normal_crossing() {
        // all factors univariate: permuting z_order leaves the value fixed
        let (registry, zs) = setup(2);
        let lam = registry.register(VarKind::TorusLambda { pos: 1 });
        let lamp = MultiPoly::var(&registry, lam);
        let num =
            &(&MultiPoly::var(&registry, zs[0]) + &MultiPoly::var(&registry, zs[1])).pow(2) * &lamp;
        let f1 = LinearForm::try_from_poly(&(&MultiPoly::var(&registry, zs[0]) - &lamp)).unwrap();
        let f2 = LinearForm::try_from_poly(
            &(&MultiPoly::var(&registry, zs[1])
                - &lamp.scale(&BigRational::from_integer(2.into()))),
        )
        .unwrap();
        let factors = vec![(f1, 2), (f2, 2)];
        let t_fwd = RationalTerm {
            numerator: num.clone(),
            factors: factors.clone(),
            z_order: zs.clone(),
        };
        let t_rev = RationalTerm {
            numerator: num,
            factors,
            z_order: vec![zs[1], zs[0]],
        };
        assert_eq!(
            iterated_residue(&t_fwd).unwrap(),
            iterated_residue(&t_rev).unwrap()
        );
    }

    #[test]
    fn precheck_examples() {
        let (registry, zs) = setup(2);
        // numerator omits z2, denominator has z2^3: provably zero
        let term = RationalTerm {
            numerator: MultiPoly::var(&registry, zs[0]),
            factors: vec![(LinearForm::var(zs[0]), 1), (LinearForm::var(zs[1]), 3)],
            z_order: zs.clone(),
        };
        assert!(vanishing_precheck(&term));
        assert!(iterated_residue(&term).unwrap().is_zero());
        // dz/z: residue nonzero, precheck must say false
        let (registry, zs) = setup(1);
        let term = RationalTerm {
            numerator: MultiPoly::one(&registry),
            factors: vec![(LinearForm::var(zs[0]), 1)],
            z_order: zs,
        };
        assert!(!vanishing_precheck(&term));
    }

    #[test]
    fn precheck_k3_missing_z2_shape() {
        // the k = 3 pattern: numerator (z1 - z2), denominator
        // z1 (z2-l1)(z2-l2)(z2-l3) (z1-l1)(z1-l2)(z1-l3); total z2-degree
        // of the numerator is 1, of the denominator 3, so 1 + 1 < 3.
        let (registry, zs) = setup(2);
        let lams: Vec<MultiPoly> = (1..=3)
            .map(|pos| MultiPoly::var(&registry, registry.register(VarKind::TorusLambda { pos })))
            .collect();
        let num = &MultiPoly::var(&registry, zs[0]) - &MultiPoly::var(&registry, zs[1]);
        let mut factors = vec![(LinearForm::var(zs[0]), 1)];
        for z in &zs {
            for lam in &lams {
                let f = LinearForm::try_from_poly(&(&MultiPoly::var(&registry, *z) - lam)).unwrap();
                factors.push((f, 1));
            }
        }
        let term = RationalTerm {
            numerator: num,
            factors,
            z_order: zs,
        };
        assert!(vanishing_precheck(&term));
        assert!(iterated_residue(&term).unwrap().is_zero());
    }

    #[test]
    fn duplicate_z_order_rejected() {
        let (registry, zs) = setup(1);
        let term = RationalTerm {
            numerator: MultiPoly::one(&registry),
            factors: vec![(LinearForm::var(zs[0]), 1)],
            z_order: vec![zs[0], zs[0]],
        };
        assert!(matches!(
            iterated_residue(&term),
            Err(ResidueError::DuplicateVariable(_))
        ));
    }

    #[test]
    fn malformed_terms_rejected() {
        let (registry, zs) = setup(2);
        // factor without any residue variable
        let lam = registry.register(VarKind::TorusLambda { pos: 1 });
        let f = LinearForm::try_from_poly(&MultiPoly::var(&registry, lam)).unwrap();
        let term = RationalTerm {
            numerator: MultiPoly::one(&registry),
            factors: vec![(f, 1)],
            z_order: zs.clone(),
        };
        assert!(matches!(
            iterated_residue(&term),
            Err(ResidueError::FactorWithoutResidueVar(0))
        ));
        // z variable in the numerator missing from z_order
        let term = RationalTerm {
            numerator: MultiPoly::var(&registry, zs[1]),
            factors: vec![(LinearForm::var(zs[0]), 1)],
            z_order: vec![zs[0]],
        };
        assert!(matches!(
            iterated_residue(&term),
            Err(ResidueError::UnlistedVariable(_))
        ));
    }
}
