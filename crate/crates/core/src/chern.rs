//! Chern/Segre class calculus.
//!
//! Bundle presentations (formal classes vs explicit equivariant roots),
//! Segre-series inversion, twisting by a line of weight `z`, evaluation
//! of a Chern polynomial on explicit roots, and the classical elimination
//! that rewrites a symmetric polynomial in elementary symmetric
//! polynomials.

use std::collections::HashMap;
use std::sync::Arc;

use num::{BigRational, One, Zero};
use thiserror::Error;

use crate::expr::{parse_expr, Expr, ParseError};
use crate::poly::{Monomial, MultiPoly};
use crate::registry::{VarId, VarKind, VarRegistry};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChernError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("unknown symbol `{0}` in Chern polynomial (only c1, c2, ... allowed)")]
    UnknownSymbol(String),
    #[error("Chern index c{0} exceeds the rank {1} of the bundle")]
    IndexOutOfRange(u32, usize),
    #[error("expression is not homogeneous: found degrees {0} and {1}")]
    NotHomogeneous(i64, i64),
    #[error("polynomial is not symmetric in the block: swapping {0} and {1} changes it")]
    NotSymmetric(String, String),
    #[error("block and target lists have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Presentation of a bundle: either formal Chern classes `c_1..c_rank`
/// or explicit degree-one equivariant Chern roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BundlePresentation {
    FormalClasses,
    ExplicitWeights(Vec<MultiPoly>),
}

/// A bundle of known rank with one of the two presentations.
#[derive(Clone, Debug)]
pub struct BundleSpec {
    pub rank: usize,
    pub presentation: BundlePresentation,
}

impl BundleSpec {
    pub fn formal(rank: usize) -> Self {
        BundleSpec {
            rank,
            presentation: BundlePresentation::FormalClasses,
        }
    }

    pub fn with_weights(weights: Vec<MultiPoly>) -> Self {
        BundleSpec {
            rank: weights.len(),
            presentation: BundlePresentation::ExplicitWeights(weights),
        }
    }
}

/// AST of the integrand: a polynomial in the Chern classes `c_i` of the
/// tautological bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChernExpr {
    Rational(BigRational),
    Class(u32),
    Sum(Vec<ChernExpr>),
    Product(Vec<ChernExpr>),
    Power(Box<ChernExpr>, u32),
    Neg(Box<ChernExpr>),
}

impl ChernExpr {
    pub fn class(i: u32) -> Self {
        ChernExpr::Class(i)
    }

    /// Largest Chern index used.
    pub fn max_index(&self) -> u32 {
        match self {
            ChernExpr::Rational(_) => 0,
            ChernExpr::Class(i) => *i,
            ChernExpr::Sum(v) | ChernExpr::Product(v) => {
                v.iter().map(|e| e.max_index()).max().unwrap_or(0)
            }
            ChernExpr::Power(b, _) | ChernExpr::Neg(b) => b.max_index(),
        }
    }

    /// Evaluate with `c_i -> bind(i)`. All bindings must share a registry.
    pub fn eval<F>(&self, registry: &Arc<VarRegistry>, bind: &mut F) -> MultiPoly
    where
        F: FnMut(u32) -> MultiPoly,
    {
        match self {
            ChernExpr::Rational(r) => MultiPoly::constant(registry, r.clone()),
            ChernExpr::Class(i) => bind(*i),
            ChernExpr::Sum(v) => {
                let mut acc = MultiPoly::zero(registry);
                for e in v {
                    acc = &acc + &e.eval(registry, bind);
                }
                acc
            }
            ChernExpr::Product(v) => {
                let mut acc = MultiPoly::one(registry);
                for e in v {
                    acc = &acc * &e.eval(registry, bind);
                }
                acc
            }
            ChernExpr::Power(b, e) => b.eval(registry, bind).pow(*e),
            ChernExpr::Neg(b) => b.eval(registry, bind).neg(),
        }
    }

    /// Expand into a polynomial over scratch class variables and read off
    /// the weighted degree, requiring homogeneity (`c_i` has degree `i`).
    pub fn homogeneous_degree(&self) -> Result<i64, ChernError> {
        let reg = Arc::new(VarRegistry::new());
        let expanded = self.eval(&reg, &mut |i| {
            let v = reg.register(VarKind::FormalClassV {
                factor: 0,
                degree: i,
            });
            MultiPoly::var(&reg, v)
        });
        if expanded.is_zero() {
            return Ok(0);
        }
        let mut degrees: Vec<i64> = expanded
            .terms()
            .map(|(m, _)| expanded.term_weighted_degree(m))
            .collect();
        degrees.sort_unstable();
        degrees.dedup();
        if degrees.len() > 1 {
            return Err(ChernError::NotHomogeneous(degrees[0], degrees[1]));
        }
        Ok(degrees[0])
    }

    /// Render back to the surface syntax (for reports).
    pub fn to_source(&self) -> String {
        match self {
            ChernExpr::Rational(r) => r.to_string(),
            ChernExpr::Class(i) => format!("c{i}"),
            ChernExpr::Sum(v) => v
                .iter()
                .map(|e| e.to_source())
                .collect::<Vec<_>>()
                .join(" + "),
            ChernExpr::Product(v) => v
                .iter()
                .map(|e| match e {
                    ChernExpr::Sum(_) => format!("({})", e.to_source()),
                    _ => e.to_source(),
                })
                .collect::<Vec<_>>()
                .join("*"),
            ChernExpr::Power(b, e) => match **b {
                ChernExpr::Class(_) | ChernExpr::Rational(_) => format!("{}^{e}", b.to_source()),
                _ => format!("({})^{e}", b.to_source()),
            },
            ChernExpr::Neg(b) => format!("-{}", b.to_source()),
        }
    }
}

fn lower(expr: Expr) -> Result<ChernExpr, ChernError> {
    Ok(match expr {
        Expr::Rational(r) => ChernExpr::Rational(r),
        Expr::Symbol { name, index } => {
            if name == "c" {
                ChernExpr::Class(index)
            } else {
                return Err(ChernError::UnknownSymbol(format!("{name}{index}")));
            }
        }
        Expr::Sum(v) => ChernExpr::Sum(v.into_iter().map(lower).collect::<Result<_, _>>()?),
        Expr::Product(v) => ChernExpr::Product(v.into_iter().map(lower).collect::<Result<_, _>>()?),
        Expr::Power(b, e) => ChernExpr::Power(Box::new(lower(*b)?), e),
        Expr::Neg(b) => ChernExpr::Neg(Box::new(lower(*b)?)),
    })
}

/// Parse the integrand grammar (`c1^2 + 3*c2`, ...). Index range checks
/// are deferred to evaluation, where the rank is known.
pub fn parse_phi(source: &str) -> Result<ChernExpr, ChernError> {
    lower(parse_expr(source)?)
}

/// Truncated Segre series: `s_0 = 1, s_1, ..., s_order` with
/// `(sum s_i)(sum c_i) = 1` up to the truncation order.
#[derive(Clone, Debug)]
pub struct SegreSeries {
    pub coefficients: Vec<MultiPoly>,
}

/// Invert the total Chern series `1 + c[0] + c[1] + ...` (entry `i` has
/// degree `i+1`) up to `order`.
pub fn segre_from_chern(
    registry: &Arc<VarRegistry>,
    chern: &[MultiPoly],
    order: usize,
) -> SegreSeries {
    let mut s: Vec<MultiPoly> = Vec::with_capacity(order + 1);
    s.push(MultiPoly::one(registry));
    for d in 1..=order {
        // s_d = -sum_{i=1..d} c_i s_{d-i}
        let mut acc = MultiPoly::zero(registry);
        for i in 1..=d.min(chern.len()) {
            acc = &acc + &(&chern[i - 1] * &s[d - i]);
        }
        s.push(acc.neg());
    }
    SegreSeries { coefficients: s }
}

/// Chern roots of `V (x) C_z`: each root picks up `+z`.
pub fn twist_roots(theta: &[MultiPoly], z: &MultiPoly) -> Vec<MultiPoly> {
    theta.iter().map(|t| t + z).collect()
}

/// All elementary symmetric polynomials `e_0..e_n` of the given values.
pub fn elementary_symmetric(registry: &Arc<VarRegistry>, values: &[MultiPoly]) -> Vec<MultiPoly> {
    let mut e = vec![MultiPoly::zero(registry); values.len() + 1];
    e[0] = MultiPoly::one(registry);
    for (t, root) in values.iter().enumerate() {
        for d in (1..=t + 1).rev() {
            let bump = &e[d - 1] * root;
            e[d] = &e[d] + &bump;
        }
    }
    e
}

/// Evaluate `phi` with `c_i -> e_i(roots)`.
pub fn phi_eval_on_roots(
    registry: &Arc<VarRegistry>,
    phi: &ChernExpr,
    roots: &[MultiPoly],
) -> Result<MultiPoly, ChernError> {
    let max = phi.max_index();
    if max as usize > roots.len() {
        return Err(ChernError::IndexOutOfRange(max, roots.len()));
    }
    let e = elementary_symmetric(registry, roots);
    Ok(phi.eval(registry, &mut |i| e[i as usize].clone()))
}

/// Rewrite a polynomial symmetric in `block` so that the block variables
/// are eliminated in favor of `targets[i] = e_{i+1}(block)`.
///
/// Classical leading-monomial elimination: repeatedly subtract
/// `coeff * prod e_i^{a_i - a_{i+1}}` against the lex-leading block
/// exponent. Symmetry is checked first; the error reports a violating
/// transposition.
pub fn symmetric_reduce(
    p: &MultiPoly,
    block: &[VarId],
    targets: &[VarId],
) -> Result<MultiPoly, ChernError> {
    let registry = p.registry().clone();
    if block.len() != targets.len() {
        return Err(ChernError::LengthMismatch(block.len(), targets.len()));
    }
    if block.is_empty() {
        return Ok(p.clone());
    }
    // symmetry check on adjacent transpositions
    for i in 0..block.len() - 1 {
        let mut swap = HashMap::new();
        swap.insert(block[i], MultiPoly::var(&registry, block[i + 1]));
        swap.insert(block[i + 1], MultiPoly::var(&registry, block[i]));
        let swapped = p.substitute(&swap).expect("same registry");
        if swapped != *p {
            return Err(ChernError::NotSymmetric(
                registry.display_name(block[i]),
                registry.display_name(block[i + 1]),
            ));
        }
    }
    let e = elementary_symmetric(
        &registry,
        &block
            .iter()
            .map(|v| MultiPoly::var(&registry, *v))
            .collect::<Vec<_>>(),
    );

    let block_exponents =
        |m: &Monomial| -> Vec<i64> { block.iter().map(|v| m.exponent_of(*v)).collect() };

    let mut rest = p.clone();
    let mut out = MultiPoly::zero(&registry);
    loop {
        // lex-leading block exponent vector among terms that involve the block
        let lead = rest
            .terms()
            .map(|(m, _)| block_exponents(m))
            .filter(|ex| ex.iter().any(|&x| x != 0))
            .max();
        let Some(lead) = lead else {
            // nothing involves the block any more
            out = &out + &rest;
            return Ok(out);
        };
        debug_assert!(
            lead.iter().all(|&x| x >= 0),
            "Laurent exponents in symmetric block"
        );
        if lead.windows(2).any(|w| w[0] < w[1]) {
            // a symmetric polynomial always has a weakly decreasing leading
            // exponent; reaching this means the input was not symmetric
            return Err(ChernError::NotSymmetric(
                registry.display_name(block[0]),
                registry.display_name(block[1 % block.len()]),
            ));
        }
        // coefficient polynomial (in the non-block variables) of that vector
        let mut coeff = MultiPoly::zero(&registry);
        for (m, c) in rest.terms() {
            if block_exponents(m) == lead {
                let mut stripped = m.clone();
                for v in block {
                    stripped = stripped.without(*v);
                }
                coeff = &coeff + &MultiPoly::monomial(&registry, stripped, c.clone());
            }
        }
        // e-product with exponents a_i - a_{i+1}
        let mut e_prod = MultiPoly::one(&registry);
        let mut target_monomial = Monomial::one();
        for i in 0..block.len() {
            let next = if i + 1 < block.len() { lead[i + 1] } else { 0 };
            let exp = (lead[i] - next) as u32;
            if exp > 0 {
                e_prod = &e_prod * &e[i + 1].pow(exp);
                target_monomial = target_monomial.mul(&Monomial::var(targets[i], exp as i64));
            }
        }
        rest = &rest - &(&coeff * &e_prod);
        out = &out + &coeff.mul_term(&target_monomial, &BigRational::one());
    }
}

/// Build the Laurent polynomial `sum_{d=0..order} s_d * z^{-d}` from a
/// Segre series (the `s_X(1/z)` factor of the integrand).
pub fn segre_in_inverse_z(series: &SegreSeries, z: VarId) -> MultiPoly {
    let registry = series.coefficients[0].registry().clone();
    let mut acc = MultiPoly::zero(&registry);
    for (d, s) in series.coefficients.iter().enumerate() {
        acc = &acc + &s.mul_term(&Monomial::var(z, -(d as i64)), &BigRational::one());
    }
    acc
}

/// Convert a polynomial in formal `c_i(V)` class variables back into a
/// [`ChernExpr`] (used when integrands are produced programmatically).
pub fn chern_expr_from_c_poly(p: &MultiPoly) -> ChernExpr {
    let registry = p.registry();
    let mut terms: Vec<ChernExpr> = Vec::new();
    for (m, c) in p.terms() {
        let mut factors: Vec<ChernExpr> = vec![ChernExpr::Rational(c.clone())];
        for (v, e) in m.iter() {
            let VarKind::FormalClassV { degree, .. } = registry.kind(v) else {
                panic!(
                    "chern_expr_from_c_poly expects formal V classes, found {}",
                    registry.display_name(v)
                );
            };
            debug_assert!(e > 0);
            if e == 1 {
                factors.push(ChernExpr::Class(degree));
            } else {
                factors.push(ChernExpr::Power(
                    Box::new(ChernExpr::Class(degree)),
                    e as u32,
                ));
            }
        }
        terms.push(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            ChernExpr::Product(factors)
        });
    }
    match terms.len() {
        0 => ChernExpr::Rational(num::BigRational::zero()),
        1 => terms.pop().unwrap(),
        _ => ChernExpr::Sum(terms),
    }
}

/// Formal Chern class variables `c_1(X)..c_n(X)` for one factor.
pub fn formal_x_classes(registry: &Arc<VarRegistry>, factor: u32, n: usize) -> Vec<MultiPoly> {
    (1..=n)
        .map(|d| {
            let v = registry.register(VarKind::FormalClassX {
                factor,
                degree: d as u32,
            });
            MultiPoly::var(registry, v)
        })
        .collect()
}

/// Formal Chern class variables `c_1(V)..c_r(V)` for one factor.
pub fn formal_v_classes(registry: &Arc<VarRegistry>, factor: u32, rank: usize) -> Vec<MultiPoly> {
    (1..=rank)
        .map(|d| {
            let v = registry.register(VarKind::FormalClassV {
                factor,
                degree: d as u32,
            });
            MultiPoly::var(registry, v)
        })
        .collect()
}
