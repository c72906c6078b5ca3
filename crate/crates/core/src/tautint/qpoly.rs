//! The universal kernel polynomials `Q_j`.
//!
//! Known explicitly for `j <= 5`; larger indices must be supplied by the
//! caller as an override (parsed polynomial in `z1..zj`). `Q_0` and `Q_1`
//! are 1: the corresponding orbit module is zero-dimensional.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::BigRational;

use crate::expr::{parse_expr, Expr};
use crate::poly::MultiPoly;
use crate::registry::{VarId, VarRegistry};
use crate::tautint::TautError;

/// Built-in `Q_j` table plus user-registered overrides for `j >= 6`.
#[derive(Clone, Debug, Default)]
pub struct QTable {
    overrides: BTreeMap<u32, (String, Expr)>,
}

impl QTable {
    pub fn new() -> Self {
        QTable::default()
    }

    /// Register `Q_j` for `j >= 6` as an expression in `z1..zj`.
    pub fn register_override(&mut self, j: u32, source: &str) -> Result<(), TautError> {
        let expr =
            parse_expr(source).map_err(|e| TautError::BadSpec(format!("Q_{j} override: {e}")))?;
        validate_symbols(&expr, j)?;
        self.overrides.insert(j, (source.to_string(), expr));
        Ok(())
    }

    pub fn override_sources(&self) -> impl Iterator<Item = (u32, &str)> {
        self.overrides.iter().map(|(j, (s, _))| (*j, s.as_str()))
    }

    pub fn has(&self, j: u32) -> bool {
        j <= 5 || self.overrides.contains_key(&j)
    }

    /// `Q_j` expressed in the given variables (`zvars[i]` playing `z_{i+1}`).
    pub fn polynomial(
        &self,
        registry: &Arc<VarRegistry>,
        j: u32,
        zvars: &[VarId],
    ) -> Result<MultiPoly, TautError> {
        assert!(zvars.len() >= j as usize, "need {j} z variables");
        let z = |i: usize| MultiPoly::var(registry, zvars[i - 1]);
        match j {
            0..=3 => Ok(MultiPoly::one(registry)),
            4 => {
                // 2 z1 + z2 - z4
                Ok(&(&z(1).scale(&BigRational::from_integer(2.into())) + &z(2)) - &z(4))
            }
            5 => {
                // (2 z1 + z2 - z5)
                // * (2 z1^2 + 3 z1 z2 - 2 z1 z5 + 2 z2 z3 - z2 z4 - z2 z5 - z3 z4 + z4 z5)
                let lin = &(&z(1).scale(&BigRational::from_integer(2.into())) + &z(2)) - &z(5);
                let quad = crate::poly::poly_sum(
                    registry,
                    [
                        (&z(1) * &z(1)).scale(&BigRational::from_integer(2.into())),
                        (&z(1) * &z(2)).scale(&BigRational::from_integer(3.into())),
                        (&z(1) * &z(5)).scale(&BigRational::from_integer((-2).into())),
                        (&z(2) * &z(3)).scale(&BigRational::from_integer(2.into())),
                        (&z(2) * &z(4)).neg(),
                        (&z(2) * &z(5)).neg(),
                        (&z(3) * &z(4)).neg(),
                        &z(4) * &z(5),
                    ],
                );
                Ok(&lin * &quad)
            }
            _ => match self.overrides.get(&j) {
                Some((_, expr)) => Ok(expr_to_poly(expr, registry, zvars)),
                None => Err(TautError::MissingQ(j)),
            },
        }
    }
}

fn validate_symbols(expr: &Expr, j: u32) -> Result<(), TautError> {
    match expr {
        Expr::Rational(_) => Ok(()),
        Expr::Symbol { name, index } => {
            if name == "z" && *index >= 1 && *index <= j {
                Ok(())
            } else {
                Err(TautError::BadSpec(format!(
                    "Q override may only use z1..z{j}, found {name}{index}"
                )))
            }
        }
        Expr::Sum(v) | Expr::Product(v) => v.iter().try_for_each(|e| validate_symbols(e, j)),
        Expr::Power(b, _) | Expr::Neg(b) => validate_symbols(b, j),
    }
}

fn expr_to_poly(expr: &Expr, registry: &Arc<VarRegistry>, zvars: &[VarId]) -> MultiPoly {
    match expr {
        Expr::Rational(r) => MultiPoly::constant(registry, r.clone()),
        Expr::Symbol { index, .. } => MultiPoly::var(registry, zvars[*index as usize - 1]),
        Expr::Sum(v) => {
            let mut acc = MultiPoly::zero(registry);
            for e in v {
                acc = &acc + &expr_to_poly(e, registry, zvars);
            }
            acc
        }
        Expr::Product(v) => {
            let mut acc = MultiPoly::one(registry);
            for e in v {
                acc = &acc * &expr_to_poly(e, registry, zvars);
            }
            acc
        }
        Expr::Power(b, e) => expr_to_poly(b, registry, zvars).pow(*e),
        Expr::Neg(b) => expr_to_poly(b, registry, zvars).neg(),
    }
}

/// Parse an expression in `z1..z{vars}` into a polynomial over the given
/// variables (used for overrides and for reconstructing reference
/// values in tests).
pub fn parse_z_expression(
    registry: &Arc<VarRegistry>,
    source: &str,
    zvars: &[VarId],
) -> Result<MultiPoly, TautError> {
    let expr = parse_expr(source).map_err(|e| TautError::BadSpec(e.to_string()))?;
    validate_symbols(&expr, zvars.len() as u32)?;
    Ok(expr_to_poly(&expr, registry, zvars))
}

/// The `Q_j` polynomial in the canonical block-1 residue variables.
pub fn q_polynomial(registry: &Arc<VarRegistry>, j: u32) -> Result<MultiPoly, TautError> {
    let zvars: Vec<VarId> = (1..=j.max(1))
        .map(|pos| registry.register(crate::registry::VarKind::ResidueZ { block: 1, pos }))
        .collect();
    QTable::new().polynomial(registry, j, &zvars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::VarKind;

    #[test]
    fn builtin_values() {
        let registry = Arc::new(VarRegistry::new());
        assert_eq!(
            q_polynomial(&registry, 2).unwrap(),
            MultiPoly::one(&registry)
        );
        assert_eq!(
            q_polynomial(&registry, 3).unwrap(),
            MultiPoly::one(&registry)
        );
        let q4 = q_polynomial(&registry, 4).unwrap();
        assert_eq!(q4.to_string(), "2*z[1,1] + z[1,2] - z[1,4]");
        let q5 = q_polynomial(&registry, 5).unwrap();
        assert_eq!(q5.homogeneous_degree(), Some(3));
        // spot-check one expanded coefficient: the z1^3 term of Q5 is 4 z1^3
        let z1 = registry
            .lookup(VarKind::ResidueZ { block: 1, pos: 1 })
            .unwrap();
        let cubic = q5.coefficient_of(z1, 3);
        assert_eq!(cubic, MultiPoly::from_int(&registry, 4));
    }

    #[test]
    fn missing_q_is_an_error() {
        let registry = Arc::new(VarRegistry::new());
        match q_polynomial(&registry, 6) {
            Err(TautError::MissingQ(6)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn override_is_used_and_validated() {
        let registry = Arc::new(VarRegistry::new());
        let mut table = QTable::new();
        assert!(table.register_override(6, "z1 + 2*z6").is_ok());
        let zvars: Vec<VarId> = (1..=6)
            .map(|pos| registry.register(VarKind::ResidueZ { block: 1, pos }))
            .collect();
        let q6 = table.polynomial(&registry, 6, &zvars).unwrap();
        assert_eq!(q6.to_string(), "z[1,1] + 2*z[1,6]");
        // out-of-range symbol rejected
        let mut bad = QTable::new();
        assert!(bad.register_override(6, "z7").is_err());
        assert!(bad.register_override(6, "lambda1").is_err());
    }
}
