//! Stable JSON encodings of the core values.
//!
//! Polynomials serialize as an ordered term list
//! `[{"coeff": "p/q", "monomial": {"z[1,2]": -1, ...}}, ...]`; all
//! rationals are `p/q` strings; object keys come out sorted so output is
//! byte-stable.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use num::BigRational;
use serde_json::{json, Map, Value};

use crate::linear::LinearForm;
use crate::poly::{Monomial, MultiPoly};
use crate::ratfun::RationalFunction;
use crate::registry::{VarKind, VarRegistry};
use crate::residue::RationalTerm;
use crate::setpart::SetPartition;
use crate::tautint::{
    format_table_key, parse_table_key, IntersectionTable, PartitionTerm, TautError,
    UniversalIntegral,
};

pub fn rational_to_string(r: &BigRational) -> String {
    r.to_string()
}

pub fn rational_from_str(s: &str) -> Result<BigRational, TautError> {
    BigRational::from_str(s.trim())
        .map_err(|e| TautError::BadSpec(format!("bad rational `{s}`: {e}")))
}

/// A polynomial as a deterministic JSON term list.
pub fn poly_to_json(p: &MultiPoly) -> Value {
    let registry = p.registry();
    let mut terms = Vec::new();
    for (m, c) in p.terms() {
        let mut mono = Map::new();
        for (v, e) in m.iter() {
            mono.insert(registry.display_name(v), json!(e));
        }
        terms.push(json!({
            "coeff": rational_to_string(c),
            "monomial": Value::Object(mono),
        }));
    }
    Value::Array(terms)
}

/// Parse a polynomial term list against a registry (variables are
/// registered on demand from their display names).
pub fn poly_from_json(registry: &Arc<VarRegistry>, value: &Value) -> Result<MultiPoly, TautError> {
    let terms = value
        .as_array()
        .ok_or_else(|| TautError::BadSpec("polynomial must be an array of terms".into()))?;
    let mut acc = MultiPoly::zero(registry);
    for t in terms {
        let coeff = t
            .get("coeff")
            .and_then(|c| c.as_str())
            .ok_or_else(|| TautError::BadSpec("term missing string `coeff`".into()))?;
        let coeff = rational_from_str(coeff)?;
        let mono = t
            .get("monomial")
            .and_then(|m| m.as_object())
            .ok_or_else(|| TautError::BadSpec("term missing object `monomial`".into()))?;
        let mut pairs = Vec::new();
        for (name, exp) in mono {
            let kind = VarKind::parse_name(name)
                .ok_or_else(|| TautError::BadSpec(format!("unknown variable name `{name}`")))?;
            let exp = exp.as_i64().ok_or_else(|| {
                TautError::BadSpec(format!("exponent of `{name}` must be an integer"))
            })?;
            if exp < 0 && !kind.allows_negative_exponent() {
                return Err(TautError::BadSpec(format!(
                    "negative exponent on non-residue variable `{name}`"
                )));
            }
            pairs.push((registry.register(kind), exp));
        }
        pairs.sort_by_key(|&(v, _)| v);
        acc = &acc + &MultiPoly::monomial(registry, Monomial(pairs), coeff);
    }
    Ok(acc)
}

pub fn linear_form_to_json(registry: &Arc<VarRegistry>, form: &LinearForm) -> Value {
    let mut coeffs = Map::new();
    for (v, c) in &form.coefficients {
        coeffs.insert(registry.display_name(*v), json!(rational_to_string(c)));
    }
    json!({
        "constant": rational_to_string(&form.constant),
        "coefficients": Value::Object(coeffs),
    })
}

pub fn linear_form_from_json(
    registry: &Arc<VarRegistry>,
    value: &Value,
) -> Result<LinearForm, TautError> {
    let constant =
        match value.get("constant") {
            Some(c) => rational_from_str(c.as_str().ok_or_else(|| {
                TautError::BadSpec("`constant` must be a string rational".into())
            })?)?,
            None => num::Zero::zero(),
        };
    let coeffs = value
        .get("coefficients")
        .and_then(|c| c.as_object())
        .ok_or_else(|| TautError::BadSpec("linear form missing `coefficients`".into()))?;
    let mut map = BTreeMap::new();
    for (name, c) in coeffs {
        let kind = VarKind::parse_name(name)
            .ok_or_else(|| TautError::BadSpec(format!("unknown variable name `{name}`")))?;
        let c = rational_from_str(c.as_str().ok_or_else(|| {
            TautError::BadSpec(format!("coefficient of `{name}` must be a string"))
        })?)?;
        map.insert(registry.register(kind), c);
    }
    LinearForm::new(constant, map).map_err(|e| TautError::BadSpec(e.to_string()))
}

/// A rational term for the residue debug interface:
/// `{"numerator": [...], "factors": [{"form": {...}, "mult": 2}], "z_order": ["z[1,1]"]}`.
pub fn rational_term_from_json(
    registry: &Arc<VarRegistry>,
    value: &Value,
) -> Result<RationalTerm, TautError> {
    let numerator = poly_from_json(
        registry,
        value
            .get("numerator")
            .ok_or_else(|| TautError::BadSpec("term missing `numerator`".into()))?,
    )?;
    let mut factors = Vec::new();
    if let Some(fs) = value.get("factors") {
        let fs = fs
            .as_array()
            .ok_or_else(|| TautError::BadSpec("`factors` must be an array".into()))?;
        for f in fs {
            let form = linear_form_from_json(
                registry,
                f.get("form")
                    .ok_or_else(|| TautError::BadSpec("factor missing `form`".into()))?,
            )?;
            let mult = f.get("mult").and_then(|m| m.as_u64()).unwrap_or(1) as u32;
            factors.push((form, mult));
        }
    }
    let z_order = value
        .get("z_order")
        .and_then(|z| z.as_array())
        .ok_or_else(|| TautError::BadSpec("term missing `z_order` array".into()))?
        .iter()
        .map(|v| {
            let name = v.as_str().ok_or_else(|| {
                TautError::BadSpec("z_order entries must be variable names".into())
            })?;
            let kind = VarKind::parse_name(name)
                .ok_or_else(|| TautError::BadSpec(format!("unknown variable name `{name}`")))?;
            if !kind.allows_negative_exponent() {
                return Err(TautError::BadSpec(format!(
                    "`{name}` is not a residue variable"
                )));
            }
            Ok(registry.register(kind))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RationalTerm {
        numerator,
        factors,
        z_order,
    })
}

pub fn partition_to_json(p: &SetPartition) -> Value {
    json!(p.blocks())
}

pub fn partition_term_to_json(term: &PartitionTerm) -> Value {
    let products: Vec<Value> = term
        .products
        .iter()
        .map(|prod| {
            json!({
                "coeff": rational_to_string(&prod.coeff),
                "blocks": prod.blocks.iter().map(poly_to_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "partition": partition_to_json(&term.partition),
        "products": products,
        "integrand_degree": term.integrand_degree,
    })
}

pub fn universal_integral_to_json(ui: &UniversalIntegral) -> Value {
    json!({
        "schema_version": 1,
        "n": ui.n,
        "k": ui.k,
        "rank": ui.rank,
        "normalization": rational_to_string(&ui.normalization),
        "per_partition": ui.per_partition.iter().map(partition_term_to_json).collect::<Vec<_>>(),
        "total": ui.total.as_ref().map(rational_to_string),
    })
}

pub fn rational_function_to_json(registry: &Arc<VarRegistry>, rf: &RationalFunction) -> Value {
    let dens: Vec<Value> = rf
        .denominator_factors()
        .iter()
        .map(|(f, m)| json!({"form": linear_form_to_json(registry, f), "mult": m}))
        .collect();
    json!({
        "numerator": poly_to_json(rf.numerator()),
        "denominator_factors": dens,
    })
}

pub fn table_to_json(table: &IntersectionTable) -> Value {
    let mut map = Map::new();
    for (key, value) in table.entries() {
        map.insert(format_table_key(key), json!(rational_to_string(value)));
    }
    Value::Object(map)
}

pub fn table_from_json(value: &Value) -> Result<IntersectionTable, TautError> {
    let obj = value
        .as_object()
        .ok_or_else(|| TautError::BadSpec("intersection table must be an object".into()))?;
    let mut table = IntersectionTable::new();
    for (key, v) in obj {
        let monomial = parse_table_key(key)?;
        let value = rational_from_str(v.as_str().ok_or_else(|| {
            TautError::BadSpec(format!("table value for `{key}` must be a string rational"))
        })?)?;
        table.insert(monomial, value);
    }
    Ok(table)
}

/// Render any JSON value with sorted keys (serde_json maps are BTree
/// backed, so conversion through `Value` is already canonical) and a
/// trailing newline.
pub fn to_stable_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialization cannot fail");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    #[test]
    fn poly_json_roundtrip() {
        let registry = Arc::new(VarRegistry::new());
        let z = registry.register(VarKind::ResidueZ { block: 1, pos: 2 });
        let t = registry.register(VarKind::ChernRootTheta { factor: 1, pos: 1 });
        let p = &MultiPoly::var_pow(&registry, z, -1).scale(&BigRational::new(3.into(), 2.into()))
            + &MultiPoly::var(&registry, t).pow(2);
        let v = poly_to_json(&p);
        let q = poly_from_json(&registry, &v).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn table_json_roundtrip() {
        let mut table = IntersectionTable::new();
        table.insert(
            vec![(
                VarKind::FormalClassX {
                    factor: 1,
                    degree: 1,
                },
                2,
            )],
            BigRational::from_integer(9.into()),
        );
        table.insert(vec![], BigRational::one());
        let v = table_to_json(&table);
        let parsed = table_from_json(&v).unwrap();
        assert_eq!(table_to_json(&parsed), v);
    }

    #[test]
    fn stable_output_is_deterministic() {
        let v1 = json!({"b": 1, "a": [2, 3]});
        let v2 = json!({"a": [2, 3], "b": 1});
        assert_eq!(to_stable_string(&v1), to_stable_string(&v2));
    }
}
