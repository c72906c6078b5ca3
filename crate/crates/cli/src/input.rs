//! JSON problem-spec parsing and weight-expression lowering.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use num::BigRational;
use serde_json::Value;
use tautres_core::chern::{parse_phi, BundlePresentation, BundleSpec};
use tautres_core::expr::{parse_expr, Expr};
use tautres_core::poly::MultiPoly;
use tautres_core::registry::{VarKind, VarRegistry};
use tautres_core::tautint::{IntersectionTable, Mode, ProblemSpec, QTable};

/// A parsed `integrate` input document.
pub struct IntegrateInput {
    pub spec: ProblemSpec,
    pub table: Option<IntersectionTable>,
    pub registry: Arc<VarRegistry>,
    pub phi_source: String,
}

pub fn check_schema_version(doc: &Value) -> Result<()> {
    match doc.get("schema_version") {
        Some(v) if v.as_u64() == Some(1) => Ok(()),
        Some(v) => bail!("unsupported schema_version {v}; this build speaks version 1"),
        None => bail!("input document is missing \"schema_version\": 1"),
    }
}

fn get_u32(doc: &Value, key: &str) -> Result<u32> {
    doc.get(key)
        .and_then(|v| v.as_u64())
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| anyhow!("missing or invalid `{key}`"))
}

/// Lower a weight expression (rational combinations of `lambdaI` and
/// `thetaJ`) to a degree-one polynomial.
pub fn parse_weight(registry: &Arc<VarRegistry>, source: &str) -> Result<MultiPoly> {
    fn lower(registry: &Arc<VarRegistry>, expr: &Expr) -> Result<MultiPoly> {
        Ok(match expr {
            Expr::Rational(r) => MultiPoly::constant(registry, r.clone()),
            Expr::Symbol { name, index } => {
                let kind = match name.as_str() {
                    "lambda" => VarKind::TorusLambda { pos: *index },
                    "theta" => VarKind::ChernRootTheta {
                        factor: 1,
                        pos: *index,
                    },
                    other => bail!(
                        "weight expressions use lambdaN and thetaN symbols, found `{other}{index}`"
                    ),
                };
                MultiPoly::var(registry, registry.register(kind))
            }
            Expr::Sum(v) => {
                let mut acc = MultiPoly::zero(registry);
                for e in v {
                    acc = &acc + &lower(registry, e)?;
                }
                acc
            }
            Expr::Product(v) => {
                let mut acc = MultiPoly::one(registry);
                for e in v {
                    acc = &acc * &lower(registry, e)?;
                }
                acc
            }
            Expr::Power(b, e) => lower(registry, b)?.pow(*e),
            Expr::Neg(b) => lower(registry, b)?.neg(),
        })
    }
    let expr = parse_expr(source).with_context(|| format!("weight expression `{source}`"))?;
    let poly = lower(registry, &expr)?;
    if !poly.is_zero() && poly.homogeneous_degree() != Some(1) {
        bail!("weight `{source}` is not a degree-one form");
    }
    Ok(poly)
}

/// Parse a bundle object: `{"rank": r, "chern": "formal"}` (or
/// `["formal"]`) for formal classes, or explicit weight expressions via
/// `"weights": [...]` / `"chern": ["expr", ...]`.
pub fn parse_bundle(registry: &Arc<VarRegistry>, doc: &Value) -> Result<BundleSpec> {
    let rank = doc
        .get("rank")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| anyhow!("bundle is missing `rank`"))? as usize;
    if rank == 0 {
        bail!("bundle rank must be positive");
    }
    let formal = match doc.get("chern") {
        Some(Value::String(s)) if s == "formal" => true,
        Some(Value::Array(a)) if a.len() == 1 && a[0] == Value::String("formal".into()) => true,
        _ => false,
    };
    if formal {
        return Ok(BundleSpec::formal(rank));
    }
    let weights = doc
        .get("weights")
        .or_else(|| doc.get("chern"))
        .and_then(|v| v.as_array())
        .ok_or_else(|| anyhow!("bundle needs `\"chern\": \"formal\"` or a `weights` array"))?;
    if weights.len() != rank {
        bail!(
            "bundle rank {rank} does not match {} weights",
            weights.len()
        );
    }
    let weights = weights
        .iter()
        .map(|w| {
            let s = w
                .as_str()
                .ok_or_else(|| anyhow!("weights must be strings"))?;
            parse_weight(registry, s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BundleSpec::with_weights(weights))
}

pub fn parse_integrate_input(doc: &Value, q_table: &mut QTable) -> Result<IntegrateInput> {
    check_schema_version(doc)?;
    let registry = Arc::new(VarRegistry::new());
    let n = get_u32(doc, "n")?;
    let k = get_u32(doc, "k")?;
    let mode = match doc
        .get("mode")
        .and_then(|m| m.as_str())
        .unwrap_or("manifold")
    {
        "manifold" => Mode::Manifold,
        "equivariant" => Mode::Equivariant,
        other => bail!("unknown mode `{other}` (expected manifold or equivariant)"),
    };
    let phi_source = doc
        .get("phi")
        .and_then(|p| p.as_str())
        .ok_or_else(|| anyhow!("missing `phi` string"))?
        .to_string();
    let phi = parse_phi(&phi_source).map_err(|e| anyhow!("phi: {e}"))?;

    let bundle = match doc.get("bundle") {
        Some(b) => parse_bundle(&registry, b)?,
        None => bail!("missing `bundle`"),
    };
    let x_tangent = match (mode, doc.get("x_tangent")) {
        (_, Some(x)) => parse_bundle(&registry, x)?,
        (Mode::Manifold, None) => BundleSpec::formal(n as usize),
        (Mode::Equivariant, None) => {
            // the standard torus weights
            let weights = (1..=n)
                .map(|pos| {
                    MultiPoly::var(&registry, registry.register(VarKind::TorusLambda { pos }))
                })
                .collect();
            BundleSpec::with_weights(weights)
        }
    };
    if matches!(mode, Mode::Manifold)
        && !matches!(bundle.presentation, BundlePresentation::FormalClasses)
    {
        bail!("manifold mode requires a formal bundle presentation");
    }
    let table = match doc.get("table") {
        Some(t) => {
            Some(tautres_core::jsonio::table_from_json(t).map_err(|e| anyhow!("table: {e}"))?)
        }
        None => None,
    };
    if let Some(overrides) = doc.get("q_overrides") {
        let obj = overrides
            .as_object()
            .ok_or_else(|| anyhow!("`q_overrides` must be an object {{\"6\": \"expr\"}}"))?;
        for (j, expr) in obj {
            let j: u32 = j
                .parse()
                .with_context(|| format!("q override index `{j}`"))?;
            let expr = expr
                .as_str()
                .ok_or_else(|| anyhow!("q override must be a string"))?;
            q_table
                .register_override(j, expr)
                .map_err(|e| anyhow!("{e}"))?;
        }
    }
    Ok(IntegrateInput {
        spec: ProblemSpec {
            n,
            k,
            bundle,
            x_tangent,
            phi,
            mode,
        },
        table,
        registry,
        phi_source,
    })
}

/// Rational to a labeled decimal string (for `--decimal` output).
pub fn decimal_string(value: &BigRational) -> String {
    use num::ToPrimitive;
    match value.to_f64() {
        Some(f) => format!("{f:.12}"),
        None => "overflow".to_string(),
    }
}
