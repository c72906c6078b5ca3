//! Sign scan of universal integrals in the `{c_i(V), s_j(X)}` basis.
//!
//! The scan rewrites every tangent Chern class through the Segre series,
//! expands each partition's contribution into joint monomials, and
//! reports the sign of every coefficient. Negative coefficients are
//! surfaced as counterexample candidates; nothing is asserted.

use std::sync::Arc;

use num::{Signed, Zero};
use serde::Serialize;

use crate::chern::{segre_from_chern, ChernExpr};
use crate::poly::MultiPoly;
use crate::registry::{VarKind, VarRegistry};
use crate::tautint::{
    integrate_ghilb, IntegrateOptions, ProblemSpec, TautError, UniversalIntegral,
};

/// One coefficient of the universal polynomial in the `(c(V), s(X))`
/// presentation.
#[derive(Clone, Debug, Serialize)]
pub struct PositivityRow {
    pub n: u32,
    pub k: u32,
    pub r: usize,
    pub phi: String,
    pub partition: Vec<Vec<u32>>,
    pub monomial: String,
    pub coefficient: String,
    pub sign: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub rows: Vec<PositivityRow>,
    pub negative_count: usize,
}

/// Express the tangent Chern classes of every factor through Segre-class
/// variables, then expand each partition contribution into a joint
/// polynomial over per-factor variables. In the rewritten registry a
/// `FormalClassX` variable stands for the Segre class `s_d(X)`.
fn rewrite_in_segre_basis(
    ui: &UniversalIntegral,
    partition_index: usize,
    target: &Arc<VarRegistry>,
) -> MultiPoly {
    let term = &ui.per_partition[partition_index];
    let s = term.partition.num_blocks();
    let n = ui.n as usize;

    // c_d expressed in the s-classes of each factor (inverting the series
    // works in both directions)
    let mut c_in_s: Vec<Vec<MultiPoly>> = Vec::with_capacity(s);
    for factor in 1..=s as u32 {
        let s_classes: Vec<MultiPoly> = (1..=n)
            .map(|d| {
                let v = target.register(VarKind::FormalClassX {
                    factor,
                    degree: d as u32,
                });
                MultiPoly::var(target, v)
            })
            .collect();
        let inverted = segre_from_chern(target, &s_classes, n);
        c_in_s.push(inverted.coefficients[1..].to_vec());
    }

    let mut joint = MultiPoly::zero(target);
    for product in &term.products {
        let mut prod = MultiPoly::constant(target, product.coeff.clone());
        for (idx, block) in product.blocks.iter().enumerate() {
            let factor = idx as u32 + 1;
            let image = block.map_vars(target, |kind| match kind {
                VarKind::FormalClassX { degree, .. } => c_in_s[idx][degree as usize - 1].clone(),
                VarKind::FormalClassV { degree, .. } => {
                    let v = target.register(VarKind::FormalClassV { factor, degree });
                    MultiPoly::var(target, v)
                }
                other => {
                    let v = target.register(other);
                    MultiPoly::var(target, v)
                }
            });
            prod = &prod * &image;
        }
        joint = &joint + &prod;
    }
    joint.scale(&ui.normalization)
}

fn render_monomial(registry: &Arc<VarRegistry>, m: &crate::poly::Monomial, s: usize) -> String {
    let mut per_factor: Vec<Vec<String>> = vec![Vec::new(); s];
    for (v, e) in m.iter() {
        let kind = registry.kind(v);
        let (factor, base) = match kind {
            VarKind::FormalClassX { factor, degree } => (factor, format!("s{degree}(X)")),
            VarKind::FormalClassV { factor, degree } => (factor, format!("c{degree}(V)")),
            other => (1, other.display_name()),
        };
        let piece = if e == 1 { base } else { format!("{base}^{e}") };
        per_factor[factor as usize - 1].push(piece);
    }
    per_factor
        .into_iter()
        .map(|fs| {
            if fs.is_empty() {
                "[1]".to_string()
            } else {
                format!("[{}]", fs.join("*"))
            }
        })
        .collect::<Vec<_>>()
        .join(" x ")
}

/// Scan one problem spec; the caller loops over ranges.
pub fn positivity_scan_one(
    spec: &ProblemSpec,
    phi_source: &str,
    opts: &IntegrateOptions,
) -> Result<Vec<PositivityRow>, TautError> {
    let ui = integrate_ghilb(spec, None, opts)?;
    let target = Arc::new(VarRegistry::new());
    let mut rows = Vec::new();
    for (idx, term) in ui.per_partition.iter().enumerate() {
        let joint = rewrite_in_segre_basis(&ui, idx, &target);
        let s = term.partition.num_blocks();
        for (m, c) in joint.terms() {
            let sign = if c.is_zero() {
                "0"
            } else if c.is_negative() {
                "-"
            } else {
                "+"
            };
            rows.push(PositivityRow {
                n: spec.n,
                k: spec.k,
                r: spec.bundle.rank,
                phi: phi_source.to_string(),
                partition: term.partition.blocks().to_vec(),
                monomial: render_monomial(&target, m, s),
                coefficient: c.to_string(),
                sign: sign.to_string(),
            });
        }
    }
    Ok(rows)
}

/// Scan a cartesian range of `(n, k)` for a fixed rank and integrand
/// generator, reporting every coefficient sign.
pub fn positivity_scan(
    specs: &[(ProblemSpec, String)],
    opts: &IntegrateOptions,
) -> Result<PositivityReport, TautError> {
    let mut rows = Vec::new();
    for (spec, phi_source) in specs {
        rows.extend(positivity_scan_one(spec, phi_source, opts)?);
    }
    let negative_count = rows.iter().filter(|r| r.sign == "-").count();
    Ok(PositivityReport {
        rows,
        negative_count,
    })
}

/// All Chern monomials of weighted degree `degree` in `c_1..c_max_index`,
/// in deterministic order (used by scans and the oracle comparisons).
pub fn chern_monomials(degree: u32, max_index: u32) -> Vec<(ChernExpr, String)> {
    // partitions of `degree` with parts <= max_index, largest part first
    fn walk(remaining: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        let top = remaining.min(max_part);
        for part in (1..=top).rev() {
            current.push(part);
            walk(remaining - part, part, current, out);
            current.pop();
        }
    }
    let mut partitions = Vec::new();
    walk(degree, max_index, &mut Vec::new(), &mut partitions);
    partitions
        .into_iter()
        .map(|parts| {
            let factors: Vec<ChernExpr> = parts.iter().map(|&p| ChernExpr::Class(p)).collect();
            let expr = if factors.len() == 1 {
                factors.into_iter().next().unwrap()
            } else {
                ChernExpr::Product(factors)
            };
            let source = expr.to_source();
            (expr, source)
        })
        .collect()
}
