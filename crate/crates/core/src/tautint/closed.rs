//! Closed two- and three-point formulas, written out term by term as an
//! independent code path against the general partition assembly.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigRational, One, Zero};

use crate::chern::{
    formal_x_classes, phi_eval_on_roots, segre_from_chern, segre_in_inverse_z, twist_roots,
};
use crate::linear::LinearForm;
use crate::poly::MultiPoly;
use crate::registry::{VarId, VarKind, VarRegistry};
use crate::residue::{iterated_residue, RationalTerm};
use crate::setpart::SetPartition;
use crate::tautint::{
    reduce_value_to_products, IntegrateOptions, IntersectionTable, Mode, PartitionTerm,
    ProblemSpec, TautError, UniversalIntegral,
};

fn theta_vars(registry: &Arc<VarRegistry>, factor: u32, rank: usize) -> Vec<MultiPoly> {
    (1..=rank as u32)
        .map(|pos| {
            MultiPoly::var(
                registry,
                registry.register(VarKind::ChernRootTheta { factor, pos }),
            )
        })
        .collect()
}

fn zvar(registry: &Arc<VarRegistry>, block: u32, pos: u32) -> VarId {
    registry.register(VarKind::ResidueZ { block, pos })
}

fn finish(
    spec: &ProblemSpec,
    table: Option<&IntersectionTable>,
    mut per_partition: Vec<PartitionTerm>,
) -> Result<UniversalIntegral, TautError> {
    per_partition.sort_by(|a, b| a.partition.cmp(&b.partition));
    let mut k_fact = num::BigInt::one();
    for i in 2..=spec.k as i64 {
        k_fact *= i;
    }
    let normalization = BigRational::one() / BigRational::from_integer(k_fact);
    let mut ui = UniversalIntegral {
        n: spec.n,
        k: spec.k,
        rank: spec.bundle.rank,
        per_partition,
        normalization,
        total: None,
    };
    if let Some(table) = table {
        ui.total = Some(ui.contract(table)?);
    }
    Ok(ui)
}

/// The two-term two-point formula: a single residue over the diagonal
/// contribution plus the off-diagonal integral over `X x X`.
pub fn closed_form_k2(
    spec: &ProblemSpec,
    table: Option<&IntersectionTable>,
    _opts: &IntegrateOptions,
) -> Result<UniversalIntegral, TautError> {
    spec.validate()?;
    if spec.k != 2 {
        return Err(TautError::BadSpec(format!(
            "closed_form_k2 needs k = 2, got {}",
            spec.k
        )));
    }
    if spec.mode != Mode::Manifold {
        return Err(TautError::BadSpec(
            "closed_form_k2 runs in manifold mode".into(),
        ));
    }
    let registry = Arc::new(VarRegistry::new());
    let n = spec.n;
    let r = spec.bundle.rank;

    // Res_{z=inf} Phi(V + V(z)) s_X(1/z) dz / z^{n+1}
    let diag = {
        let z = zvar(&registry, 1, 1);
        let theta = theta_vars(&registry, 1, r);
        let mut roots = theta.clone();
        roots.extend(twist_roots(&theta, &MultiPoly::var(&registry, z)));
        let phi_poly = phi_eval_on_roots(&registry, &spec.phi, &roots)?;
        let x_classes = formal_x_classes(&registry, 1, n as usize);
        let segre = segre_from_chern(&registry, &x_classes, n as usize);
        let numerator =
            (&phi_poly * &segre_in_inverse_z(&segre, z)).truncate_factor_degree(n as i64);
        let term = RationalTerm {
            numerator,
            factors: vec![(LinearForm::var(z), n + 1)],
            z_order: vec![z],
        };
        let value = iterated_residue(&term)?;
        PartitionTerm {
            partition: SetPartition::trivial(2)?,
            products: reduce_value_to_products(spec, &registry, 1, value)?,
            integrand_degree: 2 * n as i64 - (n as i64 + 1),
            pruned: false,
        }
    };

    // int_{X x X} Phi(V_1 + V_2)
    let split = {
        let mut roots = theta_vars(&registry, 1, r);
        roots.extend(theta_vars(&registry, 2, r));
        let phi_poly = phi_eval_on_roots(&registry, &spec.phi, &roots)?;
        PartitionTerm {
            partition: SetPartition::discrete(2)?,
            products: reduce_value_to_products(spec, &registry, 2, phi_poly)?,
            integrand_degree: 2 * n as i64,
            pruned: false,
        }
    };

    finish(spec, table, vec![diag, split])
}

/// The three-term three-point formula: the deepest double residue, the
/// three single-residue mixed terms, and the `X^3` term.
pub fn closed_form_k3(
    spec: &ProblemSpec,
    table: Option<&IntersectionTable>,
    _opts: &IntegrateOptions,
) -> Result<UniversalIntegral, TautError> {
    spec.validate()?;
    if spec.k != 3 {
        return Err(TautError::BadSpec(format!(
            "closed_form_k3 needs k = 3, got {}",
            spec.k
        )));
    }
    if spec.mode != Mode::Manifold {
        return Err(TautError::BadSpec(
            "closed_form_k3 runs in manifold mode".into(),
        ));
    }
    let registry = Arc::new(VarRegistry::new());
    let n = spec.n;
    let r = spec.bundle.rank;

    // Res Res Phi(V + V(z1) + V(z2)) (z1 - z2) dz1 dz2
    //   / ((z1 z2)^{n+1} (2 z1 - z2)) * s_X(1/z1) s_X(1/z2)
    let deepest = {
        let z1 = zvar(&registry, 1, 1);
        let z2 = zvar(&registry, 1, 2);
        let theta = theta_vars(&registry, 1, r);
        let mut roots = theta.clone();
        roots.extend(twist_roots(&theta, &MultiPoly::var(&registry, z1)));
        roots.extend(twist_roots(&theta, &MultiPoly::var(&registry, z2)));
        let phi_poly = phi_eval_on_roots(&registry, &spec.phi, &roots)?;
        let x_classes = formal_x_classes(&registry, 1, n as usize);
        let segre = segre_from_chern(&registry, &x_classes, n as usize);
        let vandermonde = &MultiPoly::var(&registry, z1) - &MultiPoly::var(&registry, z2);
        let mut numerator = (&phi_poly * &vandermonde).truncate_factor_degree(n as i64);
        numerator = (&numerator * &segre_in_inverse_z(&segre, z1)).truncate_factor_degree(n as i64);
        numerator = (&numerator * &segre_in_inverse_z(&segre, z2)).truncate_factor_degree(n as i64);
        // the deepest kernel carries the flag-ordering weight (3-1)! = 2
        numerator = numerator.scale(&BigRational::from_integer(2.into()));
        let mut mixed = BTreeMap::new();
        mixed.insert(z1, BigRational::from_integer(2.into()));
        mixed.insert(z2, -BigRational::one());
        let term = RationalTerm {
            numerator,
            factors: vec![
                (LinearForm::var(z1), n + 1),
                (LinearForm::var(z2), n + 1),
                (LinearForm::new(BigRational::zero(), mixed)?, 1),
            ],
            z_order: vec![z1, z2],
        };
        let value = iterated_residue(&term)?;
        PartitionTerm {
            partition: SetPartition::trivial(3)?,
            products: reduce_value_to_products(spec, &registry, 1, value)?,
            integrand_degree: 3 * n as i64 - 2 * (n as i64 + 1),
            pruned: false,
        }
    };

    // sum_i Res Phi(V + V(z) + V_i) dz / z^{n+1} * s_X(1/z): one term per
    // choice of the singleton point, with the pair block sitting on the
    // factor determined by the partition's canonical block order.
    let mut middles = Vec::new();
    for singleton in 1..=3u32 {
        let pair: Vec<u32> = (1..=3).filter(|&e| e != singleton).collect();
        let partition = SetPartition::new(3, vec![vec![singleton], pair])?;
        let pair_factor = (partition.block_of(if singleton == 1 { 2 } else { 1 }) + 1) as u32;
        let single_factor = (partition.block_of(singleton) + 1) as u32;
        let z = zvar(&registry, pair_factor, 1);
        let theta_pair = theta_vars(&registry, pair_factor, r);
        let theta_single = theta_vars(&registry, single_factor, r);
        // roots listed factor-by-factor in block order
        let mut roots = Vec::new();
        for f in 1..=2u32 {
            if f == pair_factor {
                roots.extend(theta_pair.clone());
                roots.extend(twist_roots(&theta_pair, &MultiPoly::var(&registry, z)));
            } else {
                roots.extend(theta_single.clone());
            }
        }
        let phi_poly = phi_eval_on_roots(&registry, &spec.phi, &roots)?;
        let x_classes = formal_x_classes(&registry, pair_factor, n as usize);
        let segre = segre_from_chern(&registry, &x_classes, n as usize);
        let numerator =
            (&phi_poly * &segre_in_inverse_z(&segre, z)).truncate_factor_degree(n as i64);
        let term = RationalTerm {
            numerator,
            factors: vec![(LinearForm::var(z), n + 1)],
            z_order: vec![z],
        };
        let value = iterated_residue(&term)?;
        middles.push(PartitionTerm {
            partition,
            products: reduce_value_to_products(spec, &registry, 2, value)?,
            integrand_degree: 3 * n as i64 - (n as i64 + 1),
            pruned: false,
        });
    }

    // int_{X^3} Phi(V + V + V)
    let split = {
        let mut roots = Vec::new();
        for f in 1..=3u32 {
            roots.extend(theta_vars(&registry, f, r));
        }
        let phi_poly = phi_eval_on_roots(&registry, &spec.phi, &roots)?;
        PartitionTerm {
            partition: SetPartition::discrete(3)?,
            products: reduce_value_to_products(spec, &registry, 3, phi_poly)?,
            integrand_degree: 3 * n as i64,
            pruned: false,
        }
    };

    let mut per_partition = vec![deepest];
    per_partition.extend(middles);
    per_partition.push(split);
    finish(spec, table, per_partition)
}
