//! Localization oracle: tautological integrals over `Hilb^k` of a toric
//! surface as an explicit fixed-point sum, entirely independent of the
//! residue pipeline.
//!
//! A torus-fixed subscheme distributes the `k` points over the
//! surface's fixed points with a monomial ideal at each. Tangent
//! weights at a monomial ideal come from the arm/leg formula;
//! tautological weights are the box weights shifted by the bundle's
//! fiber weight. For a compact surface the sum collapses to a rational
//! number; equivariantly over the affine plane it stays a rational
//! function of the weights.

use std::sync::Arc;

use num::BigRational;
use rayon::prelude::*;
use thiserror::Error;

use crate::chern::{phi_eval_on_roots, ChernError, ChernExpr};
use crate::linear::LinearForm;
use crate::poly::{MultiPoly, PolyError};
use crate::ratfun::{tree_sum, RationalFunction};
use crate::registry::{VarKind, VarRegistry};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("integrand degree must be 2k = {expected}, found {found}")]
    DegreeMismatch { expected: i64, found: i64 },
    #[error("vanishing tangent weight at a fixed point (non-generic torus weights)")]
    VanishingEuler,
    #[error("compact-surface sum did not cancel to a number: {0}")]
    ResidualWeightDependence(String),
    #[error(transparent)]
    Chern(#[from] ChernError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Integer partition of `k`, stored as weakly decreasing row lengths;
/// row `y` has boxes `(x, y)` for `x < parts[y]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct YoungDiagram {
    parts: Vec<u32>,
}

impl YoungDiagram {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        assert!(
            parts.windows(2).all(|w| w[0] >= w[1]),
            "parts must be weakly decreasing"
        );
        YoungDiagram { parts }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn size(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn boxes(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (y, &len) in self.parts.iter().enumerate() {
            for x in 0..len {
                out.push((x, y as u32));
            }
        }
        out
    }

    /// Boxes strictly to the right in the same row.
    pub fn arm(&self, x: u32, y: u32) -> u32 {
        self.parts[y as usize] - 1 - x
    }

    /// Boxes strictly above in the same column.
    pub fn leg(&self, x: u32, y: u32) -> u32 {
        self.parts[y as usize + 1..]
            .iter()
            .filter(|&&len| len > x)
            .count() as u32
    }

    pub fn transpose(&self) -> YoungDiagram {
        let cols = self.parts.first().copied().unwrap_or(0);
        let parts = (0..cols)
            .map(|x| self.parts.iter().filter(|&&len| len > x).count() as u32)
            .collect();
        YoungDiagram::new(parts)
    }
}

/// All integer partitions of `k` (the monomial-ideal fixed points of the
/// punctual Hilbert scheme of the plane), largest part first.
pub fn hilb_fixed_points(k: u32) -> Vec<YoungDiagram> {
    fn walk(remaining: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<YoungDiagram>) {
        if remaining == 0 {
            out.push(YoungDiagram::new(current.clone()));
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            current.push(part);
            walk(remaining - part, part, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    walk(k, k, &mut Vec::new(), &mut out);
    out
}

/// Arm/leg tangent weights of `Hilb^k(C^2)` at a monomial ideal, in the
/// chart with tangent weights `(l1, l2)`: for each box,
/// `l1 (arm+1) - l2 leg` and `-l1 arm + l2 (leg+1)`.
pub fn tangent_weights(mu: &YoungDiagram, l1: &MultiPoly, l2: &MultiPoly) -> Vec<MultiPoly> {
    let mut out = Vec::with_capacity(2 * mu.size() as usize);
    for (x, y) in mu.boxes() {
        let a = mu.arm(x, y) as i64;
        let g = mu.leg(x, y) as i64;
        out.push(
            &l1.scale(&BigRational::from_integer((a + 1).into()))
                - &l2.scale(&BigRational::from_integer(g.into())),
        );
        out.push(
            &l2.scale(&BigRational::from_integer((g + 1).into()))
                - &l1.scale(&BigRational::from_integer(a.into())),
        );
    }
    out
}

/// Weights of the tautological fiber `V (x) O/I` at a monomial ideal: the
/// bundle weights shifted by the box monomials. A box `(i, j)` is the
/// function `x^i y^j`, whose weight is `-(i l1 + j l2)` when the tangent
/// weights are `(l1, l2)`; the sign is pinned by the `k = 1` reduction
/// and the compact-surface cross-checks.
pub fn taut_weights(
    mu: &YoungDiagram,
    l1: &MultiPoly,
    l2: &MultiPoly,
    v_weights: &[MultiPoly],
) -> Vec<MultiPoly> {
    let mut out = Vec::with_capacity(mu.size() as usize * v_weights.len());
    for (i, j) in mu.boxes() {
        let shift = &l1.scale(&BigRational::from_integer((i as i64).into()))
            + &l2.scale(&BigRational::from_integer((j as i64).into()));
        for theta in v_weights {
            out.push(theta - &shift);
        }
    }
    out
}

/// One torus-fixed point of the surface: tangent weights and the fiber
/// weights of `V` there.
#[derive(Clone, Debug)]
pub struct SurfacePoint {
    pub tangent: (MultiPoly, MultiPoly),
    pub v_weights: Vec<MultiPoly>,
}

/// A toric surface presented by its fixed-point data.
#[derive(Clone, Debug)]
pub struct ToricSurfaceChart {
    pub registry: Arc<VarRegistry>,
    pub points: Vec<SurfacePoint>,
    /// Compact surfaces demand full cancellation; the affine plane keeps
    /// its weight dependence.
    pub compact: bool,
}

fn lambda(registry: &Arc<VarRegistry>, pos: u32) -> MultiPoly {
    MultiPoly::var(registry, registry.register(VarKind::TorusLambda { pos }))
}

impl ToricSurfaceChart {
    /// `P^2` with the standard action; `V = O(d)` linearized with fiber
    /// weights `0, -d l1, -d l2` at the three fixed points.
    pub fn p2(line_degree: i64) -> Self {
        let registry = Arc::new(VarRegistry::new());
        let l1 = lambda(&registry, 1);
        let l2 = lambda(&registry, 2);
        Self::p2_with_weights(&registry, &l1, &l2, line_degree)
    }

    /// `P^2` with arbitrary degree-one weight polynomials (used by the
    /// deformation-invariance test).
    pub fn p2_with_weights(
        registry: &Arc<VarRegistry>,
        l1: &MultiPoly,
        l2: &MultiPoly,
        line_degree: i64,
    ) -> Self {
        let d = BigRational::from_integer(line_degree.into());
        let points = vec![
            SurfacePoint {
                tangent: (l1.clone(), l2.clone()),
                v_weights: vec![MultiPoly::zero(registry)],
            },
            SurfacePoint {
                tangent: (l1.neg(), &l2.clone() - l1),
                v_weights: vec![l1.scale(&d).neg()],
            },
            SurfacePoint {
                tangent: (&l1.clone() - l2, l2.neg()),
                v_weights: vec![l2.scale(&d).neg()],
            },
        ];
        ToricSurfaceChart {
            registry: registry.clone(),
            points,
            compact: true,
        }
    }

    /// `P^1 x P^1` with `V = O(a, b)`.
    pub fn p1xp1(a: i64, b: i64) -> Self {
        let registry = Arc::new(VarRegistry::new());
        let l1 = lambda(&registry, 1);
        let l2 = lambda(&registry, 2);
        let a = BigRational::from_integer(a.into());
        let b = BigRational::from_integer(b.into());
        let mut points = Vec::new();
        for (s1, s2) in [(false, false), (true, false), (false, true), (true, true)] {
            let t1 = if s1 { l1.neg() } else { l1.clone() };
            let t2 = if s2 { l2.neg() } else { l2.clone() };
            let mut w = MultiPoly::zero(&registry);
            if s1 {
                w = &w - &l1.scale(&a);
            }
            if s2 {
                w = &w - &l2.scale(&b);
            }
            points.push(SurfacePoint {
                tangent: (t1, t2),
                v_weights: vec![w],
            });
        }
        ToricSurfaceChart {
            registry,
            points,
            compact: true,
        }
    }

    /// The affine plane with the standard torus; `V` given by explicit
    /// weights (polynomials in the `lambda` and formal `theta` symbols).
    pub fn affine(registry: &Arc<VarRegistry>, v_weights: Vec<MultiPoly>) -> Self {
        let l1 = lambda(registry, 1);
        let l2 = lambda(registry, 2);
        ToricSurfaceChart {
            registry: registry.clone(),
            points: vec![SurfacePoint {
                tangent: (l1, l2),
                v_weights,
            }],
            compact: false,
        }
    }

    pub fn rank(&self) -> usize {
        self.points[0].v_weights.len()
    }
}

/// Outcome of a localization sum.
#[derive(Clone, Debug)]
pub struct AbIntegral {
    pub value: RationalFunction,
    pub fixed_point_count: usize,
    pub per_point: Vec<RationalFunction>,
}

impl AbIntegral {
    /// The rational number, for compact surfaces.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.value.as_poly().and_then(|p| p.as_constant())
    }
}

/// All ways to distribute `k` points over the surface's fixed points
/// with a monomial ideal at each: the torus-fixed subschemes of
/// `Hilb^k(surface)`.
fn fixed_configurations(points: usize, k: u32) -> Vec<Vec<YoungDiagram>> {
    fn walk(
        points: usize,
        idx: usize,
        remaining: u32,
        current: &mut Vec<YoungDiagram>,
        out: &mut Vec<Vec<YoungDiagram>>,
    ) {
        if idx == points {
            if remaining == 0 {
                out.push(current.clone());
            }
            return;
        }
        for size in 0..=remaining {
            if size == 0 {
                current.push(YoungDiagram::new(Vec::new()));
                walk(points, idx + 1, remaining, current, out);
                current.pop();
            } else {
                for mu in hilb_fixed_points(size) {
                    current.push(mu);
                    walk(points, idx + 1, remaining - size, current, out);
                    current.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(points, 0, k, &mut Vec::new(), &mut out);
    out
}

/// Atiyah-Bott sum of `phi` over the fixed points of `Hilb^k(surface)`:
/// a fixed subscheme is a distribution of the `k` points over the
/// surface's torus-fixed points with a monomial ideal at each, its
/// tangent space the direct sum of the local ones.
pub fn ab_integrate(
    surface: &ToricSurfaceChart,
    k: u32,
    phi: &ChernExpr,
) -> Result<AbIntegral, OracleError> {
    let registry = &surface.registry;
    let expected = 2 * k as i64;
    let found = phi.homogeneous_degree()?;
    if surface.compact && found != expected {
        return Err(OracleError::DegreeMismatch { expected, found });
    }
    let configs = fixed_configurations(surface.points.len(), k);
    let per_point: Vec<RationalFunction> = configs
        .par_iter()
        .map(|config| {
            let mut roots = Vec::new();
            let mut den = Vec::new();
            for (point, mu) in surface.points.iter().zip(config) {
                if mu.size() == 0 {
                    continue;
                }
                let (l1, l2) = &point.tangent;
                roots.extend(taut_weights(mu, l1, l2, &point.v_weights));
                for w in tangent_weights(mu, l1, l2) {
                    if w.is_zero() {
                        return Err(OracleError::VanishingEuler);
                    }
                    den.push((LinearForm::try_from_poly(&w).map_err(OracleError::Poly)?, 1));
                }
            }
            let numerator = phi_eval_on_roots(registry, phi, &roots)?;
            Ok(RationalFunction::new(numerator, den))
        })
        .collect::<Result<_, _>>()?;
    let fixed_point_count = per_point.len();
    let value = tree_sum(registry, per_point.clone());
    if surface.compact {
        match value.as_poly() {
            Some(p) if p.as_constant().is_some() => {}
            Some(p) => {
                return Err(OracleError::ResidualWeightDependence(p.to_string()));
            }
            None => {
                return Err(OracleError::ResidualWeightDependence(format!(
                    "denominator left over: {}",
                    value.denominator_poly()
                )));
            }
        }
    }
    Ok(AbIntegral {
        value,
        fixed_point_count,
        per_point,
    })
}
