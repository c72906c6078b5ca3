//! Exact symbolic engine for tautological integrals over geometric
//! Hilbert schemes of points.
//!
//! The crate evaluates integrals of Chern polynomials of tautological
//! bundles through an iterated-residue formula (a sum over set
//! partitions of residues of explicit rational kernels), entirely over
//! arbitrary-precision rationals. An independent fixed-point
//! localization oracle over toric surfaces pins every sign and
//! normalization choice, and closed two- and three-point formulas give a
//! second assembly path for cross-checking.

pub mod chern;
pub mod expr;
pub mod genfun;
pub mod jsonio;
pub mod linear;
pub mod oracle;
pub mod poly;
pub mod ratfun;
pub mod registry;
pub mod residue;
pub mod selftest;
pub mod setpart;
pub mod tautint;

pub use chern::{parse_phi, BundlePresentation, BundleSpec, ChernExpr};
pub use linear::LinearForm;
pub use poly::{Monomial, MultiPoly, PolyError};
pub use ratfun::RationalFunction;
pub use registry::{VarId, VarKind, VarRegistry};
pub use residue::{iterated_residue, vanishing_precheck, RationalTerm};
pub use setpart::{enumerate_partitions, SetPartition};
pub use tautint::{
    integrate_equivariant, integrate_ghilb, IntegrateOptions, IntersectionTable, Mode, ProblemSpec,
    QTable, TautError, UniversalIntegral,
};
