//! Typed variable registry.
//!
//! Every symbol that can appear in a polynomial (residue variables,
//! Chern roots, torus weights, formal characteristic classes) is interned
//! in a [`VarRegistry`] before use. A [`VarId`] is only meaningful
//! relative to the registry that issued it; operations on polynomials
//! from different registries are rejected.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

/// The kind of a symbol, carrying enough structure to recover its
/// cohomological degree and (where applicable) the `X^s` factor it
/// belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    /// Residue variable `z_pos` of a partition block (1-based indices).
    ResidueZ { block: u32, pos: u32 },
    /// Chern root `theta_pos` of the bundle copy sitting over factor
    /// `factor` of `X^s` (1-based).
    ChernRootTheta { factor: u32, pos: u32 },
    /// Torus weight `lambda_pos` (1-based).
    TorusLambda { pos: u32 },
    /// Formal class `c_degree(X)` of the tangent bundle of the given factor.
    FormalClassX { factor: u32, degree: u32 },
    /// Formal class `c_degree(V)` of the bundle copy on the given factor.
    FormalClassV { factor: u32, degree: u32 },
    /// The formal generating-series variable `q` (degree 0).
    FormalSeriesQ,
}

impl VarKind {
    /// Cohomological degree used for weighted-degree bookkeeping.
    pub fn degree(&self) -> i64 {
        match self {
            VarKind::ResidueZ { .. }
            | VarKind::ChernRootTheta { .. }
            | VarKind::TorusLambda { .. } => 1,
            VarKind::FormalClassX { degree, .. } | VarKind::FormalClassV { degree, .. } => {
                *degree as i64
            }
            VarKind::FormalSeriesQ => 0,
        }
    }

    /// Only residue variables may carry negative (Laurent) exponents.
    pub fn allows_negative_exponent(&self) -> bool {
        matches!(self, VarKind::ResidueZ { .. })
    }

    /// The `X^s` factor this symbol is attached to, if any.
    pub fn factor(&self) -> Option<u32> {
        match self {
            VarKind::ChernRootTheta { factor, .. }
            | VarKind::FormalClassX { factor, .. }
            | VarKind::FormalClassV { factor, .. } => Some(*factor),
            _ => None,
        }
    }

    /// Stable display name, also used as the monomial key in JSON output,
    /// e.g. `z[1,2]`, `theta[1,1]`, `lambda[2]`, `cX[1,1]`, `cV[1,2]`, `q`.
    pub fn display_name(&self) -> String {
        match self {
            VarKind::ResidueZ { block, pos } => format!("z[{block},{pos}]"),
            VarKind::ChernRootTheta { factor, pos } => format!("theta[{factor},{pos}]"),
            VarKind::TorusLambda { pos } => format!("lambda[{pos}]"),
            VarKind::FormalClassX { factor, degree } => format!("cX[{factor},{degree}]"),
            VarKind::FormalClassV { factor, degree } => format!("cV[{factor},{degree}]"),
            VarKind::FormalSeriesQ => "q".to_string(),
        }
    }

    /// Parse a display name produced by [`VarKind::display_name`].
    pub fn parse_name(name: &str) -> Option<VarKind> {
        if name == "q" {
            return Some(VarKind::FormalSeriesQ);
        }
        let open = name.find('[')?;
        if !name.ends_with(']') {
            return None;
        }
        let head = &name[..open];
        let args: Vec<u32> = name[open + 1..name.len() - 1]
            .split(',')
            .map(|s| s.trim().parse().ok())
            .collect::<Option<_>>()?;
        match (head, args.as_slice()) {
            ("z", [block, pos]) => Some(VarKind::ResidueZ {
                block: *block,
                pos: *pos,
            }),
            ("theta", [factor, pos]) => Some(VarKind::ChernRootTheta {
                factor: *factor,
                pos: *pos,
            }),
            ("lambda", [pos]) => Some(VarKind::TorusLambda { pos: *pos }),
            ("cX", [factor, degree]) => Some(VarKind::FormalClassX {
                factor: *factor,
                degree: *degree,
            }),
            ("cV", [factor, degree]) => Some(VarKind::FormalClassV {
                factor: *factor,
                degree: *degree,
            }),
            _ => None,
        }
    }
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name())
    }
}

/// Handle to a registered variable. Ordering follows registration order,
/// which is what makes monomial comparison deterministic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) u32);

impl VarId {
    pub fn index(&self) -> usize {
        self.0 as usize
    }
}

static NEXT_REGISTRY_ID: AtomicU64 = AtomicU64::new(1);

/// Append-only interner mapping [`VarKind`]s to [`VarId`]s.
///
/// Registration is idempotent: the same kind always resolves to the same
/// id. Reads are lock-cheap and safe to share across threads once setup
/// is done.
#[derive(Debug)]
pub struct VarRegistry {
    id: u64,
    inner: RwLock<RegistryInner>,
}

#[derive(Debug, Default)]
struct RegistryInner {
    kinds: Vec<VarKind>,
    lookup: HashMap<VarKind, VarId>,
}

impl VarRegistry {
    pub fn new() -> Self {
        VarRegistry {
            id: NEXT_REGISTRY_ID.fetch_add(1, Ordering::Relaxed),
            inner: RwLock::new(RegistryInner::default()),
        }
    }

    /// Unique identity of this registry instance.
    pub fn id(&self) -> u64 {
        self.id
    }

    /// Intern `kind`, returning its id. Registering an already-known kind
    /// returns the existing id.
    pub fn register(&self, kind: VarKind) -> VarId {
        if let Some(id) = self.inner.read().unwrap().lookup.get(&kind) {
            return *id;
        }
        let mut inner = self.inner.write().unwrap();
        if let Some(id) = inner.lookup.get(&kind) {
            return *id;
        }
        let id = VarId(inner.kinds.len() as u32);
        inner.kinds.push(kind);
        inner.lookup.insert(kind, id);
        id
    }

    /// Look up a previously registered kind.
    pub fn lookup(&self, kind: VarKind) -> Option<VarId> {
        self.inner.read().unwrap().lookup.get(&kind).copied()
    }

    pub fn kind(&self, id: VarId) -> VarKind {
        self.inner.read().unwrap().kinds[id.index()]
    }

    pub fn degree(&self, id: VarId) -> i64 {
        self.kind(id).degree()
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap().kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn display_name(&self, id: VarId) -> String {
        self.kind(id).display_name()
    }
}

impl Default for VarRegistry {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_is_idempotent() {
        let reg = VarRegistry::new();
        let a = reg.register(VarKind::ResidueZ { block: 1, pos: 1 });
        let b = reg.register(VarKind::ResidueZ { block: 1, pos: 1 });
        assert_eq!(a, b);
        assert_eq!(reg.len(), 1);
        let c = reg.register(VarKind::ResidueZ { block: 1, pos: 2 });
        assert_ne!(a, c);
    }

    #[test]
    fn degrees_follow_kind() {
        assert_eq!(VarKind::ResidueZ { block: 1, pos: 1 }.degree(), 1);
        assert_eq!(VarKind::TorusLambda { pos: 3 }.degree(), 1);
        assert_eq!(
            VarKind::FormalClassX {
                factor: 1,
                degree: 2
            }
            .degree(),
            2
        );
        assert_eq!(
            VarKind::FormalClassV {
                factor: 2,
                degree: 5
            }
            .degree(),
            5
        );
        assert_eq!(VarKind::FormalSeriesQ.degree(), 0);
    }

    #[test]
    fn display_roundtrip() {
        for kind in [
            VarKind::ResidueZ { block: 2, pos: 3 },
            VarKind::ChernRootTheta { factor: 1, pos: 2 },
            VarKind::TorusLambda { pos: 4 },
            VarKind::FormalClassX {
                factor: 1,
                degree: 2,
            },
            VarKind::FormalClassV {
                factor: 3,
                degree: 1,
            },
            VarKind::FormalSeriesQ,
        ] {
            assert_eq!(VarKind::parse_name(&kind.display_name()), Some(kind));
        }
        assert_eq!(VarKind::parse_name("nope[1]"), None);
    }
}
