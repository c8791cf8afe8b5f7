//! Flow- and field-insensitive, allocation-site based may-point-to analysis
//! (inclusion constraints solved to a fixpoint).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{MethodId, SiteId};

/// A program variable after name resolution.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    Local(MethodId, String),
    Field(String, String),
    Global(String),
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::Local(m, v) => write!(f, "{v}@{}", m.0),
            VarKey::Field(c, v) => write!(f, "{c}.{v}"),
            VarKey::Global(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PtNode {
    Var(VarKey),
    /// The value returned by a client method.
    Ret(MethodId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PtSource {
    Node(PtNode),
    Site(SiteId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PointsToResult {
    pub may: BTreeMap<VarKey, BTreeSet<SiteId>>,
}

static EMPTY: BTreeSet<SiteId> = BTreeSet::new();

impl PointsToResult {
    pub fn may(&self, v: &VarKey) -> &BTreeSet<SiteId> {
        self.may.get(v).unwrap_or(&EMPTY)
    }

    /// The single site `v` must point to, when its may-set is a singleton.
    pub fn must(&self, v: &VarKey) -> Option<SiteId> {
        let may = self.may(v);
        (may.len() == 1).then(|| *may.iter().next().unwrap())
    }
}

/// Solves `dst ⊇ src` constraints by chaotic iteration.
pub(crate) fn solve(constraints: &[(PtNode, PtSource)]) -> PointsToResult {
    let mut sets: BTreeMap<&PtNode, BTreeSet<SiteId>> = BTreeMap::new();
    loop {
        let mut changed = false;
        for (dst, src) in constraints {
            let add: BTreeSet<SiteId> = match src {
                PtSource::Site(s) => BTreeSet::from([*s]),
                PtSource::Node(n) => sets.get(n).cloned().unwrap_or_default(),
            };
            let set = sets.entry(dst).or_default();
            let before = set.len();
            set.extend(add);
            changed |= set.len() != before;
        }
        if !changed {
            break;
        }
    }
    let may = sets
        .into_iter()
        .filter_map(|(n, s)| match n {
            PtNode::Var(v) if !s.is_empty() => Some((v.clone(), s)),
            _ => None,
        })
        .collect();
    PointsToResult { may }
}
