//! Node mappings between two trees and the four mapping classes.
//!
//! The brute-force search here is the reference the faster methods are
//! checked against; it is exponential and meant for small trees only.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cost::CostFunction;
use crate::tree::{NodeId, Tree};

/// Default cap on `|T1| + |T2|` for [`brute_force_distance`].
pub const DEFAULT_NODE_CAP: usize = 14;

/// Which mapping class a distance minimizes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceClass {
    /// Tai mappings: the tree edit distance.
    Edit,
    Segmental,
    BottomUpSegmental,
    BottomUp,
}

impl DistanceClass {
    pub const ALL: [DistanceClass; 4] =
        [DistanceClass::Edit, DistanceClass::Segmental, DistanceClass::BottomUpSegmental, DistanceClass::BottomUp];

    pub fn name(self) -> &'static str {
        match self {
            DistanceClass::Edit => "edit",
            DistanceClass::Segmental => "seg",
            DistanceClass::BottomUpSegmental => "botseg",
            DistanceClass::BottomUp => "bot",
        }
    }
}

impl fmt::Display for DistanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for DistanceClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edit" => Ok(DistanceClass::Edit),
            "seg" => Ok(DistanceClass::Segmental),
            "botseg" => Ok(DistanceClass::BottomUpSegmental),
            "bot" => Ok(DistanceClass::BottomUp),
            other => Err(format!("unknown distance {other:?} (expected edit, seg, botseg or bot)")),
        }
    }
}

/// A set of `(x, y)` pairs with `x` in `T1` and `y` in `T2`, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mapping {
    pairs: BTreeSet<(NodeId, NodeId)>,
}

impl Mapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (NodeId, NodeId)>>(pairs: I) -> Self {
        Mapping { pairs: pairs.into_iter().collect() }
    }

    pub fn insert(&mut self, x: NodeId, y: NodeId) -> bool {
        self.pairs.insert((x, y))
    }

    pub fn contains(&self, x: NodeId, y: NodeId) -> bool {
        self.pairs.contains(&(x, y))
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn to_vec(&self) -> Vec<(NodeId, NodeId)> {
        self.iter().collect()
    }

    /// Partner of `x` in `T2`, if `x` is mapped (first one, if several).
    fn image(&self, x: NodeId) -> Option<NodeId> {
        self.pairs.range((x, 0)..(x + 1, 0)).next().map(|&(_, y)| y)
    }

    /// Same mapping with the roles of the two trees exchanged.
    pub fn transposed(&self) -> Mapping {
        Mapping::from_pairs(self.iter().map(|(x, y)| (y, x)))
    }
}

impl FromIterator<(NodeId, NodeId)> for Mapping {
    fn from_iter<I: IntoIterator<Item = (NodeId, NodeId)>>(iter: I) -> Self {
        Mapping::from_pairs(iter)
    }
}

fn in_range(t1: &Tree, t2: &Tree, m: &Mapping) -> bool {
    m.iter().all(|(x, y)| x < t1.len() && y < t2.len())
}

/// One-to-one and ancestor-preserving in both directions.
pub fn is_tai(t1: &Tree, t2: &Tree, m: &Mapping) -> bool {
    if !in_range(t1, t2, m) {
        return false;
    }
    let pairs = m.to_vec();
    for (i, &(x, y)) in pairs.iter().enumerate() {
        for &(x2, y2) in &pairs[i + 1..] {
            if (x == x2) != (y == y2) {
                return false;
            }
            if t1.is_ancestor(x, x2) != t2.is_ancestor(y, y2) || t1.is_ancestor(x2, x) != t2.is_ancestor(y2, y) {
                return false;
            }
        }
    }
    true
}

/// Tai, and whenever `x < x'` and `y < y'` are both mapped, the parents of
/// `x'` and `y'` are mapped to each other.
pub fn is_segmental(t1: &Tree, t2: &Tree, m: &Mapping) -> bool {
    if !is_tai(t1, t2, m) {
        return false;
    }
    let pairs = m.to_vec();
    for &(x, y) in &pairs {
        for &(x2, y2) in &pairs {
            if t1.is_ancestor(x, x2) && t2.is_ancestor(y, y2) {
                let p = (t1.parent(x2).expect("has ancestor"), t2.parent(y2).expect("has ancestor"));
                if !m.contains(p.0, p.1) {
                    return false;
                }
            }
        }
    }
    true
}

/// Segmental, and every mapped pair has a mapped leaf-to-leaf pair at or
/// below it on both sides.
pub fn is_bottomup_segmental(t1: &Tree, t2: &Tree, m: &Mapping) -> bool {
    if !is_segmental(t1, t2, m) {
        return false;
    }
    let leaf_pairs: Vec<(NodeId, NodeId)> = m.iter().filter(|&(x, y)| t1.is_leaf(x) && t2.is_leaf(y)).collect();
    m.iter()
        .all(|(x, y)| leaf_pairs.iter().any(|&(lx, ly)| t1.is_ancestor_or_self(x, lx) && t2.is_ancestor_or_self(y, ly)))
}

/// Tai, and for every mapped `(x, y)` the mapping restricted to
/// `C(x) × C(y)` is a bijection between `C(x)` and `C(y)`.
pub fn is_bottomup(t1: &Tree, t2: &Tree, m: &Mapping) -> bool {
    if !is_tai(t1, t2, m) {
        return false;
    }
    m.iter().all(|(x, y)| {
        let (cx, cy) = (t1.children(x), t2.children(y));
        cx.len() == cy.len() && cx.iter().all(|&c| m.image(c).is_some_and(|d| t2.parent(d) == Some(y)))
    })
}

/// The class predicate for `class`.
pub fn is_valid(class: DistanceClass, t1: &Tree, t2: &Tree, m: &Mapping) -> bool {
    match class {
        DistanceClass::Edit => is_tai(t1, t2, m),
        DistanceClass::Segmental => is_segmental(t1, t2, m),
        DistanceClass::BottomUpSegmental => is_bottomup_segmental(t1, t2, m),
        DistanceClass::BottomUp => is_bottomup(t1, t2, m),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("brute force limited to {cap} total nodes, got {total}")]
    TooLarge { total: usize, cap: usize },
}

/// Minimum-cost mapping of the given class by exhaustive search over all
/// partial injections (pruned as soon as a pair breaks the Tai conditions).
/// Ties go to the lexicographically smallest sorted pair list.
pub fn brute_force_distance(
    t1: &Tree,
    t2: &Tree,
    cost: &CostFunction,
    class: DistanceClass,
    node_cap: usize,
) -> Result<(i64, Mapping), OracleError> {
    let total = t1.len() + t2.len();
    if total > node_cap {
        return Err(OracleError::TooLarge { total, cap: node_cap });
    }
    let mut search = Search { t1, t2, cost, class, used: vec![false; t2.len()], current: Vec::new(), best: None };
    search.run(0, 0);
    let (cost, pairs) = search.best.expect("the empty mapping is always valid");
    Ok((cost, Mapping::from_pairs(pairs)))
}

struct Search<'a> {
    t1: &'a Tree,
    t2: &'a Tree,
    cost: &'a CostFunction,
    class: DistanceClass,
    used: Vec<bool>,
    current: Vec<(NodeId, NodeId)>,
    best: Option<(i64, Vec<(NodeId, NodeId)>)>,
}

impl Search<'_> {
    /// `partial` = substitution costs of chosen pairs plus deletions of the
    /// T1 nodes before `x` left unmapped.
    fn run(&mut self, x: NodeId, partial: i64) {
        if let Some((b, _)) = &self.best {
            if partial > *b {
                return;
            }
        }
        if x == self.t1.len() {
            let ins: i64 = self.t2.nodes().filter(|&y| !self.used[y]).map(|y| self.cost.ins(self.t2.label(y))).sum();
            let total = partial + ins;
            let better = match &self.best {
                None => true,
                Some((b, pairs)) => total < *b || (total == *b && self.current < *pairs),
            };
            if better {
                let m = Mapping::from_pairs(self.current.iter().copied());
                if is_valid(self.class, self.t1, self.t2, &m) {
                    self.best = Some((total, self.current.clone()));
                }
            }
            return;
        }
        let lx = self.t1.label(x);
        for y in self.t2.nodes() {
            if self.used[y] || !self.compatible(x, y) {
                continue;
            }
            self.used[y] = true;
            self.current.push((x, y));
            self.run(x + 1, partial + self.cost.sub(lx, self.t2.label(y)));
            self.current.pop();
            self.used[y] = false;
        }
        self.run(x + 1, partial + self.cost.del(lx));
    }

    /// Every earlier pair has a smaller T1 node, so `x` is never its ancestor.
    fn compatible(&self, x: NodeId, y: NodeId) -> bool {
        self.current
            .iter()
            .all(|&(x2, y2)| self.t1.is_ancestor(x2, x) == self.t2.is_ancestor(y2, y) && !self.t2.is_ancestor(y, y2))
    }
}
