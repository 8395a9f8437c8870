//! Distances through per-pair subproblem values.
//!
//! `W[x][y]` is the best total pair weight of a mapping of `T1(x)` to `T2(y)`
//! that maps `x` to `y` and whose other pairs all hang below `(x, y)`. Pairs
//! are filled children first; a final packing model then picks the segment
//! tops, which must be antichains on both sides.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bounds::{PackingLp, PairForest};
use crate::cost::{distance_from_weight, pair_weight, CostFunction};
use crate::ilp::{
    build_combiner, build_dp_subproblem, build_naive_botseg, build_naive_bottomup, build_naive_segmental,
    build_naive_tai, IlpModel, PairValues,
};
use crate::mapping::{brute_force_distance, DistanceClass, Mapping, DEFAULT_NODE_CAP};
use crate::matching::{max_weight_bijection, max_weight_matching, WeightMatrix};
use crate::solver::{solve_until, Hints, IlpSolution, SolveStatus, SolverConfig};
use crate::tree::{NodeId, ShapeInterner, Tree};
use crate::Error;

/// Largest naive model (in constraint rows) that will be built.
pub const NAIVE_ROW_CAP: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dp,
    Naive,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Dp, Method::Naive, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dp => "dp",
            Method::Naive => "naive",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method '{s}' (expected dp, naive or oracle)"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub solver_nodes: u64,
    pub subproblems: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct DistanceResult {
    /// Scaled distance. An upper bound when `exact` is false.
    pub distance: i64,
    pub mapping: Mapping,
    pub exact: bool,
    pub stats: Stats,
}

/// `W[x][y]` for every pair, row-major over `T1 × T2`.
#[derive(Debug, Clone)]
pub struct WeightTable {
    cols: usize,
    pub w: Vec<i64>,
    pub valid: Vec<bool>,
    /// Pairs directly below `(x, y)` in the best sub-mapping.
    pub witness: Vec<Vec<(NodeId, NodeId)>>,
    /// False if some subproblem stopped early; values are then lower bounds.
    pub exact: bool,
    pub solver_nodes: u64,
    pub subproblems: usize,
}

impl WeightTable {
    fn new(rows: usize, cols: usize) -> Self {
        WeightTable {
            cols,
            w: vec![0; rows * cols],
            valid: vec![false; rows * cols],
            witness: vec![Vec::new(); rows * cols],
            exact: true,
            solver_nodes: 0,
            subproblems: 0,
        }
    }

    fn idx(&self, x: NodeId, y: NodeId) -> usize {
        x * self.cols + y
    }

    pub fn get(&self, x: NodeId, y: NodeId) -> Option<i64> {
        let i = self.idx(x, y);
        self.valid[i].then_some(self.w[i])
    }

    fn put(&mut self, x: NodeId, y: NodeId, w: i64, witness: Vec<(NodeId, NodeId)>) {
        let i = self.idx(x, y);
        self.w[i] = w;
        self.valid[i] = true;
        self.witness[i] = witness;
    }

    /// All pairs of the sub-mapping rooted at `(x, y)`.
    pub fn expand(&self, x: NodeId, y: NodeId, into: &mut Mapping) {
        let mut stack = vec![(x, y)];
        while let Some((a, b)) = stack.pop() {
            into.insert(a, b);
            stack.extend(self.witness[self.idx(a, b)].iter().copied());
        }
    }
}

impl PairValues for WeightTable {
    fn value(&self, x: NodeId, y: NodeId) -> i64 {
        self.get(x, y).unwrap_or(0)
    }

    fn is_valid(&self, x: NodeId, y: NodeId) -> bool {
        self.valid[self.idx(x, y)]
    }
}

fn child_matrix(t1: &Tree, x: NodeId, t2: &Tree, y: NodeId, table: &WeightTable) -> WeightMatrix {
    let (cx, cy) = (t1.children(x), t2.children(y));
    WeightMatrix::from_rows(cx.iter().map(|&c| cy.iter().map(|&d| table.get(c, d)).collect()).collect())
}

fn lift(t1: &Tree, x: NodeId, t2: &Tree, y: NodeId, pairs: &[(usize, usize)]) -> Vec<(NodeId, NodeId)> {
    pairs.iter().map(|&(i, j)| (t1.children(x)[i], t2.children(y)[j])).collect()
}

/// Segmental: children of a mapped pair map to children.
pub fn weights_segmental(t1: &Tree, t2: &Tree, cost: &CostFunction) -> WeightTable {
    let mut table = WeightTable::new(t1.len(), t2.len());
    for x in t1.post_order_nodes() {
        for y in t2.post_order_nodes() {
            let w = pair_weight(cost, t1.label(x), t2.label(y)).0;
            let m = max_weight_matching(&child_matrix(t1, x, t2, y, &table));
            table.put(x, y, w + m.value, lift(t1, x, t2, y, &m.pairs));
            table.subproblems += 1;
        }
    }
    table
}

/// Bottom-up segmental: as segmental, but every segment must reach down to
/// a pair of leaves.
pub fn weights_botseg(t1: &Tree, t2: &Tree, cost: &CostFunction) -> WeightTable {
    let mut table = WeightTable::new(t1.len(), t2.len());
    for x in t1.post_order_nodes() {
        for y in t2.post_order_nodes() {
            table.subproblems += 1;
            let w = pair_weight(cost, t1.label(x), t2.label(y)).0;
            match (t1.is_leaf(x), t2.is_leaf(y)) {
                (true, true) => table.put(x, y, w, Vec::new()),
                (false, false) => {
                    let mat = child_matrix(t1, x, t2, y, &table);
                    let m = max_weight_matching(&mat);
                    let mut witness = lift(t1, x, t2, y, &m.pairs);
                    if witness.is_empty() {
                        let first = (0..mat.rows())
                            .flat_map(|i| (0..mat.cols()).map(move |j| (i, j)))
                            .find(|&(i, j)| mat.get(i, j).is_some());
                        match first {
                            Some(p) => witness = lift(t1, x, t2, y, &[p]),
                            None => continue,
                        }
                    }
                    table.put(x, y, w + m.value, witness);
                }
                _ => {}
            }
        }
    }
    table
}

/// Bottom-up: whole subtrees map, so `(x, y)` needs isomorphic subtrees and a
/// perfect matching of the children.
pub fn weights_bottomup(t1: &Tree, t2: &Tree, cost: &CostFunction) -> WeightTable {
    let mut interner = ShapeInterner::new();
    let (s1, s2) = (interner.classes(t1), interner.classes(t2));
    let mut table = WeightTable::new(t1.len(), t2.len());
    for x in t1.post_order_nodes() {
        for y in t2.post_order_nodes() {
            table.subproblems += 1;
            if s1[x] != s2[y] {
                continue;
            }
            let w = pair_weight(cost, t1.label(x), t2.label(y)).0;
            let m = max_weight_bijection(&child_matrix(t1, x, t2, y, &table))
                .expect("isomorphic subtrees have a perfect child matching");
            table.put(x, y, w + m.value, lift(t1, x, t2, y, &m.pairs));
        }
    }
    table
}

/// Unrestricted (Tai) mappings: each internal pair solves a packing model
/// over its descendant pairs. Pairs are processed by `height(x) + height(y)`
/// so that each level only reads finished levels and runs in parallel.
pub fn weights_edit(
    t1: &Tree,
    t2: &Tree,
    cost: &CostFunction,
    cfg: &SolverConfig,
    deadline: Option<Instant>,
) -> Result<WeightTable, Error> {
    let mut table = WeightTable::new(t1.len(), t2.len());
    let max_level = t1.height(t1.root()) + t2.height(t2.root());
    let mut levels = vec![Vec::new(); max_level + 1];
    for x in t1.nodes() {
        for y in t2.nodes() {
            levels[t1.height(x) + t2.height(y)].push((x, y));
        }
    }
    for level in levels {
        let solved: Vec<_> = level
            .par_iter()
            .map(|&(x, y)| -> Result<_, Error> {
                let w = pair_weight(cost, t1.label(x), t2.label(y)).0;
                if t1.is_leaf(x) || t2.is_leaf(y) {
                    return Ok((x, y, w, Vec::new(), 0, true));
                }
                let model = build_dp_subproblem(t1, x, t2, y, cost, &table);
                let sol = solve_packing(&model, t1, x, t2, y, cfg, deadline)?;
                let a = sol.assignment.as_deref().unwrap_or(&[]);
                let witness = positive_pairs(&model, a);
                let gain = sol.value.unwrap_or(0);
                Ok((x, y, w + gain, witness, sol.nodes, sol.status == SolveStatus::Optimal))
            })
            .collect::<Result<_, _>>()?;
        for (x, y, w, witness, nodes, exact) in solved {
            table.put(x, y, w, witness);
            table.solver_nodes += nodes;
            table.exact &= exact;
            table.subproblems += 1;
        }
    }
    Ok(table)
}

/// Solves a pair-packing model inside `T1(rx) × T2(ry)`, warm-started from
/// the constrained packing and bounded by the pair-forest relaxation.
fn solve_packing(
    model: &IlpModel,
    t1: &Tree,
    rx: NodeId,
    t2: &Tree,
    ry: NodeId,
    cfg: &SolverConfig,
    deadline: Option<Instant>,
) -> Result<IlpSolution, Error> {
    let forest = PairForest::new(model, t1, rx, t2, ry);
    let lp = PackingLp::new(model);
    let hints = Hints { bounds: vec![&forest, &lp], start: Some(forest.constrained_packing(model)) };
    Ok(solve_until(model, cfg, deadline, hints)?)
}

fn positive_pairs(model: &IlpModel, assignment: &[bool]) -> Vec<(NodeId, NodeId)> {
    model.vars.iter().zip(assignment).filter(|(v, &on)| on && v.coeff > 0).map(|(v, _)| (v.x, v.y)).collect()
}

/// The per-pair table for `class`.
pub fn weights(
    t1: &Tree,
    t2: &Tree,
    cost: &CostFunction,
    class: DistanceClass,
    cfg: &SolverConfig,
    deadline: Option<Instant>,
) -> Result<WeightTable, Error> {
    Ok(match class {
        DistanceClass::Edit => weights_edit(t1, t2, cost, cfg, deadline)?,
        DistanceClass::Segmental => weights_segmental(t1, t2, cost),
        DistanceClass::BottomUpSegmental => weights_botseg(t1, t2, cost),
        DistanceClass::BottomUp => weights_bottomup(t1, t2, cost),
    })
}

/// Builds the naive model for `class`.
pub fn naive_model(t1: &Tree, t2: &Tree, cost: &CostFunction, class: DistanceClass) -> Result<IlpModel, Error> {
    let (n, m) = (t1.len(), t2.len());
    let estimate = n.saturating_mul(m).saturating_mul(n).saturating_mul(m) / 2;
    if estimate > NAIVE_ROW_CAP {
        return Err(Error::ModelTooLarge { rows: estimate, cap: NAIVE_ROW_CAP });
    }
    Ok(match class {
        DistanceClass::Edit => build_naive_tai(t1, t2, cost),
        DistanceClass::Segmental => build_naive_segmental(t1, t2, cost),
        DistanceClass::BottomUpSegmental => build_naive_botseg(t1, t2, cost),
        DistanceClass::BottomUp => build_naive_bottomup(t1, t2, cost),
    })
}

/// Computes the `class` distance with the chosen method. `cfg.time_limit`
/// bounds the whole computation.
pub fn distance(
    t1: &Tree,
    t2: &Tree,
    cost: &CostFunction,
    class: DistanceClass,
    method: Method,
    cfg: &SolverConfig,
) -> Result<DistanceResult, Error> {
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|d| start + d);
    let mut stats = Stats::default();
    let (distance, mapping, exact) = match method {
        Method::Oracle => {
            let (d, m) = brute_force_distance(t1, t2, cost, class, DEFAULT_NODE_CAP)?;
            (d, m, true)
        }
        Method::Naive => {
            let model = naive_model(t1, t2, cost, class)?;
            let sol = solve_until(&model, cfg, deadline, Hints::default())?;
            stats.solver_nodes = sol.nodes;
            stats.subproblems = 1;
            let a = sol.assignment.unwrap_or_else(|| vec![false; model.num_vars()]);
            let mapping = Mapping::from_pairs(model.selected_pairs(&a));
            let d = distance_from_weight(cost, t1, t2, model.objective(&a))?;
            (d, mapping, sol.status == SolveStatus::Optimal)
        }
        Method::Dp => {
            let table = weights(t1, t2, cost, class, cfg, deadline)?;
            let model = build_combiner(t1, t2, cost, &table);
            let sol = solve_packing(&model, t1, t1.root(), t2, t2.root(), cfg, deadline)?;
            stats.solver_nodes = table.solver_nodes + sol.nodes;
            stats.subproblems = table.subproblems + 1;
            let a = sol.assignment.unwrap_or_else(|| vec![false; model.num_vars()]);
            let mut mapping = Mapping::new();
            for (x, y) in positive_pairs(&model, &a) {
                table.expand(x, y, &mut mapping);
            }
            let d = distance_from_weight(cost, t1, t2, model.objective(&a))?;
            (d, mapping, table.exact && sol.status == SolveStatus::Optimal)
        }
    };
    stats.elapsed = start.elapsed();
    Ok(DistanceResult { distance, mapping, exact, stats })
}
