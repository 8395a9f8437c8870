//! 0-1 integer programs over node-pair variables.
//!
//! Every variable `m_{x,y}` stands for the pair `(x, y)` and every model is a
//! maximization. Naive models encode a whole mapping class directly with
//! O(nm) variables and O(n²m²) rows; the decomposed models solve one
//! subproblem per node pair with only one row per leaf.

use std::collections::HashMap;
use std::fmt::Write;

use crate::cost::{pair_weight, total_indel, CostFunction};
use crate::tree::{NodeId, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var {
    pub x: NodeId,
    pub y: NodeId,
    pub coeff: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

/// `Σ coeff · var (sense) rhs`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Constraint {
    pub fn le(terms: Vec<(usize, i64)>, rhs: i64) -> Self {
        Constraint { terms, sense: Sense::Le, rhs }
    }

    /// At most one of `vars` is set.
    pub fn packing(vars: impl IntoIterator<Item = usize>) -> Self {
        Self::le(vars.into_iter().map(|v| (v, 1)).collect(), 1)
    }

    pub fn is_packing(&self) -> bool {
        self.sense == Sense::Le && self.rhs == 1 && self.terms.iter().all(|&(_, a)| a == 1)
    }

    pub fn is_satisfied(&self, assignment: &[bool]) -> bool {
        let lhs: i64 = self.terms.iter().filter(|&&(v, _)| assignment[v]).map(|&(_, a)| a).sum();
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

/// Maximize `constant + Σ coeff · var` subject to the constraints, all
/// variables binary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IlpModel {
    pub vars: Vec<Var>,
    pub constraints: Vec<Constraint>,
    /// Added to the variable objective when reporting the model's value.
    pub constant: i64,
    index: HashMap<(NodeId, NodeId), usize>,
}

impl IlpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, x: NodeId, y: NodeId, coeff: i64) -> usize {
        let id = self.vars.len();
        let prev = self.index.insert((x, y), id);
        assert!(prev.is_none(), "variable for ({x}, {y}) already exists");
        self.vars.push(Var { x, y, coeff });
        id
    }

    pub fn var_of(&self, x: NodeId, y: NodeId) -> Option<usize> {
        self.index.get(&(x, y)).copied()
    }

    pub fn add_constraint(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_feasible(&self, assignment: &[bool]) -> bool {
        self.constraints.iter().all(|c| c.is_satisfied(assignment))
    }

    /// Variable part of the objective.
    pub fn objective(&self, assignment: &[bool]) -> i64 {
        self.vars.iter().zip(assignment).filter(|(_, &on)| on).map(|(v, _)| v.coeff).sum()
    }

    /// The pairs whose variables are set.
    pub fn selected_pairs(&self, assignment: &[bool]) -> Vec<(NodeId, NodeId)> {
        self.vars.iter().zip(assignment).filter(|(_, &on)| on).map(|(v, _)| (v.x, v.y)).collect()
    }

    /// Encodes a set of pairs as an assignment; `None` if a pair has no
    /// variable.
    pub fn encode(&self, pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Option<Vec<bool>> {
        let mut a = vec![false; self.vars.len()];
        for (x, y) in pairs {
            a[self.var_of(x, y)?] = true;
        }
        Some(a)
    }
}

/// Per-pair subproblem values `W[x][y]` and whether the pair may root a
/// mapped segment at all.
pub trait PairValues {
    fn value(&self, x: NodeId, y: NodeId) -> i64;
    fn is_valid(&self, x: NodeId, y: NodeId) -> bool;
}

// ---------------------------------------------------------------------------
// Naive formulations

fn pair_vars(model: &mut IlpModel, t1: &Tree, t2: &Tree, cost: &CostFunction) {
    for x in t1.nodes() {
        for y in t2.nodes() {
            model.add_var(x, y, pair_weight(cost, t1.label(x), t2.label(y)).0);
        }
    }
}

/// Tai mappings: one-to-one rows, plus `m + m' ≤ 1` for every two pairs on
/// distinct nodes that disagree on the ancestor order. Conflicts between
/// pairs sharing a node are already excluded by the one-to-one rows.
pub fn build_naive_tai(t1: &Tree, t2: &Tree, cost: &CostFunction) -> IlpModel {
    let (n, m) = (t1.len(), t2.len());
    let mut model = IlpModel::new();
    model.constant = total_indel(cost, t1, t2);
    pair_vars(&mut model, t1, t2, cost);
    let var = |x: NodeId, y: NodeId| x * m + y;
    for x in 0..n {
        model.add_constraint(Constraint::packing((0..m).map(|y| var(x, y))));
    }
    for y in 0..m {
        model.add_constraint(Constraint::packing((0..n).map(|x| var(x, y))));
    }
    for x in 0..n {
        for y in 0..m {
            for x2 in x + 1..n {
                for y2 in (0..m).filter(|&y2| y2 != y) {
                    if t1.is_ancestor(x, x2) != t2.is_ancestor(y, y2) || t2.is_ancestor(y2, y) {
                        model.add_constraint(Constraint::packing([var(x, y), var(x2, y2)]));
                    }
                }
            }
        }
    }
    model
}

/// Tai rows plus `m_{x,y} + m_{x',y'} ≤ m_{p(x'),p(y')} + 1` whenever
/// `x < x'` and `y < y'`. Rows where the parent pair is `(x, y)` itself are
/// vacuous and skipped.
pub fn build_naive_segmental(t1: &Tree, t2: &Tree, cost: &CostFunction) -> IlpModel {
    let mut model = build_naive_tai(t1, t2, cost);
    add_segment_rows(&mut model, t1, t2);
    model
}

fn add_segment_rows(model: &mut IlpModel, t1: &Tree, t2: &Tree) {
    let m = t2.len();
    let var = |x: NodeId, y: NodeId| x * m + y;
    for x in t1.nodes() {
        for y in t2.nodes() {
            for x2 in t1.descendants(x) {
                let px = t1.parent(x2).expect("descendant has a parent");
                for y2 in t2.descendants(y) {
                    let py = t2.parent(y2).expect("descendant has a parent");
                    if (px, py) == (x, y) {
                        continue;
                    }
                    model.add_constraint(Constraint::le(vec![(var(x, y), 1), (var(x2, y2), 1), (var(px, py), -1)], 1));
                }
            }
        }
    }
}

/// Segmental rows plus `m_{x,y} ≤ Σ m_{x',y'}` over leaf pairs below
/// `(x, y)`, for every pair that is not itself a leaf pair. Pairs with exactly
/// one leaf are covered too: such a pair can never have a leaf pair below it
/// without breaking one-to-one, and the row forces it to zero.
pub fn build_naive_botseg(t1: &Tree, t2: &Tree, cost: &CostFunction) -> IlpModel {
    let mut model = build_naive_segmental(t1, t2, cost);
    let m = t2.len();
    let var = |x: NodeId, y: NodeId| x * m + y;
    for x in t1.nodes() {
        for y in t2.nodes() {
            if t1.is_leaf(x) && t2.is_leaf(y) {
                continue;
            }
            let mut terms = vec![(var(x, y), 1)];
            for lx in t1.leaves_under(x) {
                for ly in t2.leaves_under(y) {
                    if (lx, ly) != (x, y) {
                        terms.push((var(lx, ly), -1));
                    }
                }
            }
            model.add_constraint(Constraint::le(terms, 0));
        }
    }
    model
}

/// Tai rows plus children-bijection rows: for each `(x, y)` and each child
/// `x'` of `x`, `m_{x,y} ≤ Σ_{y' ∈ C(y)} m_{x',y'}`, and symmetrically.
pub fn build_naive_bottomup(t1: &Tree, t2: &Tree, cost: &CostFunction) -> IlpModel {
    let mut model = build_naive_tai(t1, t2, cost);
    let m = t2.len();
    let var = |x: NodeId, y: NodeId| x * m + y;
    for x in t1.nodes() {
        for y in t2.nodes() {
            for &cx in t1.children(x) {
                let mut terms = vec![(var(x, y), 1)];
                terms.extend(t2.children(y).iter().map(|&cy| (var(cx, cy), -1)));
                model.add_constraint(Constraint::le(terms, 0));
            }
            for &cy in t2.children(y) {
                let mut terms = vec![(var(x, y), 1)];
                terms.extend(t1.children(x).iter().map(|&cx| (var(cx, cy), -1)));
                model.add_constraint(Constraint::le(terms, 0));
            }
        }
    }
    model
}

// ---------------------------------------------------------------------------
// Decomposed formulations

fn subproblem_vars<W: PairValues>(t1: &Tree, x: NodeId, t2: &Tree, y: NodeId, wt: &W) -> IlpModel {
    let mut model = IlpModel::new();
    for x2 in t1.descendants(x) {
        for y2 in t2.descendants(y) {
            model.add_var(x2, y2, wt.value(x2, y2));
        }
    }
    model
}

/// Path rows over `T1(x) - x` and `T2(y) - y`: for every leaf, at most one
/// selected pair may touch the path from below `x` (resp. `y`) to it.
fn add_path_rows(model: &mut IlpModel, t1: &Tree, x: NodeId, t2: &Tree, y: NodeId, include_roots: bool) {
    let mut by_x: HashMap<NodeId, Vec<usize>> = HashMap::new();
    let mut by_y: HashMap<NodeId, Vec<usize>> = HashMap::new();
    for (i, v) in model.vars.iter().enumerate() {
        by_x.entry(v.x).or_default().push(i);
        by_y.entry(v.y).or_default().push(i);
    }
    let mut rows = Vec::new();
    for (tree, top, groups) in [(t1, x, &by_x), (t2, y, &by_y)] {
        for leaf in tree.leaves_under(top) {
            let path = tree.path_to_leaf(top, leaf).expect("leaf lies below top");
            let skip = usize::from(!include_roots);
            let mut terms: Vec<usize> = path[skip..].iter().filter_map(|v| groups.get(v)).flatten().copied().collect();
            if terms.is_empty() {
                continue;
            }
            terms.sort_unstable();
            rows.push(Constraint::packing(terms));
        }
    }
    for r in rows {
        model.add_constraint(r);
    }
}

/// The subproblem for `W[x][y]` (both internal): variables over strict
/// descendant pairs weighted by their `W`, constant `w(x, y)`, and one
/// packing row per leaf of `T1(x)` and per leaf of `T2(y)`.
pub fn build_dp_subproblem<W: PairValues>(
    t1: &Tree,
    x: NodeId,
    t2: &Tree,
    y: NodeId,
    cost: &CostFunction,
    wt: &W,
) -> IlpModel {
    let mut model = subproblem_vars(t1, x, t2, y, wt);
    model.constant = pair_weight(cost, t1.label(x), t2.label(y)).0;
    add_path_rows(&mut model, t1, x, t2, y, false);
    model
}

/// Same subproblem as [`build_dp_subproblem`], written with pairwise rows
/// `m + m' ≤ 1` for every two pairs that share a node or are comparable on
/// either side.
pub fn build_antichain_pairwise<W: PairValues>(
    t1: &Tree,
    x: NodeId,
    t2: &Tree,
    y: NodeId,
    cost: &CostFunction,
    wt: &W,
) -> IlpModel {
    let mut model = subproblem_vars(t1, x, t2, y, wt);
    model.constant = pair_weight(cost, t1.label(x), t2.label(y)).0;
    let n = model.vars.len();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (model.vars[i], model.vars[j]);
            if t1.comparable(a.x, b.x) || t2.comparable(a.y, b.y) {
                model.add_constraint(Constraint::packing([i, j]));
            }
        }
    }
    model
}

/// The top-level combination over all valid pairs: selected pairs must form
/// antichains on both sides (one packing row per root-to-leaf path).
/// The constant is the total delete+insert cost, so `constant - objective`
/// is the distance.
pub fn build_combiner<W: PairValues>(t1: &Tree, t2: &Tree, cost: &CostFunction, wt: &W) -> IlpModel {
    let mut model = IlpModel::new();
    for x in t1.nodes() {
        for y in t2.nodes() {
            if wt.is_valid(x, y) {
                model.add_var(x, y, wt.value(x, y));
            }
        }
    }
    model.constant = total_indel(cost, t1, t2);
    add_path_rows(&mut model, t1, t1.root(), t2, t2.root(), true);
    model
}

// ---------------------------------------------------------------------------
// LP export

fn push_term(out: &mut String, first: bool, coeff: i64, name: &str) {
    let sign = if coeff < 0 { "-" } else { "+" };
    let mag = coeff.unsigned_abs();
    match (first, mag) {
        (true, 1) if coeff < 0 => write!(out, "- {name}"),
        (true, 1) => write!(out, "{name}"),
        (true, _) if coeff < 0 => write!(out, "- {mag} {name}"),
        (true, _) => write!(out, "{mag} {name}"),
        (false, 1) => write!(out, " {sign} {name}"),
        (false, _) => write!(out, " {sign} {mag} {name}"),
    }
    .expect("writing to a String cannot fail");
}

/// Writes the model in CPLEX LP format. Variables are named `m_x_y`; the
/// objective constant is recorded as a comment only.
pub fn export_lp(model: &IlpModel) -> String {
    let name = |i: usize| format!("m_{}_{}", model.vars[i].x, model.vars[i].y);
    let mut out = String::new();
    writeln!(out, "\\ objective constant: {}", model.constant).unwrap();
    writeln!(out, "Maximize").unwrap();
    out.push_str(" obj:");
    if model.vars.is_empty() {
        out.push_str(" 0");
    }
    for (i, v) in model.vars.iter().enumerate() {
        if i == 0 {
            out.push(' ');
        }
        push_term(&mut out, i == 0, v.coeff, &name(i));
    }
    out.push('\n');
    writeln!(out, "Subject To").unwrap();
    for (r, c) in model.constraints.iter().enumerate() {
        write!(out, " c{r}: ").unwrap();
        if c.terms.is_empty() {
            out.push('0');
        }
        for (k, &(v, a)) in c.terms.iter().enumerate() {
            push_term(&mut out, k == 0, a, &name(v));
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
        };
        writeln!(out, " {op} {}", c.rhs).unwrap();
    }
    if !model.vars.is_empty() {
        writeln!(out, "Binary").unwrap();
        for i in 0..model.vars.len() {
            writeln!(out, " {}", name(i)).unwrap();
        }
    }
    writeln!(out, "End").unwrap();
    out
}
