//! Bounds and starting solutions for pair-packing models, where the selected
//! pairs must form antichains in both trees.
//!
//! For the best packing `A(x, y)` inside `T1(x) × T2(y)`: if `x` is selected
//! it is the only pair on the left, and likewise for `y`; otherwise the
//! selection splits along the children of `x`, and also along the children
//! of `y`. Hence
//!
//! ```text
//! A(x, y) <= max(R1(x, y), R2(x, y), min(Σ_c A(c, y), Σ_d A(x, d)))
//! ```
//!
//! where `R1` / `R2` are the best single pairs using `x` / `y`. Restricting
//! children to map onto children instead gives a feasible packing.

use crate::ilp::IlpModel;
use crate::matching::{max_weight_matching, WeightMatrix};
use std::cell::RefCell;

use microlp::{ComparisonOp, OptimizationDirection, Problem, Solution, Variable};

use crate::solver::{Bound, UpperBound};
use crate::tree::{NodeId, Tree};

/// Absorbs floating-point error before rounding an LP value down.
const LP_SLACK: f64 = 1e-6;

/// The pair-forest relaxation rooted at `(rx, ry)`. Every variable of the
/// model must lie in `T1(rx) × T2(ry)`.
pub struct PairForest<'a> {
    t1: &'a Tree,
    t2: &'a Tree,
    rx: NodeId,
    ry: NodeId,
    a: usize,
    b: usize,
    /// Local cell of each variable.
    cell: Vec<usize>,
}

impl<'a> PairForest<'a> {
    pub fn new(model: &IlpModel, t1: &'a Tree, rx: NodeId, t2: &'a Tree, ry: NodeId) -> Self {
        let (a, b) = (t1.subtree_size(rx), t2.subtree_size(ry));
        let cell = model
            .vars
            .iter()
            .map(|v| {
                assert!(t1.is_ancestor_or_self(rx, v.x) && t2.is_ancestor_or_self(ry, v.y));
                (v.x - rx) * b + (v.y - ry)
            })
            .collect();
        PairForest { t1, t2, rx, ry, a, b, cell }
    }

    fn values(&self, model: &IlpModel, usable: impl Fn(usize) -> bool) -> Vec<Option<i64>> {
        let mut val = vec![None; self.a * self.b];
        for (v, var) in model.vars.iter().enumerate() {
            if usable(v) {
                val[self.cell[v]] = Some(var.coeff);
            }
        }
        val
    }

    fn kids1(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.t1.children(self.rx + i).iter().map(move |&c| c - self.rx)
    }

    fn kids2(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.t2.children(self.ry + j).iter().map(move |&d| d - self.ry)
    }

    /// Upper bound on the packing value using only variables with
    /// `usable(v)`.
    pub fn upper(&self, model: &IlpModel, usable: impl Fn(usize) -> bool) -> i64 {
        let (a, b) = (self.a, self.b);
        let val = self.values(model, usable);
        let mut r1 = vec![0i64; a * b];
        let mut r2 = vec![0i64; a * b];
        let mut u = vec![0i64; a * b];
        for i in (0..a).rev() {
            let leaf1 = self.t1.is_leaf(self.rx + i);
            for j in (0..b).rev() {
                let k = i * b + j;
                let own = val[k].unwrap_or(0);
                r1[k] = self.kids2(j).map(|d| r1[i * b + d]).fold(own, i64::max);
                r2[k] = self.kids1(i).map(|c| r2[c * b + j]).fold(own, i64::max);
                u[k] = if leaf1 {
                    r1[k]
                } else if self.t2.is_leaf(self.ry + j) {
                    r2[k]
                } else {
                    let split1: i64 = self.kids1(i).map(|c| u[c * b + j]).sum();
                    let split2: i64 = self.kids2(j).map(|d| u[i * b + d]).sum();
                    r1[k].max(r2[k]).max(split1.min(split2))
                };
            }
        }
        u[0]
    }

    /// A feasible packing where the pairs below each node of one tree map
    /// into a single child subtree of the other, or children onto children.
    /// Returns the selected variables.
    pub fn constrained_packing(&self, model: &IlpModel) -> Vec<bool> {
        #[derive(Clone)]
        enum Choice {
            None,
            Pair,
            Down1(usize),
            Down2(usize),
            Match(Vec<(usize, usize)>),
        }
        let (a, b) = (self.a, self.b);
        let val = self.values(model, |_| true);
        let mut best = vec![0i64; a * b];
        let mut choice = vec![Choice::None; a * b];
        for i in (0..a).rev() {
            for j in (0..b).rev() {
                let k = i * b + j;
                let mut top = (0i64, Choice::None);
                let mut offer = |v: i64, c: Choice| {
                    if v > top.0 {
                        top = (v, c);
                    }
                };
                if let Some(v) = val[k] {
                    offer(v, Choice::Pair);
                }
                for c in self.kids1(i) {
                    offer(best[c * b + j], Choice::Down1(c));
                }
                for d in self.kids2(j) {
                    offer(best[i * b + d], Choice::Down2(d));
                }
                let (k1, k2): (Vec<usize>, Vec<usize>) = (self.kids1(i).collect(), self.kids2(j).collect());
                if !k1.is_empty() && !k2.is_empty() {
                    let m = max_weight_matching(&WeightMatrix::from_weights(
                        &k1.iter().map(|&c| k2.iter().map(|&d| best[c * b + d]).collect()).collect::<Vec<_>>(),
                    ));
                    offer(m.value, Choice::Match(m.pairs.iter().map(|&(p, q)| (k1[p], k2[q])).collect()));
                }
                best[k] = top.0;
                choice[k] = top.1;
            }
        }
        let mut picked = vec![false; a * b];
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, j)) = stack.pop() {
            match &choice[i * b + j] {
                Choice::None => {}
                Choice::Pair => picked[i * b + j] = true,
                Choice::Down1(c) => stack.push((*c, j)),
                Choice::Down2(d) => stack.push((i, *d)),
                Choice::Match(pairs) => stack.extend(pairs.iter().copied()),
            }
        }
        self.cell.iter().map(|&k| picked[k]).collect()
    }
}

impl UpperBound for PairForest<'_> {
    fn bound(&self, model: &IlpModel, fixed: &[i8], _path: &[(usize, i8)]) -> Bound {
        self.upper(model, |v| fixed[v] < 0).into()
    }
}

/// LP relaxation of the model's pure packing rows (other rows are dropped,
/// which only loosens it). Branching decisions are applied to a cached chain
/// of LP solutions, one per depth, so each node re-solves from its parent.
/// The fractional optimum is also rounded greedily into a candidate packing.
pub struct PackingLp {
    rows: Vec<Vec<usize>>,
    var_rows: Vec<Vec<usize>>,
    coeff: Vec<i64>,
    /// LP column of each variable with positive coefficient.
    col: Vec<Option<Variable>>,
    /// `chain[k]` is the LP after the first `k` decisions of `path`.
    chain: RefCell<Vec<Option<Solution>>>,
    path: RefCell<Vec<(usize, i8)>>,
}

impl PackingLp {
    pub fn new(model: &IlpModel) -> Self {
        let rows: Vec<Vec<usize>> = model
            .constraints
            .iter()
            .filter(|c| c.is_packing())
            .map(|c| c.terms.iter().map(|t| t.0).collect())
            .collect();
        let mut var_rows = vec![Vec::new(); model.num_vars()];
        for (r, row) in rows.iter().enumerate() {
            for &v in row {
                var_rows[v].push(r);
            }
        }
        let coeff: Vec<i64> = model.vars.iter().map(|v| v.coeff).collect();
        let mut lp = PackingLp {
            rows,
            var_rows,
            coeff,
            col: Vec::new(),
            chain: RefCell::new(Vec::new()),
            path: RefCell::new(Vec::new()),
        };
        let (problem, col) = lp.build(&[]);
        lp.col = col;
        let root = problem.solve().ok().and_then(|o| o.into_solution().ok());
        lp.chain.get_mut().push(root);
        lp
    }

    /// The LP with `path` applied as variable bounds. Columns are added in
    /// variable order, so handles agree across rebuilds.
    fn build(&self, path: &[(usize, i8)]) -> (Problem, Vec<Option<Variable>>) {
        let mut bounds = vec![(0.0, 1.0); self.coeff.len()];
        for &(v, val) in path {
            bounds[v] = (val as f64, val as f64);
        }
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let col: Vec<Option<Variable>> =
            self.coeff.iter().zip(&bounds).map(|(&c, &b)| (c > 0).then(|| lp.add_var(c as f64, b))).collect();
        for row in &self.rows {
            let terms: Vec<(Variable, f64)> = row.iter().filter_map(|&v| col[v].map(|c| (c, 1.0))).collect();
            if terms.len() > 1 {
                lp.add_constraint(terms.as_slice(), ComparisonOp::Le, 1.0);
            }
        }
        (lp, col)
    }

    fn solve_fresh(&self, path: &[(usize, i8)]) -> Option<Solution> {
        self.build(path).0.solve().ok()?.into_solution().ok()
    }

    /// The LP after all decisions in `path`, re-solved from the parent's
    /// solution; falls back to a fresh solve when the incremental step fails.
    fn solution_at(&self, path: &[(usize, i8)]) -> Option<Solution> {
        let mut chain = self.chain.borrow_mut();
        let mut cached = self.path.borrow_mut();
        let common = cached.iter().zip(path).take_while(|(a, b)| a == b).count();
        cached.truncate(common);
        chain.truncate(common + 1);
        for (k, &(v, val)) in path.iter().enumerate().skip(common) {
            let next = match (chain.last().cloned().flatten(), self.col[v]) {
                (Some(sol), Some(c)) => sol.fix_var(c, val as f64).ok().and_then(|o| o.into_solution().ok()),
                (Some(sol), None) => Some(sol),
                (None, _) => None,
            };
            let next = next.or_else(|| self.solve_fresh(&path[..=k]));
            chain.push(next);
            cached.push((v, val));
        }
        chain.last().cloned().flatten()
    }

    fn round(&self, model: &IlpModel, fixed: &[i8], x: &[f64]) -> Vec<bool> {
        let mut load = vec![0usize; self.rows.len()];
        let mut pick: Vec<bool> = fixed.iter().map(|&f| f == 1).collect();
        for (v, _) in pick.iter().enumerate().filter(|(_, &p)| p) {
            for &r in &self.var_rows[v] {
                load[r] += 1;
            }
        }
        let mut order: Vec<usize> = (0..fixed.len()).filter(|&v| fixed[v] < 0 && x[v] > 1e-9).collect();
        order.sort_by(|&a, &b| {
            x[b].total_cmp(&x[a]).then(model.vars[b].coeff.cmp(&model.vars[a].coeff)).then(a.cmp(&b))
        });
        for v in order {
            if self.var_rows[v].iter().all(|&r| load[r] == 0) {
                pick[v] = true;
                for &r in &self.var_rows[v] {
                    load[r] += 1;
                }
            }
        }
        pick
    }
}

impl UpperBound for PackingLp {
    fn bound(&self, model: &IlpModel, fixed: &[i8], path: &[(usize, i8)]) -> Bound {
        let Some(sol) = self.solution_at(path) else {
            return Bound { value: i64::MAX, candidate: None };
        };
        let x: Vec<f64> = self.col.iter().map(|c| c.map_or(0.0, |c| sol.var_value(c))).collect();
        // The LP counts variables already fixed to 1; report only the free part.
        let total = (sol.objective() + LP_SLACK).floor() as i64;
        let obj_fixed: i64 = fixed.iter().zip(&model.vars).filter(|(&f, _)| f == 1).map(|(_, v)| v.coeff).sum();
        Bound { value: total - obj_fixed, candidate: Some(self.round(model, fixed, &x)) }
    }
}
