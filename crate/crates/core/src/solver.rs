//! Depth-first branch and bound for 0-1 maximization models.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::ilp::{IlpModel, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branching {
    /// Highest objective coefficient first, ties to the lowest index.
    #[default]
    MaxCoefficient,
    /// Lowest unfixed index first.
    FirstIndex,
}

#[derive(Debug, Clone, Default)]
pub struct SolverConfig {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    pub branching: Branching,
}

impl SolverConfig {
    pub fn with_time_limit(limit: Duration) -> Self {
        SolverConfig { time_limit: Some(limit), ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// A limit was hit; `value` is the best feasible objective found.
    Timeout,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpSolution {
    pub status: SolveStatus,
    /// Variable part of the objective, excluding the model constant.
    pub value: Option<i64>,
    pub assignment: Option<Vec<bool>>,
    pub nodes: u64,
}

impl IlpSolution {
    /// Objective including the model constant.
    pub fn total(&self, model: &IlpModel) -> Option<i64> {
        self.value.map(|v| v + model.constant)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("variable {var} has negative objective coefficient {coeff}")]
    NegativeCoefficient { var: usize, coeff: i64 },
    #[error("objective or row activity overflows i64")]
    Overflow,
}

const UNFIXED: i8 = -1;

/// Problem-specific bound on what the unfixed variables can still add.
/// `fixed[v]` is `-1` while free, else `0` or `1`; `path` lists the branching
/// decisions leading to the node, outermost first.
pub trait UpperBound {
    fn bound(&self, model: &IlpModel, fixed: &[i8], path: &[(usize, i8)]) -> Bound;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub value: i64,
    /// A complete assignment found on the way, tried as an incumbent.
    pub candidate: Option<Vec<bool>>,
}

impl From<i64> for Bound {
    fn from(value: i64) -> Self {
        Bound { value, candidate: None }
    }
}

/// Optional help for the search: extra bounds, tried in order until one
/// prunes the node, and a starting solution.
#[derive(Default)]
pub struct Hints<'a> {
    pub bounds: Vec<&'a dyn UpperBound>,
    /// Used as the first incumbent when feasible.
    pub start: Option<Vec<bool>>,
}

pub fn solve(model: &IlpModel, cfg: &SolverConfig) -> Result<IlpSolution, SolverError> {
    let deadline = cfg.time_limit.map(|d| Instant::now() + d);
    solve_until(model, cfg, deadline, Hints::default())
}

/// Like [`solve`], but against an absolute deadline (which overrides
/// `cfg.time_limit`) and with optional hints.
pub fn solve_until(
    model: &IlpModel,
    cfg: &SolverConfig,
    deadline: Option<Instant>,
    hints: Hints<'_>,
) -> Result<IlpSolution, SolverError> {
    let mut search = Search::new(model, cfg, deadline, hints.bounds)?;
    if let Some(start) = hints.start {
        search.offer(start);
    }
    search.run();
    let (status, value, assignment) = match (&search.best, search.stopped) {
        (Some((v, a)), false) => (SolveStatus::Optimal, Some(*v), Some(a.clone())),
        (Some((v, a)), true) => (SolveStatus::Timeout, Some(*v), Some(a.clone())),
        (None, false) => (SolveStatus::Infeasible, None, None),
        (None, true) => (SolveStatus::Timeout, None, None),
    };
    Ok(IlpSolution { status, value, assignment, nodes: search.nodes })
}

struct Decision {
    trail_len: usize,
    var: usize,
    value: i8,
    order_pos: usize,
    retry: bool,
}

struct Search<'a> {
    model: &'a IlpModel,
    cfg: &'a SolverConfig,
    deadline: Option<Instant>,
    extra: Vec<&'a dyn UpperBound>,
    var_rows: Vec<Vec<(usize, i64)>>,
    row_min: Vec<i64>,
    row_max: Vec<i64>,
    row_maxabs: Vec<i64>,
    first_clique: Vec<Option<usize>>,
    last_clique: Vec<Option<usize>>,
    order: Vec<usize>,
    fixed: Vec<i8>,
    trail: Vec<usize>,
    queue: Vec<usize>,
    in_queue: Vec<bool>,
    obj: i64,
    free_sum: i64,
    best: Option<(i64, Vec<bool>)>,
    nodes: u64,
    stopped: bool,
}

impl<'a> Search<'a> {
    fn new(
        model: &'a IlpModel,
        cfg: &'a SolverConfig,
        deadline: Option<Instant>,
        extra: Vec<&'a dyn UpperBound>,
    ) -> Result<Self, SolverError> {
        let n = model.num_vars();
        let rows = model.num_constraints();
        let mut free_sum = 0i64;
        for (i, v) in model.vars.iter().enumerate() {
            if v.coeff < 0 {
                return Err(SolverError::NegativeCoefficient { var: i, coeff: v.coeff });
            }
            free_sum = free_sum.checked_add(v.coeff).ok_or(SolverError::Overflow)?;
        }
        let mut var_rows = vec![Vec::new(); n];
        let mut row_min = vec![0i64; rows];
        let mut row_max = vec![0i64; rows];
        let mut row_maxabs = vec![0i64; rows];
        let mut first_clique = vec![None; n];
        let mut last_clique = vec![None; n];
        for (r, c) in model.constraints.iter().enumerate() {
            let packing = c.is_packing();
            for &(v, a) in &c.terms {
                var_rows[v].push((r, a));
                let (lo, hi) = if a < 0 { (a, 0) } else { (0, a) };
                row_min[r] = row_min[r].checked_add(lo).ok_or(SolverError::Overflow)?;
                row_max[r] = row_max[r].checked_add(hi).ok_or(SolverError::Overflow)?;
                row_maxabs[r] = row_maxabs[r].max(a.checked_abs().ok_or(SolverError::Overflow)?);
                if packing {
                    first_clique[v].get_or_insert(r);
                    last_clique[v] = Some(r);
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        if cfg.branching == Branching::MaxCoefficient {
            order.sort_by_key(|&v| (std::cmp::Reverse(model.vars[v].coeff), v));
        }
        Ok(Search {
            model,
            cfg,
            deadline,
            extra,
            var_rows,
            row_min,
            row_max,
            row_maxabs,
            first_clique,
            last_clique,
            order,
            fixed: vec![UNFIXED; n],
            trail: Vec::new(),
            queue: Vec::new(),
            in_queue: vec![false; rows],
            obj: 0,
            free_sum,
            best: None,
            nodes: 0,
            stopped: false,
        })
    }

    fn fix(&mut self, v: usize, val: i8) {
        self.fixed[v] = val;
        self.trail.push(v);
        let coeff = self.model.vars[v].coeff;
        self.free_sum -= coeff;
        if val == 1 {
            self.obj += coeff;
        }
        for &(r, a) in &self.var_rows[v] {
            match (val, a < 0) {
                (1, true) => self.row_max[r] += a,
                (1, false) => self.row_min[r] += a,
                (_, true) => self.row_min[r] -= a,
                (_, false) => self.row_max[r] -= a,
            }
            if !self.in_queue[r] {
                self.in_queue[r] = true;
                self.queue.push(r);
            }
        }
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let v = self.trail.pop().expect("trail is non-empty");
            let val = self.fixed[v];
            self.fixed[v] = UNFIXED;
            let coeff = self.model.vars[v].coeff;
            self.free_sum += coeff;
            if val == 1 {
                self.obj -= coeff;
            }
            for &(r, a) in &self.var_rows[v] {
                match (val, a < 0) {
                    (1, true) => self.row_max[r] -= a,
                    (1, false) => self.row_min[r] -= a,
                    (_, true) => self.row_min[r] += a,
                    (_, false) => self.row_max[r] += a,
                }
            }
        }
    }

    fn clear_queue(&mut self) {
        for r in self.queue.drain(..) {
            self.in_queue[r] = false;
        }
    }

    /// Unit propagation over all queued rows. Returns false on conflict.
    fn propagate(&mut self) -> bool {
        while let Some(r) = self.queue.pop() {
            self.in_queue[r] = false;
            let c = &self.model.constraints[r];
            let (lo, hi) = (self.row_min[r], self.row_max[r]);
            let eq = c.sense == Sense::Eq;
            if lo > c.rhs || (eq && hi < c.rhs) {
                self.clear_queue();
                return false;
            }
            let slack_lo = c.rhs - lo;
            let slack_hi = hi - c.rhs;
            if self.row_maxabs[r] <= slack_lo && (!eq || self.row_maxabs[r] <= slack_hi) {
                continue;
            }
            for &(v, a) in &c.terms {
                if self.fixed[v] != UNFIXED {
                    continue;
                }
                let forced = if a.abs() > slack_lo {
                    Some(if a > 0 { 0 } else { 1 })
                } else if eq && a.abs() > slack_hi {
                    Some(if a > 0 { 1 } else { 0 })
                } else {
                    None
                };
                if let Some(val) = forced {
                    self.fix(v, val);
                }
            }
        }
        true
    }

    fn clique_bound(&self, last: bool) -> i64 {
        let mut row_best = vec![0i64; self.model.num_constraints()];
        let mut loose = 0i64;
        for (v, &f) in self.fixed.iter().enumerate() {
            if f != UNFIXED {
                continue;
            }
            let coeff = self.model.vars[v].coeff;
            let row = if last { self.last_clique[v] } else { self.first_clique[v] };
            match row {
                Some(r) => row_best[r] = row_best[r].max(coeff),
                None => loose += coeff,
            }
        }
        loose + row_best.iter().sum::<i64>()
    }

    fn prunes(&self, bound: i64) -> bool {
        self.best.as_ref().is_some_and(|(v, _)| self.obj + bound <= *v)
    }

    /// Cheap bounds first; extra bounds only while the node survives. Extra
    /// bounds may also improve the incumbent.
    fn upper_bound(&mut self, path: &[(usize, i8)]) -> i64 {
        let mut b = self.free_sum;
        if b == 0 {
            return 0;
        }
        b = b.min(self.clique_bound(false)).min(self.clique_bound(true));
        for k in 0..self.extra.len() {
            if self.prunes(b) {
                break;
            }
            let found = self.extra[k].bound(self.model, &self.fixed, path);
            b = b.min(found.value);
            if let Some(a) = found.candidate {
                self.offer(a);
            }
        }
        b
    }

    fn offer(&mut self, a: Vec<bool>) {
        if a.len() != self.model.num_vars() || !self.model.is_feasible(&a) {
            return;
        }
        let v = self.model.objective(&a);
        if self.best.as_ref().is_none_or(|(b, _)| v > *b) {
            self.best = Some((v, a));
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if self.cfg.node_limit.is_some_and(|lim| self.nodes >= lim) {
            return true;
        }
        if self.nodes.is_multiple_of(1024) || !self.extra.is_empty() {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return true;
                }
            }
        }
        false
    }

    fn record_if_better(&mut self) {
        if self.best.as_ref().is_none_or(|(v, _)| self.obj > *v) {
            let a = self.fixed.iter().map(|&f| f == 1).collect();
            self.best = Some((self.obj, a));
        }
    }

    /// Tries to finish the current node with every free variable at zero.
    fn try_zero_completion(&mut self) -> bool {
        let mark = self.trail.len();
        let free: Vec<usize> = (0..self.fixed.len()).filter(|&v| self.fixed[v] == UNFIXED).collect();
        for v in free {
            if self.fixed[v] == UNFIXED {
                self.fix(v, 0);
            }
        }
        let ok = self.propagate() && self.model.is_feasible(&self.assignment());
        if ok {
            self.record_if_better();
        }
        self.clear_queue();
        self.undo_to(mark);
        ok
    }

    fn assignment(&self) -> Vec<bool> {
        self.fixed.iter().map(|&f| f == 1).collect()
    }

    fn run(&mut self) {
        // Root: initial propagation, then the all-zero incumbent if feasible.
        self.queue = (0..self.model.num_constraints()).collect();
        self.in_queue.iter_mut().for_each(|q| *q = true);
        if !self.propagate() {
            return;
        }
        self.try_zero_completion();

        let mut stack: Vec<Decision> = Vec::new();
        let mut pos = 0usize;
        let mut enter = true;
        loop {
            if enter {
                self.nodes += 1;
                if self.out_of_budget() {
                    self.stopped = true;
                    return;
                }
                let path: Vec<(usize, i8)> = stack.iter().map(|d| (d.var, d.value)).collect();
                let bound = self.upper_bound(&path);
                let promising = !self.prunes(bound);
                let branch_var = if promising { self.next_var(pos) } else { None };
                match branch_var {
                    Some(_) if bound == 0 && self.try_zero_completion() => {}
                    Some(p) => {
                        let var = self.order[p];
                        let first = if self.model.vars[var].coeff > 0 { 1 } else { 0 };
                        stack.push(Decision {
                            trail_len: self.trail.len(),
                            var,
                            value: first,
                            order_pos: p,
                            retry: true,
                        });
                        pos = p;
                        self.fix(var, first);
                        enter = self.propagate();
                        continue;
                    }
                    None if promising && self.model.is_feasible(&self.assignment()) => self.record_if_better(),
                    None => {}
                }
            }
            // Backtrack to the most recent decision with an untried value.
            loop {
                let Some(d) = stack.last_mut() else { return };
                self.clear_queue();
                self.undo_to(d.trail_len);
                if d.retry {
                    d.retry = false;
                    d.value = 1 - d.value;
                    let (var, value, p) = (d.var, d.value, d.order_pos);
                    pos = p;
                    self.fix(var, value);
                    enter = self.propagate();
                    break;
                }
                stack.pop();
            }
        }
    }

    fn next_var(&self, from: usize) -> Option<usize> {
        (from..self.order.len()).find(|&p| self.fixed[self.order[p]] == UNFIXED)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::{Constraint, IlpModel};

    fn model(coeffs: &[i64], rows: Vec<Constraint>) -> IlpModel {
        let mut m = IlpModel::new();
        for (i, &c) in coeffs.iter().enumerate() {
            m.add_var(i, 0, c);
        }
        for r in rows {
            m.add_constraint(r);
        }
        m
    }

    fn brute(m: &IlpModel) -> Option<i64> {
        let n = m.num_vars();
        (0u32..1 << n)
            .map(|mask| (0..n).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
            .filter(|a| m.is_feasible(a))
            .map(|a| m.objective(&a))
            .max()
    }

    #[test]
    fn empty_model() {
        let s = solve(&IlpModel::new(), &SolverConfig::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.value, Some(0));
    }

    #[test]
    fn packing_pair() {
        let m = model(&[3, 2], vec![Constraint::packing([0, 1])]);
        let s = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(s.value, Some(3));
        assert_eq!(s.assignment, Some(vec![true, false]));
    }

    #[test]
    fn infeasible() {
        let m = model(&[1], vec![Constraint::le(vec![], -1)]);
        let s = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert_eq!(s.value, None);
    }

    #[test]
    fn equality_and_negative_rows() {
        // x0 + x1 + x2 = 2, x2 <= x0
        let m = model(
            &[1, 5, 4],
            vec![
                Constraint { terms: vec![(0, 1), (1, 1), (2, 1)], sense: Sense::Eq, rhs: 2 },
                Constraint::le(vec![(2, 1), (0, -1)], 0),
            ],
        );
        let s = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(s.value, brute(&m));
        assert_eq!(s.value, Some(6));
    }

    #[test]
    fn zero_weight_enabler() {
        // x1 needs x0 (weight 0)
        let m = model(&[0, 3], vec![Constraint::le(vec![(1, 1), (0, -1)], 0)]);
        let s = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(s.value, Some(3));
    }

    #[test]
    fn negative_objective_rejected() {
        let m = model(&[1, -2], vec![]);
        assert_eq!(solve(&m, &SolverConfig::default()), Err(SolverError::NegativeCoefficient { var: 1, coeff: -2 }));
    }

    #[test]
    fn node_limit_reports_timeout() {
        let m = model(&[1, 1, 1, 1], vec![Constraint::packing([0, 1])]);
        let cfg = SolverConfig { node_limit: Some(1), ..Default::default() };
        let s = solve(&m, &cfg).unwrap();
        assert_eq!(s.status, SolveStatus::Timeout);
        assert_eq!(s.value, Some(0));
    }

    #[test]
    fn matches_enumeration_on_random_models() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=8);
            let coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(0..6)).collect();
            let mut rows = Vec::new();
            for _ in 0..rng.gen_range(0..6) {
                let mut terms = Vec::new();
                for v in 0..n {
                    if rng.gen_bool(0.4) {
                        terms.push((v, rng.gen_range(-2..=2)));
                    }
                }
                let sense = if rng.gen_bool(0.2) { Sense::Eq } else { Sense::Le };
                rows.push(Constraint { terms, sense, rhs: rng.gen_range(-1..=2) });
            }
            let m = model(&coeffs, rows);
            for branching in [Branching::MaxCoefficient, Branching::FirstIndex] {
                let s = solve(&m, &SolverConfig { branching, ..Default::default() }).unwrap();
                assert_eq!(s.value, brute(&m), "{m:?}");
                if let Some(a) = &s.assignment {
                    assert!(m.is_feasible(a));
                    assert_eq!(Some(m.objective(a)), s.value);
                }
            }
        }
    }
}
