//! Maximum-weight bipartite matching with the Hungarian method.
//!
//! Weights are exact nonnegative integers. A forbidden edge is absent from
//! the graph: it is skipped by the augmenting-path search rather than
//! encoded as a large negative weight.
//!
//! Among all optimal solutions the one returned is fixed: after the
//! Hungarian pass, the optimal solutions are exactly the perfect matchings of
//! the tight-edge subgraph, and rows are assigned greedily in order to the
//! smallest tight column that still admits a perfect completion.

use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    w: Vec<Option<i64>>,
}

impl WeightMatrix {
    /// All edges present with weight zero.
    pub fn new(rows: usize, cols: usize) -> Self {
        WeightMatrix { rows, cols, w: vec![Some(0); rows * cols] }
    }

    /// From dense rows; `None` marks a forbidden edge.
    pub fn from_rows(rows: Vec<Vec<Option<i64>>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged weight matrix");
        WeightMatrix { rows: r, cols: c, w: rows.into_iter().flatten().collect() }
    }

    pub fn from_weights(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Option<i64> {
        self.w[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, weight: i64) {
        debug_assert!(weight >= 0, "matching weights must be nonnegative");
        self.w[i * self.cols + j] = Some(weight);
    }

    pub fn forbid(&mut self, i: usize, j: usize) {
        self.w[i * self.cols + j] = None;
    }
}

impl fmt::Debug for WeightMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.rows {
            let row: Vec<String> =
                (0..self.cols).map(|j| self.get(i, j).map_or_else(|| "X".to_string(), |v| v.to_string())).collect();
            list.entry(&row.join(" "));
        }
        list.finish()
    }
}

/// A matching: total weight and its `(row, col)` pairs sorted by row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matched {
    pub value: i64,
    pub pairs: Vec<(usize, usize)>,
}

/// Maximum-weight matching, not necessarily perfect. Zero-weight edges carry
/// nothing and are left out of the returned pairs.
pub fn max_weight_matching(w: &WeightMatrix) -> Matched {
    let n = w.rows.max(w.cols);
    if n == 0 {
        return Matched { value: 0, pairs: Vec::new() };
    }
    // Square padding with zero-weight dummies; a forbidden edge costs the
    // same as leaving both ends unmatched.
    let cost: Vec<Option<i64>> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i < w.rows && j < w.cols {
                Some(-w.get(i, j).unwrap_or(0))
            } else {
                Some(0)
            }
        })
        .collect();
    let assignment = min_cost_assignment(n, &cost).expect("complete graph has a perfect matching");
    let mut value = 0;
    let mut pairs = Vec::new();
    for (i, &j) in assignment.iter().enumerate() {
        if i < w.rows && j < w.cols {
            if let Some(x) = w.get(i, j).filter(|&x| x > 0) {
                value += x;
                pairs.push((i, j));
            }
        }
    }
    Matched { value, pairs }
}

/// Maximum-weight perfect matching avoiding forbidden edges, or `None` when
/// the sides differ in size or no such matching exists.
pub fn max_weight_bijection(w: &WeightMatrix) -> Option<Matched> {
    if w.rows != w.cols {
        return None;
    }
    let n = w.rows;
    let cost: Vec<Option<i64>> = w.w.iter().map(|c| c.map(|x| -x)).collect();
    let assignment = min_cost_assignment(n, &cost)?;
    let pairs: Vec<(usize, usize)> = assignment.into_iter().enumerate().collect();
    let value = pairs.iter().map(|&(i, j)| w.get(i, j).expect("allowed edge")).sum();
    Some(Matched { value, pairs })
}

/// Minimum-cost perfect assignment on an `n × n` matrix (`None` entries are
/// absent edges). Returns the column of each row.
fn min_cost_assignment(n: usize, cost: &[Option<i64>]) -> Option<Vec<usize>> {
    if n == 0 {
        return Some(Vec::new());
    }
    let c = |i: usize, j: usize| cost[i * n + j];
    const INF: i64 = i64::MAX / 4;
    // 1-based potentials; column 0 is the virtual start.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                if let Some(cij) = c(i0 - 1, j - 1) {
                    let cur = cij - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if delta >= INF {
                return None;
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    let tight = |i: usize, j: usize| c(i, j).is_some_and(|cij| cij - u[i + 1] - v[j + 1] == 0);
    debug_assert!(row_to_col.iter().enumerate().all(|(i, &j)| tight(i, j)));
    Some(lexicographic_tight_matching(n, row_to_col, tight))
}

/// Rewrites a perfect matching of the tight subgraph into the one whose
/// row-to-column list is lexicographically smallest.
fn lexicographic_tight_matching(
    n: usize,
    mut row_to_col: Vec<usize>,
    tight: impl Fn(usize, usize) -> bool,
) -> Vec<usize> {
    let mut col_to_row = vec![0usize; n];
    for (i, &j) in row_to_col.iter().enumerate() {
        col_to_row[j] = i;
    }
    let mut col_fixed = vec![false; n];
    for r in 0..n {
        let current = row_to_col[r];
        for j in 0..n {
            if col_fixed[j] || !tight(r, j) {
                continue;
            }
            if j == current {
                break;
            }
            // Row `displaced` loses column `j`; it must reach the column `r`
            // releases through an alternating path among unfixed rows.
            let displaced = col_to_row[j];
            let mut visited = vec![false; n];
            visited[j] = true;
            let ok = reroute(displaced, current, &tight, &col_fixed, &mut visited, &mut row_to_col, &mut col_to_row);
            if ok {
                row_to_col[r] = j;
                col_to_row[j] = r;
                break;
            }
        }
        col_fixed[row_to_col[r]] = true;
    }
    row_to_col
}

fn reroute(
    i: usize,
    target: usize,
    tight: &impl Fn(usize, usize) -> bool,
    col_fixed: &[bool],
    visited: &mut [bool],
    row_to_col: &mut [usize],
    col_to_row: &mut [usize],
) -> bool {
    for j in 0..col_fixed.len() {
        if col_fixed[j] || visited[j] || !tight(i, j) {
            continue;
        }
        visited[j] = true;
        if j == target || reroute(col_to_row[j], target, tight, col_fixed, visited, row_to_col, col_to_row) {
            row_to_col[i] = j;
            col_to_row[j] = i;
            return true;
        }
    }
    false
}

/// Reference value of the best matching by enumerating every matching.
pub fn exhaustive_matching(w: &WeightMatrix) -> i64 {
    fn go(w: &WeightMatrix, i: usize, used: &mut [bool]) -> i64 {
        if i == w.rows {
            return 0;
        }
        let mut best = go(w, i + 1, used);
        for j in 0..w.cols {
            if let (false, Some(x)) = (used[j], w.get(i, j)) {
                used[j] = true;
                best = best.max(x + go(w, i + 1, used));
                used[j] = false;
            }
        }
        best
    }
    go(w, 0, &mut vec![false; w.cols])
}

/// Reference value of the best perfect matching by enumerating permutations.
pub fn exhaustive_bijection(w: &WeightMatrix) -> Option<i64> {
    fn go(w: &WeightMatrix, i: usize, used: &mut [bool]) -> Option<i64> {
        if i == w.rows {
            return Some(0);
        }
        let mut best = None;
        for j in 0..w.cols {
            if let (false, Some(x)) = (used[j], w.get(i, j)) {
                used[j] = true;
                if let Some(rest) = go(w, i + 1, used) {
                    best = best.max(Some(x + rest));
                }
                used[j] = false;
            }
        }
        best
    }
    if w.rows != w.cols {
        return None;
    }
    go(w, 0, &mut vec![false; w.cols])
}
