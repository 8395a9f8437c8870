//! Labeled unordered rooted trees.
//!
//! Node ids are dense and assigned in pre-order, so node `0` is always the
//! root and the descendants of `x` are exactly the ids in `x + 1..end(x)`.
//! All per-node data lives in flat arrays; trees are immutable once built.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::sync::Arc;

use thiserror::Error;

pub type NodeId = usize;

/// A node label. Equality is exact text equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(text: &str) -> Result<Self, TreeError> {
        if text.is_empty() {
            return Err(TreeError::EmptyLabel);
        }
        Ok(Label(Arc::from(text)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn is_bare(&self) -> bool {
        self.0.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'))
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("empty input")]
    EmptyInput,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("labels must be non-empty")]
    EmptyLabel,
    #[error("node id {0} out of range")]
    NodeOutOfRange(NodeId),
    #[error("node {leaf} is not a leaf below node {top}")]
    NotALeafBelow { top: NodeId, leaf: NodeId },
    #[error("invalid parent structure: {0}")]
    Structure(String),
    #[error("line {line}: non-integer token {token:?}")]
    BadToken { line: usize, token: String },
    #[error("line {line}: pop below the root")]
    PopBelowRoot { line: usize },
    #[error("line {line}: record does not return to the root (unconsumed tokens)")]
    Unbalanced { line: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

/// An immutable labeled rooted tree with no order among siblings.
#[derive(Clone, PartialEq, Eq)]
pub struct Tree {
    labels: Vec<Label>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    post: Vec<usize>,
    end: Vec<NodeId>,
    depth: Vec<usize>,
    height: Vec<usize>,
}

impl Tree {
    /// Single-node tree.
    pub fn leaf(label: Label) -> Self {
        Self::from_parents(vec![label], vec![None]).expect("a single node is a tree")
    }

    /// Builds a tree from per-node labels and parent links in any node
    /// numbering. Nodes are renumbered in pre-order; the relative order of
    /// children follows their position in the input.
    pub fn from_parents(labels: Vec<Label>, parents: Vec<Option<usize>>) -> Result<Self, TreeError> {
        let n = labels.len();
        if n == 0 {
            return Err(TreeError::EmptyInput);
        }
        if parents.len() != n {
            return Err(TreeError::Structure(format!("{} labels but {} parent entries", n, parents.len())));
        }
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut root = None;
        for (v, p) in parents.iter().enumerate() {
            match *p {
                None if root.is_some() => return Err(TreeError::Structure("more than one root".into())),
                None => root = Some(v),
                Some(p) if p >= n => return Err(TreeError::NodeOutOfRange(p)),
                Some(p) => kids[p].push(v),
            }
        }
        let root = root.ok_or_else(|| TreeError::Structure("no root".into()))?;

        // Iterative pre-order renumbering.
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(kids[v].iter().rev());
        }
        if order.len() != n {
            return Err(TreeError::Structure("not all nodes are reachable from the root".into()));
        }
        let mut new_id = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }
        let mut new_labels = Vec::with_capacity(n);
        let mut new_parents = Vec::with_capacity(n);
        let mut labels = labels.into_iter().map(Some).collect::<Vec<_>>();
        for &v in &order {
            new_labels.push(labels[v].take().expect("each node visited once"));
            new_parents.push(parents[v].map(|p| new_id[p]));
        }
        Ok(Self::from_preorder(new_labels, new_parents))
    }

    /// `parents` must already be in pre-order (every parent id precedes its
    /// children, and subtrees are contiguous).
    fn from_preorder(labels: Vec<Label>, parent: Vec<Option<NodeId>>) -> Self {
        let n = labels.len();
        let mut children = vec![Vec::new(); n];
        let mut depth = vec![0; n];
        for v in 1..n {
            let p = parent[v].expect("only the root lacks a parent");
            children[p].push(v);
            depth[v] = depth[p] + 1;
        }
        let mut end = vec![0; n];
        let mut height = vec![0; n];
        for v in (0..n).rev() {
            end[v] = children[v].last().map_or(v + 1, |&c| end[c]);
            height[v] = children[v].iter().map(|&c| height[c] + 1).max().unwrap_or(0);
        }
        let mut post = vec![0; n];
        let mut counter = 0;
        let mut stack = vec![(0, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                post[v] = counter;
                counter += 1;
            } else {
                stack.push((v, true));
                stack.extend(children[v].iter().rev().map(|&c| (c, false)));
            }
        }
        Tree { labels, parent, children, post, end, depth, height }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.len()
    }

    pub fn label(&self, x: NodeId) -> &Label {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn parent(&self, x: NodeId) -> Option<NodeId> {
        self.parent[x]
    }

    pub fn children(&self, x: NodeId) -> &[NodeId] {
        &self.children[x]
    }

    pub fn degree(&self, x: NodeId) -> usize {
        self.children[x].len()
    }

    pub fn max_degree(&self) -> usize {
        self.children.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_leaf(&self, x: NodeId) -> bool {
        self.children[x].is_empty()
    }

    pub fn pre_order(&self, x: NodeId) -> usize {
        x
    }

    pub fn post_order(&self, x: NodeId) -> usize {
        self.post[x]
    }

    pub fn depth(&self, x: NodeId) -> usize {
        self.depth[x]
    }

    pub fn height(&self, x: NodeId) -> usize {
        self.height[x]
    }

    /// Number of nodes in `T(x)`.
    pub fn subtree_size(&self, x: NodeId) -> usize {
        self.end[x] - x
    }

    /// Nodes of `T(x)` in pre-order, `x` first.
    pub fn subtree(&self, x: NodeId) -> std::ops::Range<NodeId> {
        x..self.end[x]
    }

    /// Strict descendants of `x` in pre-order.
    pub fn descendants(&self, x: NodeId) -> std::ops::Range<NodeId> {
        x + 1..self.end[x]
    }

    /// Nodes in post-order (children before parents).
    pub fn post_order_nodes(&self) -> Vec<NodeId> {
        let mut order = vec![0; self.len()];
        for (v, &p) in self.post.iter().enumerate() {
            order[p] = v;
        }
        order
    }

    /// Leaves of `T(x)` in pre-order.
    pub fn leaves_under(&self, x: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.subtree(x).filter(move |&v| self.is_leaf(v))
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.leaves_under(0)
    }

    /// `x < y` in the ancestor order: `x` lies on the path from the root to
    /// `y` and `x != y`. Panics on out-of-range ids.
    #[inline]
    pub fn is_ancestor(&self, x: NodeId, y: NodeId) -> bool {
        x < y && y < self.end[x]
    }

    /// `x <= y` in the ancestor order.
    #[inline]
    pub fn is_ancestor_or_self(&self, x: NodeId, y: NodeId) -> bool {
        x <= y && y < self.end[x]
    }

    #[inline]
    pub fn comparable(&self, x: NodeId, y: NodeId) -> bool {
        self.is_ancestor_or_self(x, y) || self.is_ancestor_or_self(y, x)
    }

    pub fn checked_is_ancestor(&self, x: NodeId, y: NodeId) -> Result<bool, TreeError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.is_ancestor(x, y))
    }

    fn check(&self, x: NodeId) -> Result<(), TreeError> {
        if x < self.len() {
            Ok(())
        } else {
            Err(TreeError::NodeOutOfRange(x))
        }
    }

    /// The path from `x` down to the leaf `leaf`, both inclusive.
    pub fn path_to_leaf(&self, x: NodeId, leaf: NodeId) -> Result<Vec<NodeId>, TreeError> {
        self.check(x)?;
        self.check(leaf)?;
        if !self.is_leaf(leaf) || !self.is_ancestor_or_self(x, leaf) {
            return Err(TreeError::NotALeafBelow { top: x, leaf });
        }
        let mut path = vec![leaf];
        let mut v = leaf;
        while v != x {
            v = self.parent[v].expect("x is an ancestor of the leaf");
            path.push(v);
        }
        path.reverse();
        Ok(path)
    }

    /// True iff no two distinct members of `set` are comparable.
    pub fn is_antichain(&self, set: &NodeSet) -> bool {
        // With pre-order ids it suffices to compare consecutive members.
        let mut prev: Option<NodeId> = None;
        for v in set.iter() {
            if let Some(p) = prev {
                if v < self.end[p] {
                    return false;
                }
            }
            prev = Some(v);
        }
        true
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree({})", render_bracket(self))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_bracket(self))
    }
}

impl std::str::FromStr for Tree {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bracket(s)
    }
}

/// A set of node ids of one tree, iterated in increasing (pre-order) order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeSet {
    members: Vec<bool>,
}

impl NodeSet {
    pub fn new(len: usize) -> Self {
        NodeSet { members: vec![false; len] }
    }

    pub fn insert(&mut self, x: NodeId) {
        if x >= self.members.len() {
            self.members.resize(x + 1, false);
        }
        self.members[x] = true;
    }

    pub fn contains(&self, x: NodeId) -> bool {
        self.members.get(x).copied().unwrap_or(false)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members.iter().enumerate().filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut set = NodeSet::default();
        for x in iter {
            set.insert(x);
        }
        set
    }
}

// ---------------------------------------------------------------------------
// Bracket format

/// Parses `label[(tree,tree,...)]`. Labels are `[A-Za-z0-9_.-]+` or a
/// single-quoted string in which `''` stands for one quote. ASCII whitespace
/// between tokens is ignored.
pub fn parse_bracket(text: &str) -> Result<Tree, TreeError> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    skip_ws(&mut pos);
    if pos == bytes.len() {
        return Err(TreeError::EmptyInput);
    }

    let mut labels = Vec::new();
    let mut parents: Vec<Option<NodeId>> = Vec::new();
    // Open nodes whose child lists are being read.
    let mut open: Vec<NodeId> = Vec::new();

    loop {
        skip_ws(&mut pos);
        let label = read_label(text, &mut pos)?;
        let id = labels.len();
        labels.push(label);
        parents.push(open.last().copied());

        skip_ws(&mut pos);
        if pos < bytes.len() && bytes[pos] == b'(' {
            pos += 1;
            open.push(id);
            continue;
        }
        // Close finished child lists.
        loop {
            skip_ws(&mut pos);
            if open.is_empty() {
                if pos != bytes.len() {
                    return Err(syntax(pos, "trailing input after the root"));
                }
                return Ok(Tree::from_preorder(labels, parents));
            }
            match bytes.get(pos) {
                Some(b',') => {
                    pos += 1;
                    break;
                }
                Some(b')') => {
                    pos += 1;
                    open.pop();
                }
                Some(_) => return Err(syntax(pos, "expected ',' or ')'")),
                None => return Err(syntax(pos, "unexpected end of input, missing ')'")),
            }
        }
    }
}

fn syntax(offset: usize, message: &str) -> TreeError {
    TreeError::Syntax { offset, message: message.to_string() }
}

fn read_label(text: &str, pos: &mut usize) -> Result<Label, TreeError> {
    let bytes = text.as_bytes();
    let start = *pos;
    match bytes.get(start) {
        None => Err(syntax(start, "expected a label, found end of input")),
        Some(b'\'') => {
            let mut out = String::new();
            let mut i = start + 1;
            loop {
                match bytes.get(i) {
                    None => return Err(syntax(start, "unterminated quoted label")),
                    Some(b'\'') if bytes.get(i + 1) == Some(&b'\'') => {
                        out.push('\'');
                        i += 2;
                    }
                    Some(b'\'') => {
                        i += 1;
                        break;
                    }
                    Some(_) => {
                        let ch = text[i..].chars().next().expect("valid utf-8 boundary");
                        out.push(ch);
                        i += ch.len_utf8();
                    }
                }
            }
            *pos = i;
            Label::new(&out).map_err(|_| syntax(start, "empty quoted label"))
        }
        Some(_) => {
            let mut i = start;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || matches!(bytes[i], b'_' | b'.' | b'-')) {
                i += 1;
            }
            if i == start {
                return Err(syntax(start, "expected a label"));
            }
            *pos = i;
            Label::new(&text[start..i])
        }
    }
}

/// Renders a tree in bracket format with children in canonical order
/// (unlabeled shape code, then the rendered labeled subtree), so that
/// label-isomorphic trees render identically.
pub fn render_bracket(t: &Tree) -> String {
    let codes = shape_ranks(t);
    let mut rendered: Vec<String> = vec![String::new(); t.len()];
    for x in (0..t.len()).rev() {
        let mut s = String::new();
        push_label(&mut s, t.label(x));
        if !t.is_leaf(x) {
            let mut kids: Vec<(u32, String)> =
                t.children(x).iter().map(|&c| (codes[c], std::mem::take(&mut rendered[c]))).collect();
            kids.sort();
            s.push('(');
            for (i, (_, k)) in kids.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(k);
            }
            s.push(')');
        }
        rendered[x] = s;
    }
    std::mem::take(&mut rendered[0])
}

fn push_label(out: &mut String, label: &Label) {
    if label.is_bare() {
        out.push_str(label.as_str());
    } else {
        out.push('\'');
        out.push_str(&label.as_str().replace('\'', "''"));
        out.push('\'');
    }
}

// ---------------------------------------------------------------------------
// Structural isomorphism

/// Interns unlabeled subtree shapes to small integers. Two subtrees, possibly
/// from different trees, get the same class from one interner iff they are
/// isomorphic as unlabeled unordered rooted trees.
#[derive(Debug, Default)]
pub struct ShapeInterner {
    ids: HashMap<Vec<u32>, u32>,
}

impl ShapeInterner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Shape class of every node of `t`.
    pub fn classes(&mut self, t: &Tree) -> Vec<u32> {
        let mut class = vec![0u32; t.len()];
        for x in (0..t.len()).rev() {
            let mut key: Vec<u32> = t.children(x).iter().map(|&c| class[c]).collect();
            key.sort_unstable();
            let next = self.ids.len() as u32;
            class[x] = *self.ids.entry(key).or_insert(next);
        }
        class
    }
}

/// Shape ranks that do not depend on child order: shapes are numbered by
/// height, then by their sorted child ranks.
pub fn shape_ranks(t: &Tree) -> Vec<u32> {
    let mut by_height: Vec<Vec<NodeId>> = Vec::new();
    for x in t.nodes() {
        let h = t.height(x);
        if by_height.len() <= h {
            by_height.resize(h + 1, Vec::new());
        }
        by_height[h].push(x);
    }
    let mut rank = vec![0u32; t.len()];
    let mut base = 0u32;
    for level in by_height {
        let mut keyed: Vec<(Vec<u32>, NodeId)> = level
            .into_iter()
            .map(|x| {
                let mut key: Vec<u32> = t.children(x).iter().map(|&c| rank[c]).collect();
                key.sort_unstable();
                (key, x)
            })
            .collect();
        keyed.sort();
        let mut next = base;
        for i in 0..keyed.len() {
            if i > 0 && keyed[i].0 != keyed[i - 1].0 {
                next += 1;
            }
            rank[keyed[i].1] = next;
        }
        base = next + 1;
    }
    rank
}

/// The parenthesis code of `T(x)`: `"(" + sorted child codes + ")"`.
pub fn canonical_code(t: &Tree, x: NodeId) -> String {
    let mut codes: Vec<String> = t.children(x).iter().map(|&c| canonical_code(t, c)).collect();
    codes.sort();
    let mut s = String::with_capacity(2 + codes.iter().map(String::len).sum::<usize>());
    s.push('(');
    for c in codes {
        s.push_str(&c);
    }
    s.push(')');
    s
}

/// Whether `T1(x)` and `T2(y)` have the same unlabeled shape.
pub fn structurally_isomorphic(t1: &Tree, x: NodeId, t2: &Tree, y: NodeId) -> bool {
    if t1.subtree_size(x) != t2.subtree_size(y) {
        return false;
    }
    let mut interner = ShapeInterner::new();
    let c1 = interner.classes(t1);
    let c2 = interner.classes(t2);
    c1[x] == c2[y]
}

// ---------------------------------------------------------------------------
// CSLOGS depth-first integer encoding

/// Parses one CSLOGS record line. A nonnegative integer opens a child with
/// that label and `-1` returns to the parent. The record is the longest
/// suffix of the line that starts with a node and returns to the depth of
/// that first node without ever going above it; any integers before it are
/// header fields and ignored.
pub fn parse_cslogs_line(line: &str, line_no: usize) -> Result<Option<Tree>, TreeError> {
    let mut tokens = Vec::new();
    for tok in line.split_whitespace() {
        let v: i64 = tok.parse().map_err(|_| TreeError::BadToken { line: line_no, token: tok.to_string() })?;
        if v < -1 {
            return Err(TreeError::BadToken { line: line_no, token: tok.to_string() });
        }
        tokens.push(v);
    }
    if tokens.is_empty() {
        return Ok(None);
    }
    // prefix[i] = net depth change of tokens[..i]
    let k = tokens.len();
    let mut prefix = vec![0i64; k + 1];
    for (i, &t) in tokens.iter().enumerate() {
        prefix[i + 1] = prefix[i] + if t >= 0 { 1 } else { -1 };
    }
    let mut suffix_min = vec![i64::MAX; k + 2];
    for i in (1..=k).rev() {
        suffix_min[i] = suffix_min[i + 1].min(prefix[i]);
    }
    // Suffix starting at i is balanced iff tokens[i] opens a node, depth never
    // falls below 1, and ends at exactly 1.
    let start = (0..k).find(|&i| tokens[i] >= 0 && suffix_min[i + 1] > prefix[i] && prefix[k] == prefix[i] + 1);
    let Some(start) = start else {
        let below = (0..k).any(|i| tokens[i] >= 0 && suffix_min[i + 1] <= prefix[i]);
        return Err(if below || tokens[0] < 0 {
            TreeError::PopBelowRoot { line: line_no }
        } else {
            TreeError::Unbalanced { line: line_no }
        });
    };

    let mut labels = Vec::new();
    let mut parents = Vec::new();
    let mut stack: Vec<NodeId> = Vec::new();
    for &t in &tokens[start..] {
        if t >= 0 {
            labels.push(Label::new(&t.to_string())?);
            parents.push(stack.last().copied());
            stack.push(labels.len() - 1);
        } else {
            stack.pop();
        }
    }
    Ok(Some(Tree::from_preorder(labels, parents)))
}

/// Parses a CSLOGS stream, one tree per non-empty line.
pub fn parse_cslogs<R: BufRead>(reader: R) -> Result<Vec<Tree>, TreeError> {
    let mut trees = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| TreeError::Io(e.to_string()))?;
        if let Some(t) = parse_cslogs_line(&line, i + 1)? {
            trees.push(t);
        }
    }
    Ok(trees)
}
