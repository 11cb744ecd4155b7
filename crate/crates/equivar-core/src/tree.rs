//! Leaf-labelled trees, Newick parsing, edge splits and the cherry-peeling
//! schedule that drives the recursive equation assembly.
//!
//! Vertices `0..n` are the leaves in canonical order (sorted labels); interior
//! vertices follow.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    adj: Vec<Vec<usize>>,
    labels: Vec<String>,
}

/// A bipartition `A|B` of the leaves. `edge` is the tree edge inducing it,
/// when there is one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSplit {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub edge: Option<(usize, usize)>,
}

impl EdgeSplit {
    pub fn new(a: Vec<usize>, b: Vec<usize>, n: usize) -> Result<Self> {
        let mut a = a;
        let mut b = b;
        a.sort_unstable();
        b.sort_unstable();
        let all: BTreeSet<usize> = a.iter().chain(&b).copied().collect();
        if all.len() != n || a.len() + b.len() != n || all.iter().any(|&x| x >= n) {
            return Err(Error::InvalidSplit("the two sides must partition the leaves".into()));
        }
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidSplit("both sides must be non-empty".into()));
        }
        Ok(EdgeSplit { a, b, edge: None })
    }

    /// Last leaf of `A`.
    pub fn alpha(&self) -> usize {
        *self.a.last().expect("non-empty side")
    }

    /// First leaf of `B`.
    pub fn beta(&self) -> usize {
        self.b[0]
    }

    /// Slot order putting `A` before `B`.
    pub fn slot_order(&self) -> Vec<usize> {
        self.a.iter().chain(&self.b).copied().collect()
    }

    /// Renders as `"1,2|3,4"` using the given leaf labels.
    pub fn render(&self, labels: &[String]) -> String {
        let side = |s: &[usize]| s.iter().map(|&i| labels[i].as_str()).collect::<Vec<_>>().join(",");
        format!("{}|{}", side(&self.a), side(&self.b))
    }
}

impl Tree {
    /// Builds a tree from an edge list over vertices `0..n_vertices`, where the
    /// degree-1 vertices are the leaves, carrying `labels` keyed by vertex.
    /// Degree-2 interior vertices are suppressed and vertices renumbered to the
    /// canonical layout.
    pub fn from_edges(n_vertices: usize, edges: &[(usize, usize)], labels: &[(usize, String)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n_vertices];
        for &(u, v) in edges {
            if u >= n_vertices || v >= n_vertices || u == v {
                return Err(Error::InvalidTree(format!("bad edge ({u},{v})")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut label_of: Vec<Option<String>> = vec![None; n_vertices];
        for (v, l) in labels {
            label_of[*v] = Some(l.clone());
        }
        build_canonical(adj, label_of, true)
    }

    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v < self.labels.len()
    }

    pub fn interior_vertices(&self) -> core::ops::Range<usize> {
        self.labels.len()..self.adj.len()
    }

    /// All edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.adj.len() {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn num_edges(&self) -> usize {
        self.adj.len() - 1
    }

    pub fn interior_edges(&self) -> Vec<(usize, usize)> {
        self.edges().into_iter().filter(|&(u, v)| !self.is_leaf(u) && !self.is_leaf(v)).collect()
    }

    /// Degrees of the interior vertices, ascending (a multiset).
    pub fn interior_degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.interior_vertices().map(|v| self.adj[v].len()).collect();
        d.sort_unstable();
        d
    }

    pub fn is_claw(&self) -> bool {
        self.adj.len() == self.labels.len() + 1
    }

    /// Vertex used as root when none is given: the first interior vertex.
    pub fn default_root(&self) -> usize {
        self.labels.len()
    }

    /// Edges oriented away from `root`, in depth-first preorder.
    pub fn rooted_edges(&self, root: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        let mut stack = vec![(root, usize::MAX)];
        while let Some((v, parent)) = stack.pop() {
            for &w in self.adj[v].iter().rev() {
                if w != parent {
                    out.push((v, w));
                    stack.push((w, v));
                }
            }
        }
        // Preorder: re-sort by discovery so parents precede children.
        let mut order = Vec::with_capacity(out.len());
        let mut stack = vec![(root, usize::MAX)];
        while let Some((v, parent)) = stack.pop() {
            let mut kids: Vec<usize> = self.adj[v].iter().copied().filter(|&w| w != parent).collect();
            kids.sort_unstable();
            for &w in kids.iter().rev() {
                stack.push((w, v));
            }
            if parent != usize::MAX {
                order.push((parent, v));
            }
        }
        order
    }

    /// Leaves on the `v` side after deleting edge `(u, v)`.
    fn leaves_beyond(&self, u: usize, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(v, u)];
        while let Some((x, from)) = stack.pop() {
            if self.is_leaf(x) {
                out.push(x);
            }
            for &y in &self.adj[x] {
                if y != from {
                    stack.push((y, x));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The split induced by an edge, with leaf 1 on the `A` side.
    pub fn split_of_edge(&self, u: usize, v: usize) -> Result<EdgeSplit> {
        if !self.adj.get(u).is_some_and(|a| a.contains(&v)) {
            return Err(Error::InvalidSplit(format!("({u},{v}) is not an edge")));
        }
        let side_v = self.leaves_beyond(u, v);
        let side_u = self.leaves_beyond(v, u);
        let (a, b) = if side_u.contains(&0) { (side_u, side_v) } else { (side_v, side_u) };
        Ok(EdgeSplit { a, b, edge: Some((u.min(v), u.max(v))) })
    }

    /// Splits of all interior edges (both sides of size ≥ 2).
    pub fn splits(&self) -> Vec<EdgeSplit> {
        self.interior_edges().into_iter().map(|(u, v)| self.split_of_edge(u, v).expect("edge")).collect()
    }

    /// Parses `"1,2|3,4"` against the leaf labels; the edge is attached when
    /// the bipartition is realized by the tree.
    pub fn parse_split(&self, text: &str) -> Result<EdgeSplit> {
        let (left, right) = text.split_once('|').ok_or_else(|| Error::InvalidSplit(format!("{text:?} has no '|'")))?;
        let lookup = |part: &str| -> Result<Vec<usize>> {
            part.split(',')
                .map(|l| {
                    let l = l.trim();
                    self.labels
                        .iter()
                        .position(|x| x == l)
                        .ok_or_else(|| Error::InvalidSplit(format!("unknown leaf label {l:?}")))
                })
                .collect()
        };
        let mut split = EdgeSplit::new(lookup(left)?, lookup(right)?, self.n_leaves())?;
        for s in self.splits() {
            if s.a == split.a || s.a == split.b {
                split.edge = s.edge;
            }
        }
        Ok(split)
    }

    /// Removes leaf `leaf` without suppressing the neighbour it hung from, so
    /// parameters carry over edge for edge. Returns the new tree and the map
    /// from old vertex ids to new ones (`None` for the removed leaf).
    pub fn remove_leaf(&self, leaf: usize) -> Result<(Tree, Vec<Option<usize>>)> {
        if !self.is_leaf(leaf) || self.n_leaves() <= 3 {
            return Err(Error::InvalidTree("can only remove a leaf from a tree with more than 3 leaves".into()));
        }
        let n = self.n_leaves();
        let mut map = vec![None; self.adj.len()];
        for v in 0..self.adj.len() {
            if v != leaf {
                map[v] = Some(if v < leaf { v } else { v - 1 });
            }
        }
        let adj: Vec<Vec<usize>> = (0..self.adj.len())
            .filter(|&v| v != leaf)
            .map(|v| self.adj[v].iter().filter(|&&w| w != leaf).map(|&w| map[w].expect("kept")).collect())
            .collect();
        let labels: Vec<String> = (0..n).filter(|&i| i != leaf).map(|i| self.labels[i].clone()).collect();
        Ok((Tree { adj, labels }, map))
    }

    /// Cherry-peeling schedule; empty for claw trees.
    pub fn peel_schedule(&self) -> PeelSchedule {
        let n = self.n_leaves();
        let mut adj: Vec<BTreeSet<usize>> = self.adj.iter().map(|a| a.iter().copied().collect()).collect();
        let mut alive = vec![true; adj.len()];
        // Slot order of the current tree: (vertex, reference, tie-break key).
        let mut slots: Vec<(usize, LeafRef, usize)> = (0..n).map(|i| (i, LeafRef::Leaf(i), i)).collect();
        let mut steps = Vec::new();
        loop {
            let is_leaf = |v: usize, slots: &[(usize, LeafRef, usize)]| slots.iter().any(|s| s.0 == v);
            let interior: Vec<usize> = (0..adj.len()).filter(|&v| alive[v] && !is_leaf(v, &slots)).collect();
            if interior.len() <= 1 {
                break;
            }
            let mut best: Option<(usize, usize)> = None;
            for &v in &interior {
                let interior_nbrs = adj[v].iter().filter(|&&w| !is_leaf(w, &slots)).count();
                if interior_nbrs != 1 {
                    continue;
                }
                let key = slots.iter().filter(|s| adj[v].contains(&s.0)).map(|s| s.2).max().expect("cherry has leaves");
                if best.is_none_or(|(_, k)| key > k) {
                    best = Some((v, key));
                }
            }
            let (cherry, key) = best.expect("a tree with two interior vertices has a cherry");
            let b: Vec<usize> = (0..slots.len()).filter(|&i| adj[cherry].contains(&slots[i].0)).collect();
            let a: Vec<usize> = (0..slots.len()).filter(|i| !b.contains(i)).collect();
            steps.push(PeelStep { leaves: slots.iter().map(|s| s.1).collect(), a: a.clone(), b: b.clone() });
            for &i in &b {
                let v = slots[i].0;
                alive[v] = false;
                adj[cherry].remove(&v);
                adj[v].clear();
            }
            let mut next: Vec<(usize, LeafRef, usize)> = a.iter().map(|&i| slots[i]).collect();
            next.push((cherry, LeafRef::Placeholder(steps.len() - 1), key));
            slots = next;
        }
        PeelSchedule { steps, residual: slots.iter().map(|s| s.1).collect() }
    }
}

/// A leaf of a tree met during peeling: an original leaf, or the placeholder
/// `L_A` introduced by step `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafRef {
    Leaf(usize),
    Placeholder(usize),
}

/// One peel: the current tree's leaves in slot order and the slot indices
/// of the two sides, `B` being the leaves of a cherry. The reduced tree `T_A`
/// has slot order `A` followed by `L_A`; `T_B` is the claw on `L_B` and `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeelStep {
    pub leaves: Vec<LeafRef>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl PeelStep {
    /// Slot order putting `A` before `B`.
    pub fn slot_order(&self) -> Vec<usize> {
        self.a.iter().chain(&self.b).copied().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeelSchedule {
    pub steps: Vec<PeelStep>,
    /// Leaves of the final claw, in its slot order.
    pub residual: Vec<LeafRef>,
}

impl fmt::Display for Tree {
    /// Newick rendering rooted at the default root.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rec(t: &Tree, v: usize, parent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if t.is_leaf(v) {
                return write!(f, "{}", t.labels[v]);
            }
            write!(f, "(")?;
            let mut first = true;
            for &w in &t.adj[v] {
                if w == parent {
                    continue;
                }
                if !first {
                    write!(f, ",")?;
                }
                first = false;
                rec(t, w, v, f)?;
            }
            write!(f, ")")
        }
        rec(self, self.default_root(), usize::MAX, f)?;
        write!(f, ";")
    }
}

fn label_order(labels: &[String]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..labels.len()).collect();
    let numeric: Option<Vec<i64>> = labels.iter().map(|l| l.parse::<i64>().ok()).collect();
    match numeric {
        Some(nums) => idx.sort_by_key(|&i| nums[i]),
        None => idx.sort_by(|&x, &y| labels[x].cmp(&labels[y])),
    }
    idx
}

fn build_canonical(mut adj: Vec<Vec<usize>>, label_of: Vec<Option<String>>, suppress: bool) -> Result<Tree> {
    let nv = adj.len();
    let mut alive = vec![true; nv];
    // Connectivity and acyclicity.
    let edge_count: usize = adj.iter().map(|a| a.len()).sum::<usize>() / 2;
    if nv == 0 || edge_count + 1 != nv {
        return Err(Error::InvalidTree("not a tree (edge count)".into()));
    }
    let mut seen = vec![false; nv];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidTree("not connected".into()));
    }
    for v in 0..nv {
        let is_leaf = adj[v].len() == 1;
        if is_leaf && label_of[v].is_none() {
            return Err(Error::InvalidTree("unlabelled leaf".into()));
        }
        if !is_leaf && label_of[v].is_some() && adj[v].len() > 1 {
            // Interior labels are ignored.
        }
    }
    if suppress {
        while let Some(v) = (0..nv).find(|&v| alive[v] && adj[v].len() == 2) {
            let (x, y) = (adj[v][0], adj[v][1]);
            adj[x].retain(|&w| w != v);
            adj[y].retain(|&w| w != v);
            adj[x].push(y);
            adj[y].push(x);
            adj[v].clear();
            alive[v] = false;
        }
    }
    let leaves: Vec<usize> = (0..nv).filter(|&v| alive[v] && adj[v].len() == 1).collect();
    let interior: Vec<usize> = (0..nv).filter(|&v| alive[v] && adj[v].len() > 1).collect();
    let leaf_labels: Vec<String> = leaves.iter().map(|&v| label_of[v].clone().expect("checked")).collect();
    let unique: BTreeSet<&String> = leaf_labels.iter().collect();
    if unique.len() != leaf_labels.len() {
        return Err(Error::InvalidTree("duplicate leaf label".into()));
    }
    if leaves.len() < 3 {
        return Err(Error::InvalidTree(format!("need at least 3 leaves, got {}", leaves.len())));
    }
    let order = label_order(&leaf_labels);
    let mut new_id = vec![usize::MAX; nv];
    for (pos, &i) in order.iter().enumerate() {
        new_id[leaves[i]] = pos;
    }
    for (j, &v) in interior.iter().enumerate() {
        new_id[v] = leaves.len() + j;
    }
    let mut new_adj = vec![Vec::new(); leaves.len() + interior.len()];
    for v in 0..nv {
        if !alive[v] {
            continue;
        }
        let mut nb: Vec<usize> = adj[v].iter().map(|&w| new_id[w]).collect();
        nb.sort_unstable();
        new_adj[new_id[v]] = nb;
    }
    let labels = order.iter().map(|&i| leaf_labels[i].clone()).collect();
    Ok(Tree { adj: new_adj, labels })
}

/// Parses a Newick string. Branch lengths and interior labels are accepted
/// and ignored; leaves are renumbered in sorted-label order (numeric when all
/// labels are integers) and degree-2 vertices are suppressed.
pub fn parse_newick(text: &str) -> Result<Tree> {
    let mut p = NewickParser { s: text.as_bytes(), pos: 0, adj: Vec::new(), labels: Vec::new() };
    p.skip_ws();
    let root = p.subtree()?;
    p.skip_ws();
    if p.peek() != Some(b';') {
        return Err(p.err("expected ';'"));
    }
    p.pos += 1;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing characters after ';'"));
    }
    let _ = root;
    let n = p.adj.len();
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|u| p.adj[u].iter().filter(move |&&v| u < v).map(move |&v| (u, v))).collect();
    let mut label_of = vec![None; n];
    for (v, l) in p.labels {
        label_of[v] = Some(l);
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    // A root with a single child is an ordinary leaf only when labelled;
    // otherwise it would be an unlabelled degree-1 vertex.
    build_canonical(adj, label_of, true)
}

struct NewickParser<'a> {
    s: &'a [u8],
    pos: usize,
    adj: Vec<Vec<usize>>,
    labels: Vec<(usize, String)>,
}

impl NewickParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn new_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    fn subtree(&mut self) -> Result<usize> {
        self.skip_ws();
        let v = self.new_vertex();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                let child = self.subtree()?;
                self.adj[v].push(child);
                self.adj[child].push(v);
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected ',' or ')'")),
                }
            }
            self.skip_ws();
            let _interior_label = self.label()?;
        } else {
            let label = self.label()?;
            match label {
                Some(l) => self.labels.push((v, l)),
                None => return Err(self.err("expected a leaf label or '('")),
            }
        }
        self.skip_ws();
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit() || matches!(c, b'.' | b'-' | b'+' | b'e' | b'E'))
            {
                self.pos += 1;
            }
            let text = core::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
            if text.parse::<f64>().is_err() {
                self.pos = start;
                return Err(self.err("malformed branch length"));
            }
        }
        Ok(v)
    }

    fn label(&mut self) -> Result<Option<String>> {
        if self.peek() == Some(b'\'') {
            self.pos += 1;
            let start = self.pos;
            while let Some(c) = self.peek() {
                if c == b'\'' {
                    let l = core::str::from_utf8(&self.s[start..self.pos]).map_err(|_| self.err("invalid UTF-8"))?;
                    self.pos += 1;
                    return Ok(Some(l.to_string()));
                }
                self.pos += 1;
            }
            return Err(self.err("unterminated quoted label"));
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() || matches!(c, b'(' | b')' | b',' | b':' | b';' | b'\'') {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Ok(None);
        }
        let l = core::str::from_utf8(&self.s[start..self.pos]).map_err(|_| self.err("invalid UTF-8"))?;
        Ok(Some(l.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basic_shapes() {
        let t = parse_newick("(1,2,3);").unwrap();
        assert!(t.is_claw());
        assert_eq!(t.interior_degrees(), vec![3]);
        let q = parse_newick("((1,2),(3,4));").unwrap();
        assert_eq!(q.n_leaves(), 4);
        assert_eq!(q.interior_edges().len(), 1);
        assert_eq!(q.splits()[0].render(q.labels()), "1,2|3,4");
        let f = parse_newick("((1,2),3,(4,5));").unwrap();
        assert_eq!(f.interior_degrees(), vec![3, 3, 3]);
        let g = parse_newick("((1,2,3),(4,5,6));").unwrap();
        assert_eq!(g.interior_degrees(), vec![4, 4]);
    }

    #[test]
    fn labels_sorted_numerically_and_branch_lengths_ignored() {
        let t = parse_newick("((10:0.5,2:1e-3)x:0.1,(3,1));").unwrap();
        assert_eq!(t.labels(), &["1", "2", "3", "10"]);
        assert_eq!(t.splits()[0].render(t.labels()), "1,3|2,10");
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_newick("((1,2),(3,4)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_newick("((1,2),(3,1));"), Err(Error::InvalidTree(_))));
        assert!(matches!(parse_newick("(1,2);"), Err(Error::InvalidTree(_))));
    }

    #[test]
    fn peel_caterpillar() {
        let t = parse_newick("((1,2),(3,(4,(5,6))));").unwrap();
        let s = t.peel_schedule();
        assert_eq!(s.steps.len(), 3);
        assert_eq!(s.steps[0].b, vec![4, 5]);
        assert_eq!(s.steps[1].leaves[s.steps[1].b[1]], LeafRef::Placeholder(0));
        assert_eq!(s.residual.len(), 3);
        assert!(parse_newick("(1,2,3,4);").unwrap().peel_schedule().steps.is_empty());
    }
}
