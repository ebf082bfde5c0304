//! Tree decompositions: validation, heuristic construction, binarization,
//! and text formats (PACE-style `.td`, DIMACS-like edge lists).

use std::collections::BTreeSet;
use thiserror::Error;

/// Simple undirected graph: no self-loops, no parallel edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    #[must_use]
    pub fn new(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    /// # Panics
    /// Panics on self-loops or out-of-range endpoints.
    #[must_use]
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v, "self-loop at vertex {u}");
        assert!(u < self.n && v < self.n, "edge ({u},{v}) out of range (n={})", self.n);
        let e = (u.min(v), u.max(v));
        if let Err(pos) = self.edges.binary_search(&e) {
            self.edges.insert(pos, e);
        }
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        let e = (u.min(v), u.max(v));
        if let Ok(pos) = self.edges.binary_search(&e) {
            self.edges.remove(pos);
        }
    }

    /// Toggle edge presence.
    pub fn flip_edge(&mut self, u: usize, v: usize) {
        if self.has_edge(u, v) {
            self.remove_edge(u, v);
        } else {
            self.add_edge(u, v);
        }
    }

    #[must_use]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let e = (u.min(v), u.max(v));
        self.edges.binary_search(&e).is_ok()
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[must_use]
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == v {
                out.push(b);
            } else if b == v {
                out.push(a);
            }
        }
        out.sort_unstable();
        out
    }

    #[must_use]
    pub fn adjacency_sets(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].insert(v);
            adj[v].insert(u);
        }
        adj
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TdError {
    #[error("vertex {0} appears in no bag")]
    UncoveredVertex(usize),
    #[error("edge ({0},{1}) is contained in no bag")]
    UncoveredEdge(usize, usize),
    #[error("bags containing vertex {0} do not form a connected subtree")]
    DisconnectedVertexBags(usize),
    #[error("bag {bag} mentions vertex {vertex} outside the host graph")]
    InvalidVertex { bag: usize, vertex: usize },
    #[error("bag edges do not form a tree over the bags")]
    MalformedTree,
}

#[derive(Debug, Error)]
pub enum TdIoError {
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("missing header line")]
    MissingHeader,
}

/// A tree decomposition of some host graph. Bags are sorted vertex lists;
/// `edges` connect bag indices; `root` is set once the tree has been rooted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
    pub root: Option<usize>,
}

impl TreeDecomposition {
    #[must_use]
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1)
    }

    #[must_use]
    pub fn bag_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Children lists induced by the root (root must be set).
    ///
    /// # Panics
    /// Panics if the decomposition is unrooted.
    #[must_use]
    pub fn children(&self) -> Vec<Vec<usize>> {
        let root = self.root.expect("decomposition is not rooted");
        let adj = self.bag_adjacency();
        let mut children = vec![Vec::new(); self.bags.len()];
        let mut seen = vec![false; self.bags.len()];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(b) = stack.pop() {
            for &c in &adj[b] {
                if !seen[c] {
                    seen[c] = true;
                    children[b].push(c);
                    stack.push(c);
                }
            }
        }
        children
    }

    /// Bag indices in postorder from the root.
    #[must_use]
    pub fn postorder(&self) -> Vec<usize> {
        let root = self.root.expect("decomposition is not rooted");
        let children = self.children();
        let mut order = Vec::with_capacity(self.bags.len());
        let mut stack = vec![(root, false)];
        while let Some((b, expanded)) = stack.pop() {
            if expanded {
                order.push(b);
            } else {
                stack.push((b, true));
                for &c in children[b].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// Check the three decomposition conditions against `g`; returns the width.
    pub fn validate(&self, g: &Graph) -> Result<usize, TdError> {
        if self.bags.is_empty() {
            return if g.n() == 0 {
                Ok(0)
            } else {
                Err(TdError::UncoveredVertex(0))
            };
        }
        if self.edges.len() + 1 != self.bags.len() {
            return Err(TdError::MalformedTree);
        }
        let adj = self.bag_adjacency();
        let mut seen = vec![false; self.bags.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut visited = 1;
        while let Some(b) = stack.pop() {
            for &c in &adj[b] {
                if !seen[c] {
                    seen[c] = true;
                    visited += 1;
                    stack.push(c);
                }
            }
        }
        if visited != self.bags.len() {
            return Err(TdError::MalformedTree);
        }
        let mut bags_of = vec![Vec::new(); g.n()];
        for (bi, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if v >= g.n() {
                    return Err(TdError::InvalidVertex { bag: bi, vertex: v });
                }
                bags_of[v].push(bi);
            }
        }
        for (v, bs) in bags_of.iter().enumerate() {
            if bs.is_empty() {
                return Err(TdError::UncoveredVertex(v));
            }
        }
        for &(u, v) in g.edges() {
            let covered = self
                .bags
                .iter()
                .any(|bag| bag.binary_search(&u).is_ok() && bag.binary_search(&v).is_ok());
            if !covered {
                return Err(TdError::UncoveredEdge(u, v));
            }
        }
        for (v, bs) in bags_of.iter().enumerate() {
            let member: Vec<bool> = {
                let mut m = vec![false; self.bags.len()];
                for &b in bs {
                    m[b] = true;
                }
                m
            };
            let mut seen = vec![false; self.bags.len()];
            let mut stack = vec![bs[0]];
            seen[bs[0]] = true;
            let mut count = 1;
            while let Some(b) = stack.pop() {
                for &c in &adj[b] {
                    if member[c] && !seen[c] {
                        seen[c] = true;
                        count += 1;
                        stack.push(c);
                    }
                }
            }
            if count != bs.len() {
                return Err(TdError::DisconnectedVertexBags(v));
            }
        }
        Ok(self.width())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    MinDegree,
    MinFill,
}

/// Heuristic decomposition via an elimination ordering. Deterministic: ties
/// break toward the lowest vertex index.
#[must_use]
pub fn heuristic_decompose(g: &Graph, strategy: Strategy) -> TreeDecomposition {
    let n = g.n();
    if n == 0 {
        return TreeDecomposition { bags: vec![Vec::new()], edges: Vec::new(), root: Some(0) };
    }
    let mut adj = g.adjacency_sets();
    let mut alive: BTreeSet<usize> = (0..n).collect();
    let mut elim_pos = vec![usize::MAX; n];
    let mut bags: Vec<Vec<usize>> = Vec::with_capacity(n);
    for step in 0..n {
        let v = match strategy {
            Strategy::MinDegree => *alive
                .iter()
                .min_by_key(|&&v| (adj[v].len(), v))
                .expect("alive set nonempty"),
            Strategy::MinFill => *alive
                .iter()
                .min_by_key(|&&v| {
                    let nb: Vec<usize> = adj[v].iter().copied().collect();
                    let mut fill = 0usize;
                    for (i, &a) in nb.iter().enumerate() {
                        for &b in &nb[i + 1..] {
                            if !adj[a].contains(&b) {
                                fill += 1;
                            }
                        }
                    }
                    (fill, v)
                })
                .expect("alive set nonempty"),
        };
        elim_pos[v] = step;
        let mut bag: Vec<usize> = adj[v].iter().copied().collect();
        bag.push(v);
        bag.sort_unstable();
        bags.push(bag);
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        for &a in &nb {
            adj[a].remove(&v);
        }
        adj[v].clear();
        alive.remove(&v);
    }
    // bag of vertex eliminated at step s is bags[s]; link each bag to the bag
    // of its earliest-eliminated remaining neighbor
    let mut order = vec![0usize; n];
    for v in 0..n {
        order[elim_pos[v]] = v;
    }
    let mut edges = Vec::new();
    let mut component_roots = Vec::new();
    for step in 0..n {
        let v = order[step];
        let later: Option<usize> = bags[step]
            .iter()
            .filter(|&&u| u != v)
            .map(|&u| elim_pos[u])
            .min();
        match later {
            Some(parent_step) => edges.push((step, parent_step)),
            None => component_roots.push(step),
        }
    }
    if component_roots.len() > 1 {
        let hub = bags.len();
        bags.push(Vec::new());
        for r in component_roots {
            edges.push((r, hub));
        }
        TreeDecomposition { bags, edges, root: Some(hub) }
    } else {
        TreeDecomposition { bags, edges, root: component_roots.pop() }
    }
}

/// Merge small adjacent bags (width never grows), root the tree at the bag
/// holding the lowest-indexed vertex, and binarize by duplicating bags with
/// more than two children. `tau` tunes how aggressively chains are merged.
#[must_use]
pub fn binarize_and_root(td: &TreeDecomposition, tau: usize) -> TreeDecomposition {
    let cap = td.width() + 1;
    let _ = tau;
    let mut bags: Vec<Option<BTreeSet<usize>>> = td
        .bags
        .iter()
        .map(|b| Some(b.iter().copied().collect()))
        .collect();
    let mut adj: Vec<BTreeSet<usize>> = {
        let mut a = vec![BTreeSet::new(); td.bags.len()];
        for &(x, y) in &td.edges {
            a[x].insert(y);
            a[y].insert(x);
        }
        a
    };
    // contract any tree edge whose union still fits in the original width
    loop {
        let mut contracted = false;
        for a in 0..bags.len() {
            if bags[a].is_none() {
                continue;
            }
            let Some(&b) = adj[a].iter().find(|&&b| {
                let (sa, sb) = (bags[a].as_ref().unwrap(), bags[b].as_ref().unwrap());
                sa.union(sb).count() <= cap.max(1)
            }) else {
                continue;
            };
            let sb = bags[b].take().expect("neighbor bag alive");
            bags[a].as_mut().unwrap().extend(sb);
            let nb: Vec<usize> = adj[b].iter().copied().collect();
            for x in nb {
                adj[x].remove(&b);
                if x != a {
                    adj[x].insert(a);
                    adj[a].insert(x);
                }
            }
            adj[a].remove(&b);
            adj[b].clear();
            contracted = true;
        }
        if !contracted {
            break;
        }
    }
    let remap: Vec<Option<usize>> = {
        let mut r = vec![None; bags.len()];
        let mut next = 0;
        for (i, b) in bags.iter().enumerate() {
            if b.is_some() {
                r[i] = Some(next);
                next += 1;
            }
        }
        r
    };
    let mut new_bags: Vec<Vec<usize>> = bags
        .iter()
        .flatten()
        .map(|s| s.iter().copied().collect())
        .collect();
    let mut new_edges: Vec<(usize, usize)> = Vec::new();
    for (a, nbrs) in adj.iter().enumerate() {
        for &b in nbrs {
            if a < b {
                new_edges.push((remap[a].unwrap(), remap[b].unwrap()));
            }
        }
    }
    // root at the bag containing the lowest-indexed vertex
    let lowest = new_bags
        .iter()
        .flat_map(|b| b.iter().copied())
        .min();
    let root = match lowest {
        Some(v) => new_bags.iter().position(|b| b.contains(&v)).unwrap_or(0),
        None => 0,
    };
    // binarize: a bag with c > 2 children is split into a chain of copies
    let mut children = vec![Vec::new(); new_bags.len()];
    {
        let mut badj = vec![Vec::new(); new_bags.len()];
        for &(a, b) in &new_edges {
            badj[a].push(b);
            badj[b].push(a);
        }
        let mut seen = vec![false; new_bags.len()];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(b) = stack.pop() {
            for &c in &badj[b] {
                if !seen[c] {
                    seen[c] = true;
                    children[b].push(c);
                    stack.push(c);
                }
            }
        }
    }
    let mut final_edges: Vec<(usize, usize)> = Vec::new();
    let mut queue = vec![root];
    while let Some(b) = queue.pop() {
        let kids = children[b].clone();
        if kids.len() <= 2 {
            for &c in &kids {
                final_edges.push((b, c));
                queue.push(c);
            }
            continue;
        }
        final_edges.push((b, kids[0]));
        queue.push(kids[0]);
        let mut host = b;
        for (idx, &c) in kids[1..].iter().enumerate() {
            if idx + 2 == kids.len() {
                final_edges.push((host, c));
                queue.push(c);
            } else {
                let dup = new_bags.len();
                new_bags.push(new_bags[host].clone());
                final_edges.push((host, dup));
                final_edges.push((dup, c));
                queue.push(c);
                host = dup;
            }
        }
    }
    TreeDecomposition { bags: new_bags, edges: final_edges, root: Some(root) }
}

/// Tree decomposition of a circuit's reduction graph: consecutive gate
/// windows become bags along a path. Delegates to the circuit pipeline,
/// which tracks spider lifetimes through its rewrites.
#[must_use]
pub fn circuit_slices(c: &crate::zx::CliffordCircuit) -> TreeDecomposition {
    crate::zx::circuit_slice_decomposition(c)
}

/// Parse the `.td` text format: `s td <bags> <width+1> <n>`, bag lines
/// `b <id> <v...>`, then bag-edge lines, all 1-indexed.
pub fn read_td(text: &str) -> Result<TreeDecomposition, TdIoError> {
    let mut bags: Vec<Vec<usize>> = Vec::new();
    let mut edges = Vec::new();
    let mut declared: Option<usize> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut it = line.split_whitespace();
        let head = it.next().unwrap();
        let parse =
            |tok: &str| tok.parse::<usize>().map_err(|e| TdIoError::Parse(ln + 1, e.to_string()));
        match head {
            "s" => {
                let tag = it.next().ok_or_else(|| {
                    TdIoError::Parse(ln + 1, "expected `s td ...`".into())
                })?;
                if tag != "td" {
                    return Err(TdIoError::Parse(ln + 1, format!("unknown header `{tag}`")));
                }
                let nb = parse(it.next().ok_or_else(|| {
                    TdIoError::Parse(ln + 1, "missing bag count".into())
                })?)?;
                declared = Some(nb);
                bags.resize(nb, Vec::new());
            }
            "b" => {
                if declared.is_none() {
                    return Err(TdIoError::MissingHeader);
                }
                let id = parse(it.next().ok_or_else(|| {
                    TdIoError::Parse(ln + 1, "missing bag id".into())
                })?)?;
                if id == 0 || id > bags.len() {
                    return Err(TdIoError::Parse(ln + 1, format!("bag id {id} out of range")));
                }
                let mut vs = Vec::new();
                for tok in it {
                    let v = parse(tok)?;
                    if v == 0 {
                        return Err(TdIoError::Parse(ln + 1, "vertex ids are 1-indexed".into()));
                    }
                    vs.push(v - 1);
                }
                vs.sort_unstable();
                vs.dedup();
                bags[id - 1] = vs;
            }
            _ => {
                if declared.is_none() {
                    return Err(TdIoError::MissingHeader);
                }
                let a = parse(head)?;
                let b = parse(it.next().ok_or_else(|| {
                    TdIoError::Parse(ln + 1, "missing edge endpoint".into())
                })?)?;
                if a == 0 || b == 0 || a > bags.len() || b > bags.len() {
                    return Err(TdIoError::Parse(ln + 1, format!("edge ({a},{b}) out of range")));
                }
                edges.push((a - 1, b - 1));
            }
        }
    }
    if declared.is_none() {
        return Err(TdIoError::MissingHeader);
    }
    Ok(TreeDecomposition { bags, edges, root: None })
}

#[must_use]
pub fn write_td(td: &TreeDecomposition, n: usize) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "s td {} {} {n}",
        td.bags.len(),
        td.bags.iter().map(Vec::len).max().unwrap_or(0)
    );
    for (i, bag) in td.bags.iter().enumerate() {
        let _ = write!(out, "b {}", i + 1);
        for &v in bag {
            let _ = write!(out, " {}", v + 1);
        }
        out.push('\n');
    }
    for &(a, b) in &td.edges {
        let _ = writeln!(out, "{} {}", a + 1, b + 1);
    }
    out
}

/// Parse the edge-list graph format: `p <n> <m>` then `e <u> <v>` (1-indexed).
pub fn read_graph(text: &str) -> Result<Graph, TdIoError> {
    let mut g: Option<Graph> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut it = line.split_whitespace();
        let head = it.next().unwrap();
        let parse =
            |tok: &str| tok.parse::<usize>().map_err(|e| TdIoError::Parse(ln + 1, e.to_string()));
        match head {
            "p" => {
                let n = parse(it.next().ok_or_else(|| {
                    TdIoError::Parse(ln + 1, "missing vertex count".into())
                })?)?;
                g = Some(Graph::new(n));
            }
            "e" => {
                let g = g.as_mut().ok_or(TdIoError::MissingHeader)?;
                let u = parse(it.next().ok_or_else(|| {
                    TdIoError::Parse(ln + 1, "missing endpoint".into())
                })?)?;
                let v = parse(it.next().ok_or_else(|| {
                    TdIoError::Parse(ln + 1, "missing endpoint".into())
                })?)?;
                if u == 0 || v == 0 || u > g.n() || v > g.n() {
                    return Err(TdIoError::Parse(ln + 1, format!("edge ({u},{v}) out of range")));
                }
                if u == v {
                    return Err(TdIoError::Parse(ln + 1, format!("self-loop at {u}")));
                }
                g.add_edge(u - 1, v - 1);
            }
            _ => return Err(TdIoError::Parse(ln + 1, format!("unknown line `{head}`"))),
        }
    }
    g.ok_or(TdIoError::MissingHeader)
}

#[must_use]
pub fn write_graph(g: &Graph) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "p {} {}", g.n(), g.edges().len());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "e {} {}", u + 1, v + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_decomposition_width_one() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let td = TreeDecomposition {
            bags: vec![vec![0, 1], vec![1, 2], vec![2, 3]],
            edges: vec![(0, 1), (1, 2)],
            root: None,
        };
        assert_eq!(td.validate(&g), Ok(1));
    }

    #[test]
    fn single_bag_always_valid() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (0, 4), (3, 4)]);
        let td = TreeDecomposition {
            bags: vec![vec![0, 1, 2, 3, 4]],
            edges: vec![],
            root: None,
        };
        assert_eq!(td.validate(&g), Ok(4));
    }

    #[test]
    fn uncovered_edge_detected() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let td = TreeDecomposition {
            bags: vec![vec![0, 1], vec![1, 2]],
            edges: vec![(0, 1)],
            root: None,
        };
        assert_eq!(td.validate(&g), Err(TdError::UncoveredEdge(0, 2)));
    }

    #[test]
    fn min_degree_on_tree_gives_width_one() {
        let g = Graph::from_edges(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]);
        let td = heuristic_decompose(&g, Strategy::MinDegree);
        assert_eq!(td.validate(&g), Ok(1));
    }

    #[test]
    fn cycle_gives_width_two() {
        let edges: Vec<(usize, usize)> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
        let g = Graph::from_edges(8, &edges);
        for s in [Strategy::MinDegree, Strategy::MinFill] {
            let td = heuristic_decompose(&g, s);
            assert_eq!(td.validate(&g), Ok(2));
        }
    }

    #[test]
    fn binarize_preserves_validity_and_width() {
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        let td = heuristic_decompose(&g, Strategy::MinDegree);
        let w = td.validate(&g).unwrap();
        let b = binarize_and_root(&td, w);
        assert_eq!(b.validate(&g), Ok(w));
        let children = b.children();
        assert!(children.iter().all(|c| c.len() <= 2));
    }

    #[test]
    fn td_format_roundtrip() {
        let td = TreeDecomposition {
            bags: vec![vec![0, 1], vec![1, 2], vec![2, 3]],
            edges: vec![(0, 1), (1, 2)],
            root: None,
        };
        let text = write_td(&td, 4);
        let back = read_td(&text).unwrap();
        assert_eq!(back.bags, td.bags);
        assert_eq!(back.edges, td.edges);
    }

    #[test]
    fn graph_format_roundtrip() {
        let g = Graph::from_edges(5, &[(0, 3), (1, 2), (2, 4)]);
        let back = read_graph(&write_graph(&g)).unwrap();
        assert_eq!(back, g);
    }
}
