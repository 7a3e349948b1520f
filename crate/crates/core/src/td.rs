//! Rooted tree decompositions, validation, cleanup and compactification.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::graph::{Graph, VertexSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TdError {
    #[error("node {node} has parent {parent}, but there are only {len} nodes")]
    ParentOutOfRange { node: usize, parent: usize, len: usize },
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("the parent links of node {0} do not reach the root")]
    Cycle(usize),
    #[error("tree edge {0}-{1} is repeated or a loop")]
    BadEdge(usize, usize),
    #[error("{edges} tree edges do not connect {nodes} nodes into a tree")]
    NotATree { nodes: usize, edges: usize },
    #[error("bag {node} is over a universe of {got} vertices, expected {expected}")]
    Universe { node: usize, got: usize, expected: usize },
}

/// A rooted tree of bags over the vertex universe `0..n`.
///
/// Nodes are `0..len()`. Every structural edit renumbers densely; node ids are
/// not stable across [`cleanup`] or [`compactify`].
#[derive(Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    n: usize,
    bags: Vec<VertexSet>,
    parent: Vec<Option<usize>>,
    root: Option<usize>,
}

impl fmt::Debug for TreeDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("TreeDecomposition");
        d.field("root", &self.root);
        for t in 0..self.len() {
            d.field(&format!("{t}<-{:?}", self.parent[t]), &self.bags[t]);
        }
        d.finish()
    }
}

impl TreeDecomposition {
    /// Builds a decomposition from parent links. Exactly one node has no
    /// parent unless there are no nodes at all.
    pub fn new(n: usize, bags: Vec<VertexSet>, parent: Vec<Option<usize>>) -> Result<Self, TdError> {
        assert_eq!(bags.len(), parent.len(), "one parent link per bag");
        let len = bags.len();
        for (node, bag) in bags.iter().enumerate() {
            if bag.universe() != n {
                return Err(TdError::Universe { node, got: bag.universe(), expected: n });
            }
        }
        for (node, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= len {
                    return Err(TdError::ParentOutOfRange { node, parent: p, len });
                }
            }
        }
        let roots: Vec<usize> = (0..len).filter(|&t| parent[t].is_none()).collect();
        if len > 0 && roots.len() != 1 {
            return Err(TdError::RootCount(roots.len()));
        }
        for start in 0..len {
            let mut t = start;
            let mut steps = 0;
            while let Some(p) = parent[t] {
                t = p;
                steps += 1;
                if steps > len {
                    return Err(TdError::Cycle(start));
                }
            }
        }
        Ok(TreeDecomposition { n, bags, parent, root: roots.first().copied() })
    }

    /// Builds a decomposition from undirected tree edges, rooted at `root`.
    pub fn from_edges(n: usize, bags: Vec<VertexSet>, edges: &[(usize, usize)], root: usize) -> Result<Self, TdError> {
        let len = bags.len();
        if len == 0 {
            return TreeDecomposition::new(n, bags, Vec::new());
        }
        let mut adj = vec![BTreeSet::new(); len];
        for &(a, b) in edges {
            for x in [a, b] {
                if x >= len {
                    return Err(TdError::ParentOutOfRange { node: a.min(b), parent: x, len });
                }
            }
            if a == b || !adj[a].insert(b) {
                return Err(TdError::BadEdge(a, b));
            }
            adj[b].insert(a);
        }
        if edges.len() + 1 != len || root >= len {
            return Err(TdError::NotATree { nodes: len, edges: edges.len() });
        }
        let parent = orient(&adj, root);
        if parent.iter().enumerate().any(|(t, p)| p.is_none() && t != root) {
            return Err(TdError::NotATree { nodes: len, edges: edges.len() });
        }
        TreeDecomposition::new(n, bags, parent)
    }

    /// The one-bag decomposition with bag `V(G)`; empty when `G` has no vertices.
    pub fn single_bag(g: &Graph) -> Self {
        if g.n() == 0 {
            return TreeDecomposition { n: 0, bags: Vec::new(), parent: Vec::new(), root: None };
        }
        TreeDecomposition { n: g.n(), bags: vec![g.vertices()], parent: vec![None], root: Some(0) }
    }

    pub fn empty(n: usize) -> Self {
        TreeDecomposition { n, bags: Vec::new(), parent: Vec::new(), root: None }
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn bag(&self, t: usize) -> &VertexSet {
        &self.bags[t]
    }

    pub fn bags(&self) -> &[VertexSet] {
        &self.bags
    }

    pub fn parent(&self, t: usize) -> Option<usize> {
        self.parent[t]
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(VertexSet::len).max().unwrap_or(0)
    }

    /// Tree edges as `(child, parent)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len()).filter_map(|t| self.parent[t].map(|p| (t, p))).collect()
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for t in 0..self.len() {
            if let Some(p) = self.parent[t] {
                out[p].push(t);
            }
        }
        out
    }

    /// Nodes in breadth-first order from the root, children by increasing id.
    pub fn bfs_order(&self) -> Vec<usize> {
        let children = self.children();
        let mut order = Vec::with_capacity(self.len());
        if let Some(r) = self.root {
            order.push(r);
            let mut i = 0;
            while i < order.len() {
                order.extend_from_slice(&children[order[i]]);
                i += 1;
            }
        }
        order
    }

    /// Every node after all of its descendants.
    pub fn post_order(&self) -> Vec<usize> {
        let mut order = self.bfs_order();
        order.reverse();
        order
    }

    /// `σ(t) = β(t) ∩ β(parent(t))`, empty at the root.
    pub fn adhesion(&self, t: usize) -> VertexSet {
        match self.parent[t] {
            Some(p) => self.bags[t].intersection(&self.bags[p]),
            None => VertexSet::new(self.n),
        }
    }

    /// `γ(t)` for every node: the union of the bags in its subtree.
    pub fn cones(&self) -> Vec<VertexSet> {
        let mut cones = self.bags.clone();
        for t in self.post_order() {
            if let Some(p) = self.parent[t] {
                let c = cones[t].clone();
                cones[p].union_with(&c);
            }
        }
        cones
    }

    pub fn cone(&self, t: usize) -> VertexSet {
        let children = self.children();
        let mut out = VertexSet::new(self.n);
        let mut stack = vec![t];
        while let Some(s) = stack.pop() {
            out.union_with(&self.bags[s]);
            stack.extend_from_slice(&children[s]);
        }
        out
    }

    /// `α(t) = γ(t) \ σ(t)`.
    pub fn interior(&self, t: usize) -> VertexSet {
        self.cone(t).difference(&self.adhesion(t))
    }

    /// `G_t`: the graph on `V(G)` whose edges are those of `G[γ(t)]` not inside `σ(t)`.
    pub fn node_graph(&self, g: &Graph, t: usize) -> Graph {
        let cone = self.cone(t);
        let sigma = self.adhesion(t);
        let edges = g.edges().iter().copied().filter(|&(u, v)| {
            cone.contains(u) && cone.contains(v) && !(sigma.contains(u) && sigma.contains(v))
        });
        Graph::new(g.n(), edges).expect("subgraph of a simple graph")
    }

    /// Nodes of the subtree rooted at `t`, `t` first.
    pub fn subtree(&self, t: usize) -> Vec<usize> {
        let children = self.children();
        let mut out = vec![t];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&children[out[i]]);
            i += 1;
        }
        out
    }

    /// Undirected adjacency of the tree.
    pub fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.len()];
        for (c, p) in self.edges() {
            adj[c].insert(p);
            adj[p].insert(c);
        }
        adj
    }

    /// The same tree rooted at `root`.
    pub fn rerooted(&self, root: usize) -> Self {
        let parent = orient(&self.adjacency(), root);
        TreeDecomposition { n: self.n, bags: self.bags.clone(), parent, root: Some(root) }
    }
}

/// Parent links of the tree `adj` rooted at `root`.
fn orient(adj: &[BTreeSet<usize>], root: usize) -> Vec<Option<usize>> {
    let mut parent = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    parent
}

pub fn adhesion_width(td: &TreeDecomposition) -> usize {
    (0..td.len()).map(|t| td.adhesion(t).len()).max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// A bag mentions a vertex outside the graph.
    VertexOutOfRange,
    /// A vertex is in no bag.
    VertexUncovered,
    /// An edge is contained in no bag.
    EdgeUncovered,
    /// The nodes whose bags hold a vertex do not form a subtree.
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// The vertices involved: one for a vertex, two for an edge.
    pub vertices: Vec<usize>,
    /// Tree nodes involved, if any.
    pub nodes: Vec<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the decomposition axioms: every vertex and every edge is covered
/// by a bag, and the bags holding any one vertex are connected in the tree.
pub fn validate(g: &Graph, td: &TreeDecomposition) -> ValidationReport {
    let mut violations = Vec::new();
    let mut report = |kind, vertices: Vec<usize>, nodes: Vec<usize>, message: String| {
        violations.push(Violation { kind, vertices, nodes, message })
    };
    if td.universe() != g.n() {
        report(
            ViolationKind::VertexOutOfRange,
            Vec::new(),
            Vec::new(),
            format!("decomposition is over {} vertices, graph has {}", td.universe(), g.n()),
        );
        return ValidationReport { violations };
    }
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for t in 0..td.len() {
        for v in td.bag(t).iter() {
            holders[v].push(t);
        }
    }
    let adj = td.adjacency();
    for (v, nodes) in holders.iter().enumerate() {
        if nodes.is_empty() {
            report(ViolationKind::VertexUncovered, vec![v], Vec::new(), format!("vertex {v} is in no bag"));
            continue;
        }
        let mut seen = BTreeSet::from([nodes[0]]);
        let mut stack = vec![nodes[0]];
        while let Some(t) = stack.pop() {
            for &s in &adj[t] {
                if td.bag(s).contains(v) && seen.insert(s) {
                    stack.push(s);
                }
            }
        }
        if seen.len() != nodes.len() {
            let missing = nodes.iter().find(|t| !seen.contains(t)).unwrap();
            report(
                ViolationKind::Disconnected,
                vec![v],
                vec![nodes[0], *missing],
                format!("bags holding vertex {v} are disconnected (nodes {} and {missing})", nodes[0]),
            );
        }
    }
    for &(u, v) in g.edges() {
        if !holders[u].iter().any(|&t| td.bag(t).contains(v)) {
            report(ViolationKind::EdgeUncovered, vec![u, v], Vec::new(), format!("edge {u}-{v} is in no bag"));
        }
    }
    ValidationReport { violations }
}

/// Contracts every tree edge `st` with `β(s) ⊆ β(t)` into `t` until none is
/// left. The root's image stays the root and nodes are renumbered densely,
/// preserving their relative order.
pub fn cleanup(td: &TreeDecomposition) -> TreeDecomposition {
    let Some(mut root) = td.root() else {
        return td.clone();
    };
    let mut adj = td.adjacency();
    let mut alive = vec![true; td.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..td.len() {
            if !alive[s] {
                continue;
            }
            let Some(t) = adj[s].iter().copied().find(|&t| td.bag(s).is_subset(td.bag(t))) else {
                continue;
            };
            let others: Vec<usize> = adj[s].iter().copied().filter(|&x| x != t).collect();
            for x in others {
                adj[x].remove(&s);
                adj[x].insert(t);
                adj[t].insert(x);
            }
            adj[t].remove(&s);
            adj[s].clear();
            alive[s] = false;
            if root == s {
                root = t;
            }
            changed = true;
        }
    }
    let keep: Vec<usize> = (0..td.len()).filter(|&t| alive[t]).collect();
    let mut index = vec![usize::MAX; td.len()];
    for (i, &t) in keep.iter().enumerate() {
        index[t] = i;
    }
    let bags = keep.iter().map(|&t| td.bag(t).clone()).collect();
    let mut edges = Vec::new();
    for &t in &keep {
        for &s in &adj[t] {
            if t < s {
                edges.push((index[t], index[s]));
            }
        }
    }
    TreeDecomposition::from_edges(td.universe(), bags, &edges, index[root]).expect("contraction keeps a tree")
}

/// True iff every node with a nonempty adhesion has a connected interior whose
/// neighbourhood is exactly the adhesion.
pub fn check_compact(g: &Graph, td: &TreeDecomposition) -> bool {
    let cones = td.cones();
    (0..td.len()).all(|t| {
        let sigma = td.adhesion(t);
        if sigma.is_empty() {
            return true;
        }
        let alpha = cones[t].difference(&sigma);
        g.components_within(&alpha).len() == 1 && g.neighborhood(&alpha) == sigma
    })
}

/// A compact decomposition whose bags and adhesions are subsets of bags and
/// adhesions of `td`.
pub fn compactify(g: &Graph, td: &TreeDecomposition) -> TreeDecomposition {
    let mut td = cleanup(td);
    loop {
        strip_adhesions(g, &mut td);
        let mut split = None;
        let cones = td.cones();
        for t in td.bfs_order() {
            let sigma = td.adhesion(t);
            if sigma.is_empty() {
                continue;
            }
            let comps = g.components_within(&cones[t].difference(&sigma));
            if comps.len() > 1 {
                split = Some((t, sigma, comps.into_iter().next().unwrap(), cones[t].clone()));
                break;
            }
        }
        let Some((t, sigma, first, cone)) = split else {
            return cleanup(&td);
        };
        let keep = first.union(&sigma);
        let rest = cone.difference(&first);
        td = split_subtree(&td, t, &keep, &rest);
        td = cleanup(&td);
    }
}

/// Removes `σ(t) \ N(α(t))` from the bags of `t`'s subtree, for every `t`,
/// until nothing changes.
fn strip_adhesions(g: &Graph, td: &mut TreeDecomposition) {
    loop {
        let cones = td.cones();
        let mut hit = None;
        for t in td.bfs_order() {
            let sigma = td.adhesion(t);
            let alpha = cones[t].difference(&sigma);
            let extra = sigma.difference(&g.neighborhood(&alpha));
            if !extra.is_empty() {
                hit = Some((t, extra));
                break;
            }
        }
        let Some((t, extra)) = hit else {
            return;
        };
        for s in td.subtree(t) {
            td.bags[s].difference_with(&extra);
        }
    }
}

/// Replaces the subtree at `t` by two copies hanging from the same parent:
/// the original with bags cut down to `keep`, and a new one cut down to `rest`.
fn split_subtree(td: &TreeDecomposition, t: usize, keep: &VertexSet, rest: &VertexSet) -> TreeDecomposition {
    let nodes = td.subtree(t);
    let mut bags = td.bags.clone();
    let mut parent = td.parent.clone();
    let base = bags.len();
    let mut copy_of = vec![usize::MAX; td.len()];
    for (i, &s) in nodes.iter().enumerate() {
        copy_of[s] = base + i;
    }
    for &s in &nodes {
        bags.push(td.bag(s).intersection(rest));
        parent.push(if s == t { td.parent(t) } else { td.parent(s).map(|p| copy_of[p]) });
        bags[s].intersect_with(keep);
    }
    TreeDecomposition::new(td.universe(), bags, parent).expect("copying a subtree keeps a tree")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bags(n: usize, sets: &[&[usize]]) -> Vec<VertexSet> {
        sets.iter().map(|s| VertexSet::from_vertices(n, s.iter().copied())).collect()
    }

    fn path_td(n: usize, sets: &[&[usize]]) -> TreeDecomposition {
        let parent = (0..sets.len()).map(|i| i.checked_sub(1)).collect();
        TreeDecomposition::new(n, bags(n, sets), parent).unwrap()
    }

    #[test]
    fn structure_errors() {
        let b = bags(2, &[&[0], &[1]]);
        assert_eq!(TreeDecomposition::new(2, b.clone(), vec![None, None]), Err(TdError::RootCount(2)));
        assert_eq!(TreeDecomposition::new(2, b.clone(), vec![Some(1), Some(0)]), Err(TdError::RootCount(0)));
        assert!(TreeDecomposition::from_edges(2, b, &[], 0).is_err());
    }

    #[test]
    fn validation() {
        let tri = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(validate(&tri, &TreeDecomposition::single_bag(&tri)).ok());
        let report = validate(&tri, &path_td(3, &[&[0, 1], &[1, 2]]));
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::EdgeUncovered);

        let p = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let report = validate(&p, &path_td(3, &[&[0, 1], &[1, 2], &[0]]));
        assert_eq!(report.violations[0].kind, ViolationKind::Disconnected);
        let report = validate(&p, &path_td(3, &[&[0, 1]]));
        assert!(report.violations.iter().any(|v| v.kind == ViolationKind::VertexUncovered));
    }

    #[test]
    fn cleanup_examples() {
        let td = cleanup(&path_td(3, &[&[0, 1], &[1], &[1, 2]]));
        assert_eq!(td.len(), 2);
        assert_eq!(td.bags(), &bags(3, &[&[0, 1], &[1, 2]])[..]);

        let clean = path_td(3, &[&[0, 1], &[1, 2]]);
        assert_eq!(cleanup(&clean), clean);

        let chain = path_td(2, &[&[0, 1], &[0, 1], &[0, 1], &[0, 1]]);
        assert_eq!(cleanup(&chain).len(), 1);
    }

    #[test]
    fn cleanup_keeps_root_image() {
        // The root's bag is contained in its child, so the child takes over.
        let td = path_td(3, &[&[1], &[0, 1], &[1, 2]]);
        let out = cleanup(&td);
        assert_eq!(out.len(), 2);
        assert_eq!(out.bag(out.root().unwrap()), &VertexSet::from_vertices(3, [0, 1]));
    }

    #[test]
    fn widths() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(adhesion_width(&TreeDecomposition::single_bag(&g)), 0);
        assert_eq!(adhesion_width(&path_td(3, &[&[0, 1], &[1, 2]])), 1);
    }

    #[test]
    fn derived_sets() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (1, 3)]).unwrap();
        let td = path_td(4, &[&[0, 1], &[1, 2, 3]]);
        assert_eq!(td.adhesion(1).to_vec(), vec![1]);
        assert_eq!(td.interior(1).to_vec(), vec![2, 3]);
        assert_eq!(td.cone(0).to_vec(), vec![0, 1, 2, 3]);
        let gt = td.node_graph(&g, 1);
        assert_eq!(gt.edges(), &[(1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn compactify_strips_unneeded_adhesion_vertices() {
        // Vertex 0 is in the child's adhesion but has no neighbour in its interior.
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let td = path_td(4, &[&[0, 1, 2], &[0, 2, 3]]);
        assert!(validate(&g, &td).ok());
        assert!(!check_compact(&g, &td));
        let out = compactify(&g, &td);
        assert!(validate(&g, &out).ok());
        assert!(check_compact(&g, &out));
        let child = (0..out.len()).find(|&t| out.parent(t).is_some()).unwrap();
        assert!(!out.bag(child).contains(0));
    }

    #[test]
    fn compactify_splits_disconnected_interiors() {
        // Star around 0; the child holds two leaves that only meet through 0.
        let g = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let td = path_td(4, &[&[0, 1], &[0, 2, 3]]);
        assert!(validate(&g, &td).ok());
        assert!(!check_compact(&g, &td));
        let out = compactify(&g, &td);
        assert!(validate(&g, &out).ok());
        assert!(check_compact(&g, &out));
        assert_eq!(out.len(), 3);
        assert!(out.bags().iter().all(|b| td.bags().iter().any(|c| b.is_subset(c))));
        assert!(adhesion_width(&out) <= adhesion_width(&td));
    }

    #[test]
    fn single_bag_is_compact() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let td = TreeDecomposition::single_bag(&g);
        assert!(check_compact(&g, &td));
        assert_eq!(compactify(&g, &td), td);
    }
}
