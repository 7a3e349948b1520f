//! Simple undirected graphs and the cut notions used throughout the crate.
//!
//! Vertices are the integers `0..n`. The text formats in [`crate::format`]
//! use 1-based ids and translate at the boundary.

mod flow;
mod set;

pub use flow::{min_order_separation, FlowWorkspace};
pub use set::VertexSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} is out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    adj_sets: Vec<VertexSet>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a simple graph. Self-loops, repeated edges and out-of-range
    /// endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut adj_sets = vec![VertexSet::new(n); n];
        let mut list = Vec::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if adj_sets[u].contains(v) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            adj_sets[u].insert(v);
            adj_sets[v].insert(u);
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        let adj = adj_sets.iter().map(VertexSet::to_vec).collect();
        Ok(Graph { adj, adj_sets, edges: list })
    }

    pub fn empty(n: usize) -> Self {
        Graph::new(n, std::iter::empty()).expect("edgeless graph is valid")
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn neighbor_set(&self, v: usize) -> &VertexSet {
        &self.adj_sets[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj_sets[u].contains(v)
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::new(self.n())
    }

    pub fn set_of(&self, vertices: impl IntoIterator<Item = usize>) -> VertexSet {
        VertexSet::from_vertices(self.n(), vertices)
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n() })
        }
    }

    pub fn check_set(&self, set: &VertexSet) -> Result<(), GraphError> {
        if set.universe() == self.n() {
            return Ok(());
        }
        match set.iter().find(|&v| v >= self.n()) {
            Some(v) => Err(GraphError::VertexOutOfRange { vertex: v, n: self.n() }),
            None => Ok(()),
        }
    }

    /// Open neighbourhood `N(X)`: vertices outside `X` adjacent to `X`.
    pub fn neighborhood(&self, set: &VertexSet) -> VertexSet {
        let mut out = self.empty_set();
        for v in set.iter() {
            out.union_with(&self.adj_sets[v]);
        }
        out.difference_with(set);
        out
    }

    /// Connected components of `G[within]`, each sorted, ordered by their
    /// smallest member.
    pub fn components_within(&self, within: &VertexSet) -> Vec<VertexSet> {
        let mut seen = self.empty_set();
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for start in within.iter() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = self.empty_set();
            seen.insert(start);
            stack.push(start);
            while let Some(v) = stack.pop() {
                comp.insert(v);
                for &w in &self.adj[v] {
                    if within.contains(w) && !seen.contains(w) {
                        seen.insert(w);
                        stack.push(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components_within(&self.vertices()).len() <= 1
    }

    /// `G[set]` relabelled to `0..|set|` in increasing order, together with
    /// the map from new ids back to ids of `self`.
    pub fn induced_subgraph(&self, set: &VertexSet) -> (Graph, Vec<usize>) {
        let back: Vec<usize> = set.to_vec();
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in back.iter().enumerate() {
            local[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|(u, v)| set.contains(*u) && set.contains(*v))
            .map(|&(u, v)| (local[u], local[v]));
        let sub = Graph::new(back.len(), edges).expect("induced subgraph of a simple graph is simple");
        (sub, back)
    }

    /// Number of edges with exactly one endpoint in `side`.
    pub fn edge_cut_order(&self, side: &VertexSet) -> usize {
        self.edges
            .iter()
            .filter(|(u, v)| side.contains(*u) != side.contains(*v))
            .count()
    }
}

/// Partition of `V(G)` into maximal connected sets, ordered by smallest member.
pub fn connected_components(g: &Graph) -> Vec<VertexSet> {
    g.components_within(&g.vertices())
}

/// Number of edges of `g` with exactly one endpoint in `side`.
pub fn edge_cut_order(g: &Graph, side: &VertexSet) -> usize {
    g.edge_cut_order(side)
}

/// A separation `(A, B)`: `A ∪ B = V(G)` and no edge joins `A \ B` to `B \ A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Separation {
    a: VertexSet,
    b: VertexSet,
}

impl Separation {
    /// Wraps the two sides without checking them against a graph; see
    /// [`Separation::is_valid_in`].
    pub fn new(a: VertexSet, b: VertexSet) -> Self {
        Separation { a, b }
    }

    pub fn a(&self) -> &VertexSet {
        &self.a
    }

    pub fn b(&self) -> &VertexSet {
        &self.b
    }

    pub fn separator(&self) -> VertexSet {
        self.a.intersection(&self.b)
    }

    pub fn order(&self) -> usize {
        self.a.intersection_len(&self.b)
    }

    pub fn swapped(&self) -> Separation {
        Separation { a: self.b.clone(), b: self.a.clone() }
    }

    pub fn is_valid_in(&self, g: &Graph) -> bool {
        if self.a.universe() != g.n() || self.b.universe() != g.n() {
            return false;
        }
        if self.a.union(&self.b).len() != g.n() {
            return false;
        }
        let a_only = self.a.difference(&self.b);
        let b_only = self.b.difference(&self.a);
        g.edges().iter().all(|&(u, v)| {
            !(a_only.contains(u) && b_only.contains(v) || a_only.contains(v) && b_only.contains(u))
        })
    }
}

/// A bipartition `(A, B)` of `V(G)`; its order is the number of crossing edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeCut {
    a: VertexSet,
    b: VertexSet,
}

impl EdgeCut {
    pub fn from_side(a: VertexSet) -> Self {
        let b = a.complement();
        EdgeCut { a, b }
    }

    pub fn a(&self) -> &VertexSet {
        &self.a
    }

    pub fn b(&self) -> &VertexSet {
        &self.b
    }

    pub fn order(&self, g: &Graph) -> usize {
        g.edge_cut_order(&self.a)
    }

    pub fn is_balanced(&self) -> bool {
        self.a.len() == self.b.len()
    }
}

/// Vertex-disjoint paths certifying the order of a minimum separation, one
/// per separator vertex `x`, each passing through `x`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathSystem {
    paths: Vec<(usize, Vec<usize>)>,
}

impl PathSystem {
    pub fn new(mut paths: Vec<(usize, Vec<usize>)>) -> Self {
        paths.sort();
        PathSystem { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// `(x, P_x)` pairs ordered by `x`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.paths.iter().map(|(x, p)| (*x, p.as_slice()))
    }

    pub fn path_through(&self, x: usize) -> Option<&[usize]> {
        self.paths.iter().find(|(y, _)| *y == x).map(|(_, p)| p.as_slice())
    }

    /// Checks that the paths are vertex-disjoint walks in `g`, each contains
    /// its own separator vertex, starts in `from` and ends in `to`.
    pub fn is_valid_in(&self, g: &Graph, from: &VertexSet, to: &VertexSet) -> bool {
        let mut used = g.empty_set();
        for (x, path) in &self.paths {
            let (Some(&first), Some(&last)) = (path.first(), path.last()) else {
                return false;
            };
            if !path.contains(x) || !from.contains(first) || !to.contains(last) {
                return false;
            }
            if path.windows(2).any(|w| !g.has_edge(w[0], w[1])) {
                return false;
            }
            for &v in path {
                if used.contains(v) {
                    return false;
                }
                used.insert(v);
            }
        }
        true
    }
}

/// Torso of `S`: the graph on `S` whose edges are those of `G[S]` plus a
/// clique on the attachment `N(D)` of every component `D` of `G - S`.
#[derive(Debug, Clone)]
pub struct Torso {
    /// The torso over local ids `0..|S|`.
    pub graph: Graph,
    /// Local id to vertex of the host graph, increasing.
    pub vertices: Vec<usize>,
}

pub fn torso(g: &Graph, s: &VertexSet) -> Torso {
    let vertices = s.to_vec();
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = i;
    }
    let mut adj = vec![VertexSet::new(vertices.len()); vertices.len()];
    for &(u, v) in g.edges() {
        if s.contains(u) && s.contains(v) {
            adj[local[u]].insert(local[v]);
            adj[local[v]].insert(local[u]);
        }
    }
    for comp in g.components_within(&s.complement()) {
        let att: Vec<usize> = g.neighborhood(&comp).iter().map(|v| local[v]).collect();
        for (i, &u) in att.iter().enumerate() {
            for &v in &att[i + 1..] {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
    }
    let edges: Vec<(usize, usize)> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, nb)| nb.iter().filter(move |&v| v > u).map(move |v| (u, v)))
        .collect();
    let graph = Graph::new(vertices.len(), edges).expect("torso edges are simple");
    Torso { graph, vertices }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(g: &Graph, vs: &[usize]) -> VertexSet {
        g.set_of(vs.iter().copied())
    }

    #[test]
    fn rejects_malformed_edges() {
        assert_eq!(Graph::new(3, [(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(Graph::new(3, [(0, 1), (1, 0)]), Err(GraphError::DuplicateEdge(0, 1)));
        assert_eq!(
            Graph::new(3, [(0, 3)]),
            Err(GraphError::VertexOutOfRange { vertex: 3, n: 3 })
        );
    }

    #[test]
    fn components() {
        assert!(connected_components(&Graph::empty(0)).is_empty());
        let g = Graph::new(4, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let comps = connected_components(&g);
        assert_eq!(comps, vec![set(&g, &[0, 1, 2]), set(&g, &[3])]);
        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(connected_components(&path), vec![path.vertices()]);
    }

    #[test]
    fn cut_orders() {
        let tri = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(edge_cut_order(&tri, &set(&tri, &[0])), 2);
        assert_eq!(edge_cut_order(&tri, &tri.empty_set()), 0);
        let c4 = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert_eq!(edge_cut_order(&c4, &set(&c4, &[0, 2])), 4);
    }

    #[test]
    fn torso_examples() {
        let p = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let t = torso(&p, &p.vertices());
        assert_eq!(t.graph, p);

        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let t = torso(&star, &set(&star, &[1, 2, 3]));
        assert_eq!(t.vertices, vec![1, 2, 3]);
        assert_eq!(t.graph.edges(), &[(0, 1), (0, 2), (1, 2)]);

        let t = torso(&p, &set(&p, &[0, 3]));
        assert_eq!(t.graph.edges(), &[(0, 1)]);
    }

    #[test]
    fn separation_validity() {
        let p = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let sep = Separation::new(set(&p, &[0, 1]), set(&p, &[1, 2]));
        assert!(sep.is_valid_in(&p));
        assert_eq!(sep.order(), 1);
        let bad = Separation::new(set(&p, &[0]), set(&p, &[1, 2]));
        assert!(!bad.is_valid_in(&p));
    }
}
