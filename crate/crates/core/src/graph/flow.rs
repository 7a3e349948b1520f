//! Minimum vertex separations through unit-capacity flow on the split digraph.
//!
//! Vertex `v` becomes `v_in -> v_out` with capacity one; every edge `uv`
//! becomes `u_out -> v_in` and `v_out -> u_in` with unbounded capacity. The
//! source feeds `v_in` for `v ∈ P` and `v_out` drains to the sink for `v ∈ Q`.

use std::collections::VecDeque;

use super::{Graph, GraphError, PathSystem, Separation, VertexSet};

const INF: u32 = u32::MAX / 2;

/// The split digraph of one graph, reusable across many `(P, Q)` queries.
pub struct FlowWorkspace<'g> {
    g: &'g Graph,
    // Arcs in compressed rows: node u owns arcs start[u]..start[u + 1].
    start: Vec<usize>,
    to: Vec<usize>,
    rev: Vec<usize>,
    base: Vec<u32>,
    cap: Vec<u32>,
    source_arc: Vec<usize>,
    sink_arc: Vec<usize>,
    pred: Vec<usize>,
    seen: Vec<bool>,
    queue: VecDeque<usize>,
}

impl<'g> FlowWorkspace<'g> {
    pub fn new(g: &'g Graph) -> Self {
        let n = g.n();
        let nodes = 2 * n + 2;
        let (s, t) = (2 * n, 2 * n + 1);
        let mut arcs: Vec<(usize, usize, u32)> = Vec::with_capacity(n * 3 + 2 * g.m());
        for v in 0..n {
            arcs.push((2 * v, 2 * v + 1, 1));
        }
        for &(u, v) in g.edges() {
            arcs.push((2 * u + 1, 2 * v, INF));
            arcs.push((2 * v + 1, 2 * u, INF));
        }
        for v in 0..n {
            arcs.push((s, 2 * v, 0));
        }
        for v in 0..n {
            arcs.push((2 * v + 1, t, 0));
        }
        let mut degree = vec![0usize; nodes + 1];
        for &(a, b, _) in &arcs {
            degree[a + 1] += 1;
            degree[b + 1] += 1;
        }
        for i in 0..nodes {
            degree[i + 1] += degree[i];
        }
        let start = degree.clone();
        let mut fill = degree;
        let total = start[nodes];
        let mut to = vec![0; total];
        let mut rev = vec![0; total];
        let mut base = vec![0; total];
        let mut forward = Vec::with_capacity(arcs.len());
        for &(a, b, c) in &arcs {
            let i = fill[a];
            let j = fill[b];
            fill[a] += 1;
            fill[b] += 1;
            to[i] = b;
            to[j] = a;
            rev[i] = j;
            rev[j] = i;
            base[i] = c;
            forward.push(i);
        }
        let inner = n + 2 * g.m();
        let source_arc = forward[inner..inner + n].to_vec();
        let sink_arc = forward[inner + n..].to_vec();
        FlowWorkspace {
            g,
            start,
            to,
            rev,
            cap: base.clone(),
            base,
            source_arc,
            sink_arc,
            pred: vec![usize::MAX; nodes],
            seen: vec![false; nodes],
            queue: VecDeque::new(),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.g
    }

    fn augment(&mut self, s: usize, t: usize) -> bool {
        self.seen.iter_mut().for_each(|x| *x = false);
        self.queue.clear();
        self.seen[s] = true;
        self.queue.push_back(s);
        'search: while let Some(u) = self.queue.pop_front() {
            for i in self.start[u]..self.start[u + 1] {
                let v = self.to[i];
                if self.cap[i] > 0 && !self.seen[v] {
                    self.seen[v] = true;
                    self.pred[v] = i;
                    if v == t {
                        break 'search;
                    }
                    self.queue.push_back(v);
                }
            }
        }
        if !self.seen[t] {
            return false;
        }
        let mut v = t;
        while v != s {
            let i = self.pred[v];
            self.cap[i] -= 1;
            self.cap[self.rev[i]] += 1;
            v = self.to[self.rev[i]];
        }
        true
    }

    fn carries_flow(&self, i: usize) -> bool {
        self.base[i] > 0 && self.cap[i] < self.base[i]
    }

    /// See [`min_order_separation`].
    pub fn separate(
        &mut self,
        p: &VertexSet,
        q: &VertexSet,
        cap: usize,
    ) -> Result<Option<(Separation, PathSystem)>, GraphError> {
        let g = self.g;
        g.check_set(p)?;
        g.check_set(q)?;
        let n = g.n();
        let (s, t) = (2 * n, 2 * n + 1);
        for v in 0..n {
            self.base[self.source_arc[v]] = if p.contains(v) { INF } else { 0 };
            self.base[self.sink_arc[v]] = if q.contains(v) { INF } else { 0 };
        }
        self.cap.copy_from_slice(&self.base);

        let mut flow = 0;
        while self.augment(s, t) {
            flow += 1;
            if flow > cap {
                return Ok(None);
            }
        }

        // After the last failed search, `seen` is the residual reach of s.
        let a = VertexSet::from_vertices(n, (0..n).filter(|&v| self.seen[2 * v]));
        let b = VertexSet::from_vertices(n, (0..n).filter(|&v| !self.seen[2 * v + 1]));
        let sep = Separation::new(a, b);
        debug_assert_eq!(sep.order(), flow);

        let separator = sep.separator();
        let mut paths = Vec::with_capacity(flow);
        for v in 0..n {
            if !self.carries_flow(self.source_arc[v]) {
                continue;
            }
            let mut path = Vec::new();
            let mut w = v;
            loop {
                path.push(w);
                let out = 2 * w + 1;
                let next = (self.start[out]..self.start[out + 1])
                    .find(|&i| self.carries_flow(i))
                    .map(|i| self.to[i])
                    .expect("flow is conserved at every split vertex");
                if next == t {
                    break;
                }
                w = next / 2;
            }
            let x = path
                .iter()
                .copied()
                .find(|&u| separator.contains(u))
                .expect("every flow path crosses the minimum cut");
            paths.push((x, path));
        }
        Ok(Some((sep, PathSystem::new(paths))))
    }
}

/// Finds a separation `(A, B)` with `P ⊆ A`, `Q ⊆ B` of minimum order, provided
/// that order is at most `cap`, together with one path per separator vertex.
///
/// Vertices of `P ∩ Q` always end up in the separator with a one-vertex path.
/// Returns `Ok(None)` when every such separation has order above `cap`.
pub fn min_order_separation(
    g: &Graph,
    p: &VertexSet,
    q: &VertexSet,
    cap: usize,
) -> Result<Option<(Separation, PathSystem)>, GraphError> {
    FlowWorkspace::new(g).separate(p, q, cap)
}
