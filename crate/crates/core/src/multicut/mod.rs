//! Colorings of bounded cost that meet terminal requests, and the Steiner
//! Cut and Steiner Multicut solvers built on them.
//!
//! An auxiliary instance asks for `f: V(G) → 0..p` with at most `k`
//! bichromatic edges such that for every request `(i, j)` some vertex of
//! `T_i` gets color `j`.

mod aux;

use thiserror::Error;

use crate::decompose::{decompose, DecomposeError, DecomposeOptions};
use crate::graph::{connected_components, Graph, VertexSet};
use crate::splitters::SplitterError;
use crate::td::TreeDecomposition;

pub(crate) const INF: u32 = u32::MAX;

type EdgeList = Vec<(usize, usize)>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MulticutError {
    #[error("vertex {vertex} is out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("request ({set}, {color}) refers to a missing terminal set or color")]
    BadRequest { set: usize, color: usize },
    #[error("an auxiliary instance needs at least one request")]
    NoRequests,
    #[error("the auxiliary solver needs a connected graph")]
    Disconnected,
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Splitter(#[from] SplitterError),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

/// A normalized auxiliary instance: requests are deduplicated and colors no
/// request mentions are dropped, so every remaining color is requested.
#[derive(Debug, Clone)]
pub struct AuxMulticutInstance {
    graph: Graph,
    k: usize,
    terminals: Vec<Vec<usize>>,
    requests: Vec<(usize, usize)>,
    /// Original id of every remaining color.
    palette: Vec<usize>,
}

impl AuxMulticutInstance {
    pub fn new(
        graph: Graph,
        k: usize,
        p: usize,
        terminals: Vec<Vec<usize>>,
        requests: &[(usize, usize)],
    ) -> Result<Self, MulticutError> {
        let n = graph.n();
        let mut terminals = terminals;
        for set in &mut terminals {
            if let Some(&vertex) = set.iter().find(|&&v| v >= n) {
                return Err(MulticutError::VertexOutOfRange { vertex, n });
            }
            set.sort_unstable();
            set.dedup();
        }
        if let Some(&(set, color)) = requests.iter().find(|&&(i, j)| i >= terminals.len() || j >= p) {
            return Err(MulticutError::BadRequest { set, color });
        }
        if requests.is_empty() {
            return Err(MulticutError::NoRequests);
        }
        if !graph.is_connected() {
            return Err(MulticutError::Disconnected);
        }
        let mut palette: Vec<usize> = requests.iter().map(|&(_, j)| j).collect();
        palette.sort_unstable();
        palette.dedup();
        let mut requests: Vec<(usize, usize)> =
            requests.iter().map(|&(i, j)| (i, palette.binary_search(&j).unwrap())).collect();
        requests.sort_unstable();
        requests.dedup();
        Ok(AuxMulticutInstance { graph, k, terminals, requests, palette })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of colors after normalization.
    pub fn colors(&self) -> usize {
        self.palette.len()
    }

    pub fn terminals(&self) -> &[Vec<usize>] {
        &self.terminals
    }

    /// Requests with normalized colors.
    pub fn requests(&self) -> &[(usize, usize)] {
        &self.requests
    }

    /// Maps a normalized color back to the caller's numbering.
    pub fn original_color(&self, c: usize) -> usize {
        self.palette[c]
    }

    fn trivially_infeasible(&self) -> bool {
        // A connected graph colored with p colors has at least p - 1
        // bichromatic edges.
        self.requests.iter().any(|&(i, _)| self.terminals[i].is_empty()) || self.colors() > self.k + 1
    }

    /// Whether `f` (in original colors) meets every request.
    pub fn is_satisfied_by(&self, f: &[usize]) -> bool {
        self.requests
            .iter()
            .all(|&(i, j)| self.terminals[i].iter().any(|&v| f[v] == self.palette[j]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxSolution {
    pub cost: usize,
    /// Color of every vertex, in the caller's numbering.
    pub coloring: Vec<usize>,
}

/// Number of edges whose endpoints get different colors.
pub fn coloring_cost(g: &Graph, f: &[usize]) -> usize {
    g.edges().iter().filter(|&&(u, v)| f[u] != f[v]).count()
}

/// Cheapest coloring of cost at most `k` meeting every request, if any.
pub fn solve_aux_multicut(inst: &AuxMulticutInstance, opts: &DecomposeOptions) -> Result<Option<AuxSolution>, MulticutError> {
    if inst.trivially_infeasible() {
        return Ok(None);
    }
    let half = DecomposeOptions { delta: opts.delta / 2.0, ..*opts };
    let td = decompose(inst.graph(), inst.k(), &half)?.td;
    solve_aux_on(inst, &td, &half)
}

fn solve_aux_on(
    inst: &AuxMulticutInstance,
    td: &TreeDecomposition,
    opts: &DecomposeOptions,
) -> Result<Option<AuxSolution>, MulticutError> {
    if inst.trivially_infeasible() {
        return Ok(None);
    }
    let Some((value, f)) = aux::solve_with(inst, td, opts)? else {
        return Ok(None);
    };
    let coloring: Vec<usize> = f.iter().map(|&c| inst.original_color(c)).collect();
    let cost = coloring_cost(inst.graph(), &coloring);
    if !inst.is_satisfied_by(&coloring) || cost > value {
        return Err(MulticutError::Inconsistent(format!(
            "recovered coloring costs {cost} against a table value of {value}"
        )));
    }
    Ok(Some(AuxSolution { cost, coloring }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSolution {
    pub size: usize,
    /// Deleted edges, `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
}

fn check_vertices(g: &Graph, vs: &[usize]) -> Result<(), MulticutError> {
    match vs.iter().find(|&&v| v >= g.n()) {
        Some(&vertex) => Err(MulticutError::VertexOutOfRange { vertex, n: g.n() }),
        None => Ok(()),
    }
}

/// One connected component with its local numbering.
struct Part {
    graph: Graph,
    back: Vec<usize>,
    td: TreeDecomposition,
}

impl Part {
    fn new(g: &Graph, comp: &VertexSet, k: usize, opts: &DecomposeOptions) -> Result<Self, MulticutError> {
        let (graph, back) = g.induced_subgraph(comp);
        let td = decompose(&graph, k, opts)?.td;
        Ok(Part { graph, back, td })
    }

    fn local(&self, v: usize) -> usize {
        self.back.binary_search(&v).expect("vertex of this component")
    }

    fn cut_edges(&self, f: &[usize]) -> Vec<(usize, usize)> {
        self.graph
            .edges()
            .iter()
            .filter(|&&(u, v)| f[u] != f[v])
            .map(|&(u, v)| {
                let (a, b) = (self.back[u], self.back[v]);
                (a.min(b), a.max(b))
            })
            .collect()
    }
}

/// Fewest edges, at most `k`, whose deletion leaves at least `p` components
/// containing a terminal.
pub fn solve_steiner_cut(
    g: &Graph,
    terminals: &[usize],
    p: usize,
    k: usize,
    opts: &DecomposeOptions,
) -> Result<Option<CutSolution>, MulticutError> {
    check_vertices(g, terminals)?;
    if p == 0 {
        return Ok(Some(CutSolution { size: 0, edges: Vec::new() }));
    }
    let t_set = g.set_of(terminals.iter().copied());
    let comps: Vec<VertexSet> =
        connected_components(g).into_iter().filter(|c| !c.is_disjoint(&t_set)).collect();
    // Half of δ for the decompositions, half for the aux calls, split evenly.
    let parts = comps.len().max(1) as f64;
    let per_td = DecomposeOptions { delta: opts.delta / 2.0 / parts, ..*opts };
    let per_call = DecomposeOptions { delta: per_td.delta / p.saturating_sub(1).max(1) as f64, ..*opts };
    // best[q]: cheapest way to get q terminal components (q capped at p),
    // with the per-component choices that achieve it.
    let mut best: Vec<Option<(usize, Vec<EdgeList>)>> = vec![None; p + 1];
    best[0] = Some((0, Vec::new()));
    for comp in comps {
        let local_terms: Vec<usize> = comp.intersection(&t_set).iter().collect();
        let part = Part::new(g, &comp, k, &per_td)?;
        let terms: Vec<usize> = local_terms.iter().map(|&v| part.local(v)).collect();
        // options[q] = cheapest cut of this component into q terminal parts.
        let mut options: Vec<(usize, usize, EdgeList)> = vec![(1, 0, Vec::new())];
        for q in 2..=p.min(terms.len()).min(k + 1) {
            let requests: Vec<(usize, usize)> = (0..q).map(|c| (0, c)).collect();
            let inst = AuxMulticutInstance::new(part.graph.clone(), k, q, vec![terms.clone()], &requests)?;
            if let Some(sol) = solve_aux_on(&inst, &part.td, &per_call)? {
                options.push((q, sol.cost, part.cut_edges(&sol.coloring)));
            }
        }
        let mut next = best.clone();
        for (have, entry) in best.iter().enumerate() {
            let Some((cost, chosen)) = entry else { continue };
            for (q, c, edges) in &options {
                let total = cost + c;
                let reach = (have + q).min(p);
                if total <= k && next[reach].as_ref().is_none_or(|(b, _)| total < *b) {
                    let mut picked = chosen.clone();
                    picked.push(edges.clone());
                    next[reach] = Some((total, picked));
                }
            }
        }
        best = next;
    }
    Ok(best[p].take().map(|(size, parts)| {
        let mut edges: Vec<(usize, usize)> = parts.into_iter().flatten().collect();
        edges.sort_unstable();
        CutSolution { size, edges }
    }))
}

/// Sequences of two-color sets `M_1, …, M_t` over at most `p` colors, one per
/// orbit under renaming colors: colors are introduced in increasing order.
fn color_pair_sequences(t: usize, p: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(t: usize, p: usize, used: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for b in 1..(used + 2).min(p) {
            for a in 0..b {
                let canonical = if a >= used { a == used && b == used + 1 } else { b <= used };
                if canonical {
                    cur.push((a, b));
                    rec(t, p, used.max(b + 1), cur, out);
                    cur.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(t, p, 0, &mut Vec::with_capacity(t), &mut out);
    out
}

/// Fewest edges, at most `k`, whose deletion leaves no component containing
/// a whole terminal set.
pub fn solve_steiner_multicut(
    g: &Graph,
    sets: &[Vec<usize>],
    k: usize,
    opts: &DecomposeOptions,
) -> Result<Option<CutSolution>, MulticutError> {
    for set in sets {
        check_vertices(g, set)?;
    }
    let comps = connected_components(g);
    let comp_of = |v: usize| comps.iter().position(|c| c.contains(v)).unwrap();
    // Sets spanning several components are separated already.
    let mut per_comp: Vec<Vec<Vec<usize>>> = vec![Vec::new(); comps.len()];
    for set in sets {
        let mut s = set.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() <= 1 {
            return Ok(None);
        }
        let c = comp_of(s[0]);
        if s.iter().all(|&v| comp_of(v) == c) {
            per_comp[c].push(s);
        }
    }
    let active: Vec<usize> = (0..comps.len()).filter(|&c| !per_comp[c].is_empty()).collect();
    let sequences: Vec<Vec<Vec<(usize, usize)>>> =
        active.iter().map(|&c| color_pair_sequences(per_comp[c].len(), k + 1)).collect();
    // Half of δ for the decompositions, half for the aux calls, split evenly.
    let calls = sequences.iter().map(Vec::len).sum::<usize>().max(1) as f64;
    let per_td = DecomposeOptions { delta: opts.delta / 2.0 / active.len().max(1) as f64, ..*opts };
    let per_call = DecomposeOptions { delta: opts.delta / 2.0 / calls, ..*opts };
    let mut size = 0;
    let mut edges = Vec::new();
    for (&c, seqs) in active.iter().zip(sequences) {
        let part = Part::new(g, &comps[c], k, &per_td)?;
        let terminals: Vec<Vec<usize>> = per_comp[c].iter().map(|s| s.iter().map(|&v| part.local(v)).collect()).collect();
        let mut best: Option<AuxSolution> = None;
        for seq in seqs {
            let colors = seq.iter().map(|&(_, b)| b + 1).max().unwrap_or(0);
            let requests: Vec<(usize, usize)> = seq.iter().enumerate().flat_map(|(i, &(a, b))| [(i, a), (i, b)]).collect();
            let inst = AuxMulticutInstance::new(part.graph.clone(), k, colors, terminals.clone(), &requests)?;
            if let Some(sol) = solve_aux_on(&inst, &part.td, &per_call)? {
                if best.as_ref().is_none_or(|b| sol.cost < b.cost) {
                    best = Some(sol);
                }
            }
        }
        let Some(sol) = best else { return Ok(None) };
        size += sol.cost;
        if size > k {
            return Ok(None);
        }
        edges.extend(part.cut_edges(&sol.coloring));
    }
    edges.sort_unstable();
    Ok(Some(CutSolution { size, edges }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_aux_multicut, brute_steiner_cut, brute_steiner_multicut};
    use crate::splitters::FamilyMode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::new(n, edges.iter().copied()).unwrap()
    }

    fn triangle() -> Graph {
        graph(3, &[(0, 1), (1, 2), (0, 2)])
    }

    fn aux(g: Graph, k: usize, p: usize, t: Vec<Vec<usize>>, req: &[(usize, usize)]) -> Option<usize> {
        let inst = AuxMulticutInstance::new(g, k, p, t, req).unwrap();
        solve_aux_multicut(&inst, &DecomposeOptions::default()).unwrap().map(|s| s.cost)
    }

    #[test]
    fn aux_examples() {
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(aux(p3.clone(), 1, 2, vec![vec![0, 2]], &[(0, 0), (0, 1)]), Some(1));
        assert_eq!(aux(p3.clone(), 0, 1, vec![vec![1]], &[(0, 0)]), Some(0));
        let all = vec![vec![0, 1, 2]];
        assert_eq!(aux(triangle(), 3, 3, all.clone(), &[(0, 0), (0, 1), (0, 2)]), Some(3));
        assert_eq!(aux(triangle(), 2, 3, all, &[(0, 0), (0, 1), (0, 2)]), None);
        // Requesting color 2 only behaves like a single color.
        assert_eq!(aux(p3.clone(), 0, 3, vec![vec![0]], &[(0, 2)]), Some(0));
        assert_eq!(aux(p3, 2, 2, vec![vec![], vec![1]], &[(0, 0), (1, 1)]), None);
    }

    #[test]
    fn aux_rejects_bad_instances() {
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        let bad = |t: Vec<Vec<usize>>, r: &[(usize, usize)], g: &Graph| AuxMulticutInstance::new(g.clone(), 1, 2, t, r).unwrap_err();
        assert_eq!(bad(vec![vec![0]], &[], &p3), MulticutError::NoRequests);
        assert!(matches!(bad(vec![vec![5]], &[(0, 0)], &p3), MulticutError::VertexOutOfRange { .. }));
        assert!(matches!(bad(vec![vec![0]], &[(0, 2)], &p3), MulticutError::BadRequest { .. }));
        assert!(matches!(bad(vec![vec![0]], &[(1, 0)], &p3), MulticutError::BadRequest { .. }));
        assert_eq!(bad(vec![vec![0]], &[(0, 0)], &graph(3, &[(0, 1)])), MulticutError::Disconnected);
    }

    #[test]
    fn aux_coloring_is_returned_in_original_colors() {
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        let inst = AuxMulticutInstance::new(p3, 1, 4, vec![vec![0], vec![2]], &[(0, 3), (1, 1)]).unwrap();
        assert_eq!(inst.colors(), 2);
        let sol = solve_aux_multicut(&inst, &DecomposeOptions::default()).unwrap().unwrap();
        assert_eq!(sol.cost, 1);
        assert_eq!((sol.coloring[0], sol.coloring[2]), (3, 1));
        assert!(inst.is_satisfied_by(&sol.coloring));
    }

    #[test]
    fn steiner_examples() {
        let opts = DecomposeOptions::default();
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        let cut = solve_steiner_cut(&p3, &[0, 2], 2, 1, &opts).unwrap().unwrap();
        assert_eq!(cut.size, 1);
        assert_eq!(solve_steiner_cut(&triangle(), &[0, 1, 2], 3, 3, &opts).unwrap().unwrap().size, 3);
        assert!(solve_steiner_cut(&triangle(), &[0, 1, 2], 3, 2, &opts).unwrap().is_none());
        assert_eq!(solve_steiner_cut(&triangle(), &[1], 1, 0, &opts).unwrap().unwrap().size, 0);
        assert!(solve_steiner_cut(&triangle(), &[], 1, 3, &opts).unwrap().is_none());
        assert!(solve_steiner_cut(&triangle(), &[7], 1, 3, &opts).is_err());

        let mc = solve_steiner_multicut(&p3, &[vec![0, 2]], 1, &opts).unwrap().unwrap();
        assert_eq!(mc.size, 1);
        assert_eq!(mc.edges.len(), 1);
        assert!(solve_steiner_multicut(&p3, &[vec![0, 2], vec![1]], 2, &opts).unwrap().is_none());
        assert_eq!(solve_steiner_multicut(&p3, &[], 0, &opts).unwrap().unwrap().size, 0);
        // A set split across components costs nothing.
        let two = graph(4, &[(0, 1), (2, 3)]);
        assert_eq!(solve_steiner_multicut(&two, &[vec![0, 2]], 0, &opts).unwrap().unwrap().size, 0);
    }

    #[test]
    fn pair_sequences_are_canonical() {
        assert_eq!(color_pair_sequences(1, 5), vec![vec![(0, 1)]]);
        let two = color_pair_sequences(2, 5);
        // Second pair: {0,1}, {0,2}, {1,2}, {2,3}.
        assert_eq!(two.len(), 4);
        assert!(color_pair_sequences(2, 3).iter().all(|s| s.iter().all(|&(_, b)| b < 3)));
        assert_eq!(color_pair_sequences(0, 3), vec![Vec::<(usize, usize)>::new()]);
    }

    fn random_connected(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
        loop {
            let edges: Vec<(usize, usize)> =
                (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.random_bool(p)).collect();
            let g = Graph::new(n, edges).unwrap();
            if g.is_connected() {
                return g;
            }
        }
    }

    type Requests = Vec<(usize, usize)>;

    fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize, Vec<Vec<usize>>, Requests) {
        let k = rng.random_range(0..=4);
        let p = rng.random_range(1..=3);
        let tau = rng.random_range(1..=2);
        let terminals: Vec<Vec<usize>> =
            (0..tau).map(|_| (0..n).filter(|_| rng.random_bool(0.4)).collect()).collect();
        let count = rng.random_range(1..=4);
        let requests: Vec<(usize, usize)> =
            (0..count).map(|_| (rng.random_range(0..tau), rng.random_range(0..p))).collect();
        (k, p, terminals, requests)
    }

    #[test]
    fn aux_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for round in 0..300 {
            let n = rng.random_range(1..=8);
            let g = random_connected(&mut rng, n, 0.4);
            let (k, p, terminals, requests) = random_instance(&mut rng, n);
            let expected = brute_aux_multicut(&g, k, p, &terminals, &requests).unwrap();
            let inst = AuxMulticutInstance::new(g.clone(), k, p, terminals, &requests).unwrap();
            let got = solve_aux_multicut(&inst, &DecomposeOptions { seed: round, ..Default::default() }).unwrap();
            assert_eq!(got.as_ref().map(|s| s.cost), expected, "round {round}");
            if let Some(s) = got {
                assert!(inst.is_satisfied_by(&s.coloring));
                assert_eq!(coloring_cost(&g, &s.coloring), s.cost);
            }
        }
    }

    #[test]
    fn sampled_guesses_agree_on_tiny_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for round in 0..15 {
            let n = rng.random_range(2..=5);
            let g = random_connected(&mut rng, n, 0.5);
            let terminals = vec![(0..n).filter(|_| rng.random_bool(0.5)).collect::<Vec<_>>()];
            let requests = [(0, 0), (0, 1)];
            let expected = brute_aux_multicut(&g, 1, 2, &terminals, &requests).unwrap();
            let inst = AuxMulticutInstance::new(g, 1, 2, terminals, &requests).unwrap();
            let opts = DecomposeOptions { seed: round, mode: FamilyMode::Sampled, ..Default::default() };
            let got = solve_aux_multicut(&inst, &opts).unwrap();
            assert_eq!(got.map(|s| s.cost), expected, "round {round}");
        }
    }

    #[test]
    fn steiner_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for round in 0..150 {
            let n = rng.random_range(2..=9);
            let edges: Vec<(usize, usize)> =
                (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.random_bool(0.35)).take(12).collect();
            let g = Graph::new(n, edges).unwrap();
            let k = rng.random_range(0..=3);
            let opts = DecomposeOptions { seed: round, ..Default::default() };
            let terms: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            let p = rng.random_range(1..=3);
            let got = solve_steiner_cut(&g, &terms, p, k, &opts).unwrap();
            assert_eq!(got.as_ref().map(|s| s.size), brute_steiner_cut(&g, &terms, p, k).unwrap(), "cut round {round}");
            if let Some(s) = got {
                assert_eq!(s.edges.len(), s.size);
            }
            let t = rng.random_range(0..=2);
            let sets: Vec<Vec<usize>> = (0..t)
                .map(|_| {
                    let a = rng.random_range(0..n);
                    let b = rng.random_range(0..n);
                    vec![a, b]
                })
                .collect();
            let got = solve_steiner_multicut(&g, &sets, k, &opts).unwrap();
            assert_eq!(got.as_ref().map(|s| s.size), brute_steiner_multicut(&g, &sets, k).unwrap(), "multicut round {round}");
        }
    }
}
