//! Exhaustive reference answers for small instances.
//!
//! Nothing here calls into the rest of the crate except [`Graph`]; every
//! routine works on plain bitmasks and refuses inputs past its budget.

use thiserror::Error;

use crate::graph::{Graph, VertexSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} is {got}, above the oracle limit {limit}")]
    Budget { what: &'static str, got: u64, limit: u64 },
    #[error("bisection needs an even number of vertices, got {0}")]
    OddVertexCount(usize),
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
}

/// Hard limits; calls past them fail instead of running for hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub unbreakable_vertices: usize,
    pub unbreakable_k: usize,
    pub bisection_vertices: usize,
    pub separation_vertices: usize,
    /// Bound on `p^n` for colorings and on `Σ_{j≤k} C(m, j)` for edge subsets.
    pub enumeration: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            unbreakable_vertices: 14,
            unbreakable_k: 5,
            bisection_vertices: 16,
            separation_vertices: 12,
            enumeration: 1_000_000,
        }
    }
}

fn over(what: &'static str, got: u64, limit: u64) -> Result<(), OracleError> {
    if got > limit {
        Err(OracleError::Budget { what, got, limit })
    } else {
        Ok(())
    }
}

fn adjacency_masks(g: &Graph) -> Vec<u32> {
    (0..g.n()).map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w)).collect()
}

fn to_mask(set: &VertexSet, n: usize) -> Result<u32, OracleError> {
    let mut m = 0u32;
    for v in set.iter() {
        if v >= n {
            return Err(OracleError::VertexOutOfRange(v));
        }
        m |= 1 << v;
    }
    Ok(m)
}

/// Components of the subgraph induced by `within`, as masks.
fn components(adj: &[u32], within: u32) -> Vec<u32> {
    let mut left = within;
    let mut out = Vec::new();
    while left != 0 {
        let mut comp = left & left.wrapping_neg();
        loop {
            let mut grown = comp;
            let mut bits = comp;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                grown |= adj[v] & within;
            }
            if grown == comp {
                break;
            }
            comp = grown;
        }
        out.push(comp);
        left &= !comp;
    }
    out
}

/// True iff no separation `(A, B)` of order at most `k` has more than `q`
/// vertices of `x` on both sides.
pub fn brute_unbreakable(g: &Graph, x: &VertexSet, q: usize, k: usize) -> Result<bool, OracleError> {
    brute_unbreakable_with(g, x, q, k, &OracleBudget::default())
}

pub fn brute_unbreakable_with(
    g: &Graph,
    x: &VertexSet,
    q: usize,
    k: usize,
    budget: &OracleBudget,
) -> Result<bool, OracleError> {
    Ok(brute_breaking_separation(g, x, q, k, budget)?.is_none())
}

/// A separation of order at most `k` with more than `q` vertices of `x` on
/// both sides, as `(A, B)` masks, if one exists.
pub fn brute_breaking_separation(
    g: &Graph,
    x: &VertexSet,
    q: usize,
    k: usize,
    budget: &OracleBudget,
) -> Result<Option<(VertexSet, VertexSet)>, OracleError> {
    let n = g.n();
    over("vertex count", n as u64, budget.unbreakable_vertices as u64)?;
    over("k", k as u64, budget.unbreakable_k as u64)?;
    let xm = to_mask(x, n)?;
    let adj = adjacency_masks(g);
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    for sep in 0..=full {
        if sep.count_ones() as usize > k {
            continue;
        }
        let comps = components(&adj, full & !sep);
        for choice in 0..1u64 << comps.len() {
            let mut a = sep;
            for (i, &c) in comps.iter().enumerate() {
                if choice >> i & 1 == 1 {
                    a |= c;
                }
            }
            let b = sep | (full & !a);
            if (a & xm).count_ones() as usize > q && (b & xm).count_ones() as usize > q {
                let set = |m: u32| VertexSet::from_vertices(n, (0..n).filter(|v| m >> v & 1 == 1));
                return Ok(Some((set(a), set(b))));
            }
        }
    }
    Ok(None)
}

/// Minimum number of edges across a bipartition into equal halves.
pub fn brute_bisection(g: &Graph) -> Result<usize, OracleError> {
    let n = g.n();
    if n % 2 == 1 {
        return Err(OracleError::OddVertexCount(n));
    }
    over("vertex count", n as u64, OracleBudget::default().bisection_vertices as u64)?;
    if n == 0 {
        return Ok(0);
    }
    let mut best = usize::MAX;
    // Vertex 0 is fixed on the first side.
    for rest in 0..1u32 << (n - 1) {
        let side = rest << 1 | 1;
        if side.count_ones() as usize != n / 2 {
            continue;
        }
        let cut = g.edges().iter().filter(|&&(u, v)| (side >> u & 1) != (side >> v & 1)).count();
        best = best.min(cut);
    }
    Ok(best)
}

/// Cheapest coloring `V(G) → 0..p` in which, for every request `(i, j)`,
/// some vertex of `terminals[i]` gets color `j`; the cost is the number of
/// bichromatic edges. `None` if the optimum exceeds `k`.
pub fn brute_aux_multicut(
    g: &Graph,
    k: usize,
    p: usize,
    terminals: &[Vec<usize>],
    requests: &[(usize, usize)],
) -> Result<Option<usize>, OracleError> {
    let n = g.n();
    let count = (p as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    over("coloring count", count, OracleBudget::default().enumeration)?;
    if p == 0 {
        return Ok(None);
    }
    for set in terminals {
        if let Some(&v) = set.iter().find(|&&v| v >= n) {
            return Err(OracleError::VertexOutOfRange(v));
        }
    }
    let mut f = vec![0usize; n];
    let mut best: Option<usize> = None;
    for _ in 0..count {
        let ok = requests.iter().all(|&(i, j)| terminals[i].iter().any(|&v| f[v] == j));
        if ok {
            let cost = g.edges().iter().filter(|&&(u, v)| f[u] != f[v]).count();
            if best.is_none_or(|b| cost < b) {
                best = Some(cost);
            }
        }
        for c in f.iter_mut() {
            *c += 1;
            if *c < p {
                break;
            }
            *c = 0;
        }
    }
    Ok(best.filter(|&b| b <= k))
}

fn edge_subset_count(m: usize, k: usize) -> u64 {
    let mut total: u64 = 0;
    let mut binom: u64 = 1;
    for j in 0..=k.min(m) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul((m - j) as u64) / (j as u64 + 1);
    }
    total
}

/// Smallest number (at most `k`) of edges whose removal satisfies `done`,
/// trying subsets in order of size.
fn smallest_deletion(g: &Graph, k: usize, done: &dyn Fn(&[u32]) -> bool) -> Result<Option<usize>, OracleError> {
    let m = g.m();
    over("edge subset count", edge_subset_count(m, k), OracleBudget::default().enumeration)?;
    let adj = adjacency_masks(g);
    let full: u32 = (1u64 << g.n()).wrapping_sub(1) as u32;
    let mut chosen = Vec::new();
    for size in 0..=k.min(m) {
        if try_subsets(g, &adj, full, size, 0, &mut chosen, done) {
            return Ok(Some(size));
        }
    }
    Ok(None)
}

fn try_subsets(
    g: &Graph,
    adj: &[u32],
    full: u32,
    size: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    done: &dyn Fn(&[u32]) -> bool,
) -> bool {
    if chosen.len() == size {
        let mut cut = adj.to_vec();
        for &e in chosen.iter() {
            let (u, v) = g.edges()[e];
            cut[u] &= !(1 << v);
            cut[v] &= !(1 << u);
        }
        return done(&components(&cut, full));
    }
    for e in from..g.m() {
        chosen.push(e);
        if try_subsets(g, adj, full, size, e + 1, chosen, done) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn terminal_mask(set: &[usize], n: usize) -> Result<u32, OracleError> {
    set.iter().try_fold(0u32, |m, &v| if v < n { Ok(m | 1 << v) } else { Err(OracleError::VertexOutOfRange(v)) })
}

/// Fewest deleted edges (at most `k`) leaving at least `p` components that
/// contain a terminal.
pub fn brute_steiner_cut(g: &Graph, terminals: &[usize], p: usize, k: usize) -> Result<Option<usize>, OracleError> {
    let t = terminal_mask(terminals, g.n())?;
    smallest_deletion(g, k, &|comps| comps.iter().filter(|&&c| c & t != 0).count() >= p)
}

/// Fewest deleted edges (at most `k`) after which no component contains a
/// whole terminal set. Sets with fewer than two vertices can never be split.
pub fn brute_steiner_multicut(g: &Graph, sets: &[Vec<usize>], k: usize) -> Result<Option<usize>, OracleError> {
    let masks: Vec<u32> = sets.iter().map(|s| terminal_mask(s, g.n())).collect::<Result<_, _>>()?;
    smallest_deletion(g, k, &|comps| masks.iter().all(|&t| comps.iter().all(|&c| t & !c != 0)))
}

/// Minimum `|A ∩ B|` over separations with `P ⊆ A` and `Q ⊆ B`.
pub fn brute_min_separation(g: &Graph, p: &VertexSet, q: &VertexSet) -> Result<usize, OracleError> {
    let n = g.n();
    over("vertex count", n as u64, OracleBudget::default().separation_vertices as u64)?;
    let (pm, qm) = (to_mask(p, n)?, to_mask(q, n)?);
    let adj = adjacency_masks(g);
    let full: u32 = (1u64 << n).wrapping_sub(1) as u32;
    let mut best = n;
    for x in 0..=full {
        let size = x.count_ones() as usize;
        if size >= best || pm & qm & !x != 0 {
            continue;
        }
        let clean = components(&adj, full & !x).iter().all(|&c| c & pm == 0 || c & qm == 0);
        if clean {
            best = size;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    fn star() -> Graph {
        Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap()
    }

    #[test]
    fn unbreakable_examples() {
        let k4 = complete(4);
        for i in 0..=3 {
            assert!(brute_unbreakable(&k4, &k4.vertices(), i, i).unwrap());
        }
        let s = star();
        assert!(!brute_unbreakable(&s, &s.vertices(), 1, 1).unwrap());
        assert!(brute_unbreakable(&s, &s.set_of([1]), 1, 3).unwrap());
        assert!(brute_unbreakable(&complete(15), &VertexSet::new(15), 1, 1).is_err());
    }

    #[test]
    fn bisection_examples() {
        let c4 = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert_eq!(brute_bisection(&c4).unwrap(), 2);
        assert_eq!(brute_bisection(&Graph::new(4, [(0, 1), (2, 3)]).unwrap()).unwrap(), 0);
        assert_eq!(brute_bisection(&complete(4)).unwrap(), 4);
        assert!(brute_bisection(&complete(3)).is_err());
    }

    #[test]
    fn aux_examples() {
        let p3 = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let t = vec![vec![0, 2]];
        assert_eq!(brute_aux_multicut(&p3, 1, 2, &t, &[(0, 0), (0, 1)]).unwrap(), Some(1));
        assert_eq!(brute_aux_multicut(&p3, 1, 2, &t, &[(0, 0)]).unwrap(), Some(0));
        let tri = complete(3);
        let t = vec![vec![0, 1, 2]];
        assert_eq!(brute_aux_multicut(&tri, 3, 3, &t, &[(0, 0), (0, 1), (0, 2)]).unwrap(), Some(3));
        assert_eq!(brute_aux_multicut(&tri, 2, 3, &t, &[(0, 0), (0, 1), (0, 2)]).unwrap(), None);
    }

    #[test]
    fn steiner_examples() {
        let e = Graph::new(2, [(0, 1)]).unwrap();
        assert_eq!(brute_steiner_cut(&e, &[0, 1], 2, 1).unwrap(), Some(1));
        let tri = complete(3);
        assert_eq!(brute_steiner_cut(&tri, &[0, 1, 2], 3, 2).unwrap(), None);
        assert_eq!(brute_steiner_cut(&tri, &[0, 1, 2], 3, 3).unwrap(), Some(3));
        assert_eq!(brute_steiner_multicut(&tri, &[], 0).unwrap(), Some(0));
        let p3 = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(brute_steiner_multicut(&p3, &[vec![0, 2]], 1).unwrap(), Some(1));
        assert_eq!(brute_steiner_multicut(&p3, &[vec![1]], 2).unwrap(), None);
    }

    #[test]
    fn separation_examples() {
        let p3 = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(brute_min_separation(&p3, &p3.set_of([0]), &p3.set_of([2])).unwrap(), 1);
        assert_eq!(brute_min_separation(&p3, &p3.set_of([1]), &p3.set_of([1])).unwrap(), 1);
        let k4 = complete(4);
        assert_eq!(brute_min_separation(&k4, &k4.set_of([0]), &k4.set_of([1])).unwrap(), 1);
    }
}
