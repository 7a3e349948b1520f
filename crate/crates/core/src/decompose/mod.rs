//! Building compact tree decompositions with adhesions of size at most `k`
//! whose bags are `(i, i)`-unbreakable for every `1 ≤ i ≤ k`.
//!
//! Starting from one bag per connected component, a bag that admits a
//! separation of order `ℓ ≤ k` with more than `ℓ` of its vertices on both
//! sides is split by [`refine`]. Each split strictly lowers the
//! [`potential`], so the loop ends; the result is then made compact.

mod refine;
mod witness;

pub use refine::{build_witness, refine, WitnessSeparation};
pub use witness::{find_witness, is_violating, WitnessSearch};
pub(crate) use witness::for_each_combination;

use std::collections::HashSet;

use thiserror::Error;

use crate::graph::{connected_components, Graph, GraphError, VertexSet};
use crate::splitters::{FamilyMode, SeedSequence, SplitterError};
use crate::td::{compactify, TreeDecomposition};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Splitter(#[from] SplitterError),
    #[error("a component outside the bag attaches to {attachment} vertices, more than k = {k}")]
    LargeAttachment { attachment: usize, k: usize },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

/// `(Φ¹, Φ²)`, compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PotentialValue {
    pub phi1: u64,
    pub phi2: u64,
}

/// `Φ¹ = Σ max(0, |β(t)| - 2k - 1)` and `Φ² = Σ (2^min(|β(t)|, 2k+1) - 1)`.
pub fn potential(td: &TreeDecomposition, k: usize) -> PotentialValue {
    let cap = 2 * k + 1;
    let mut out = PotentialValue::default();
    for bag in td.bags() {
        let size = bag.len();
        out.phi1 += size.saturating_sub(cap) as u64;
        out.phi2 += (1u64 << size.min(cap).min(63)) - 1;
    }
    out
}

/// `Φ¹ · 2^(2k+1) · (n+1) + Φ²`, saturating.
pub fn iteration_bound(start: PotentialValue, k: usize, n: usize) -> u128 {
    let scale = 1u128.checked_shl((2 * k + 1) as u32).unwrap_or(u128::MAX);
    (start.phi1 as u128)
        .saturating_mul(scale)
        .saturating_mul(n as u128 + 1)
        .saturating_add(start.phi2 as u128)
}

#[derive(Debug, Clone, Copy)]
pub struct DecomposeOptions {
    pub seed: u64,
    /// Total failure probability spread over all witness searches.
    pub delta: f64,
    pub mode: FamilyMode,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { seed: 0, delta: 1e-3, mode: FamilyMode::Auto }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecomposeStats {
    pub refinements: usize,
    pub witness_searches: usize,
    /// Potential of the whole forest, before the first refinement and after
    /// each one.
    pub potential_trace: Vec<PotentialValue>,
    pub iteration_bound: u128,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub td: TreeDecomposition,
    pub stats: DecomposeStats,
}

/// Compact rooted tree decomposition of `g` with adhesions of size at most `k`
/// and every bag `(i, i)`-unbreakable for `1 ≤ i ≤ k`, up to the splitter
/// failure probability.
pub fn decompose(g: &Graph, k: usize, opts: &DecomposeOptions) -> Result<Decomposition, DecomposeError> {
    let comps = connected_components(g);
    let n = g.n();
    // Each search gets an equal share of δ. The number of searches is not
    // known in advance; (n+1)^2 covers the runs seen at the scales this is
    // used at, and the estimate is what the failure rate is measured against.
    let search = WitnessSearch { delta: opts.delta / ((n + 1) * (n + 1)) as f64, mode: opts.mode };
    let mut seeds = SeedSequence::new(opts.seed);
    let mut stats = DecomposeStats::default();

    let mut parts: Vec<(TreeDecomposition, Vec<usize>, Graph)> = Vec::with_capacity(comps.len());
    for comp in &comps {
        let (sub, back) = g.induced_subgraph(comp);
        parts.push((TreeDecomposition::single_bag(&sub), back, sub));
    }
    let total = |parts: &[(TreeDecomposition, Vec<usize>, Graph)]| {
        parts.iter().fold(PotentialValue::default(), |acc, (td, _, _)| {
            let p = potential(td, k);
            PotentialValue { phi1: acc.phi1 + p.phi1, phi2: acc.phi2 + p.phi2 }
        })
    };
    let start = total(&parts);
    stats.potential_trace.push(start);
    stats.iteration_bound = iteration_bound(start, k, n);

    for i in 0..parts.len() {
        let (sub, mut td) = (parts[i].2.clone(), parts[i].0.clone());
        let mut settled: HashSet<VertexSet> = HashSet::new();
        'scan: loop {
            for t in td.bfs_order() {
                if settled.contains(td.bag(t)) {
                    continue;
                }
                stats.witness_searches += 1;
                match find_witness(&sub, k, td.bag(t), &search, &mut seeds)? {
                    Some(sep) => {
                        let w = build_witness(&sub, k, &td, t, &sep)?;
                        td = refine(&sub, k, &td, &w)?;
                        stats.refinements += 1;
                        parts[i].0 = td.clone();
                        stats.potential_trace.push(total(&parts));
                        continue 'scan;
                    }
                    None => {
                        settled.insert(td.bag(t).clone());
                    }
                }
            }
            break;
        }
        parts[i].0 = compactify(&sub, &td);
    }

    Ok(Decomposition { td: glue(n, &parts), stats })
}

/// Maps component decompositions back to `g` and hangs every component root
/// below the root of the first.
fn glue(n: usize, parts: &[(TreeDecomposition, Vec<usize>, Graph)]) -> TreeDecomposition {
    let mut bags = Vec::new();
    let mut parent = Vec::new();
    let mut first_root = None;
    for (td, back, _) in parts {
        let offset = bags.len();
        for t in 0..td.len() {
            bags.push(VertexSet::from_vertices(n, td.bag(t).iter().map(|v| back[v])));
            parent.push(match td.parent(t) {
                Some(p) => Some(p + offset),
                None => first_root,
            });
        }
        if first_root.is_none() {
            first_root = td.root().map(|r| r + offset);
        }
    }
    TreeDecomposition::new(n, bags, parent).expect("glued forest is a tree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::td::{adhesion_width, check_compact, validate};

    fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    #[test]
    fn potential_examples() {
        let g = Graph::empty(10);
        let td = TreeDecomposition::single_bag(&g);
        assert_eq!(potential(&td, 2), PotentialValue { phi1: 5, phi2: 31 });
        let td = TreeDecomposition::single_bag(&Graph::empty(2));
        assert_eq!(potential(&td, 2), PotentialValue { phi1: 0, phi2: 3 });
        assert_eq!(potential(&TreeDecomposition::empty(0), 2), PotentialValue::default());
        assert!(PotentialValue { phi1: 1, phi2: 0 } > PotentialValue { phi1: 0, phi2: 1000 });
    }

    #[test]
    fn complete_graph_keeps_one_bag() {
        let g = complete(5);
        let out = decompose(&g, 4, &DecomposeOptions::default()).unwrap();
        assert_eq!(out.td.len(), 1);
        assert_eq!(out.td.bag(0), &g.vertices());
        assert_eq!(adhesion_width(&out.td), 0);
        assert_eq!(out.stats.refinements, 0);
    }

    #[test]
    fn path_of_eight() {
        let g = Graph::new(8, (1..8).map(|v| (v - 1, v))).unwrap();
        let out = decompose(&g, 1, &DecomposeOptions::default()).unwrap();
        assert!(validate(&g, &out.td).ok());
        assert!(check_compact(&g, &out.td));
        assert!(adhesion_width(&out.td) <= 1);
        assert!(out.td.max_bag_size() <= 3);
        let trace = &out.stats.potential_trace;
        assert!(trace.windows(2).all(|w| w[1] < w[0]));
        assert!(out.stats.refinements as u128 <= out.stats.iteration_bound);
    }

    #[test]
    fn disconnected_graphs_are_glued() {
        let g = Graph::new(5, [(0, 1), (2, 3), (3, 4)]).unwrap();
        let out = decompose(&g, 2, &DecomposeOptions::default()).unwrap();
        assert!(validate(&g, &out.td).ok());
        assert!(check_compact(&g, &out.td));
        // The path 2-3-4 splits at 3 even for k = 2.
        assert_eq!(out.td.len(), 3);
        let empty = decompose(&Graph::empty(0), 1, &DecomposeOptions::default()).unwrap();
        assert!(empty.td.is_empty());
    }

    #[test]
    fn same_seed_same_output() {
        let g = Graph::new(7, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (5, 6)]).unwrap();
        let opts = DecomposeOptions { seed: 9, ..Default::default() };
        let a = decompose(&g, 2, &opts).unwrap();
        let b = decompose(&g, 2, &opts).unwrap();
        assert_eq!(a.td, b.td);
        assert_eq!(a.stats, b.stats);
    }
}
