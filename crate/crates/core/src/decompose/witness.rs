//! Searching one vertex set `S` for a separation of order `ℓ ≤ k` that leaves
//! more than `ℓ` vertices of `S` on both sides.

use std::collections::HashSet;

use crate::graph::{torso, FlowWorkspace, Graph, Separation, Torso, VertexSet};
use crate::splitters::{coloring_family_with, FamilyMode, SeedSequence};

use super::DecomposeError;

/// Parameters of the randomized search.
#[derive(Debug, Clone, Copy)]
pub struct WitnessSearch {
    /// Failure probability allowed per call, split evenly between both cases.
    pub delta: f64,
    pub mode: FamilyMode,
}

impl Default for WitnessSearch {
    fn default() -> Self {
        WitnessSearch { delta: 1e-6, mode: FamilyMode::Auto }
    }
}

/// True iff `sep` is a separation of `g` of order `ℓ ≤ k` with more than `ℓ`
/// vertices of `s` on each side.
pub fn is_violating(g: &Graph, k: usize, s: &VertexSet, sep: &Separation) -> bool {
    let order = sep.order();
    order <= k && sep.is_valid_in(g) && sep.a().intersection_len(s) > order && sep.b().intersection_len(s) > order
}

/// Looks for a separation of order `ℓ ≤ k` with `|A ∩ S| > ℓ` and `|B ∩ S| > ℓ`.
///
/// Every component of `G - S` must attach to at most `k` vertices of `S`.
/// For `k ≥ 2` the search is by color coding over the torso of `S`; `None`
/// is then correct except with probability `search.delta`. Smaller `k` are
/// settled by enumerating all separators of size at most `k`.
pub fn find_witness(
    g: &Graph,
    k: usize,
    s: &VertexSet,
    search: &WitnessSearch,
    seeds: &mut SeedSequence,
) -> Result<Option<Separation>, DecomposeError> {
    g.check_set(s)?;
    for comp in g.components_within(&s.complement()) {
        let attachment = g.neighborhood(&comp).len();
        if attachment > k {
            return Err(DecomposeError::LargeAttachment { attachment, k });
        }
    }
    let seed1 = seeds.next_seed();
    let seed2 = seeds.next_seed();
    if s.len() < 2 {
        return Ok(None);
    }
    if k < 2 {
        return Ok(direct_search(g, k, s));
    }
    let mut finder = Finder { g, k, s, torso: torso(g, s), flows: FlowWorkspace::new(g), tried: HashSet::new() };
    let m = finder.torso.vertices.len();
    let half = search.delta / 2.0;

    let case1 = coloring_family_with(m, 3, &[k + 1, k * k, k + 1], seed1, half, search.mode)?;
    let found = if case1.is_exhaustive() {
        finder.case1_all()?
    } else {
        let mut hit = None;
        for f in case1.iter() {
            hit = finder.case1_coloring(&f)?;
            if hit.is_some() {
                break;
            }
        }
        hit
    };
    if found.is_some() {
        return Ok(found);
    }

    finder.tried.clear();
    let case2 = coloring_family_with(m, 3, &[k, k, k * k * k], seed2, half, search.mode)?;
    if case2.is_exhaustive() {
        return finder.case2_all();
    }
    for f in case2.iter() {
        if let Some(sep) = finder.case2_coloring(&f)? {
            return Ok(Some(sep));
        }
    }
    Ok(None)
}

struct Finder<'a> {
    g: &'a Graph,
    k: usize,
    s: &'a VertexSet,
    torso: Torso,
    flows: FlowWorkspace<'a>,
    tried: HashSet<(VertexSet, VertexSet)>,
}

impl Finder<'_> {
    fn global(&self, local: &VertexSet) -> VertexSet {
        VertexSet::from_vertices(self.g.n(), local.iter().map(|i| self.torso.vertices[i]))
    }

    /// Minimum-order separation between two sets of the torso, kept only if
    /// it is a solution. Repeated queries are skipped.
    fn attempt(&mut self, p: VertexSet, q: VertexSet) -> Result<Option<Separation>, DecomposeError> {
        if !self.tried.insert((p.clone(), q.clone())) {
            return Ok(None);
        }
        let (gp, gq) = (self.global(&p), self.global(&q));
        let Some((sep, _)) = self.flows.separate(&gp, &gq, self.k)? else {
            return Ok(None);
        };
        Ok(is_violating(self.g, self.k, self.s, &sep).then_some(sep))
    }

    fn color_class(&self, f: &[u8], c: u8) -> VertexSet {
        VertexSet::from_vertices(f.len(), (0..f.len()).filter(|&v| f[v] == c))
    }

    /// Large components of colors 1 and 3 are guessed to lie strictly on
    /// opposite sides.
    fn case1_coloring(&mut self, f: &[u8]) -> Result<Option<Separation>, DecomposeError> {
        let h = &self.torso.graph;
        let big = |c| -> Vec<VertexSet> {
            h.components_within(&self.color_class(f, c)).into_iter().filter(|d| d.len() > self.k).collect()
        };
        let (left, right) = (big(0), big(2));
        for a in &left {
            for b in &right {
                if let Some(sep) = self.attempt(a.clone(), b.clone())? {
                    return Ok(Some(sep));
                }
            }
        }
        Ok(None)
    }

    /// A small component `D` of color 1 is guessed to be the whole strict
    /// `A`-side in `S`, its color-2 neighbours the separator part in `S`.
    fn case2_coloring(&mut self, f: &[u8]) -> Result<Option<Separation>, DecomposeError> {
        let ones = self.color_class(f, 0);
        let twos = self.color_class(f, 1);
        for d in self.torso.graph.components_within(&ones) {
            if d.len() > self.k {
                continue;
            }
            let y = self.torso.graph.neighborhood(&d).intersection(&twos);
            if let Some(sep) = self.case2_candidate(&d, y)? {
                return Ok(Some(sep));
            }
        }
        Ok(None)
    }

    fn case2_candidate(&mut self, d: &VertexSet, y: VertexSet) -> Result<Option<Separation>, DecomposeError> {
        let rest = d.complement();
        // Y is forced into the separator, and B ∩ S = S \ D must exceed it.
        if y.len() > self.k || rest.len() <= y.len() {
            return Ok(None);
        }
        self.attempt(d.union(&y), rest)
    }

    // With the exhaustive family every coloring is present, so the candidate
    // pairs are exactly those realizable by some coloring. They are enumerated
    // directly instead of walking all 3^|S| colorings.

    /// Case 1 over all colorings. Whenever a pair of components succeeds, so
    /// does every pair of connected (k+1)-subsets of them, and each such pair
    /// is itself realizable, so these pairs are enough.
    fn case1_all(&mut self) -> Result<Option<Separation>, DecomposeError> {
        let sets = connected_sets(&self.torso.graph, self.k + 1);
        let Some(top) = sets.last() else {
            return Ok(None);
        };
        for (i, a) in top.iter().enumerate() {
            for b in &top[i + 1..] {
                if a.is_disjoint(b) {
                    if let Some(sep) = self.attempt(a.clone(), b.clone())? {
                        return Ok(Some(sep));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Case 2 over all colorings: every connected `D` of at most `k` vertices
    /// with every subset of its torso neighbourhood as the color-2 part.
    fn case2_all(&mut self) -> Result<Option<Separation>, DecomposeError> {
        let h = self.torso.graph.clone();
        for level in connected_sets(&h, self.k) {
            for d in level {
                let nb = h.neighborhood(&d).to_vec();
                for size in 0..=self.k.min(nb.len()) {
                    let mut choices = Vec::new();
                    for_each_combination(&nb, size, &mut |ys| choices.push(h.set_of(ys.iter().copied())));
                    for y in choices {
                        if let Some(sep) = self.case2_candidate(&d, y)? {
                            return Ok(Some(sep));
                        }
                    }
                }
            }
        }
        Ok(None)
    }
}

/// Connected vertex sets of sizes `1..=max`, grouped by size.
pub(crate) fn connected_sets(h: &Graph, max: usize) -> Vec<Vec<VertexSet>> {
    let mut levels: Vec<Vec<VertexSet>> = Vec::new();
    if max == 0 || h.n() == 0 {
        return levels;
    }
    levels.push((0..h.n()).map(|v| VertexSet::from_vertices(h.n(), [v])).collect());
    while levels.len() < max {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for set in levels.last().unwrap() {
            for w in h.neighborhood(set).iter() {
                let mut bigger = set.clone();
                bigger.insert(w);
                if seen.insert(bigger.clone()) {
                    next.push(bigger);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort();
        levels.push(next);
    }
    // Sizes no connected set reaches still get an (empty) level.
    levels.resize(max, Vec::new());
    levels
}

/// Calls `f` on every `size`-subset of `items`, in lexicographic order.
pub(crate) fn for_each_combination(items: &[usize], size: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(items: &[usize], size: usize, from: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == size {
            f(cur);
            return;
        }
        let need = size - cur.len();
        for i in from..=items.len().saturating_sub(need) {
            if items.len() < need {
                break;
            }
            cur.push(items[i]);
            rec(items, size, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(items, size, 0, &mut Vec::with_capacity(size), f);
}

/// Exhaustive search over separators `X` with `|X| ≤ k`: the components of
/// `G - X` are split between the sides by a subset-sum over their `S`-counts.
pub(crate) fn direct_search(g: &Graph, k: usize, s: &VertexSet) -> Option<Separation> {
    let all: Vec<usize> = (0..g.n()).collect();
    for size in 0..=k.min(g.n()) {
        let mut found = None;
        for_each_combination(&all, size, &mut |xs| {
            if found.is_none() {
                found = split_around(g, s, &VertexSet::from_vertices(g.n(), xs.iter().copied()));
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

fn split_around(g: &Graph, s: &VertexSet, x: &VertexSet) -> Option<Separation> {
    let order = x.len();
    let in_x = x.intersection_len(s);
    let comps = g.components_within(&x.complement());
    let counts: Vec<usize> = comps.iter().map(|c| c.intersection_len(s)).collect();
    let total: usize = counts.iter().sum();
    // reach[i][t]: some choice among the first i components has S-count t.
    let mut reach = vec![vec![false; total + 1]; comps.len() + 1];
    reach[0][0] = true;
    for (i, &c) in counts.iter().enumerate() {
        for t in 0..=total {
            if reach[i][t] {
                reach[i + 1][t] = true;
                reach[i + 1][t + c] = true;
            }
        }
    }
    // Prefer the most even split.
    let target = (0..=total)
        .filter(|&t| reach[comps.len()][t] && t + in_x > order && total - t + in_x > order)
        .min_by_key(|&t| (2 * t).abs_diff(total))?;
    let mut a = x.clone();
    let mut t = target;
    for i in (0..comps.len()).rev() {
        if !reach[i][t] {
            a.union_with(&comps[i]);
            t -= counts[i];
        }
    }
    let b = x.union(&a.complement());
    Some(Separation::new(a, b))
}
