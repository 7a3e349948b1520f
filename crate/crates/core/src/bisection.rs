//! Minimum bisection of order at most `k` by dynamic programming over an
//! unbreakable decomposition.
//!
//! For node `t`, `M[t, A^σ, n°]` is the cheapest cut of `G_t` putting exactly
//! `A^σ` of the adhesion and `n°` interior vertices on the `A` side, with at
//! most `k` bag vertices there. A node's cell is computed from small "lucky"
//! sets `S ⊆ β(t)`: components of `S` in the graph that joins every pair of
//! vertices sharing a child adhesion or an edge are taken or left whole, and a
//! knapsack over them picks how many interior vertices every child supplies.

use thiserror::Error;

use crate::decompose::{decompose, for_each_combination, DecomposeError, DecomposeOptions};
use crate::graph::{EdgeCut, Graph, VertexSet};
use crate::splitters::{sample_count, subset_family_with, FamilyMode, SeedSequence, SplitterError, EXHAUSTIVE_LIMIT};
use crate::td::TreeDecomposition;

/// Table value for "no cut of order at most `k`".
pub const INF: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BisectionError {
    #[error("bisection needs an even number of vertices, got {0}")]
    OddVertexCount(usize),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Splitter(#[from] SplitterError),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisectionSolution {
    pub order: usize,
    pub cut: EdgeCut,
}

/// `M[t, ·, ·]`; `A^σ` is a bitmask over the sorted adhesion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisectionTable {
    sigma: Vec<usize>,
    alpha: usize,
    values: Vec<u32>,
    /// The candidate set that produced each finite cell.
    witness: Vec<Option<Vec<usize>>>,
}

impl BisectionTable {
    fn new(sigma: Vec<usize>, alpha: usize) -> Self {
        let cells = (1usize << sigma.len()) * (alpha + 1);
        BisectionTable { sigma, alpha, values: vec![INF; cells], witness: vec![None; cells] }
    }

    fn index(&self, mask: usize, n: usize) -> usize {
        mask * (self.alpha + 1) + n
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn get(&self, mask: usize, n: usize) -> u32 {
        self.values[self.index(mask, n)]
    }

    /// `A^σ` as a vertex set.
    pub fn side_of(&self, mask: usize) -> Vec<usize> {
        (0..self.sigma.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.sigma[i]).collect()
    }
}

/// `M'[t, A^σ, n°] = min(M[t, A^σ, n°], M[t, σ \ A^σ, |α| - n°])`, remembering
/// which of the two won.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetrizedTable {
    sigma: Vec<usize>,
    alpha: usize,
    values: Vec<u32>,
    flipped: Vec<bool>,
}

impl SymmetrizedTable {
    pub fn get(&self, mask: usize, n: usize) -> u32 {
        self.values[mask * (self.alpha + 1) + n]
    }

    pub fn is_flipped(&self, mask: usize, n: usize) -> bool {
        self.flipped[mask * (self.alpha + 1) + n]
    }
}

pub fn symmetrize(table: &BisectionTable) -> SymmetrizedTable {
    let full = (1usize << table.sigma.len()) - 1;
    let mut values = table.values.clone();
    let mut flipped = vec![false; values.len()];
    for mask in 0..=full {
        for n in 0..=table.alpha {
            let other = table.get(full ^ mask, table.alpha - n);
            let i = table.index(mask, n);
            if other < values[i] {
                values[i] = other;
                flipped[i] = true;
            }
        }
    }
    SymmetrizedTable { sigma: table.sigma.clone(), alpha: table.alpha, values, flipped }
}

#[derive(Debug, Clone)]
enum Kind {
    Child(usize),
    Edge,
}

#[derive(Debug, Clone)]
struct Constraint {
    x: Vec<usize>,
    n: usize,
    kind: Kind,
}

impl Constraint {
    fn value(&self, syms: &[Option<SymmetrizedTable>], mask: usize, n: usize) -> u32 {
        match self.kind {
            Kind::Child(s) => syms[s].as_ref().expect("children come first").get(mask, n),
            Kind::Edge => match (n, mask) {
                (0, 0) | (0, 3) => 0,
                (0, _) => 1,
                _ => INF,
            },
        }
    }

    fn mask_in(&self, in_s: &[bool]) -> usize {
        self.x.iter().enumerate().filter(|&(_, &v)| in_s[v]).fold(0, |m, (i, _)| m | 1 << i)
    }
}

/// Per-node data shared by table computation and recovery.
#[derive(Debug, Clone)]
struct Node {
    bag: Vec<usize>,
    sigma: Vec<usize>,
    alpha: usize,
    constraints: Vec<Constraint>,
}

fn build_node(g: &Graph, td: &TreeDecomposition, cones: &[VertexSet], children: &[usize], t: usize) -> Node {
    let bag_set = td.bag(t);
    let sigma_set = td.adhesion(t);
    let mut constraints = Vec::new();
    for &s in children {
        let x = td.adhesion(s).to_vec();
        let n = cones[s].len() - x.len();
        constraints.push(Constraint { x, n, kind: Kind::Child(s) });
    }
    for &(u, v) in g.edges() {
        if bag_set.contains(u) && bag_set.contains(v) && !(sigma_set.contains(u) && sigma_set.contains(v)) {
            constraints.push(Constraint { x: vec![u, v], n: 0, kind: Kind::Edge });
        }
    }
    Node {
        bag: bag_set.to_vec(),
        sigma: sigma_set.to_vec(),
        alpha: cones[t].len() - sigma_set.len(),
        constraints,
    }
}

/// `Q[size•][n•]`, with `size• ≤ k` counting the chosen bag vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Grid {
    width: usize,
    cells: Vec<u32>,
}

impl Grid {
    fn new(k: usize, alpha: usize) -> Self {
        Grid { width: alpha + 1, cells: vec![INF; (k + 1) * (alpha + 1)] }
    }

    fn at(&self, size: usize, n: usize) -> u32 {
        self.cells[size * self.width + n]
    }

    fn sizes(&self) -> usize {
        self.cells.len() / self.width
    }
}

fn add(a: u32, b: u32, k: usize) -> u32 {
    if a == INF || b == INF {
        return INF;
    }
    let s = a + b;
    if s as usize > k {
        INF
    } else {
        s
    }
}

struct Step {
    comp: Option<Vec<usize>>,
    cons: Vec<usize>,
    masks: Vec<usize>,
    /// `[shifted, after Γ_1, …]`, empty when the component is left out.
    taken: Vec<Grid>,
    /// `[before, after Γ_1, …]`, empty when the component must be taken.
    skipped: Vec<Grid>,
}

struct Knapsack {
    last: Grid,
    steps: Vec<Step>,
}

/// Bag vertices taken and the balance chosen for every constraint.
struct Choice {
    taken: Vec<usize>,
    balance: Vec<usize>,
}

struct Solver<'a> {
    k: usize,
    nodes: Vec<Node>,
    syms: Vec<Option<SymmetrizedTable>>,
    tables: Vec<Option<BisectionTable>>,
    in_s: Vec<bool>,
    cones: &'a [VertexSet],
}

impl Solver<'_> {
    fn convolve(&self, grid: &Grid, c: &Constraint, mask: usize) -> Grid {
        let k = self.k;
        let mut out = Grid { width: grid.width, cells: vec![INF; grid.cells.len()] };
        let row: Vec<u32> = (0..=c.n).map(|n| c.value(&self.syms, mask, n)).collect();
        for size in 0..grid.sizes() {
            for nb in 0..grid.width {
                let here = grid.at(size, nb);
                if here == INF {
                    continue;
                }
                for (n, &m) in row.iter().enumerate() {
                    if nb + n >= grid.width {
                        break;
                    }
                    let v = add(here, m, k);
                    let cell = &mut out.cells[size * grid.width + nb + n];
                    if v < *cell {
                        *cell = v;
                    }
                }
            }
        }
        out
    }

    /// Runs the knapsack for node `t` under the assumption that `s` is lucky.
    fn knapsack(&mut self, t: usize, s: &[usize], record: bool) -> Knapsack {
        let node = &self.nodes[t];
        let k = self.k;
        for &v in s {
            self.in_s[v] = true;
        }
        // Components of H[S]: vertices of S sharing some X_Γ are joined.
        let mut parent: Vec<usize> = (0..s.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let pos = |v: usize| s.binary_search(&v).ok();
        for c in &node.constraints {
            let inside: Vec<usize> = c.x.iter().filter_map(|&v| pos(v)).collect();
            for w in inside.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[a.max(b)] = a.min(b);
            }
        }
        let roots: Vec<usize> = (0..s.len()).map(|i| find(&mut parent, i)).collect();
        let mut comp_ids: Vec<usize> = roots.clone();
        comp_ids.sort_unstable();
        comp_ids.dedup();
        let comps: Vec<Vec<usize>> = comp_ids
            .iter()
            .map(|&r| (0..s.len()).filter(|&i| roots[i] == r).map(|i| s[i]).collect())
            .collect();
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); comps.len() + 1];
        for (a, c) in node.constraints.iter().enumerate() {
            let hit = c.x.iter().find_map(|&v| pos(v));
            let group = match hit {
                Some(i) => 1 + comp_ids.binary_search(&roots[i]).unwrap(),
                None => 0,
            };
            groups[group].push(a);
        }

        let mut q = Grid::new(k, node.alpha);
        q.cells[0] = 0;
        let mut steps = Vec::new();
        for (g_idx, cons) in groups.into_iter().enumerate() {
            let node = &self.nodes[t];
            let comp = (g_idx > 0).then(|| comps[g_idx - 1].clone());
            let masks: Vec<usize> = cons.iter().map(|&a| node.constraints[a].mask_in(&self.in_s)).collect();
            let must_take = comp.as_ref().is_some_and(|c| c.iter().any(|v| node.sigma.binary_search(v).is_ok()));
            let mut taken = Vec::new();
            if let Some(c) = &comp {
                let outside = c.iter().filter(|v| node.sigma.binary_search(v).is_err()).count();
                let mut shifted = Grid::new(k, node.alpha);
                for size in 0..q.sizes() {
                    for nb in 0..q.width {
                        let (ns, nn) = (size + c.len(), nb + outside);
                        if ns < q.sizes() && nn < q.width {
                            shifted.cells[ns * q.width + nn] = q.at(size, nb);
                        }
                    }
                }
                taken.push(shifted);
                for (&a, &m) in cons.iter().zip(&masks) {
                    let next = self.convolve(taken.last().unwrap(), &self.nodes[t].constraints[a], m);
                    taken.push(next);
                }
            }
            let mut skipped = Vec::new();
            if !must_take {
                skipped.push(q.clone());
                for &a in &cons {
                    let next = self.convolve(skipped.last().unwrap(), &self.nodes[t].constraints[a], 0);
                    skipped.push(next);
                }
            }
            let mut merged = Grid::new(k, self.nodes[t].alpha);
            for (i, cell) in merged.cells.iter_mut().enumerate() {
                let a = taken.last().map_or(INF, |g| g.cells[i]);
                let b = skipped.last().map_or(INF, |g| g.cells[i]);
                *cell = a.min(b);
            }
            q = merged;
            if record {
                steps.push(Step { comp, cons, masks, taken, skipped });
            }
        }
        for &v in s {
            self.in_s[v] = false;
        }
        Knapsack { last: q, steps }
    }

    fn backtrack(&self, t: usize, run: &Knapsack, n0: usize) -> Option<Choice> {
        let node = &self.nodes[t];
        let value = (0..run.last.sizes()).map(|s| run.last.at(s, n0)).min()?;
        if value == INF {
            return None;
        }
        let mut size = (0..run.last.sizes()).find(|&s| run.last.at(s, n0) == value)?;
        let mut nb = n0;
        let mut choice = Choice { taken: Vec::new(), balance: vec![0; node.constraints.len()] };
        for step in run.steps.iter().rev() {
            let took = step.taken.last().is_some_and(|g| g.at(size, nb) == value_at(step, size, nb));
            let tabs = if took { &step.taken } else { &step.skipped };
            for idx in (0..step.cons.len()).rev() {
                let c = &node.constraints[step.cons[idx]];
                let mask = if took { step.masks[idx] } else { 0 };
                let cur = tabs[idx + 1].at(size, nb);
                let n = (0..=c.n.min(nb))
                    .find(|&n| add(tabs[idx].at(size, nb - n), c.value(&self.syms, mask, n), self.k) == cur)?;
                choice.balance[step.cons[idx]] = n;
                nb -= n;
            }
            if took {
                let comp = step.comp.as_ref()?;
                let outside = comp.iter().filter(|v| node.sigma.binary_search(v).is_err()).count();
                size -= comp.len();
                nb -= outside;
                choice.taken.extend_from_slice(comp);
            }
        }
        (size == 0 && nb == 0).then_some(choice)
    }

    /// Adds to `out` the `A` side within `γ(t)` of a cut achieving `M[t, mask, n0]`.
    fn recover(&mut self, t: usize, mask: usize, n0: usize, out: &mut VertexSet) -> Result<(), BisectionError> {
        let table = self.tables[t].as_ref().expect("table computed");
        let s = table.witness[table.index(mask, n0)]
            .clone()
            .ok_or_else(|| BisectionError::Inconsistent(format!("cell ({mask}, {n0}) of node {t} has no witness")))?;
        let run = self.knapsack(t, &s, true);
        let choice = self
            .backtrack(t, &run, n0)
            .ok_or_else(|| BisectionError::Inconsistent(format!("cannot retrace node {t}")))?;
        for &v in &choice.taken {
            out.insert(v);
        }
        let constraints = self.nodes[t].constraints.clone();
        for (a, c) in constraints.iter().enumerate() {
            let Kind::Child(child) = c.kind else { continue };
            let sub_mask = c.x.iter().enumerate().filter(|(_, v)| choice.taken.contains(v)).fold(0, |m, (i, _)| m | 1 << i);
            let n = choice.balance[a];
            let sym = self.syms[child].as_ref().expect("child table");
            if sym.is_flipped(sub_mask, n) {
                let full = (1usize << c.x.len()) - 1;
                let mut other = VertexSet::new(out.universe());
                self.recover(child, full ^ sub_mask, c.n - n, &mut other)?;
                out.union_with(&self.cones[child].difference(&other));
            } else {
                self.recover(child, sub_mask, n, out)?;
            }
        }
        Ok(())
    }
}

fn value_at(step: &Step, size: usize, nb: usize) -> u32 {
    let a = step.taken.last().map_or(INF, |g| g.at(size, nb));
    let b = step.skipped.last().map_or(INF, |g| g.at(size, nb));
    a.min(b)
}

fn binomial_sum(n: usize, k: usize) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=k.min(n) {
        total += binom;
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    total
}

/// Candidate sets for one node: every `S ⊆ β(t)` with `|S| ≤ k` when that is
/// no more than the sampled family, otherwise the sampled family itself.
fn candidates(bag: &[usize], k: usize, seed: u64, delta: f64, mode: FamilyMode) -> Result<Vec<Vec<usize>>, SplitterError> {
    let b = k + k * k;
    let direct = binomial_sum(bag.len(), k);
    let sampled = sample_count(bag.len(), &[k.min(bag.len()), b.min(bag.len())], delta);
    let mut out = Vec::new();
    if mode == FamilyMode::Auto && direct <= sampled.max(EXHAUSTIVE_LIMIT as f64) {
        for size in 0..=k.min(bag.len()) {
            for_each_combination(bag, size, &mut |c| out.push(c.to_vec()));
        }
    } else {
        let family = subset_family_with(bag.len(), k, b, seed, delta, FamilyMode::Sampled)?;
        out.extend(family.iter().map(|s| s.iter().map(|i| bag[i]).collect()));
    }
    Ok(out)
}

/// All `M[t, ·, ·]` and `M'[t, ·, ·]` for a decomposition whose bags are
/// `(k, k)`-edge-unbreakable and whose adhesions have at most `k` vertices.
pub struct BisectionTables<'a> {
    solver: Solver<'a>,
}

impl BisectionTables<'_> {
    pub fn table(&self, t: usize) -> &BisectionTable {
        self.solver.tables[t].as_ref().expect("all nodes computed")
    }

    pub fn symmetrized(&self, t: usize) -> &SymmetrizedTable {
        self.solver.syms[t].as_ref().expect("all nodes computed")
    }
}

pub fn compute_tables<'a>(
    g: &Graph,
    k: usize,
    td: &TreeDecomposition,
    cones: &'a [VertexSet],
    seeds: &mut SeedSequence,
    delta: f64,
    mode: FamilyMode,
) -> Result<BisectionTables<'a>, BisectionError> {
    let children = td.children();
    let nodes: Vec<Node> = (0..td.len()).map(|t| build_node(g, td, cones, &children[t], t)).collect();
    let mut solver = Solver {
        k,
        nodes,
        syms: vec![None; td.len()],
        tables: vec![None; td.len()],
        in_s: vec![false; g.n()],
        cones,
    };
    for t in td.post_order() {
        let node = &solver.nodes[t];
        let mut table = BisectionTable::new(node.sigma.clone(), node.alpha);
        let sigma = node.sigma.clone();
        for s in candidates(&node.bag, k, seeds.next_seed(), delta, mode)? {
            let mask = sigma.iter().enumerate().filter(|(_, v)| s.binary_search(v).is_ok()).fold(0, |m, (i, _)| m | 1 << i);
            let run = solver.knapsack(t, &s, false);
            for n0 in 0..=table.alpha {
                let v = (0..run.last.sizes()).map(|size| run.last.at(size, n0)).min().unwrap_or(INF);
                let i = table.index(mask, n0);
                if v < table.values[i] {
                    table.values[i] = v;
                    table.witness[i] = Some(s.clone());
                }
            }
        }
        solver.syms[t] = Some(symmetrize(&table));
        solver.tables[t] = Some(table);
    }
    Ok(BisectionTables { solver })
}

/// A balanced edge cut of minimum order, provided that order is at most `k`.
pub fn solve_bisection(g: &Graph, k: usize, opts: &DecomposeOptions) -> Result<Option<BisectionSolution>, BisectionError> {
    let n = g.n();
    if n % 2 == 1 {
        return Err(BisectionError::OddVertexCount(n));
    }
    // Half the failure budget goes to the decomposition, half to the tables.
    let half = DecomposeOptions { delta: opts.delta / 2.0, ..*opts };
    let td = decompose(g, k, &half)?.td;
    let Some(root) = td.root() else {
        return Ok(Some(BisectionSolution { order: 0, cut: EdgeCut::from_side(VertexSet::new(n)) }));
    };
    let cones = td.cones();
    let mut seeds = SeedSequence::new(!opts.seed);
    let per_node = half.delta / td.len() as f64;
    let mut tables = compute_tables(g, k, &td, &cones, &mut seeds, per_node, opts.mode)?;
    let value = tables.table(root).get(0, n / 2);
    if value == INF {
        return Ok(None);
    }
    let mut side = VertexSet::new(n);
    tables.solver.recover(root, 0, n / 2, &mut side)?;
    let cut = EdgeCut::from_side(side);
    if !cut.is_balanced() || cut.order(g) > value as usize {
        return Err(BisectionError::Inconsistent(format!(
            "recovered cut has sides {} / {} and order {}, table says {value}",
            cut.a().len(),
            cut.b().len(),
            cut.order(g)
        )));
    }
    Ok(Some(BisectionSolution { order: cut.order(g), cut }))
}
