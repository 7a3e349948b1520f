//! The coloring DP: `M[t, I, f^σ]` is the cheapest extension of `f^σ` to
//! `G_t` that serves the requests in `I` from inside `G_t`.
//!
//! A node guesses a bag coloring `g` and a background color `j`; components
//! of the non-`j` part of `g` (in the graph joining vertices that share a
//! child adhesion or an edge) either keep `g` or fall back to `j`, and a
//! knapsack over them distributes the requests among children and terminals.

use std::collections::HashSet;

use crate::decompose::DecomposeOptions;
use crate::graph::Graph;
use crate::splitters::{coloring_family_with, FamilyMode, SeedSequence};
use crate::td::TreeDecomposition;

use super::{AuxMulticutInstance, MulticutError, INF};

#[derive(Debug, Clone)]
enum Kind {
    Child(usize),
    Edge,
    /// Serves request `r` when its vertex gets `color`.
    Terminal { r: usize, color: usize },
}

#[derive(Debug, Clone)]
struct Constraint {
    x: Vec<usize>,
    kind: Kind,
}

#[derive(Debug, Clone)]
struct Node {
    bag: Vec<usize>,
    sigma: Vec<usize>,
    constraints: Vec<Constraint>,
    /// Bound on the number of bag vertices that keep a non-background color.
    k_beta: usize,
}

/// `M[t, ·, ·]`, indexed by `code(f^σ) · 2^|I°| + I`, with `code` the base-`p`
/// number whose digit `i` is the color of the `i`-th adhesion vertex.
#[derive(Debug, Clone)]
pub(crate) struct Table {
    values: Vec<u32>,
    /// The guess `(j, g)` that produced each finite cell.
    witness: Vec<Option<(usize, Vec<u8>)>>,
    /// `min_I M[t, I, code]`, a lower bound for any use of the adhesion coloring.
    floor: Vec<u32>,
}

fn add(a: u32, b: u32, k: usize) -> u32 {
    if a == INF || b == INF {
        return INF;
    }
    if (a + b) as usize > k {
        INF
    } else {
        a + b
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Grid {
    masks: usize,
    cells: Vec<u32>,
}

impl Grid {
    fn new(k_beta: usize, masks: usize) -> Self {
        Grid { masks, cells: vec![INF; (k_beta + 1) * masks] }
    }

    fn sizes(&self) -> usize {
        self.cells.len() / self.masks
    }

    fn at(&self, size: usize, mask: usize) -> u32 {
        self.cells[size * self.masks + mask]
    }
}

struct Step {
    comp: Option<Vec<usize>>,
    cons: Vec<usize>,
    taken: Vec<Grid>,
    skipped: Vec<Grid>,
}

struct Run {
    last: Grid,
    steps: Vec<Step>,
}

pub(crate) struct Solver<'a> {
    inst: &'a AuxMulticutInstance,
    p: usize,
    masks: usize,
    nodes: Vec<Node>,
    tables: Vec<Option<Table>>,
    /// Scratch coloring indexed by vertex.
    color: Vec<usize>,
}

impl<'a> Solver<'a> {
    pub(crate) fn new(inst: &'a AuxMulticutInstance, td: &TreeDecomposition) -> Self {
        let g = inst.graph();
        let k = inst.k();
        let children = td.children();
        let requests = inst.requests();
        let mut nodes = Vec::with_capacity(td.len());
        for t in 0..td.len() {
            let bag = td.bag(t);
            let sigma = td.adhesion(t);
            let mut constraints = Vec::new();
            for &s in &children[t] {
                constraints.push(Constraint { x: td.adhesion(s).to_vec(), kind: Kind::Child(s) });
            }
            for &(u, v) in g.edges() {
                if bag.contains(u) && bag.contains(v) && !(sigma.contains(u) && sigma.contains(v)) {
                    constraints.push(Constraint { x: vec![u, v], kind: Kind::Edge });
                }
            }
            for (r, &(i, j)) in requests.iter().enumerate() {
                for &w in &inst.terminals()[i] {
                    if bag.contains(w) {
                        constraints.push(Constraint { x: vec![w], kind: Kind::Terminal { r, color: j } });
                    }
                }
            }
            let k_beta = if bag.len() > 3 * k { k } else { bag.len() };
            nodes.push(Node { bag: bag.to_vec(), sigma: sigma.to_vec(), constraints, k_beta });
        }
        Solver {
            inst,
            p: inst.colors(),
            masks: 1 << requests.len(),
            nodes,
            tables: vec![None; td.len()],
            color: vec![0; g.n()],
        }
    }

    fn code(&self, xs: &[usize], color: &dyn Fn(usize) -> usize) -> usize {
        xs.iter().rev().fold(0, |acc, &v| acc * self.p + color(v))
    }

    pub(crate) fn value(&self, t: usize, mask: usize, code: usize) -> u32 {
        self.tables[t].as_ref().expect("table computed").values[code * self.masks + mask]
    }

    /// Applies one constraint to the knapsack state, with the bag colored by
    /// `self.color` on `X_Γ`.
    fn apply(&self, grid: &Grid, c: &Constraint) -> Grid {
        let k = self.inst.k();
        let mut out = Grid { masks: grid.masks, cells: vec![INF; grid.cells.len()] };
        match c.kind {
            Kind::Edge => {
                let cost = u32::from(self.color[c.x[0]] != self.color[c.x[1]]);
                for (o, &v) in out.cells.iter_mut().zip(&grid.cells) {
                    *o = add(v, cost, k);
                }
            }
            Kind::Terminal { r, color } => {
                out.cells.copy_from_slice(&grid.cells);
                if self.color[c.x[0]] == color {
                    let bit = 1 << r;
                    for size in 0..grid.sizes() {
                        for mask in 0..grid.masks {
                            if mask & bit == 0 {
                                let v = grid.at(size, mask);
                                let cell = &mut out.cells[size * grid.masks + (mask | bit)];
                                *cell = (*cell).min(v);
                            }
                        }
                    }
                }
            }
            Kind::Child(s) => {
                let code = self.code(&c.x, &|v| self.color[v]);
                let offers: Vec<(usize, u32)> = (0..self.masks)
                    .map(|m| (m, self.value(s, m, code)))
                    .filter(|&(_, v)| v != INF)
                    .collect();
                for size in 0..grid.sizes() {
                    for mask in 0..grid.masks {
                        let here = grid.at(size, mask);
                        if here == INF {
                            continue;
                        }
                        for &(m, v) in &offers {
                            if m & mask == 0 {
                                let cell = &mut out.cells[size * grid.masks + (mask | m)];
                                *cell = (*cell).min(add(here, v, k));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn knapsack(&mut self, t: usize, j: usize, g: &[u8], record: bool) -> Run {
        let node = self.nodes[t].clone();
        let sigma: HashSet<usize> = node.sigma.iter().copied().collect();
        // Σ(j, g): bag vertices away from the background color.
        let pos_of = |v: usize| node.bag.binary_search(&v).expect("constraint inside the bag");
        let off_background: Vec<bool> = g.iter().map(|&c| c as usize != j).collect();
        let mut parent: Vec<usize> = (0..node.bag.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for c in &node.constraints {
            let inside: Vec<usize> = c.x.iter().map(|&v| pos_of(v)).filter(|&i| off_background[i]).collect();
            for w in inside.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut roots: Vec<usize> = (0..node.bag.len()).filter(|&i| off_background[i]).map(|i| find(&mut parent, i)).collect();
        roots.sort_unstable();
        roots.dedup();
        let comps: Vec<Vec<usize>> = roots
            .iter()
            .map(|&r| (0..node.bag.len()).filter(|&i| off_background[i] && find(&mut parent, i) == r).map(|i| node.bag[i]).collect())
            .collect();
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); comps.len() + 1];
        for (a, c) in node.constraints.iter().enumerate() {
            let hit = c.x.iter().map(|&v| pos_of(v)).find(|&i| off_background[i]);
            let group = match hit {
                Some(i) => 1 + roots.binary_search(&find(&mut parent, i)).unwrap(),
                None => 0,
            };
            groups[group].push(a);
        }

        let mut q = Grid::new(node.k_beta, self.masks);
        q.cells[0] = 0;
        let mut steps = Vec::new();
        for (gi, cons) in groups.into_iter().enumerate() {
            let comp = (gi > 0).then(|| comps[gi - 1].clone());
            let must_take = comp.as_ref().is_some_and(|c| c.iter().any(|v| sigma.contains(v)));
            let mut taken = Vec::new();
            if let Some(c) = &comp {
                for (i, &v) in node.bag.iter().enumerate() {
                    self.color[v] = g[i] as usize;
                }
                let mut shifted = Grid::new(node.k_beta, self.masks);
                for size in 0..q.sizes() {
                    if size + c.len() < q.sizes() {
                        for mask in 0..self.masks {
                            shifted.cells[(size + c.len()) * self.masks + mask] = q.at(size, mask);
                        }
                    }
                }
                taken.push(shifted);
                for &a in &cons {
                    let next = self.apply(taken.last().unwrap(), &node.constraints[a]);
                    taken.push(next);
                }
            }
            let mut skipped = Vec::new();
            if !must_take {
                for &v in &node.bag {
                    self.color[v] = j;
                }
                skipped.push(q.clone());
                for &a in &cons {
                    let next = self.apply(skipped.last().unwrap(), &node.constraints[a]);
                    skipped.push(next);
                }
            }
            let mut merged = Grid::new(node.k_beta, self.masks);
            for (i, cell) in merged.cells.iter_mut().enumerate() {
                let a = taken.last().map_or(INF, |g: &Grid| g.cells[i]);
                let b = skipped.last().map_or(INF, |g: &Grid| g.cells[i]);
                *cell = a.min(b);
            }
            q = merged;
            if record {
                steps.push(Step { comp, cons, taken, skipped });
            }
        }
        Run { last: q, steps }
    }

    /// Colors of the bag and the requests handed to every constraint, for a
    /// cell reached by `run` with request set `mask`.
    fn backtrack(&mut self, t: usize, j: usize, g: &[u8], run: &Run, mask: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let node = self.nodes[t].clone();
        let k = self.inst.k();
        let best = (0..run.last.sizes()).map(|s| run.last.at(s, mask)).min()?;
        if best == INF {
            return None;
        }
        let mut size = (0..run.last.sizes()).find(|&s| run.last.at(s, mask) == best)?;
        let mut m = mask;
        let mut colors: Vec<usize> = g.iter().map(|&c| c as usize).collect();
        let mut rho = vec![0usize; node.constraints.len()];
        for step in run.steps.iter().rev() {
            let here = |grids: &Vec<Grid>| grids.last().map_or(INF, |g| g.at(size, m));
            let took = !step.taken.is_empty() && here(&step.taken) <= here(&step.skipped);
            let grids = if took { &step.taken } else { &step.skipped };
            if took {
                for (i, &v) in node.bag.iter().enumerate() {
                    self.color[v] = g[i] as usize;
                }
            } else {
                for &v in &node.bag {
                    self.color[v] = j;
                }
            }
            for idx in (0..step.cons.len()).rev() {
                let c = &node.constraints[step.cons[idx]];
                let (prev, cur) = (&grids[idx], grids[idx + 1].at(size, m));
                let options: Vec<(usize, u32)> = match c.kind {
                    Kind::Edge => vec![(0, u32::from(self.color[c.x[0]] != self.color[c.x[1]]))],
                    Kind::Terminal { r, color } => {
                        let mut o = vec![(0, 0)];
                        if self.color[c.x[0]] == color {
                            o.push((1 << r, 0));
                        }
                        o
                    }
                    Kind::Child(s) => {
                        let code = self.code(&c.x, &|v| self.color[v]);
                        (0..self.masks).map(|sub| (sub, self.value(s, sub, code))).collect()
                    }
                };
                let (sub, _) = options
                    .into_iter()
                    .find(|&(sub, v)| sub & !m == 0 && add(prev.at(size, m & !sub), v, k) == cur)?;
                rho[step.cons[idx]] = sub;
                m &= !sub;
            }
            if let Some(comp) = &step.comp {
                if took {
                    size -= comp.len();
                } else {
                    for v in comp {
                        colors[node.bag.binary_search(v).unwrap()] = j;
                    }
                }
            }
        }
        (size == 0 && m == 0).then_some((colors, rho))
    }

    /// Every bag coloring whose constraints can be paid for within `k` and
    /// that is unbreakable-consistent, paired with its majority color.
    fn cheap_colorings(&self, t: usize) -> Vec<(usize, Vec<u8>)> {
        let node = &self.nodes[t];
        let k = self.inst.k();
        let len = node.bag.len();
        // Order bag vertices so that constraints complete early.
        let pos = |v: usize| node.bag.binary_search(&v).unwrap();
        let mut order: Vec<usize> = Vec::with_capacity(len);
        let mut placed = vec![false; len];
        let mut adj = vec![Vec::new(); len];
        for c in &node.constraints {
            for &u in &c.x {
                for &v in &c.x {
                    if u != v {
                        adj[pos(u)].push(pos(v));
                    }
                }
            }
        }
        for start in 0..len {
            if placed[start] {
                continue;
            }
            placed[start] = true;
            let mut i = order.len();
            order.push(start);
            while i < order.len() {
                let u = order[i];
                i += 1;
                for &v in &adj[u] {
                    if !placed[v] {
                        placed[v] = true;
                        order.push(v);
                    }
                }
            }
        }
        let mut rank = vec![0; len];
        for (d, &i) in order.iter().enumerate() {
            rank[i] = d;
        }
        let mut completes: Vec<Vec<usize>> = vec![Vec::new(); len];
        for (a, c) in node.constraints.iter().enumerate() {
            if matches!(c.kind, Kind::Terminal { .. }) || c.x.is_empty() {
                continue;
            }
            let last = c.x.iter().map(|&v| rank[pos(v)]).max().unwrap();
            completes[last].push(a);
        }

        let mut out = Vec::new();
        let mut g = vec![0u8; len];
        // Constraints with an empty X contribute a constant.
        let mut base = 0u32;
        for c in &node.constraints {
            if c.x.is_empty() {
                if let Kind::Child(s) = c.kind {
                    base = add(base, self.tables[s].as_ref().unwrap().floor[0], k);
                }
            }
        }
        if base == INF {
            return out;
        }
        self.enumerate(node, &order, &completes, 0, base, &mut g, &mut out);
        out
    }

    fn enumerate(
        &self,
        node: &Node,
        order: &[usize],
        completes: &[Vec<usize>],
        depth: usize,
        spent: u32,
        g: &mut Vec<u8>,
        out: &mut Vec<(usize, Vec<u8>)>,
    ) {
        let k = self.inst.k();
        if depth == order.len() {
            let (j, count) = majority(g, self.p);
            let len = node.bag.len();
            if len <= 3 * k || len - count <= k {
                out.push((j, g.clone()));
            }
            return;
        }
        let i = order[depth];
        let colour_of = |g: &[u8], v: usize| g[node.bag.binary_search(&v).unwrap()] as usize;
        for c in 0..self.p {
            g[i] = c as u8;
            let mut cost = spent;
            for &a in &completes[depth] {
                let con = &node.constraints[a];
                let v = match con.kind {
                    Kind::Edge => u32::from(colour_of(g, con.x[0]) != colour_of(g, con.x[1])),
                    Kind::Child(s) => {
                        let code = self.code(&con.x, &|v| colour_of(g, v));
                        self.tables[s].as_ref().unwrap().floor[code]
                    }
                    Kind::Terminal { .. } => 0,
                };
                cost = add(cost, v, k);
                if cost == INF {
                    break;
                }
            }
            if cost != INF {
                self.enumerate(node, order, completes, depth + 1, cost, g, out);
            }
        }
        g[i] = 0;
    }

    /// The guesses `(j, g)` from randomized colorings of `β(t) \ σ(t)`, one
    /// family per background color and budget vector, each extended by every
    /// adhesion coloring.
    fn sampled_guesses(&self, t: usize, seeds: &mut SeedSequence, delta: f64) -> Result<Vec<(usize, Vec<u8>)>, MulticutError> {
        let node = &self.nodes[t];
        let k = self.inst.k();
        let p = self.p;
        let outer: Vec<usize> = (0..node.bag.len()).filter(|&i| node.sigma.binary_search(&node.bag[i]).is_err()).collect();
        let u = outer.len();
        let total = 3 * k + k * (k + self.inst.requests().len());
        let mut vectors: HashSet<Vec<usize>> = HashSet::new();
        let mut plans = Vec::new();
        for j in 0..p {
            budget_vectors(p, j, 3 * k, total, &mut |a| {
                let capped: Vec<usize> = a.iter().map(|&x| x.min(u)).collect();
                let mut key = capped.clone();
                key.push(j);
                if vectors.insert(key) {
                    plans.push((j, capped));
                }
            });
        }
        let per_family = delta / plans.len().max(1) as f64;
        let codes = p.pow(node.sigma.len() as u32);
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (j, budgets) in plans {
            let family = coloring_family_with(u, p, &budgets, seeds.next_seed(), per_family, FamilyMode::Sampled)?;
            for member in family.iter() {
                for code in 0..codes {
                    let mut g = vec![0u8; node.bag.len()];
                    for (slot, &i) in outer.iter().enumerate() {
                        g[i] = member[slot];
                    }
                    let mut c = code;
                    for v in &node.sigma {
                        g[node.bag.binary_search(v).unwrap()] = (c % p) as u8;
                        c /= p;
                    }
                    if seen.insert((j, g.clone())) {
                        out.push((j, g));
                    }
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn compute(
        &mut self,
        td: &TreeDecomposition,
        seeds: &mut SeedSequence,
        delta: f64,
        mode: FamilyMode,
    ) -> Result<(), MulticutError> {
        for t in td.post_order() {
            let guesses = match mode {
                FamilyMode::Auto => self.cheap_colorings(t),
                FamilyMode::Sampled => self.sampled_guesses(t, seeds, delta)?,
            };
            let node = self.nodes[t].clone();
            let codes = self.p.pow(node.sigma.len() as u32);
            let mut table =
                Table { values: vec![INF; codes * self.masks], witness: vec![None; codes * self.masks], floor: vec![INF; codes] };
            for (j, g) in guesses {
                let code = self.code(&node.sigma, &|v| g[node.bag.binary_search(&v).unwrap()] as usize);
                let run = self.knapsack(t, j, &g, false);
                for mask in 0..self.masks {
                    let v = (0..run.last.sizes()).map(|s| run.last.at(s, mask)).min().unwrap_or(INF);
                    let i = code * self.masks + mask;
                    if v < table.values[i] {
                        table.values[i] = v;
                        table.witness[i] = Some((j, g.clone()));
                    }
                }
            }
            for code in 0..codes {
                table.floor[code] = (0..self.masks).map(|m| table.values[code * self.masks + m]).min().unwrap_or(INF);
            }
            self.tables[t] = Some(table);
        }
        Ok(())
    }

    /// Writes into `f` a coloring of `V(G_t)` achieving `M[t, mask, code]`.
    pub(crate) fn recover(&mut self, t: usize, mask: usize, code: usize, f: &mut [usize]) -> Result<(), MulticutError> {
        let (j, g) = self.tables[t].as_ref().expect("table computed").witness[code * self.masks + mask]
            .clone()
            .ok_or_else(|| MulticutError::Inconsistent(format!("cell ({mask}, {code}) of node {t} has no witness")))?;
        let run = self.knapsack(t, j, &g, true);
        let (colors, rho) = self
            .backtrack(t, j, &g, &run, mask)
            .ok_or_else(|| MulticutError::Inconsistent(format!("cannot retrace node {t}")))?;
        let node = self.nodes[t].clone();
        for (i, &v) in node.bag.iter().enumerate() {
            f[v] = colors[i];
        }
        for (a, c) in node.constraints.iter().enumerate() {
            if let Kind::Child(s) = c.kind {
                let code = self.code(&c.x, &|v| colors[node.bag.binary_search(&v).unwrap()]);
                self.recover(s, rho[a], code, f)?;
            }
        }
        Ok(())
    }
}

/// The smallest among the most frequent colors, with its multiplicity.
pub(crate) fn majority(g: &[u8], p: usize) -> (usize, usize) {
    let mut count = vec![0usize; p.max(1)];
    for &c in g {
        count[c as usize] += 1;
    }
    let top = *count.iter().max().unwrap();
    (count.iter().position(|&c| c == top).unwrap(), top)
}

/// Every `(a_1, …, a_p)` with `Σ_{i≠j} a_i ≤ off` and `Σ a_i ≤ total`.
fn budget_vectors(p: usize, j: usize, off: usize, total: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(
        p: usize,
        j: usize,
        off: usize,
        total: usize,
        i: usize,
        used_off: usize,
        used: usize,
        cur: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if i == p {
            f(cur);
            return;
        }
        let room = if i == j { total - used } else { (off - used_off).min(total - used) };
        for a in 0..=room {
            cur.push(a);
            let extra = if i == j { 0 } else { a };
            rec(p, j, off, total, i + 1, used_off + extra, used + a, cur, f);
            cur.pop();
        }
    }
    rec(p, j, off, total, 0, 0, 0, &mut Vec::with_capacity(p), f);
}

/// Minimum-cost coloring satisfying every request, given a decomposition of
/// the instance graph built for its budget.
pub(crate) fn solve_with(
    inst: &AuxMulticutInstance,
    td: &TreeDecomposition,
    opts: &DecomposeOptions,
) -> Result<Option<(usize, Vec<usize>)>, MulticutError> {
    let g: &Graph = inst.graph();
    let Some(root) = td.root() else {
        return Ok(None);
    };
    let mut solver = Solver::new(inst, td);
    let mut seeds = SeedSequence::new(!opts.seed);
    solver.compute(td, &mut seeds, opts.delta / td.len() as f64, opts.mode)?;
    let full = solver.masks - 1;
    let value = solver.value(root, full, 0);
    if value == INF {
        return Ok(None);
    }
    let mut f = vec![0; g.n()];
    solver.recover(root, full, 0, &mut f)?;
    Ok(Some((value as usize, f)))
}
