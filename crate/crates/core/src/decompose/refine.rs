//! Turning a violating separation of one bag into a finer decomposition.

use std::collections::VecDeque;

use crate::graph::{FlowWorkspace, Graph, PathSystem, Separation, VertexSet};
use crate::td::{adhesion_width, cleanup, TreeDecomposition};

use super::DecomposeError;

/// A single-bag certificate: `Z1, Z2 ⊆ β(node)` of equal size, a separation
/// `(A1, A2)` with `Zi ⊆ Ai` of order below `|Z1|`, and disjoint `Z1`-`Z2`
/// paths, one through each separator vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessSeparation {
    pub node: usize,
    pub sep: Separation,
    pub z1: VertexSet,
    pub z2: VertexSet,
    pub paths: PathSystem,
}

impl WitnessSeparation {
    pub fn order(&self) -> usize {
        self.sep.order()
    }
}

/// Picks `Z1`, `Z2` as the `ℓ + 1` lowest vertices of `A ∩ β(t)` and
/// `B ∩ β(t)` and recomputes a minimum separation between them with paths.
pub fn build_witness(
    g: &Graph,
    k: usize,
    td: &TreeDecomposition,
    t: usize,
    sep: &Separation,
) -> Result<WitnessSeparation, DecomposeError> {
    let order = sep.order();
    let bag = td.bag(t);
    let lowest = |side: &VertexSet| -> Option<VertexSet> {
        let picked: Vec<usize> = side.intersection(bag).iter().take(order + 1).collect();
        (picked.len() == order + 1).then(|| g.set_of(picked))
    };
    let (Some(z1), Some(z2)) = (lowest(sep.a()), lowest(sep.b())) else {
        return Err(DecomposeError::Inconsistent(format!(
            "separation of order {order} does not leave {} bag vertices on both sides",
            order + 1
        )));
    };
    if order > k {
        return Err(DecomposeError::Inconsistent(format!("separation order {order} exceeds k = {k}")));
    }
    let Some((sep, paths)) = FlowWorkspace::new(g).separate(&z1, &z2, order)? else {
        return Err(DecomposeError::Inconsistent(format!(
            "no separation of order at most {order} between the chosen sets"
        )));
    };
    Ok(WitnessSeparation { node: t, sep, z1, z2, paths })
}

/// Splits along the witness: two copies of the tree, one with every bag
/// intersected with `A1` and one with `A2`, joined at the copies of the
/// witness node. A separator vertex `x` missing from `β(s)` is added to the
/// copies of the bags between `s` and the bag holding `x` closest to `s`.
/// The result is cleaned up.
pub fn refine(
    g: &Graph,
    k: usize,
    td: &TreeDecomposition,
    w: &WitnessSeparation,
) -> Result<TreeDecomposition, DecomposeError> {
    let len = td.len();
    let s = w.node;
    if s >= len {
        return Err(DecomposeError::Inconsistent(format!("witness node {s} is not in the decomposition")));
    }
    if adhesion_width(td) > k || w.order() > k || w.z1.len() > k + 1 || w.order() >= w.z1.len() {
        return Err(DecomposeError::Inconsistent("refinement preconditions do not hold".into()));
    }
    let x = w.sep.separator();
    let adj = td.adjacency();
    let mut towards_s = vec![usize::MAX; len];
    let mut by_distance = vec![s];
    towards_s[s] = s;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if towards_s[v] == usize::MAX {
                towards_s[v] = u;
                by_distance.push(v);
                queue.push_back(v);
            }
        }
    }

    let sides = [w.sep.a(), w.sep.b()];
    let mut bags: Vec<VertexSet> = Vec::with_capacity(2 * len);
    for side in sides {
        bags.extend(td.bags().iter().map(|b| b.intersection(side)));
    }
    for v in x.difference(td.bag(s)).iter() {
        let holder = by_distance
            .iter()
            .copied()
            .find(|&t| td.bag(t).contains(v))
            .ok_or_else(|| DecomposeError::Inconsistent(format!("vertex {v} is in no bag")))?;
        let mut t = towards_s[holder];
        loop {
            bags[t].insert(v);
            bags[len + t].insert(v);
            if t == s {
                break;
            }
            t = towards_s[t];
        }
    }
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(2 * len - 1);
    for (c, p) in td.edges() {
        edges.push((c, p));
        edges.push((len + c, len + p));
    }
    edges.push((s, len + s));
    let root = td.root().unwrap_or(s);
    let joined = TreeDecomposition::from_edges(td.universe(), bags, &edges, root)
        .map_err(|e| DecomposeError::Inconsistent(e.to_string()))?;
    let out = cleanup(&joined);
    debug_assert!(crate::td::validate(g, &out).ok());
    Ok(out)
}
