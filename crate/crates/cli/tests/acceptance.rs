//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every line is printed even when an
//! earlier check fails; the process exits non-zero if any check fails.

use std::time::Instant;

use std::process::Command;

use leantd::bisection::solve_bisection;
use leantd::decompose::{decompose, potential, DecomposeOptions};
use leantd::multicut::{coloring_cost, solve_aux_multicut, solve_steiner_cut, solve_steiner_multicut, AuxMulticutInstance};
use leantd::graph::{min_order_separation, Graph, VertexSet};
use leantd::oracle;
use leantd::splitters::{coloring_family_with, subset_family_with, FamilyMode};
use leantd::td::{adhesion_width, check_compact, validate, TreeDecomposition};
use leantd_cli::format::{parse_td, write_dimacs, write_td};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(density) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Graph {
    loop {
        let g = random_graph(rng, n, density);
        if g.is_connected() {
            return g;
        }
    }
}

/// Criteria 1 and 2 share the same runs.
fn decomposition() -> (Outcome, Outcome) {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let densities = [0.2, 0.4, 0.7];
    let (mut runs, mut failures, mut monotone_failures) = (0usize, 0usize, 0usize);
    let mut first_failure = None;
    for i in 0..200 {
        let n = 6 + i % 7;
        let g = random_connected_graph(&mut rng, n, densities[i % 3]);
        for k in 1..=4 {
            runs += 1;
            let opts = DecomposeOptions { seed: (i * 4 + k) as u64, delta: 1e-3, ..Default::default() };
            let out = match decompose(&g, k, &opts) {
                Ok(out) => out,
                Err(e) => {
                    failures += 1;
                    first_failure.get_or_insert(format!("graph {i} k={k}: {e}"));
                    continue;
                }
            };
            let td = &out.td;
            let mut ok = validate(&g, td).ok() && check_compact(&g, td) && adhesion_width(td) <= k;
            'bags: for bag in td.bags() {
                for q in 1..=k {
                    if !oracle::brute_unbreakable(&g, bag, q, q).unwrap() {
                        ok = false;
                        break 'bags;
                    }
                }
            }
            if !ok {
                failures += 1;
                first_failure.get_or_insert(format!("graph {i} k={k}"));
            }
            let trace = &out.stats.potential_trace;
            let decreasing = trace.windows(2).all(|w| w[1] < w[0]);
            let bounded = out.stats.refinements as u128 <= out.stats.iteration_bound;
            let consistent = trace.first() == Some(&potential(&leantd::td::TreeDecomposition::single_bag(&g), k))
                && trace.len() == out.stats.refinements + 1;
            if !(decreasing && bounded && consistent) {
                monotone_failures += 1;
            }
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    let c1 = if failures * 100 <= runs && secs < 120.0 {
        Ok(format!("{failures}/{runs} runs failed, {secs:.1} s"))
    } else {
        Err(format!("{failures}/{runs} runs failed, {secs:.1} s, first {first_failure:?}"))
    };
    let c2 = if monotone_failures == 0 {
        Ok(format!("{runs} runs, potential strictly decreasing and within the bound"))
    } else {
        Err(format!("{monotone_failures}/{runs} runs broke monotonicity or the bound"))
    };
    (c1, c2)
}

fn splitter_coverage() -> Outcome {
    let delta = 1e-3;
    let n = 12;
    let (mut pairs, mut uncovered) = (0u64, 0u64);
    for a in 1..=3 {
        for b in 1..=3 {
            for seed in 0..100 {
                let fam = subset_family_with(n, a, b, seed, delta, FamilyMode::Sampled).map_err(|e| e.to_string())?;
                let masks: Vec<u64> = fam.masks().collect();
                for_each_disjoint_pair(n, a, b, &mut |am, bm| {
                    pairs += 1;
                    if !masks.iter().any(|&s| s & am == am && s & bm == 0) {
                        uncovered += 1;
                    }
                });
            }
        }
    }
    let rate = uncovered as f64 / pairs as f64;

    // Degenerate budgets must never fail.
    let mut degenerate = 0;
    for seed in 0..100 {
        let empty_a = subset_family_with(n, 0, 3, seed, delta, FamilyMode::Sampled).unwrap();
        if !empty_a.masks().any(|s| s == 0) {
            degenerate += 1;
        }
        let empty_b = subset_family_with(n, 3, 0, seed, delta, FamilyMode::Sampled).unwrap();
        if !empty_b.masks().any(|s| s == (1 << n) - 1) {
            degenerate += 1;
        }
        let single = coloring_family_with(n, 1, &[3], seed, delta, FamilyMode::Sampled).unwrap();
        if !single.iter().any(|f| f.iter().all(|&c| c == 0)) {
            degenerate += 1;
        }
    }
    let detail = format!("uncovered {uncovered}/{pairs} = {rate:.2e}, degenerate failures {degenerate}");
    if rate <= delta && degenerate == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn for_each_disjoint_pair(n: usize, a: usize, b: usize, f: &mut dyn FnMut(u64, u64)) {
    let full = 1u64 << n;
    for am in 0..full {
        if am.count_ones() as usize > a {
            continue;
        }
        let rest = (full - 1) & !am;
        // Walk the submasks of the complement.
        let mut bm = rest;
        loop {
            if bm.count_ones() as usize <= b {
                f(am, bm);
            }
            if bm == 0 {
                break;
            }
            bm = (bm - 1) & rest;
        }
    }
}

fn flow_equivalence() -> Outcome {
    let mut checked = 0u64;
    let mut bad = None;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=7usize {
        let pairs = n * (n - 1) / 2;
        let all: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        for mask in 0..1u64 << pairs {
            let g = Graph::new(n, (0..pairs).filter(|&e| mask >> e & 1 == 1).map(|e| all[e])).unwrap();
            // Small graphs try every (P, Q) pair of singletons plus random sets;
            // on seven vertices each graph gets one random pair.
            let mut queries = Vec::new();
            let random_set = |rng: &mut ChaCha8Rng| {
                let size = rng.random_range(1..=n.div_ceil(2));
                let mut s = VertexSet::new(n);
                while s.len() < size {
                    s.insert(rng.random_range(0..n));
                }
                s
            };
            if n <= 5 {
                for p in 0..n {
                    for q in 0..n {
                        queries.push((g.set_of([p]), g.set_of([q])));
                    }
                }
            }
            let extra = if n <= 6 { 3 } else { 1 };
            for _ in 0..extra {
                queries.push((random_set(&mut rng), random_set(&mut rng)));
            }
            for (p, q) in queries {
                checked += 1;
                let expected = oracle::brute_min_separation(&g, &p, &q).unwrap();
                let (sep, paths) = min_order_separation(&g, &p, &q, n).unwrap().expect("order is at most n");
                let ok = sep.order() == expected
                    && sep.is_valid_in(&g)
                    && p.is_subset(sep.a())
                    && q.is_subset(sep.b())
                    && paths.len() == expected
                    && paths.is_valid_in(&g, &p, &q);
                if !ok && bad.is_none() {
                    bad = Some(format!("n={n} edges={mask:b} P={p:?} Q={q:?}"));
                }
            }
        }
    }
    match bad {
        None => Ok(format!("{checked} queries over every graph with n <= 7")),
        Some(b) => Err(format!("mismatch at {b}")),
    }
}

fn bisection_exactness() -> Outcome {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = None;
    let (mut found, mut absent) = (0, 0);
    for i in 0..100u64 {
        let n = 2 * rng.random_range(1..=6);
        let density = rng.random_range(0.15..0.6);
        let g = random_graph(&mut rng, n, density);
        let k = 1 + (i % 4) as usize;
        let opt = oracle::brute_bisection(&g).map_err(|e| e.to_string())?;
        let got = solve_bisection(&g, k, &DecomposeOptions { seed: i, ..Default::default() }).map_err(|e| e.to_string())?;
        let ok = match &got {
            Some(sol) => {
                found += 1;
                opt <= k && sol.order == opt && sol.cut.order(&g) == sol.order && sol.cut.is_balanced()
            }
            None => {
                absent += 1;
                opt > k
            }
        };
        if !ok && bad.is_none() {
            bad = Some(format!("instance {i}: n={n} k={k} optimum {opt}, solver {:?}", got.map(|s| s.order)));
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    match bad {
        None if secs < 120.0 => Ok(format!("100 instances ({found} solved, {absent} above k), {secs:.1} s")),
        None => Err(format!("correct but took {secs:.1} s")),
        Some(b) => Err(b),
    }
}

fn aux_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = None;
    let mut feasible = 0;
    for i in 0..100u64 {
        let n = rng.random_range(1..=8);
        let density = rng.random_range(0.25..0.7);
        let g = random_connected_graph(&mut rng, n, density);
        let k = rng.random_range(0..=4);
        let p = rng.random_range(1..=3);
        let tau = rng.random_range(1..=2);
        let terminals: Vec<Vec<usize>> =
            (0..tau).map(|_| (0..n).filter(|_| rng.random_bool(0.4)).collect()).collect();
        let count = rng.random_range(1..=4);
        let requests: Vec<(usize, usize)> =
            (0..count).map(|_| (rng.random_range(0..tau), rng.random_range(0..p))).collect();
        let expected = oracle::brute_aux_multicut(&g, k, p, &terminals, &requests).map_err(|e| e.to_string())?;
        let inst = AuxMulticutInstance::new(g.clone(), k, p, terminals, &requests).map_err(|e| e.to_string())?;
        let got = solve_aux_multicut(&inst, &DecomposeOptions { seed: i, ..Default::default() }).map_err(|e| e.to_string())?;
        let ok = match &got {
            Some(sol) => {
                feasible += 1;
                Some(sol.cost) == expected && inst.is_satisfied_by(&sol.coloring) && coloring_cost(&g, &sol.coloring) == sol.cost
            }
            None => expected.is_none(),
        };
        if !ok && bad.is_none() {
            bad = Some(format!("instance {i}: expected {expected:?}, got {:?}", got.map(|s| s.cost)));
        }
    }
    match bad {
        None => Ok(format!("100 instances, {feasible} feasible, all match brute force")),
        Some(b) => Err(b),
    }
}

fn random_sparse_graph(rng: &mut ChaCha8Rng, n: usize, max_m: usize) -> Graph {
    let mut all: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let m = rng.random_range(0..=max_m.min(all.len()));
    // Partial Fisher-Yates for the first m pairs.
    for i in 0..m {
        let j = rng.random_range(i..all.len());
        all.swap(i, j);
    }
    all.truncate(m);
    Graph::new(n, all).unwrap()
}

fn steiner_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = None;
    let (mut cut_found, mut multicut_found, mut way_cuts) = (0, 0, 0);
    for i in 0..100u64 {
        let n = rng.random_range(2..=10);
        let g = random_sparse_graph(&mut rng, n, 14);
        let k = rng.random_range(0..=4);
        let p = rng.random_range(1..=3);
        let opts = DecomposeOptions { seed: i, ..Default::default() };
        // Every fourth instance is a p-way cut.
        let terms: Vec<usize> = if i % 4 == 0 {
            way_cuts += 1;
            (0..n).collect()
        } else {
            (0..n).filter(|_| rng.random_bool(0.5)).collect()
        };
        let expected = oracle::brute_steiner_cut(&g, &terms, p, k).map_err(|e| e.to_string())?;
        let got = solve_steiner_cut(&g, &terms, p, k, &opts).map_err(|e| e.to_string())?;
        cut_found += got.is_some() as usize;
        let edges_ok = got.as_ref().is_none_or(|s| s.edges.len() == s.size && s.edges.iter().all(|&(u, v)| g.has_edge(u, v)));
        if (got.as_ref().map(|s| s.size) != expected || !edges_ok) && bad.is_none() {
            bad = Some(format!("steiner cut {i}: expected {expected:?}, got {:?}", got.map(|s| s.size)));
        }
    }
    for i in 0..100u64 {
        let n = rng.random_range(2..=10);
        let g = random_sparse_graph(&mut rng, n, 14);
        let k = rng.random_range(0..=4);
        let t = rng.random_range(0..=3);
        let sets: Vec<Vec<usize>> = (0..t)
            .map(|_| {
                let size = rng.random_range(1..=3.min(n));
                let mut s: Vec<usize> = Vec::new();
                while s.len() < size {
                    let v = rng.random_range(0..n);
                    if !s.contains(&v) {
                        s.push(v);
                    }
                }
                s
            })
            .collect();
        let opts = DecomposeOptions { seed: 1000 + i, ..Default::default() };
        let expected = oracle::brute_steiner_multicut(&g, &sets, k).map_err(|e| e.to_string())?;
        let got = solve_steiner_multicut(&g, &sets, k, &opts).map_err(|e| e.to_string())?;
        multicut_found += got.is_some() as usize;
        if got.as_ref().map(|s| s.size) != expected && bad.is_none() {
            bad = Some(format!("steiner multicut {i}: expected {expected:?}, got {:?}", got.map(|s| s.size)));
        }
    }
    match bad {
        None => Ok(format!(
            "100 cut ({cut_found} feasible, {way_cuts} with T = V) and 100 multicut ({multicut_found} feasible) instances match"
        )),
        Some(b) => Err(b),
    }
}

/// Bag contents plus the tree shape, invariant under renaming nodes.
fn canonical(td: &TreeDecomposition) -> Vec<(Vec<usize>, Option<Vec<usize>>)> {
    let mut out: Vec<_> = (0..td.len())
        .map(|t| (td.bag(t).to_vec(), td.parent(t).map(|p| td.bag(p).to_vec())))
        .collect();
    out.sort();
    out
}

fn formats_and_determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..50u64 {
        let n = rng.random_range(1..=12);
        let g = random_graph(&mut rng, n, 0.35);
        let k = rng.random_range(1..=3);
        let td = decompose(&g, k, &DecomposeOptions { seed: i, ..Default::default() }).map_err(|e| e.to_string())?.td;
        let text = write_td(&td);
        let back = parse_td(&text).map_err(|e| format!("graph {i}: {e}"))?;
        if write_td(&back) != text || canonical(&back) != canonical(&td) {
            return Err(format!("graph {i}: .td round trip changed the decomposition"));
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let graph = dir.path().join("g.gr");
    let terms = dir.path().join("t.txt");
    let g = random_connected_graph(&mut rng, 10, 0.3);
    std::fs::write(&graph, write_dimacs(&g)).map_err(|e| e.to_string())?;
    std::fs::write(&terms, "1 5\n2 9\n").map_err(|e| e.to_string())?;
    let (gp, tp) = (graph.to_str().unwrap(), terms.to_str().unwrap());
    let runs: [&[&str]; 6] = [
        &["decompose", gp, "--k", "2", "--seed", "7", "--verify"],
        &["decompose", gp, "--k", "3", "--seed", "7", "--json"],
        &["bisection", gp, "--k", "4", "--seed", "3"],
        &["steiner-cut", gp, "--terminals", tp, "--p", "3", "--k", "4", "--json"],
        &["steiner-multicut", gp, "--terminals", tp, "--k", "4"],
        &["bisection", gp, "--k", "4", "--seed", "3", "--json"],
    ];
    for args in runs {
        let once = || Command::new(env!("CARGO_BIN_EXE_leantd")).args(args).output().map_err(|e| e.to_string());
        let (a, b) = (once()?, once()?);
        if a.status.code() == Some(2) {
            return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&a.stderr)));
        }
        if a.stdout != b.stdout || a.status.code() != b.status.code() {
            return Err(format!("{args:?} printed different output on two runs"));
        }
    }
    Ok(format!("50 .td round trips, {} commands byte-identical across runs", runs.len()))
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let (c1, c2) = decomposition();
    results.push(("1 decomposition correctness", c1));
    results.push(("2 potential monotonicity and termination", c2));
    results.push(("3 bisection exactness", bisection_exactness()));
    results.push(("4 auxiliary multicut exactness", aux_exactness()));
    results.push(("5 steiner cut and multicut exactness", steiner_exactness()));
    results.push(("6 splitter coverage", splitter_coverage()));
    results.push(("7 flow and separation oracle", flow_equivalence()));
    results.push(("8 format round trip and determinism", formats_and_determinism()));

    let mut failed = false;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed = true;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed {
        std::process::exit(1);
    }
}
