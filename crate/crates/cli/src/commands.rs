//! Argument parsing and the subcommands. Every command renders its result as
//! text or JSON and picks an exit code; `main` only prints.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use leantd::bisection::solve_bisection;
use leantd::decompose::{decompose, DecomposeOptions};
use leantd::graph::Graph;
use leantd::multicut::{solve_steiner_cut, solve_steiner_multicut, CutSolution};
use leantd::oracle::{self, OracleBudget, OracleError};
use leantd::td::{adhesion_width, check_compact, validate, TreeDecomposition, ViolationKind};
use serde::Serialize;
use thiserror::Error;

use crate::format::{parse_dimacs, parse_td, parse_terminals, write_td, ParseError};

#[derive(Debug, Parser)]
#[command(name = "leantd", version, about = "Unbreakable tree decompositions and cut solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a graph into (i,i)-unbreakable bags with adhesions of size at most k.
    Decompose {
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        /// Write the .td file here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Minimum bisection of order at most k.
    Bisection {
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Fewest edges (at most k) leaving p components that contain terminals.
    /// All vertices in the terminals file form the terminal set.
    SteinerCut {
        graph: PathBuf,
        #[arg(long)]
        terminals: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Fewest edges (at most k) so that no terminal set stays in one component.
    SteinerMulticut {
        graph: PathBuf,
        #[arg(long)]
        terminals: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Check a .td file against a graph.
    Verify {
        graph: PathBuf,
        td: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct RunFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Total failure probability.
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    /// Cross-check the result with brute force where the instance is small enough.
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub json: bool,
}

/// Errors that end a run with exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{0}")]
    Input(String),
    #[error("solver failed: {0}")]
    Solver(String),
}

pub struct Output {
    pub stdout: String,
    /// 0: a solution (or passing check), 1: none exists or a check failed.
    pub code: i32,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn read_graph(path: &Path) -> Result<Graph, CliError> {
    parse_dimacs(&read(path)?).map_err(|source| CliError::Parse { path: path.to_owned(), source })
}

fn read_terminals(path: &Path, n: usize) -> Result<Vec<Vec<usize>>, CliError> {
    parse_terminals(&read(path)?, n).map_err(|source| CliError::Parse { path: path.to_owned(), source })
}

fn options(run: &RunFlags) -> Result<DecomposeOptions, CliError> {
    if !(run.delta > 0.0 && run.delta < 1.0) {
        return Err(CliError::Input(format!("--delta must be in (0, 1), got {}", run.delta)));
    }
    Ok(DecomposeOptions { seed: run.seed, delta: run.delta, ..Default::default() })
}

fn one_based(vs: impl IntoIterator<Item = usize>) -> Vec<usize> {
    vs.into_iter().map(|v| v + 1).collect()
}

fn join(vs: &[usize]) -> String {
    vs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Decompose { graph, k, output, run } => cmd_decompose(graph, *k, output.as_deref(), run),
        Command::Bisection { graph, k, run } => cmd_bisection(graph, *k, run),
        Command::SteinerCut { graph, terminals, p, k, run } => cmd_steiner_cut(graph, terminals, *p, *k, run),
        Command::SteinerMulticut { graph, terminals, k, run } => cmd_steiner_multicut(graph, terminals, *k, run),
        Command::Verify { graph, td, k, json } => cmd_verify(graph, td, *k, *json),
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unchecked,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn pass() -> Self {
        Check { status: Status::Pass, detail: None }
    }

    fn fail(detail: String) -> Self {
        Check { status: Status::Fail, detail: Some(detail) }
    }

    fn unchecked(detail: String) -> Self {
        Check { status: Status::Unchecked, detail: Some(detail) }
    }

    fn line(&self, name: &str) -> String {
        let status = match self.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Unchecked => "unchecked",
        };
        match &self.detail {
            Some(d) => format!("{name} {status} ({d})"),
            None => format!("{name} {status}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub axioms: Check,
    pub compact: Check,
    pub adhesion: Check,
    pub unbreakable: Check,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        [&self.axioms, &self.compact, &self.adhesion, &self.unbreakable]
            .iter()
            .all(|c| c.status != Status::Fail)
    }

    fn lines(&self) -> Vec<String> {
        vec![
            self.axioms.line("axioms"),
            self.compact.line("compact"),
            self.adhesion.line("adhesion"),
            self.unbreakable.line("unbreakable"),
        ]
    }
}

fn describe_violation(kind: ViolationKind, vertices: &[usize], nodes: &[usize], message: &str) -> String {
    match kind {
        ViolationKind::VertexUncovered => format!("vertex {} is in no bag", vertices[0] + 1),
        ViolationKind::EdgeUncovered => format!("edge {} {} is in no bag", vertices[0] + 1, vertices[1] + 1),
        ViolationKind::Disconnected => format!(
            "bags holding vertex {} are not connected (bags {} and {})",
            vertices[0] + 1,
            nodes[0] + 1,
            nodes[1] + 1
        ),
        ViolationKind::VertexOutOfRange => message.to_owned(),
    }
}

/// Runs every check on `td`, whose node `t` is bag `t + 1` of the file.
pub fn verify_decomposition(g: &Graph, td: &TreeDecomposition, k: usize) -> VerifyReport {
    let report = validate(g, td);
    let axioms = match report.violations.first() {
        None => Check::pass(),
        Some(v) => {
            let first = describe_violation(v.kind, &v.vertices, &v.nodes, &v.message);
            Check::fail(format!("{} violation(s), first: {first}", report.violations.len()))
        }
    };
    if !report.ok() {
        let skipped = || Check::unchecked("axioms failed".into());
        return VerifyReport { axioms, compact: skipped(), adhesion: skipped(), unbreakable: skipped() };
    }
    let compact = if check_compact(g, td) {
        Check::pass()
    } else {
        Check::fail("some cone does not induce a connected subgraph fully attached to its adhesion".into())
    };
    let adhesion = match (0..td.len()).find(|&t| td.adhesion(t).len() > k) {
        None => Check::pass(),
        Some(t) => Check::fail(format!(
            "tree edge {} {} has adhesion {} > k = {k}",
            td.parent(t).unwrap() + 1,
            t + 1,
            td.adhesion(t).len()
        )),
    };
    VerifyReport { axioms, compact, adhesion, unbreakable: check_unbreakable(g, td, k) }
}

fn check_unbreakable(g: &Graph, td: &TreeDecomposition, k: usize) -> Check {
    let budget = OracleBudget::default();
    for (t, bag) in td.bags().iter().enumerate() {
        for i in 1..=k {
            match oracle::brute_breaking_separation(g, bag, i, i, &budget) {
                Ok(None) => {}
                Ok(Some((a, b))) => {
                    let sep: Vec<usize> = one_based(a.intersection(&b).iter());
                    return Check::fail(format!(
                        "bag {} is not ({i},{i})-unbreakable: separator {{{}}} leaves more than {i} bag vertices on both sides",
                        t + 1,
                        join(&sep)
                    ));
                }
                Err(e @ OracleError::Budget { .. }) => return Check::unchecked(format!("budget: {e}")),
                Err(e) => return Check::fail(e.to_string()),
            }
        }
    }
    Check::pass()
}

fn potential_trace(trace: &[leantd::decompose::PotentialValue]) -> Vec<[u64; 2]> {
    trace.iter().map(|p| [p.phi1, p.phi2]).collect()
}

#[derive(Serialize)]
struct DecomposeSummary {
    k: usize,
    seed: u64,
    nodes: usize,
    adhesion_width: usize,
    max_bag_size: usize,
    refinements: usize,
    potential_trace: Vec<[u64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify: Option<VerifyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    td: Option<String>,
}

fn cmd_decompose(path: &Path, k: usize, output: Option<&Path>, run: &RunFlags) -> Result<Output, CliError> {
    let g = read_graph(path)?;
    let opts = options(run)?;
    let out = decompose(&g, k, &opts).map_err(|e| CliError::Solver(e.to_string()))?;
    let text = write_td(&out.td);
    // Check what was written, so bag numbers in the report match the file.
    let written = parse_td(&text).expect("writer output parses");
    let verify = run.verify.then(|| verify_decomposition(&g, &written, k));
    if let Some(o) = output {
        fs::write(o, &text).map_err(|source| CliError::Io { path: o.to_owned(), source })?;
    }
    let code = if verify.as_ref().is_some_and(|v| !v.passed()) { 1 } else { 0 };
    let summary = DecomposeSummary {
        k,
        seed: run.seed,
        nodes: out.td.len(),
        adhesion_width: adhesion_width(&out.td),
        max_bag_size: out.td.max_bag_size(),
        refinements: out.stats.refinements,
        potential_trace: potential_trace(&out.stats.potential_trace),
        verify,
        td: if output.is_none() { Some(text.clone()) } else { None },
    };
    if run.json {
        return Ok(Output { stdout: json(&summary), code });
    }
    // Summary lines are .td comments, so stdout stays a valid .td file.
    let mut stdout = if output.is_none() { text } else { String::new() };
    stdout.push_str(&format!("c nodes {}\n", summary.nodes));
    stdout.push_str(&format!("c adhesion width {}\n", summary.adhesion_width));
    stdout.push_str(&format!("c max bag size {}\n", summary.max_bag_size));
    stdout.push_str(&format!("c refinements {}\n", summary.refinements));
    let trace: Vec<String> = summary.potential_trace.iter().map(|[a, b]| format!("({a},{b})")).collect();
    stdout.push_str(&format!("c potential {}\n", trace.join(" ")));
    if let Some(v) = &summary.verify {
        for line in v.lines() {
            stdout.push_str(&format!("c verify {line}\n"));
        }
    }
    Ok(Output { stdout, code })
}

/// Outcome of a `--verify` cross-check against brute force.
fn cross_check(expected: Result<Option<usize>, OracleError>, got: Option<usize>) -> Check {
    match expected {
        Err(e @ OracleError::Budget { .. }) => Check::unchecked(format!("budget: {e}")),
        Err(e) => Check::fail(e.to_string()),
        Ok(want) if want == got => Check::pass(),
        Ok(want) => {
            let show = |x: Option<usize>| x.map_or("none".to_owned(), |v| v.to_string());
            Check::fail(format!("brute force gives {}, solver gives {}", show(want), show(got)))
        }
    }
}

fn finish(found: bool, verify: &Option<Check>) -> i32 {
    if found && verify.as_ref().is_none_or(|c| c.status != Status::Fail) {
        0
    } else {
        1
    }
}

#[derive(Serialize)]
struct BisectionReport {
    k: usize,
    found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sides: Option<[Vec<usize>; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify: Option<Check>,
}

fn cmd_bisection(path: &Path, k: usize, run: &RunFlags) -> Result<Output, CliError> {
    let g = read_graph(path)?;
    if g.n() % 2 == 1 {
        return Err(CliError::Input(format!("bisection needs an even number of vertices, got {}", g.n())));
    }
    let opts = options(run)?;
    let sol = solve_bisection(&g, k, &opts).map_err(|e| CliError::Solver(e.to_string()))?;
    let verify = run.verify.then(|| {
        let brute = oracle::brute_bisection(&g).map(|opt| (opt <= k).then_some(opt));
        cross_check(brute, sol.as_ref().map(|s| s.order))
    });
    let report = BisectionReport {
        k,
        found: sol.is_some(),
        order: sol.as_ref().map(|s| s.order),
        sides: sol.as_ref().map(|s| [one_based(s.cut.a().iter()), one_based(s.cut.b().iter())]),
        verify,
    };
    let code = finish(report.found, &report.verify);
    if run.json {
        return Ok(Output { stdout: json(&report), code });
    }
    let mut stdout = match (&report.order, &report.sides) {
        (Some(order), Some([a, b])) => format!("order {order}\nside {}\nside {}\n", join(a), join(b)),
        _ => format!("no bisection of order at most {k}\n"),
    };
    if let Some(v) = &report.verify {
        stdout.push_str(&v.line("verify"));
        stdout.push('\n');
    }
    Ok(Output { stdout, code })
}

#[derive(Serialize)]
struct CutReport {
    k: usize,
    found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify: Option<Check>,
}

fn cut_output(k: usize, what: &str, sol: Option<CutSolution>, verify: Option<Check>, as_json: bool) -> Output {
    let report = CutReport {
        k,
        found: sol.is_some(),
        size: sol.as_ref().map(|s| s.size),
        edges: sol.map(|s| s.edges.iter().map(|&(u, v)| [u + 1, v + 1]).collect()),
        verify,
    };
    let code = finish(report.found, &report.verify);
    if as_json {
        return Output { stdout: json(&report), code };
    }
    let mut stdout = match (&report.size, &report.edges) {
        (Some(size), Some(edges)) => {
            let mut s = format!("size {size}\n");
            for [u, v] in edges {
                s.push_str(&format!("edge {u} {v}\n"));
            }
            s
        }
        _ => format!("no {what} of size at most {k}\n"),
    };
    if let Some(v) = &report.verify {
        stdout.push_str(&v.line("verify"));
        stdout.push('\n');
    }
    Output { stdout, code }
}

fn cmd_steiner_cut(path: &Path, terminals: &Path, p: usize, k: usize, run: &RunFlags) -> Result<Output, CliError> {
    let g = read_graph(path)?;
    let sets = read_terminals(terminals, g.n())?;
    let mut t: Vec<usize> = sets.into_iter().flatten().collect();
    t.sort_unstable();
    t.dedup();
    let opts = options(run)?;
    let sol = solve_steiner_cut(&g, &t, p, k, &opts).map_err(|e| CliError::Solver(e.to_string()))?;
    let verify = run.verify.then(|| cross_check(oracle::brute_steiner_cut(&g, &t, p, k), sol.as_ref().map(|s| s.size)));
    Ok(cut_output(k, "steiner cut", sol, verify, run.json))
}

fn cmd_steiner_multicut(path: &Path, terminals: &Path, k: usize, run: &RunFlags) -> Result<Output, CliError> {
    let g = read_graph(path)?;
    let sets = read_terminals(terminals, g.n())?;
    let opts = options(run)?;
    let sol = solve_steiner_multicut(&g, &sets, k, &opts).map_err(|e| CliError::Solver(e.to_string()))?;
    let verify =
        run.verify.then(|| cross_check(oracle::brute_steiner_multicut(&g, &sets, k), sol.as_ref().map(|s| s.size)));
    Ok(cut_output(k, "steiner multicut", sol, verify, run.json))
}

fn cmd_verify(graph: &Path, td_path: &Path, k: usize, as_json: bool) -> Result<Output, CliError> {
    let g = read_graph(graph)?;
    let td = parse_td(&read(td_path)?).map_err(|source| CliError::Parse { path: td_path.to_owned(), source })?;
    if td.universe() != g.n() {
        return Err(CliError::Input(format!(
            "decomposition is over {} vertices, graph has {}",
            td.universe(),
            g.n()
        )));
    }
    let report = verify_decomposition(&g, &td, k);
    let code = if report.passed() { 0 } else { 1 };
    let stdout = if as_json { json(&report) } else { report.lines().join("\n") + "\n" };
    Ok(Output { stdout, code })
}
