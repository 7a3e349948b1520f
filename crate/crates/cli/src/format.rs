//! Text formats: DIMACS edge graphs, PACE-style `.td` decompositions and
//! terminal-set files. Files use 1-based vertex and bag ids; everything in
//! memory is 0-based.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use leantd::graph::{Graph, VertexSet};
use leantd::td::TreeDecomposition;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based; 0 means the error is about the file as a whole.
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.first() {
            None | Some(&"c") => None,
            Some(_) => Some((i + 1, words)),
        }
    })
}

fn number(line: usize, word: &str, what: &str) -> Result<usize, ParseError> {
    word.parse().or_else(|_| err(line, format!("expected {what}, found {word:?}")))
}

/// A 1-based id in `1..=n`, returned 0-based.
fn id(line: usize, word: &str, n: usize, what: &str) -> Result<usize, ParseError> {
    let v = number(line, word, what)?;
    if v == 0 || v > n {
        return err(line, format!("{what} {v} is outside 1..={n}"));
    }
    Ok(v - 1)
}

pub fn parse_dimacs(text: &str) -> Result<Graph, ParseError> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return err(0, "missing header `p edge <n> <m>`");
    };
    if header.len() != 4 || header[0] != "p" || header[1] != "edge" {
        return err(hl, "expected header `p edge <n> <m>`");
    }
    let n = number(hl, header[2], "vertex count")?;
    let m = number(hl, header[3], "edge count")?;
    let mut seen = BTreeSet::new();
    for (ln, words) in lines {
        if words[0] == "p" {
            return err(ln, "second header line");
        }
        if words[0] != "e" || words.len() != 3 {
            return err(ln, "expected edge line `e <u> <v>`");
        }
        let u = id(ln, words[1], n, "vertex")?;
        let v = id(ln, words[2], n, "vertex")?;
        if u == v {
            return err(ln, format!("self-loop at vertex {}", u + 1));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return err(ln, format!("duplicate edge {} {}", u + 1, v + 1));
        }
    }
    if seen.len() != m {
        return err(hl, format!("header promises {m} edges, found {}", seen.len()));
    }
    Ok(Graph::new(n, seen).expect("edges were checked"))
}

pub fn write_dimacs(g: &Graph) -> String {
    let mut out = format!("p edge {} {}\n", g.n(), g.m());
    for &(u, v) in g.edges() {
        writeln!(out, "e {} {}", u + 1, v + 1).unwrap();
    }
    out
}

/// Parses a `.td` file. Bag 1 becomes the root; bags are numbered in file
/// order.
pub fn parse_td(text: &str) -> Result<TreeDecomposition, ParseError> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return err(0, "missing header `s td <bags> <max bag size> <n>`");
    };
    if header.len() != 5 || header[0] != "s" || header[1] != "td" {
        return err(hl, "expected header `s td <bags> <max bag size> <n>`");
    }
    let count = number(hl, header[2], "bag count")?;
    let width = number(hl, header[3], "maximum bag size")?;
    let n = number(hl, header[4], "vertex count")?;
    let mut bags: Vec<Option<VertexSet>> = vec![None; count];
    let mut edges = Vec::new();
    let mut tree_lines = Vec::new();
    for (ln, words) in lines {
        if words[0] == "b" {
            if !edges.is_empty() {
                return err(ln, "bag line after tree edges");
            }
            let Some(t) = words.get(1) else {
                return err(ln, "bag line without an id");
            };
            let t = id(ln, t, count, "bag")?;
            if bags[t].is_some() {
                return err(ln, format!("bag {} defined twice", t + 1));
            }
            let mut bag = VertexSet::new(n);
            for w in &words[2..] {
                let v = id(ln, w, n, "vertex")?;
                if bag.contains(v) {
                    return err(ln, format!("vertex {} repeated in bag {}", v + 1, t + 1));
                }
                bag.insert(v);
            }
            if bag.len() > width {
                return err(ln, format!("bag {} has {} vertices, header allows {width}", t + 1, bag.len()));
            }
            bags[t] = Some(bag);
        } else {
            if words.len() != 2 {
                return err(ln, "expected tree edge `<bag> <bag>`");
            }
            edges.push((id(ln, words[0], count, "bag")?, id(ln, words[1], count, "bag")?));
            tree_lines.push(ln);
        }
    }
    if let Some(t) = bags.iter().position(Option::is_none) {
        return err(hl, format!("bag {} is never defined", t + 1));
    }
    let bags: Vec<VertexSet> = bags.into_iter().map(Option::unwrap).collect();
    if count > 0 && bags.iter().map(VertexSet::len).max() != Some(width) {
        return err(hl, format!("header maximum bag size {width} does not match the bags"));
    }
    TreeDecomposition::from_edges(n, bags, &edges, 0).map_err(|e| ParseError {
        line: tree_lines.last().copied().unwrap_or(hl),
        message: e.to_string(),
    })
}

/// Writes bags in breadth-first order from the root, so the root is bag 1.
pub fn write_td(td: &TreeDecomposition) -> String {
    let order = td.bfs_order();
    let mut rank = vec![0; td.len()];
    for (i, &t) in order.iter().enumerate() {
        rank[t] = i + 1;
    }
    let mut out = format!("s td {} {} {}\n", td.len(), td.max_bag_size(), td.universe());
    for (i, &t) in order.iter().enumerate() {
        write!(out, "b {}", i + 1).unwrap();
        for v in td.bag(t).iter() {
            write!(out, " {}", v + 1).unwrap();
        }
        out.push('\n');
    }
    for &t in &order {
        if let Some(p) = td.parent(t) {
            writeln!(out, "{} {}", rank[p], rank[t]).unwrap();
        }
    }
    out
}

/// One terminal set per line, whitespace-separated 1-based vertex ids.
/// Blank lines and `c` lines are skipped; repeats within a set collapse.
pub fn parse_terminals(text: &str, n: usize) -> Result<Vec<Vec<usize>>, ParseError> {
    content_lines(text)
        .map(|(ln, words)| {
            let mut set = words.iter().map(|w| id(ln, w, n, "vertex")).collect::<Result<Vec<_>, _>>()?;
            set.sort_unstable();
            set.dedup();
            Ok(set)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_round_trip() {
        let text = "c a path\np edge 3 2\ne 1 2\n\ne 3 2\n";
        let g = parse_dimacs(text).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(parse_dimacs(&write_dimacs(&g)).unwrap(), g);
    }

    #[test]
    fn dimacs_errors_name_the_line() {
        let line = |t: &str| parse_dimacs(t).unwrap_err().line;
        assert_eq!(line("p edge 2\n"), 1);
        assert_eq!(line("c\np edge 2 1\ne 1 3\n"), 3);
        assert_eq!(line("p edge 2 1\ne 1 1\n"), 2);
        assert_eq!(line("p edge 3 2\ne 1 2\ne 2 1\n"), 3);
        assert_eq!(line("p edge 2 2\ne 1 2\n"), 1);
        assert_eq!(line("p edge 2 1\nx 1 2\n"), 2);
        assert_eq!(line(""), 0);
    }

    #[test]
    fn td_round_trip() {
        let text = "s td 3 2 3\nb 1 1 2\nb 2 2 3\nb 3 2\n1 2\n3 2\n";
        let td = parse_td(text).unwrap();
        assert_eq!(td.root(), Some(0));
        assert_eq!(td.parent(2), Some(1));
        let out = write_td(&td);
        assert_eq!(out, "s td 3 2 3\nb 1 1 2\nb 2 2 3\nb 3 2\n1 2\n2 3\n");
        assert_eq!(write_td(&parse_td(&out).unwrap()), out);
        assert_eq!(write_td(&TreeDecomposition::empty(0)), "s td 0 0 0\n");
        assert!(parse_td("s td 0 0 0\n").unwrap().is_empty());
    }

    #[test]
    fn td_errors() {
        let line = |t: &str| parse_td(t).unwrap_err().line;
        assert_eq!(line("s td 2 1 2\nb 1 1\n"), 1);
        assert_eq!(line("s td 1 1 2\nb 1 3\n"), 2);
        assert_eq!(line("s td 1 1 2\nb 1 1 2\n"), 2);
        assert_eq!(line("s td 2 1 2\nb 1 1\nb 2 2\n"), 1);
        assert_eq!(line("s td 2 1 2\nb 1 1\nb 2 2\n1 2\n2 1\n"), 5);
        assert_eq!(line("s td 1 2 2\nb 1 1\n"), 1);
    }

    #[test]
    fn terminals() {
        let sets = parse_terminals("1 3\nc skip\n\n2 2\n", 3).unwrap();
        assert_eq!(sets, vec![vec![0, 2], vec![1]]);
        assert_eq!(parse_terminals("1 4\n", 3).unwrap_err().line, 1);
    }
}
