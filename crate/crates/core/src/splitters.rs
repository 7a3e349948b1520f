//! Seeded color-coding families.
//!
//! Members are sampled independently: a subset family includes every element
//! with probability `a/(a+b)`, a coloring family gives element `v` color `i`
//! with probability `a_i / Σ a_j`. The number of samples is
//! `⌈C·(s·ln max(n,2) + ln(1/δ))⌉` with `s` the budget total and
//! `C = s^s / Π a_i^{a_i}`. When enumerating everything is no more expensive
//! (or the universe is tiny) the family is exhaustive instead.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::VertexSet;

/// Families over a universe this small are always exhaustive.
pub const EXHAUSTIVE_LIMIT: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitterError {
    #[error("failure probability {0} is not in (0, 1)")]
    InvalidDelta(f64),
    #[error("a coloring family needs at least one color")]
    NoColors,
    #[error("expected {expected} budgets, got {got}")]
    BudgetCount { expected: usize, got: usize },
    #[error("family would need {0} members")]
    TooLarge(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FamilyMode {
    /// Exhaustive when that is no larger than the sampled family.
    #[default]
    Auto,
    /// Always sample, regardless of universe size.
    Sampled,
}

/// Hands out per-call seeds derived from one base seed and a call counter.
#[derive(Debug, Clone)]
pub struct SeedSequence {
    base: u64,
    counter: u64,
}

impl SeedSequence {
    pub fn new(base: u64) -> Self {
        SeedSequence { base, counter: 0 }
    }

    pub fn next_seed(&mut self) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base);
        rng.set_stream(self.counter);
        self.counter += 1;
        rng.random()
    }

    pub fn calls(&self) -> u64 {
        self.counter
    }
}

/// `⌈C·(s·ln max(n,2) + ln(1/δ))⌉` for the given budgets, as a float so that
/// absurd sizes can be detected rather than overflowing.
pub fn sample_count(n: usize, budgets: &[usize], delta: f64) -> f64 {
    let xlnx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    let s: usize = budgets.iter().sum();
    let ln_c = xlnx(s as f64) - budgets.iter().map(|&a| xlnx(a as f64)).sum::<f64>();
    let reps = s as f64 * (n.max(2) as f64).ln() + (1.0 / delta).ln();
    (ln_c.exp() * reps).ceil()
}

/// Samples beyond this are refused; the caller asked for something infeasible.
const SAMPLE_CEILING: f64 = 5e7;

fn check_delta(delta: f64) -> Result<(), SplitterError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(SplitterError::InvalidDelta(delta))
    }
}

fn exhaustive_size(r: usize, n: usize) -> Option<u64> {
    (r as u64).checked_pow(u32::try_from(n).ok()?)
}

#[derive(Debug, Clone)]
enum SubsetMembers {
    All,
    Listed(Vec<VertexSet>),
}

/// Subsets `S` of `0..n` such that every disjoint `(A, B)` with `|A| ≤ a`,
/// `|B| ≤ b` has, with probability `1 - δ`, some `S ⊇ A` avoiding `B`.
#[derive(Debug, Clone)]
pub struct SubsetFamily {
    n: usize,
    a: usize,
    b: usize,
    seed: u64,
    delta: f64,
    members: SubsetMembers,
}

pub fn subset_family(n: usize, a: usize, b: usize, seed: u64, delta: f64) -> Result<SubsetFamily, SplitterError> {
    subset_family_with(n, a, b, seed, delta, FamilyMode::Auto)
}

pub fn subset_family_with(
    n: usize,
    a: usize,
    b: usize,
    seed: u64,
    delta: f64,
    mode: FamilyMode,
) -> Result<SubsetFamily, SplitterError> {
    check_delta(delta)?;
    let (a, b) = (a.min(n), b.min(n));
    let count = sample_count(n, &[a, b], delta);
    let all = exhaustive_size(2, n);
    let exhaustive = mode == FamilyMode::Auto
        && all.is_some_and(|size| size <= EXHAUSTIVE_LIMIT || size as f64 <= count);
    let members = if exhaustive {
        SubsetMembers::All
    } else {
        if count > SAMPLE_CEILING {
            return Err(SplitterError::TooLarge(count));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = HashSet::new();
        let mut list = Vec::new();
        let mut push = |set: VertexSet| {
            if seen.insert(set.clone()) {
                list.push(set);
            }
        };
        push(VertexSet::new(n));
        push(VertexSet::full(n));
        if a > 0 && b > 0 {
            let p = a as f64 / (a + b) as f64;
            for _ in 0..count as u64 {
                push(VertexSet::from_vertices(n, (0..n).filter(|_| rng.random_bool(p))));
            }
        }
        SubsetMembers::Listed(list)
    };
    Ok(SubsetFamily { n, a, b, seed, delta, members })
}

impl SubsetFamily {
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn budgets(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_exhaustive(&self) -> bool {
        matches!(self.members, SubsetMembers::All)
    }

    pub fn len(&self) -> usize {
        match &self.members {
            SubsetMembers::All => 1 << self.n,
            SubsetMembers::Listed(list) => list.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Members as bitmasks over `0..n`; only available for `n < 64`.
    pub fn masks(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        assert!(self.n < 64, "bitmask view needs a universe below 64");
        match &self.members {
            SubsetMembers::All => Box::new(0..1u64 << self.n),
            SubsetMembers::Listed(list) => {
                Box::new(list.iter().map(|s| s.iter().fold(0u64, |m, v| m | 1 << v)))
            }
        }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = VertexSet> + '_> {
        let n = self.n;
        match &self.members {
            SubsetMembers::All => Box::new(
                (0..1u64 << n).map(move |m| VertexSet::from_vertices(n, (0..n).filter(|v| m >> v & 1 == 1))),
            ),
            SubsetMembers::Listed(list) => Box::new(list.iter().cloned()),
        }
    }
}

#[derive(Debug, Clone)]
enum ColoringMembers {
    All,
    Listed(Vec<Vec<u8>>),
}

/// Functions `0..n → 0..r` such that every tuple of pairwise disjoint sets
/// `A_i` with `|A_i| ≤ a_i` is, with probability `1 - δ`, colored by some
/// member with `A_i` receiving color `i`.
#[derive(Debug, Clone)]
pub struct ColoringFamily {
    n: usize,
    budgets: Vec<usize>,
    seed: u64,
    delta: f64,
    members: ColoringMembers,
}

pub fn coloring_family(n: usize, r: usize, budgets: &[usize], seed: u64, delta: f64) -> Result<ColoringFamily, SplitterError> {
    coloring_family_with(n, r, budgets, seed, delta, FamilyMode::Auto)
}

pub fn coloring_family_with(
    n: usize,
    r: usize,
    budgets: &[usize],
    seed: u64,
    delta: f64,
    mode: FamilyMode,
) -> Result<ColoringFamily, SplitterError> {
    check_delta(delta)?;
    if r == 0 {
        return Err(SplitterError::NoColors);
    }
    if budgets.len() != r {
        return Err(SplitterError::BudgetCount { expected: r, got: budgets.len() });
    }
    assert!(r <= u8::MAX as usize, "at most 255 colors");
    let budgets: Vec<usize> = budgets.iter().map(|&a| a.min(n)).collect();
    let count = sample_count(n, &budgets, delta);
    let all = exhaustive_size(r, n);
    let exhaustive = mode == FamilyMode::Auto
        && all.is_some_and(|size| size <= EXHAUSTIVE_LIMIT || size as f64 <= count);
    let members = if exhaustive {
        ColoringMembers::All
    } else {
        let active = budgets.iter().filter(|&&a| a > 0).count();
        if active > 1 && count > SAMPLE_CEILING {
            return Err(SplitterError::TooLarge(count));
        }
        let mut seen = HashSet::new();
        let mut list = Vec::new();
        let mut push = |f: Vec<u8>| {
            if seen.insert(f.clone()) {
                list.push(f);
            }
        };
        for c in 0..r as u8 {
            push(vec![c; n]);
        }
        if active > 1 {
            let total: usize = budgets.iter().sum();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cumulative = Vec::with_capacity(r);
            let mut acc = 0;
            for &a in &budgets {
                acc += a;
                cumulative.push(acc);
            }
            for _ in 0..count as u64 {
                let f = (0..n)
                    .map(|_| {
                        let x = rng.random_range(0..total);
                        cumulative.iter().position(|&c| x < c).unwrap() as u8
                    })
                    .collect();
                push(f);
            }
        }
        ColoringMembers::Listed(list)
    };
    Ok(ColoringFamily { n, budgets, seed, delta, members })
}

impl ColoringFamily {
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn colors(&self) -> usize {
        self.budgets.len()
    }

    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_exhaustive(&self) -> bool {
        matches!(self.members, ColoringMembers::All)
    }

    pub fn len(&self) -> usize {
        match &self.members {
            ColoringMembers::All => exhaustive_size(self.colors(), self.n).unwrap() as usize,
            ColoringMembers::Listed(list) => list.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Members as color vectors indexed by element.
    pub fn iter(&self) -> Box<dyn Iterator<Item = Vec<u8>> + '_> {
        match &self.members {
            ColoringMembers::All => Box::new(AllColorings::new(self.n, self.colors() as u8)),
            ColoringMembers::Listed(list) => Box::new(list.iter().cloned()),
        }
    }
}

/// Odometer over `0..r` vectors of length `n`, first element fastest.
struct AllColorings {
    current: Option<Vec<u8>>,
    r: u8,
}

impl AllColorings {
    fn new(n: usize, r: u8) -> Self {
        AllColorings { current: Some(vec![0; n]), r }
    }
}

impl Iterator for AllColorings {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = 0;
        loop {
            if i == cur.len() {
                self.current = None;
                break;
            }
            cur[i] += 1;
            if cur[i] < self.r {
                break;
            }
            cur[i] = 0;
            i += 1;
        }
        Some(out)
    }
}
