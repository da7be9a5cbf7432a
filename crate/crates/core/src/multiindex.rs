//! Multi-index combinatorics: monomial counts, the graded total order used to
//! linearize rows and columns of prolongation matrices, and the index codecs.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Number of multi-indices of height exactly `h` in `n` variables,
/// `(n-1+h)! / ((n-1)! h!)`; equivalently the dimension of the space of
/// degree-`h` homogeneous polynomials in `n` variables.
///
/// Negative heights count zero, which keeps downstream row counts well
/// defined when a formula shifts `h` below zero.
pub fn count(n: usize, h: i64) -> u64 {
    assert!(n >= 1, "count requires n >= 1");
    if h < 0 {
        return 0;
    }
    // binomial(n-1+h, h) by the multiplicative recurrence; each partial
    // product is itself a binomial, so the division is exact.
    let mut acc: u128 = 1;
    for r in 1..=(h as u128) {
        acc = acc * (n as u128 - 1 + r) / r;
    }
    u64::try_from(acc).expect("count overflow")
}

/// Number of multi-indices of height at most `h`: `sum_{l<=h} count(n, l)`,
/// computed directly as `count(n+1, h)`.
pub fn count_upto(n: usize, h: i64) -> u64 {
    count(n + 1, h)
}

/// An n-tuple of derivative orders.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        assert!(!entries.is_empty(), "multi-index needs at least one entry");
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex::new(vec![0; n])
    }

    /// The index `1_i` (1-based direction `i`).
    pub fn unit(n: usize, i: usize) -> Self {
        assert!((1..=n).contains(&i));
        let mut e = vec![0; n];
        e[i - 1] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn entry(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    /// Total derivative order `|I|`.
    pub fn height(&self) -> usize {
        self.0.iter().sum()
    }

    /// `I + 1_i` (1-based direction).
    pub fn raised(&self, i: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e[i - 1] += 1;
        MultiIndex(e)
    }

    /// `I - 1_i` if entry `i` is positive.
    pub fn lowered(&self, i: usize) -> Option<MultiIndex> {
        if self.0[i - 1] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[i - 1] -= 1;
        Some(MultiIndex(e))
    }

    /// Componentwise sum.
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim());
        MultiIndex::new(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference `self - other` when defined.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        assert_eq!(self.dim(), other.dim());
        let mut e = Vec::with_capacity(self.dim());
        for (a, b) in self.0.iter().zip(&other.0) {
            e.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(e))
    }

    pub fn iter_dirs_present(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i + 1)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Graded order: lower height first; within a height, the index whose entry
/// is smaller at the highest position where the two differ comes first.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        assert_eq!(self.dim(), other.dim(), "comparing multi-indices of different dimension");
        match self.height().cmp(&other.height()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for (a, b) in self.0.iter().zip(&other.0).rev() {
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Rank/unrank bijection between `{0, .., count(n+1,h_max)-1}` and all
/// multi-indices of height `<= h_max`, in the graded order above.
///
/// Rank 0 is the zero index and ranks `1..=n` are the units `1_i`; every
/// height-`h` index lands in `[count(n+1,h-1), count(n+1,h)-1]`.
#[derive(Debug, Clone)]
pub struct IndexTable {
    n: usize,
    h_max: usize,
    by_rank: Vec<MultiIndex>,
    rank_of: HashMap<MultiIndex, usize>,
}

impl IndexTable {
    pub fn new(n: usize, h_max: usize) -> Self {
        assert!(n >= 1);
        let mut by_rank: Vec<MultiIndex> = Vec::with_capacity(count_upto(n, h_max as i64) as usize);
        for h in 0..=h_max {
            let mut level: Vec<MultiIndex> = compositions(n, h).map(MultiIndex::new).collect();
            level.sort();
            by_rank.extend(level);
        }
        let rank_of = by_rank.iter().cloned().enumerate().map(|(r, ix)| (ix, r)).collect();
        IndexTable { n, h_max, by_rank, rank_of }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn h_max(&self) -> usize {
        self.h_max
    }

    /// Total number of ranked indices, `count(n+1, h_max)`.
    pub fn len(&self) -> usize {
        self.by_rank.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn unrank(&self, rank: usize) -> &MultiIndex {
        &self.by_rank[rank]
    }

    pub fn rank(&self, ix: &MultiIndex) -> Option<usize> {
        self.rank_of.get(ix).copied()
    }

    /// First rank of height `h`, i.e. `count(n+1, h-1)`.
    pub fn height_start(&self, h: usize) -> usize {
        count_upto(self.n, h as i64 - 1) as usize
    }

    /// Ranks of all indices of height exactly `h`.
    pub fn height_range(&self, h: usize) -> std::ops::Range<usize> {
        self.height_start(h)..self.height_start(h + 1)
    }

    /// Rank of `unrank(t) + 1_i`; errors once the result would exceed `h_max`.
    pub fn raise(&self, t: usize, dir: usize) -> Result<usize> {
        let ix = self.unrank(t);
        if ix.height() >= self.h_max {
            return Err(Error::TableExhausted { rank: t, dir, h_max: self.h_max });
        }
        let raised = ix.raised(dir);
        Ok(self.rank(&raised).expect("raised index within table"))
    }

    /// Rank of `unrank(t) - 1_i`, if entry `i` is positive.
    pub fn lower(&self, t: usize, dir: usize) -> Option<usize> {
        let low = self.unrank(t).lowered(dir)?;
        self.rank(&low)
    }
}

/// All multi-indices of height exactly `h`, in the graded order.
pub fn indices_of_height(n: usize, h: usize) -> Vec<MultiIndex> {
    let mut level: Vec<MultiIndex> = compositions(n, h).map(MultiIndex::new).collect();
    level.sort();
    level
}

/// All n-tuples of non-negative integers summing to `h`.
fn compositions(n: usize, h: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut stack = vec![(Vec::with_capacity(n), h)];
    std::iter::from_fn(move || {
        while let Some((prefix, rest)) = stack.pop() {
            if prefix.len() + 1 == n {
                let mut full = prefix;
                full.push(rest);
                return Some(full);
            }
            // Push in descending order of the leading entry so that pop()
            // yields an ascending stream (cosmetic; callers sort anyway).
            for v in 0..=rest {
                let mut next = prefix.clone();
                next.push(v);
                stack.push((next, rest - v));
            }
        }
        None
    })
}

/// Splits a 1-based matrix row index as `i = u + q*t` with `u` in `1..=q`:
/// `u` is the equation number inside the block, `t` the rank of the
/// derivative multi-index applied to it.
pub fn decode_row(i: usize, q: usize) -> (usize, usize) {
    assert!(i >= 1 && q >= 1);
    let t = (i - 1) / q;
    (i - q * t, t)
}

/// Inverse of [`decode_row`].
pub fn encode_row(u: usize, t: usize, q: usize) -> usize {
    assert!((1..=q).contains(&u));
    u + q * t
}

/// Splits a 1-based matrix column index as `j = v + p*s` with `v` in `1..=p`.
pub fn decode_col(j: usize, p: usize) -> (usize, usize) {
    decode_row(j, p)
}

/// Inverse of [`decode_col`].
pub fn encode_col(v: usize, s: usize, p: usize) -> usize {
    encode_row(v, s, p)
}
