//! Permutations in one-line notation, reduction, lexicographic ranking and
//! chunked enumeration of `S_n`.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// A permutation `σ₁σ₂⋯σₙ` of `[n]`, stored with 1-indexed values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Permutation {
    values: Vec<usize>,
}

/// `σ⁻¹`: the position (1-indexed) of each value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PositionMap {
    positions: Vec<usize>,
}

impl Permutation {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n];
        for &v in &values {
            if v == 0 || v > n {
                return Err(Error::InvalidPermutation(format!(
                    "value {v} is outside 1..={n}"
                )));
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::InvalidPermutation(format!("value {v} repeats")));
            }
        }
        Ok(Permutation { values })
    }

    pub(crate) fn from_vec_unchecked(values: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation { values }
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            values: (1..=n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn into_values(self) -> Vec<usize> {
        self.values
    }

    /// `σ(i)` for a 1-indexed position `i`.
    pub fn at(&self, position: usize) -> usize {
        self.values[position - 1]
    }

    pub fn inverse(&self) -> PositionMap {
        PositionMap::of(&self.values)
    }

    /// Positions reversed and values complemented.
    pub fn reverse_complement(&self) -> Permutation {
        let n = self.len();
        Permutation {
            values: self.values.iter().rev().map(|&v| n + 1 - v).collect(),
        }
    }

    /// Lexicographic rank in `S_n`, starting at 0.
    pub fn rank(&self) -> u64 {
        let n = self.len();
        let mut rank = 0u64;
        for i in 0..n {
            let smaller = self.values[i + 1..]
                .iter()
                .filter(|&&v| v < self.values[i])
                .count() as u64;
            rank += smaller * factorial_u64(n - 1 - i);
        }
        rank
    }

    /// The permutation with lexicographic rank `index` in `S_n`.
    pub fn unrank(n: usize, index: u64) -> Result<Self> {
        if n > 20 || index >= factorial_u64(n) {
            return Err(Error::IndexOutOfRange { n, index });
        }
        let mut pool: Vec<usize> = (1..=n).collect();
        let mut rest = index;
        let mut values = Vec::with_capacity(n);
        for i in (0..n).rev() {
            let f = factorial_u64(i);
            let pick = (rest / f) as usize;
            rest %= f;
            values.push(pool.remove(pick));
        }
        Ok(Permutation { values })
    }
}

impl PositionMap {
    pub(crate) fn of(values: &[usize]) -> Self {
        let mut positions = vec![0; values.len()];
        for (i, &v) in values.iter().enumerate() {
            positions[v - 1] = i + 1;
        }
        PositionMap { positions }
    }

    /// `σ⁻¹(v)`.
    pub fn position_of(&self, value: usize) -> usize {
        self.positions[value - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.positions
    }

    pub fn to_permutation(&self) -> Permutation {
        Permutation {
            values: self.positions.clone(),
        }
    }
}

/// `red(q)`: replaces the i-th smallest entry by `i`.
pub fn reduce<T: Ord + Copy + Into<i64>>(seq: &[T]) -> Result<Permutation> {
    let mut order: Vec<usize> = (0..seq.len()).collect();
    order.sort_by_key(|&i| seq[i]);
    if let Some(w) = order.windows(2).find(|w| seq[w[0]] == seq[w[1]]) {
        return Err(Error::DuplicateEntry(seq[w[0]].into()));
    }
    let mut values = vec![0; seq.len()];
    for (rank, &i) in order.iter().enumerate() {
        values[i] = rank + 1;
    }
    Ok(Permutation { values })
}

pub(crate) fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Advances `values` to the next permutation in lexicographic order.
/// Returns `false` (leaving the slice untouched) when it is the last one.
pub fn next_lex<T: Ord>(values: &mut [T]) -> bool {
    let n = values.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && values[i - 1] >= values[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while values[j] <= values[i - 1] {
        j -= 1;
    }
    values.swap(i - 1, j);
    values[i..].reverse();
    true
}

/// Splits `0..total` into at most `chunks` contiguous, non-empty ranges.
pub fn chunk_ranges(total: u64, chunks: usize) -> Vec<Range<u64>> {
    let chunks = (chunks.max(1) as u64).min(total.max(1));
    let base = total / chunks;
    let extra = total % chunks;
    let mut start = 0;
    (0..chunks)
        .map(|c| {
            let len = base + u64::from(c < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .filter(|r| !r.is_empty() || total == 0)
        .collect()
}

/// Lexicographic stream over a rank interval of `S_n`.
#[derive(Debug, Clone)]
pub struct LexPermutations {
    current: Vec<usize>,
    remaining: u64,
}

impl Iterator for LexPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        if self.remaining == 0 {
            return None;
        }
        let out = Permutation {
            values: self.current.clone(),
        };
        self.remaining -= 1;
        if self.remaining > 0 {
            next_lex(&mut self.current);
        }
        Some(out)
    }
}

/// The permutations of `S_n` whose lexicographic ranks lie in `range`
/// (clamped to `0..n!`), in order. Refuses `n > cap`.
pub fn enumerate_sn(n: usize, range: Range<u64>, cap: usize) -> Result<LexPermutations> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let total = factorial_u64(n);
    let start = range.start.min(total);
    let end = range.end.min(total);
    let remaining = end.saturating_sub(start);
    let current = if remaining > 0 {
        Permutation::unrank(n, start)?.values
    } else {
        Vec::new()
    };
    Ok(LexPermutations { current, remaining })
}

/// Calls `f` on every permutation with rank in `range`, reusing one buffer.
pub(crate) fn for_each_in_range(n: usize, range: Range<u64>, mut f: impl FnMut(&[usize])) {
    if range.is_empty() {
        return;
    }
    let mut current = Permutation::unrank(n, range.start)
        .expect("range checked by caller")
        .values;
    for _ in range.start..range.end {
        f(&current);
        next_lex(&mut current);
    }
}

impl fmt::Display for Permutation {
    /// Digits without separators for `n ≤ 9`, comma-separated otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 9 {
            for v in &self.values {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
            f.write_str(&parts.join(","))
        }
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        let values: Vec<usize> = if t.contains(',') {
            t.split(',')
                .map(|p| {
                    p.trim().parse::<usize>().map_err(|_| {
                        Error::InvalidPermutation(format!("bad entry {p:?} in {text:?}"))
                    })
                })
                .collect::<Result<_>>()?
        } else {
            t.chars()
                .map(|c| {
                    c.to_digit(10).map(|d| d as usize).ok_or_else(|| {
                        Error::InvalidPermutation(format!("bad character {c:?} in {text:?}"))
                    })
                })
                .collect::<Result<_>>()?
        };
        Permutation::new(values)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<usize>::deserialize(d)?;
        Permutation::new(values).map_err(serde::de::Error::custom)
    }
}
