//! Bivincular patterns `(P, C, D)`, occurrence search and the pattern text
//! grammar.
//!
//! Text form: the permutation word with each block of position-adjacent
//! entries in square brackets, then an optional value-adjacency suffix:
//! `2[31]4`, `3[12];D=2`, `[4312];D={1,3}`. Patterns of length ten or more
//! separate entries with commas: `10,[3,1],2,...`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::numbers::Integer;
use crate::perm::{reduce, Permutation};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    perm: Permutation,
    c: Vec<usize>,
    d: Vec<usize>,
}

/// One occurrence: `values` increasing, `positions[i] = σ⁻¹(values[i])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Occurrence {
    pub values: Vec<usize>,
    pub positions: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PatternJson {
    perm: Vec<usize>,
    #[serde(rename = "C", default)]
    c: Vec<usize>,
    #[serde(rename = "D", default)]
    d: Vec<usize>,
}

impl Pattern {
    pub fn new(perm: Permutation, c: Vec<usize>, d: Vec<usize>) -> Result<Self> {
        let k = perm.len();
        if k == 0 {
            return Err(Error::InvalidPattern("pattern must have length ≥ 1".into()));
        }
        let norm = |mut s: Vec<usize>, name: &str| -> Result<Vec<usize>> {
            s.sort_unstable();
            s.dedup();
            if let Some(&bad) = s.iter().find(|&&i| i == 0 || i >= k) {
                return Err(Error::InvalidPattern(format!(
                    "{name} index {bad} outside 1..={}",
                    k - 1
                )));
            }
            Ok(s)
        };
        let c = norm(c, "C")?;
        let d = norm(d, "D")?;
        Ok(Pattern { perm, c, d })
    }

    pub fn classical(perm: Permutation) -> Self {
        Pattern {
            perm,
            c: Vec::new(),
            d: Vec::new(),
        }
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    /// Position-adjacency set `C`, sorted.
    pub fn adj_c(&self) -> &[usize] {
        &self.c
    }

    /// Value-adjacency set `D`, sorted.
    pub fn adj_d(&self) -> &[usize] {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn c_count(&self) -> usize {
        self.c.len()
    }

    pub fn d_count(&self) -> usize {
        self.d.len()
    }

    pub fn is_classical(&self) -> bool {
        self.c.is_empty() && self.d.is_empty()
    }

    pub fn is_vincular(&self) -> bool {
        self.d.is_empty()
    }

    /// Sizes of the maximal position-adjacent blocks, left to right.
    pub fn blocks(&self) -> Vec<usize> {
        let mut sizes = vec![1];
        for i in 1..self.len() {
            if self.c.binary_search(&i).is_ok() {
                *sizes.last_mut().unwrap() += 1;
            } else {
                sizes.push(1);
            }
        }
        sizes
    }

    pub fn block_count(&self) -> usize {
        self.len() - self.c.len()
    }

    pub fn reverse_complement(&self) -> Pattern {
        let k = self.len();
        let flip = |s: &[usize]| s.iter().map(|&i| k - i).collect();
        Pattern::new(self.perm.reverse_complement(), flip(&self.c), flip(&self.d))
            .expect("flipped indices stay in range")
    }

    pub fn matcher(&self) -> Matcher {
        Matcher::new(self)
    }

    pub fn is_occurrence(&self, sigma: &Permutation, values: &[usize]) -> Result<bool> {
        let k = self.len();
        let n = sigma.len();
        if values.len() != k {
            return Err(Error::InvalidTuple(format!(
                "expected {k} values, got {}",
                values.len()
            )));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTuple("values must be strictly increasing".into()));
        }
        if values.iter().any(|&v| v == 0 || v > n) {
            return Err(Error::InvalidTuple(format!("values must lie in 1..={n}")));
        }
        let inv = sigma.inverse();
        let w: Vec<usize> = values.iter().map(|&t| inv.position_of(t)).collect();
        // red(σ restricted to the chosen values) read left to right must be P,
        // i.e. the entry at the j-th smallest position has rank P_j.
        let mut by_pos: Vec<usize> = (0..k).collect();
        by_pos.sort_by_key(|&i| w[i]);
        let word: Vec<i64> = by_pos.iter().map(|&i| values[i] as i64).collect();
        if reduce(&word)? != self.perm {
            return Ok(false);
        }
        let p = self.perm.values();
        for &i in &self.c {
            if w[p[i] - 1] != w[p[i - 1] - 1] + 1 {
                return Ok(false);
            }
        }
        for &i in &self.d {
            if values[i] != values[i - 1] + 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn occurrences(&self, sigma: &Permutation) -> Vec<Occurrence> {
        let mut out = Vec::new();
        self.matcher().for_each(sigma.values(), |t, w| {
            out.push(Occurrence {
                values: t.to_vec(),
                positions: w.to_vec(),
            })
        });
        out.sort();
        out
    }

    pub fn count(&self, sigma: &Permutation) -> Integer {
        Integer::from(self.matcher().count(sigma.values()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("pattern serializes")
    }

    /// Accepts either the text grammar or the JSON object form.
    pub fn parse_any(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::PatternSyntax {
                pos: e.column().saturating_sub(1),
                msg: e.to_string(),
            })
        } else {
            text.parse()
        }
    }
}

impl Serialize for Pattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PatternJson {
            perm: self.perm.values().to_vec(),
            c: self.c.clone(),
            d: self.d.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PatternJson::deserialize(d)?;
        let perm = Permutation::new(raw.perm).map_err(serde::de::Error::custom)?;
        Pattern::new(perm, raw.c, raw.d).map_err(serde::de::Error::custom)
    }
}

/// Precompiled occurrence search for one pattern.
///
/// Pattern positions are assigned left to right. Each new entry is checked
/// against the already-placed entries of nearest lower and upper rank, which
/// is enough for order-isomorphism; `C` forces the next position and `D` is
/// checked as soon as both ranks of a pair are placed.
#[derive(Clone, Debug)]
pub struct Matcher {
    k: usize,
    /// 0-based rank of the entry at each pattern position.
    rank: Vec<usize>,
    /// Pattern position holding each rank.
    pos_of_rank: Vec<usize>,
    lower: Vec<Option<usize>>,
    upper: Vec<Option<usize>>,
    /// `adjacent[i]`: positions `i` and `i+1` (0-based) are consecutive.
    adjacent: Vec<bool>,
    /// `value_next[j]`: ranks `j` and `j+1` carry consecutive values.
    value_next: Vec<bool>,
    /// Entries after position `i` that must follow it in one contiguous run.
    forced_tail: Vec<usize>,
    fast: Option<FastPair>,
}

#[derive(Clone, Copy, Debug)]
struct FastPair {
    descent: bool,
    consecutive: bool,
}

impl Matcher {
    pub fn new(pat: &Pattern) -> Self {
        let k = pat.len();
        let rank: Vec<usize> = pat.perm.values().iter().map(|&v| v - 1).collect();
        let mut pos_of_rank = vec![0; k];
        for (i, &r) in rank.iter().enumerate() {
            pos_of_rank[r] = i;
        }
        let mut lower = vec![None; k];
        let mut upper = vec![None; k];
        for i in 0..k {
            lower[i] = (0..i).filter(|&j| rank[j] < rank[i]).max_by_key(|&j| rank[j]);
            upper[i] = (0..i).filter(|&j| rank[j] > rank[i]).min_by_key(|&j| rank[j]);
        }
        let mut adjacent = vec![false; k];
        for &i in &pat.c {
            adjacent[i - 1] = true;
        }
        let mut value_next = vec![false; k];
        for &i in &pat.d {
            value_next[i - 1] = true;
        }
        let mut forced_tail = vec![0; k];
        for i in (0..k.saturating_sub(1)).rev() {
            if adjacent[i] {
                forced_tail[i] = forced_tail[i + 1] + 1;
            }
        }
        let fast = (k == 2 && adjacent[0]).then(|| FastPair {
            descent: rank[0] == 1,
            consecutive: value_next[0],
        });
        Matcher {
            k,
            rank,
            pos_of_rank,
            lower,
            upper,
            adjacent,
            value_next,
            forced_tail,
            fast,
        }
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    /// Calls `f(values, positions)` for every occurrence in `sigma` (one-line
    /// values, 1-indexed). Values are increasing; positions are 1-indexed and
    /// listed in value order. Visit order is unspecified.
    pub fn for_each(&self, sigma: &[usize], mut f: impl FnMut(&[usize], &[usize])) {
        let n = sigma.len();
        if self.k > n {
            return;
        }
        if let Some(fp) = self.fast {
            for i in 0..n - 1 {
                let (a, b) = (sigma[i], sigma[i + 1]);
                if (a > b) != fp.descent || (fp.consecutive && a.abs_diff(b) != 1) {
                    continue;
                }
                if a < b {
                    f(&[a, b], &[i + 1, i + 2]);
                } else {
                    f(&[b, a], &[i + 2, i + 1]);
                }
            }
            return;
        }
        let mut pos = vec![0usize; self.k];
        let mut t = vec![0usize; self.k];
        let mut w = vec![0usize; self.k];
        self.extend(sigma, 0, 0, &mut pos, &mut t, &mut w, &mut f);
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        sigma: &[usize],
        i: usize,
        start: usize,
        pos: &mut [usize],
        t: &mut [usize],
        w: &mut [usize],
        f: &mut impl FnMut(&[usize], &[usize]),
    ) {
        if i == self.k {
            f(t, w);
            return;
        }
        let n = sigma.len();
        let forced = i > 0 && self.adjacent[i - 1];
        let last = n - (self.k - i);
        let end = if forced { start.min(last) } else { last };
        for p in start..=end {
            let v = sigma[p];
            if let Some(j) = self.lower[i] {
                if sigma[pos[j]] >= v {
                    continue;
                }
            }
            if let Some(j) = self.upper[i] {
                if sigma[pos[j]] <= v {
                    continue;
                }
            }
            let r = self.rank[i];
            if r > 0 && self.value_next[r - 1] {
                let q = self.pos_of_rank[r - 1];
                if q < i && sigma[pos[q]] + 1 != v {
                    continue;
                }
            }
            if r + 1 < self.k && self.value_next[r] {
                let q = self.pos_of_rank[r + 1];
                if q < i && sigma[pos[q]] != v + 1 {
                    continue;
                }
            }
            if p + self.forced_tail[i] >= n {
                break;
            }
            pos[i] = p;
            t[r] = v;
            w[r] = p + 1;
            self.extend(sigma, i + 1, p + 1, pos, t, w, f);
        }
    }

    pub fn count(&self, sigma: &[usize]) -> u64 {
        let mut c = 0u64;
        self.for_each(sigma, |_, _| c += 1);
        c
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.len();
        let sep = if k >= 10 { "," } else { "" };
        let mut i = 0;
        let mut first = true;
        for size in self.blocks() {
            if !first {
                f.write_str(sep)?;
            }
            first = false;
            let items: Vec<String> = (i..i + size)
                .map(|j| self.perm.values()[j].to_string())
                .collect();
            if size > 1 {
                write!(f, "[{}]", items.join(sep))?;
            } else {
                f.write_str(&items[0])?;
            }
            i += size;
        }
        match self.d.as_slice() {
            [] => Ok(()),
            [single] => write!(f, ";D={single}"),
            many => {
                let parts: Vec<String> = many.iter().map(|x| x.to_string()).collect();
                write!(f, ";D={{{}}}", parts.join(","))
            }
        }
    }
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::PatternSyntax {
        pos,
        msg: msg.into(),
    }
}

fn parse_index_set(text: &str, offset: usize) -> Result<Vec<usize>> {
    let t = text.trim();
    let inner = if let Some(rest) = t.strip_prefix('{') {
        rest.strip_suffix('}')
            .ok_or_else(|| syntax(offset + text.len(), "missing closing '}'"))?
    } else {
        t
    };
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| syntax(offset, format!("bad index {:?}", s.trim())))
        })
        .collect()
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (word, suffix) = match text.find(';') {
            Some(i) => (&text[..i], Some((i + 1, &text[i + 1..]))),
            None => (text, None),
        };
        let mut d = Vec::new();
        if let Some((off, s)) = suffix {
            let s_trim = s.trim_start();
            let lead = s.len() - s_trim.len();
            let body = s_trim
                .strip_prefix("D=")
                .ok_or_else(|| syntax(off + lead, "expected 'D=' after ';'"))?;
            d = parse_index_set(body, off + lead + 2)?;
        }

        let comma_mode = word.contains(',');
        let mut values = Vec::new();
        let mut c = Vec::new();
        let mut open: Option<usize> = None;
        let bytes = word.as_bytes();
        let mut i = 0;
        let mut expect_item = true;
        while i < bytes.len() {
            let ch = bytes[i] as char;
            match ch {
                ' ' | '\t' => i += 1,
                '[' => {
                    if open.is_some() {
                        return Err(syntax(i, "nested '['"));
                    }
                    if !expect_item && comma_mode {
                        return Err(syntax(i, "expected ','"));
                    }
                    open = Some(values.len());
                    i += 1;
                }
                ']' => {
                    let start = open.take().ok_or_else(|| syntax(i, "unmatched ']'"))?;
                    if values.len() == start {
                        return Err(syntax(i, "empty block"));
                    }
                    for j in start + 1..values.len() {
                        c.push(j);
                    }
                    i += 1;
                }
                ',' => {
                    if !comma_mode || expect_item {
                        return Err(syntax(i, "unexpected ','"));
                    }
                    expect_item = true;
                    i += 1;
                }
                '0'..='9' => {
                    if comma_mode {
                        if !expect_item {
                            return Err(syntax(i, "expected ','"));
                        }
                        let start = i;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                        let v = word[start..i]
                            .parse::<usize>()
                            .map_err(|_| syntax(start, "number too large"))?;
                        values.push(v);
                        expect_item = false;
                    } else {
                        values.push((bytes[i] - b'0') as usize);
                        i += 1;
                    }
                }
                _ => {
                    return Err(syntax(
                        i,
                        format!("unexpected character {:?}", &word[i..].chars().next().unwrap()),
                    ))
                }
            }
        }
        if open.is_some() {
            return Err(syntax(word.len(), "unclosed '['"));
        }
        if comma_mode && expect_item {
            return Err(syntax(word.len(), "trailing ','"));
        }
        if values.is_empty() {
            return Err(syntax(0, "empty pattern"));
        }
        let perm = Permutation::new(values).map_err(|e| match e {
            Error::InvalidPermutation(m) => Error::InvalidPattern(m),
            other => other,
        })?;
        Pattern::new(perm, c, d)
    }
}
