//! Merges of pattern copies, merge censuses, the moment formula they feed
//! and the closure of statistics under products.
//!
//! A merge of `P₁, …, P_r` onto a target of length `K` is a tuple of
//! increasing maps `mᵢ : [kᵢ] → [K]` on value ranks whose images cover
//! `[K]`, together with a target permutation `z` in which every copy keeps
//! its relative order. Position adjacencies of the copies must land on
//! adjacent positions of `z` and value adjacencies on consecutive values;
//! the target's `C` and `D` are exactly the unions of those images.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::factorial_basis::{to_factorial_combination, FactorialCombination, PolyTimesShiftedFactorial};
use crate::numbers::{binomial, factorial, Integer, Rational};
use crate::pattern::Pattern;
use crate::perm::{reduce, Permutation};
use crate::poly::ValuationPoly;
use crate::statistic::{SimpleStatistic, Statistic};
use crate::univariate::UniPoly;
use crate::{Error, Limits, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Merge {
    /// `maps[i][j]` is `mᵢ(j+1)`, 1-based target value ranks.
    pub maps: Vec<Vec<usize>>,
    pub target: Pattern,
}

/// Census key: target length, `|C|`, `|D|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CensusKey {
    pub k: usize,
    pub c: usize,
    pub d: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MergeCensus {
    pub counts: BTreeMap<CensusKey, Integer>,
    /// Whether every merged copy is vincular, so rows carry block counts.
    pub vincular: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub k: usize,
    pub c: usize,
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub blocks: Option<usize>,
    #[serde(with = "crate::numbers::serde_integer")]
    pub count: Integer,
}

impl MergeCensus {
    pub fn total(&self) -> Integer {
        self.counts.values().sum()
    }

    pub fn get(&self, k: usize, c: usize, d: usize) -> Integer {
        self.counts
            .get(&CensusKey { k, c, d })
            .cloned()
            .unwrap_or_else(Integer::zero)
    }

    /// `b(m, j′)`: merges of length `m` whose target has `j′` blocks.
    pub fn by_blocks(&self, m: usize, blocks: usize) -> Integer {
        self.counts
            .iter()
            .filter(|(key, _)| key.k == m && key.k - key.c == blocks)
            .map(|(_, v)| v.clone())
            .sum()
    }

    /// Merges of a given target length.
    pub fn by_length(&self, m: usize) -> Integer {
        self.counts
            .iter()
            .filter(|(key, _)| key.k == m)
            .map(|(_, v)| v.clone())
            .sum()
    }

    pub fn rows(&self) -> Vec<CensusRow> {
        self.counts
            .iter()
            .map(|(key, count)| CensusRow {
                k: key.k,
                c: key.c,
                d: key.d,
                blocks: self.vincular.then_some(key.k - key.c),
                count: count.clone(),
            })
            .collect()
    }
}

/// One copy in a merge, in the shape the enumerator needs.
struct Copy {
    k: usize,
    /// 0-based value rank at each pattern position.
    ranks: Vec<usize>,
    /// Pattern positions `(j, j+1)` forced adjacent, 0-based.
    c: Vec<usize>,
    /// Value ranks `j` (0-based) whose successor rank carries the next value.
    d: Vec<usize>,
}

impl Copy {
    fn of(p: &Pattern) -> Self {
        Copy {
            k: p.len(),
            ranks: p.perm().values().iter().map(|v| v - 1).collect(),
            c: p.adj_c().iter().map(|i| i - 1).collect(),
            d: p.adj_d().iter().map(|i| i - 1).collect(),
        }
    }
}

/// Glued target layout for one tuple of maps.
struct Layout {
    /// Glued runs of target values (0-based), in left-to-right order.
    blocks: Vec<Vec<usize>>,
    /// Bitmask of blocks that must precede each block.
    preds: Vec<u32>,
    /// Forced successor of each target value, if any.
    succ: Vec<Option<usize>>,
    c_count: usize,
    d_set: Vec<usize>,
}

fn layout(copies: &[Copy], maps: &[Vec<usize>], big_k: usize) -> Option<Layout> {
    let mut succ: Vec<Option<usize>> = vec![None; big_k];
    let mut pred: Vec<Option<usize>> = vec![None; big_k];
    for (cp, m) in copies.iter().zip(maps) {
        for &j in &cp.c {
            let a = m[cp.ranks[j]];
            let b = m[cp.ranks[j + 1]];
            match succ[a] {
                Some(x) if x != b => return None,
                _ => succ[a] = Some(b),
            }
            match pred[b] {
                Some(x) if x != a => return None,
                _ => pred[b] = Some(a),
            }
        }
    }
    let c_count = succ.iter().filter(|s| s.is_some()).count();
    let mut block_of = vec![usize::MAX; big_k];
    let mut index_in = vec![0usize; big_k];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for start in 0..big_k {
        if pred[start].is_some() {
            continue;
        }
        let id = blocks.len();
        let mut run = Vec::new();
        let mut cur = Some(start);
        while let Some(v) = cur {
            block_of[v] = id;
            index_in[v] = run.len();
            run.push(v);
            cur = succ[v];
        }
        blocks.push(run);
    }
    if block_of.iter().any(|&b| b == usize::MAX) {
        // A forced cycle.
        return None;
    }
    let mut preds = vec![0u32; blocks.len()];
    for (cp, m) in copies.iter().zip(maps) {
        for p in 0..cp.k - 1 {
            let a = m[cp.ranks[p]];
            let b = m[cp.ranks[p + 1]];
            let (ba, bb) = (block_of[a], block_of[b]);
            if ba == bb {
                if index_in[a] > index_in[b] {
                    return None;
                }
            } else {
                preds[bb] |= 1 << ba;
            }
        }
    }
    let mut d_set: Vec<usize> = copies
        .iter()
        .zip(maps)
        .flat_map(|(cp, m)| cp.d.iter().map(move |&j| m[j] + 1))
        .collect();
    d_set.sort_unstable();
    d_set.dedup();
    Some(Layout {
        blocks,
        preds,
        succ,
        c_count,
        d_set,
    })
}

/// Linear extensions of the block order.
fn count_extensions(preds: &[u32]) -> u64 {
    let b = preds.len();
    let full = (1usize << b) - 1;
    let mut f = vec![0u64; 1 << b];
    f[0] = 1;
    for mask in 0..full {
        let ways = f[mask];
        if ways == 0 {
            continue;
        }
        for (i, &p) in preds.iter().enumerate() {
            if mask >> i & 1 == 0 && (p as usize) & !mask == 0 {
                f[mask | 1 << i] += ways;
            }
        }
    }
    f[full]
}

fn for_each_extension(preds: &[u32], f: &mut impl FnMut(&[usize])) {
    fn go(preds: &[u32], mask: u32, order: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if order.len() == preds.len() {
            f(order);
            return;
        }
        for (i, &p) in preds.iter().enumerate() {
            if mask >> i & 1 == 0 && p & !mask == 0 {
                order.push(i);
                go(preds, mask | 1 << i, order, f);
                order.pop();
            }
        }
    }
    go(preds, 0, &mut Vec::new(), f);
}

/// Increasing maps for copies `idx..`, given the values already covered.
fn choose_maps(
    copies: &[Copy],
    big_k: usize,
    idx: usize,
    covered: u32,
    maps: &mut Vec<Vec<usize>>,
    f: &mut impl FnMut(&[Vec<usize>]),
) {
    let full = if big_k == 32 { u32::MAX } else { (1u32 << big_k) - 1 };
    if idx == copies.len() {
        if covered == full {
            f(maps);
        }
        return;
    }
    let remaining: usize = copies[idx..].iter().map(|c| c.k).sum();
    if (big_k - covered.count_ones() as usize) > remaining {
        return;
    }
    let cp = &copies[idx];
    let mut chosen = Vec::with_capacity(cp.k);
    let mut follows = vec![false; cp.k];
    for &j in &cp.d {
        follows[j + 1] = true;
    }
    subsets(big_k, cp.k, &follows, 0, &mut chosen, &mut |s: &[usize]| {
        let mask = s.iter().fold(covered, |acc, &v| acc | 1 << v);
        maps.push(s.to_vec());
        choose_maps(copies, big_k, idx + 1, mask, maps, f);
        maps.pop();
    });
}

/// Increasing `k`-subsets of `0..n` where flagged entries follow their
/// predecessor by exactly one.
fn subsets(n: usize, k: usize, follows: &[bool], start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    let i = cur.len();
    if i == k {
        f(cur);
        return;
    }
    if follows[i] {
        let v = cur[i - 1] + 1;
        if v < n {
            cur.push(v);
            subsets(n, k, follows, v + 1, cur, f);
            cur.pop();
        }
        return;
    }
    for v in start..n {
        if n - v < k - i {
            break;
        }
        cur.push(v);
        subsets(n, k, follows, v + 1, cur, f);
        cur.pop();
    }
}

fn check_letters(patterns: &[Pattern], limits: &Limits) -> Result<usize> {
    let letters: usize = patterns.iter().map(|p| p.len()).sum();
    if letters > limits.max_merge_letters || letters > 31 {
        return Err(Error::MergeCapExceeded {
            letters,
            cap: limits.max_merge_letters.min(31),
        });
    }
    Ok(letters)
}

/// Calls `f(maps, target)` for every merge onto targets of length `big_k`.
pub fn for_each_merge(patterns: &[Pattern], big_k: usize, mut f: impl FnMut(&[Vec<usize>], Pattern)) {
    let copies: Vec<Copy> = patterns.iter().map(Copy::of).collect();
    let mut maps = Vec::new();
    choose_maps(&copies, big_k, 0, 0, &mut maps, &mut |ms: &[Vec<usize>]| {
        let Some(lay) = layout(&copies, ms, big_k) else {
            return;
        };
        let maps_1: Vec<Vec<usize>> = ms.iter().map(|m| m.iter().map(|v| v + 1).collect()).collect();
        for_each_extension(&lay.preds, &mut |order: &[usize]| {
            let z: Vec<usize> = order
                .iter()
                .flat_map(|&b| lay.blocks[b].iter().map(|v| v + 1))
                .collect();
            let c: Vec<usize> = (0..big_k - 1)
                .filter(|&p| lay.succ[z[p] - 1] == Some(z[p + 1] - 1))
                .map(|p| p + 1)
                .collect();
            let target = Pattern::new(
                Permutation::from_vec_unchecked(z),
                c,
                lay.d_set.clone(),
            )
            .expect("target indices are in range");
            f(&maps_1, target);
        });
    });
}

/// All ordered merges of `patterns` onto targets of length `target_len`.
pub fn enumerate_merges(patterns: &[Pattern], target_len: usize) -> Result<Vec<Merge>> {
    enumerate_merges_with(patterns, target_len, &Limits::from_env())
}

pub fn enumerate_merges_with(patterns: &[Pattern], target_len: usize, limits: &Limits) -> Result<Vec<Merge>> {
    let letters = check_letters(patterns, limits)?;
    let longest = patterns.iter().map(|p| p.len()).max().unwrap_or(0);
    if target_len < longest || target_len > letters {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for_each_merge(patterns, target_len, |maps, target| {
        out.push(Merge {
            maps: maps.to_vec(),
            target,
        })
    });
    Ok(out)
}

/// Counts merges of `patterns` by `(k̃, c̃, d̃)` over every target length.
pub fn merge_census_of(patterns: &[Pattern], limits: &Limits) -> Result<MergeCensus> {
    let letters = check_letters(patterns, limits)?;
    let longest = patterns.iter().map(|p| p.len()).max().unwrap_or(0);
    let copies: Vec<Copy> = patterns.iter().map(Copy::of).collect();
    let mut jobs: Vec<(usize, Vec<usize>)> = Vec::new();
    for big_k in longest..=letters {
        let mut follows = vec![false; copies[0].k];
        for &j in &copies[0].d {
            follows[j + 1] = true;
        }
        subsets(big_k, copies[0].k, &follows, 0, &mut Vec::new(), &mut |s: &[usize]| {
            jobs.push((big_k, s.to_vec()))
        });
    }
    let partials: Vec<HashMap<CensusKey, u64>> = jobs
        .par_iter()
        .map(|(big_k, first)| {
            let mut local: HashMap<CensusKey, u64> = HashMap::new();
            let covered = first.iter().fold(0u32, |acc, &v| acc | 1 << v);
            let mut maps = vec![first.clone()];
            choose_maps(&copies, *big_k, 1, covered, &mut maps, &mut |ms: &[Vec<usize>]| {
                if let Some(lay) = layout(&copies, ms, *big_k) {
                    let ways = count_extensions(&lay.preds);
                    if ways > 0 {
                        let key = CensusKey {
                            k: *big_k,
                            c: lay.c_count,
                            d: lay.d_set.len(),
                        };
                        *local.entry(key).or_insert(0) += ways;
                    }
                }
            });
            local
        })
        .collect();
    let mut counts: BTreeMap<CensusKey, Integer> = BTreeMap::new();
    for part in partials {
        for (key, v) in part {
            *counts.entry(key).or_insert_with(Integer::zero) += v;
        }
    }
    Ok(MergeCensus {
        counts,
        vincular: patterns.iter().all(|p| p.is_vincular()),
    })
}

/// The census of `r` copies of `pat`.
pub fn merge_census(pat: &Pattern, r: usize) -> Result<MergeCensus> {
    merge_census_with(pat, r, &Limits::from_env())
}

pub fn merge_census_with(pat: &Pattern, r: usize, limits: &Limits) -> Result<MergeCensus> {
    if r == 0 {
        return Err(Error::OutOfRange("number of copies r must be ≥ 1".into()));
    }
    merge_census_of(&vec![pat.clone(); r], limits)
}

/// Which factorial the moment formula multiplies each census row by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorialVariant {
    /// `(n − k̃)!`, the merged pattern's own length.
    #[default]
    TargetLength,
    /// `(n − k)!` with `k` the length of the merged pattern copies.
    PatternLength,
}

/// `M(cnt_P^r, n) = Σ w·C(n−c̃, k̃−c̃)·C(n−d̃, k̃−d̃)·(n−k̃)!`.
pub fn corollary_from_census(census: &MergeCensus, k: usize, n: usize, variant: FactorialVariant) -> Rational {
    let n_i = n as i64;
    let mut total = Integer::zero();
    for (key, w) in &census.counts {
        if n < key.k {
            continue;
        }
        let (kt, ct, dt) = (key.k as i64, key.c as i64, key.d as i64);
        let fact = match variant {
            FactorialVariant::TargetLength => factorial((n - key.k) as u64),
            FactorialVariant::PatternLength => factorial((n - k) as u64),
        };
        total += w * binomial(n_i - ct, kt - ct) * binomial(n_i - dt, kt - dt) * fact;
    }
    Rational::from_integer(total)
}

pub fn corollary_moment(pat: &Pattern, r: usize, n: usize) -> Result<Rational> {
    let census = merge_census(pat, r)?;
    Ok(corollary_from_census(&census, pat.len(), n, FactorialVariant::TargetLength))
}

/// The census formula as a shifted-factorial combination, valid for
/// `n ≥ max(c̃, d̃)` over the census.
pub fn corollary_combination(census: &MergeCensus) -> FactorialCombination {
    let mut out = FactorialCombination::zero();
    let mut valid = 0i64;
    for (key, w) in &census.counts {
        let (kt, ct, dt) = (key.k as i64, key.c as i64, key.d as i64);
        // C(n−d̃, k̃−d̃)·(n−k̃)! = (n−d̃)!/(k̃−d̃)!
        let poly = UniPoly::binomial_shifted(ct, (kt - ct) as u64).scale(&Rational::new(
            w.clone(),
            factorial((kt - dt) as u64),
        ));
        let term = to_factorial_combination(&PolyTimesShiftedFactorial { poly, shift: dt });
        out = out.add(&term);
        valid = valid.max(ct).max(dt);
    }
    out.with_valid_from(valid)
}

/// Triples `(π, x, y)` with `π ∈ S_r` and `x, y` subsequences of `π`
/// reducing to `σ`, `σ′` and sharing exactly `2k − r` entries.
pub fn sigma_pair_count(sigma: &Permutation, sigma2: &Permutation, r: usize) -> Result<Integer> {
    let k = sigma.len();
    if sigma2.len() != k {
        return Err(Error::Precondition("σ and σ′ must have the same length".into()));
    }
    if r < k || r > 2 * k {
        return Err(Error::Precondition(format!("need k ≤ r ≤ 2k, got k = {k}, r = {r}")));
    }
    let cap = Limits::from_env().max_n;
    if r > cap {
        return Err(Error::CapExceeded { n: r, cap });
    }
    let overlap = (2 * k - r) as u32;
    // Position subsets of size k.
    let mut subsets_k: Vec<u32> = Vec::new();
    subsets(r, k, &vec![false; k], 0, &mut Vec::new(), &mut |s: &[usize]| {
        subsets_k.push(s.iter().fold(0u32, |acc, &p| acc | 1 << p))
    });
    let total = factorial_usize(r);
    let count: u64 = (0..total)
        .into_par_iter()
        .map(|idx| {
            let pi = Permutation::unrank(r, idx).expect("rank in range");
            let v = pi.values();
            let matching = |target: &Permutation| -> Vec<u32> {
                subsets_k
                    .iter()
                    .copied()
                    .filter(|&mask| {
                        let sub: Vec<usize> = (0..r).filter(|p| mask >> p & 1 == 1).map(|p| v[p]).collect();
                        reduce(&sub.iter().map(|&x| x as i64).collect::<Vec<_>>()).ok().as_ref() == Some(target)
                    })
                    .collect()
            };
            let xs = matching(sigma);
            let ys = if sigma2 == sigma { xs.clone() } else { matching(sigma2) };
            let mut c = 0u64;
            for &x in &xs {
                for &y in &ys {
                    if (x & y).count_ones() == overlap {
                        c += 1;
                    }
                }
            }
            c
        })
        .sum();
    Ok(Integer::from(count))
}

fn factorial_usize(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// `f^r` rewritten as a statistic on merged patterns (closure under
/// products). Terms with identical pattern and valuations are combined.
pub fn power_statistic(stat: &Statistic, r: usize, limits: &Limits) -> Result<Statistic> {
    if r == 0 {
        return Err(Error::OutOfRange("power r must be ≥ 1".into()));
    }
    let terms = stat.terms();
    let mut acc: HashMap<(Pattern, ValuationPoly, ValuationPoly), Rational> = HashMap::new();
    let mut order: Vec<(Pattern, ValuationPoly, ValuationPoly)> = Vec::new();
    let mut pick = vec![0usize; r];
    loop {
        let patterns: Vec<Pattern> = pick.iter().map(|&t| terms[t].1.pattern.clone()).collect();
        let letters = check_letters(&patterns, limits)?;
        let coef = pick
            .iter()
            .fold(Rational::one(), |a, &t| a * &terms[t].0);
        let longest = patterns.iter().map(|p| p.len()).max().unwrap_or(0);
        for big_k in longest..=letters {
            for_each_merge(&patterns, big_k, |maps, target| {
                let mut q1 = ValuationPoly::one(big_k);
                let mut q2 = ValuationPoly::one(big_k);
                for (&t, m) in pick.iter().zip(maps) {
                    let s: &SimpleStatistic = &terms[t].1;
                    q1 = q1.mul(&s.q1.remap(m, big_k));
                    q2 = q2.mul(&s.q2.remap(m, big_k));
                }
                let key = (target, q1, q2);
                match acc.get_mut(&key) {
                    Some(c) => *c += &coef,
                    None => {
                        acc.insert(key.clone(), coef.clone());
                        order.push(key);
                    }
                }
            });
        }
        // Next r-tuple of term indices.
        let mut i = r;
        loop {
            if i == 0 {
                let out: Vec<(Rational, SimpleStatistic)> = order
                    .into_iter()
                    .filter_map(|key| {
                        let c = acc.remove(&key)?;
                        (!c.is_zero()).then(|| {
                            (
                                c,
                                SimpleStatistic {
                                    pattern: key.0,
                                    q1: key.1,
                                    q2: key.2,
                                },
                            )
                        })
                    })
                    .collect();
                return if out.is_empty() {
                    // The zero statistic: keep one term with coefficient 0.
                    Ok(stat.scale(&Rational::zero()))
                } else {
                    Statistic::new(out)
                };
            }
            i -= 1;
            if pick[i] + 1 < terms.len() {
                pick[i] += 1;
                for p in pick.iter_mut().skip(i + 1) {
                    *p = 0;
                }
                break;
            }
        }
    }
}
