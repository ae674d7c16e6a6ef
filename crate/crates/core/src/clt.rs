//! Checks behind the normal and Poisson limit laws: the merge-count
//! inequality for classical patterns, its averaged form, leading variance
//! coefficients, the vincular inequality, the configuration census and
//! convergence of adjacency moments to Bell numbers.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::{adjacency_moment, BlockStructure};
use crate::merge::{enumerate_merges_with, merge_census_with, sigma_pair_count, MergeCensus};
use crate::numbers::{bell, binomial, factorial, falling_factorial, serde_integer, serde_rational, to_f64, Integer, Rational};
use crate::pattern::Pattern;
use crate::perm::{enumerate_sn, Permutation};
use crate::univariate::UniPoly;
use crate::{Error, Limits, Result};

fn check_pair_cap(k: usize, limits: &Limits) -> Result<()> {
    let r = 2 * k - 1;
    if r > limits.max_n {
        return Err(Error::CapExceeded { n: r, cap: limits.max_n });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BursteinReport {
    pub sigma: Permutation,
    #[serde(with = "serde_integer")]
    pub a: Integer,
    #[serde(with = "serde_integer")]
    pub bound: Integer,
    pub holds: bool,
}

/// `a_σ(2k−1) > C(2k−1, k)²`.
pub fn burstein_check(sigma: &Permutation) -> Result<BursteinReport> {
    let k = sigma.len();
    if k == 0 {
        return Err(Error::Precondition("σ must be nonempty".into()));
    }
    check_pair_cap(k, &Limits::from_env())?;
    let a = sigma_pair_count(sigma, sigma, 2 * k - 1)?;
    let b = binomial(2 * k as i64 - 1, k as i64);
    let bound = &b * &b;
    Ok(BursteinReport {
        sigma: sigma.clone(),
        holds: a > bound,
        a,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretationReport {
    pub sigma: Permutation,
    #[serde(with = "serde_rational")]
    pub mean: Rational,
    #[serde(with = "serde_integer")]
    pub expected: Integer,
    pub holds: bool,
    pub counts: Vec<PairCount>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub sigma2: Permutation,
    #[serde(with = "serde_integer")]
    pub count: Integer,
}

/// Mean of `a_{σ,σ′}(2k−1)` over `σ′ ∈ S_k`, against `C(2k−1, k)²`.
pub fn interpretation_mean(sigma: &Permutation) -> Result<InterpretationReport> {
    let k = sigma.len();
    if k == 0 {
        return Err(Error::Precondition("σ must be nonempty".into()));
    }
    let limits = Limits::from_env();
    check_pair_cap(k, &limits)?;
    let others: Vec<Permutation> = enumerate_sn(k, 0..u64::MAX, limits.max_n)?.collect();
    let counts = others
        .par_iter()
        .map(|s2| {
            Ok(PairCount {
                sigma2: s2.clone(),
                count: sigma_pair_count(sigma, s2, 2 * k - 1)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total: Integer = counts.iter().map(|c| c.count.clone()).sum();
    let mean = Rational::new(total, factorial(k as u64));
    let b = binomial(2 * k as i64 - 1, k as i64);
    let expected = &b * &b;
    Ok(InterpretationReport {
        sigma: sigma.clone(),
        holds: mean == Rational::from_integer(expected.clone()),
        mean,
        expected,
        counts,
    })
}

/// Leading behaviour of `Var(cnt_P)` for a classical or vincular pattern.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VarianceCoefficients {
    pub pattern: String,
    pub k: usize,
    /// Block count; equals `k` for classical patterns.
    pub j: usize,
    /// Coefficient of `n^{2j}`.
    #[serde(with = "serde_rational")]
    pub coef_top: Rational,
    /// Coefficient of `n^{2j−1}`.
    #[serde(with = "serde_rational")]
    pub coef_next: Rational,
    /// The next coefficient assembled from censuses, with the
    /// `−j²/(k!j!)²` constant of the reference expansion.
    #[serde(with = "serde_rational")]
    pub reference_next: Rational,
    /// The same assembly with the full `−j(2k−j)/(k!j!)²` constant.
    #[serde(with = "serde_rational")]
    pub assembled_next: Rational,
    /// `Var` as an exact polynomial in `n`, valid for `n ≥ 2k`.
    pub variance: String,
    pub top_is_zero: bool,
}

fn ensure_vincular(pat: &Pattern) -> Result<()> {
    if !pat.is_vincular() {
        return Err(Error::Precondition(format!(
            "{pat} has value adjacencies; only classical and vincular patterns apply"
        )));
    }
    Ok(())
}

/// Exact `Var(cnt_P)` from the two-copy census.
pub fn variance_polynomial(pat: &Pattern, census: &MergeCensus) -> UniPoly {
    let (k, c) = (pat.len() as i64, pat.c_count() as i64);
    let mut second = UniPoly::zero();
    for (key, w) in &census.counts {
        let (kt, ct) = (key.k as i64, key.c as i64);
        second = second.add(
            &UniPoly::binomial_shifted(ct, (kt - ct) as u64).scale(&Rational::new(w.clone(), factorial(kt as u64))),
        );
    }
    let mean = UniPoly::binomial_shifted(c, (k - c) as u64).scale(&Rational::new(1.into(), factorial(k as u64)));
    second.sub(&mean.mul(&mean))
}

pub fn variance_leading(pat: &Pattern) -> Result<VarianceCoefficients> {
    ensure_vincular(pat)?;
    let census = merge_census_with(pat, 2, &Limits::from_env())?;
    let (k, j) = (pat.len(), pat.block_count());
    let var = variance_polynomial(pat, &census);
    let coef_top = var.coeff(2 * j);
    let coef_next = var.coeff(2 * j - 1);
    let kf = Rational::from_integer(factorial(k as u64));
    let jf = Rational::from_integer(factorial(j as u64));
    let scale = (&kf * &jf) * (&kf * &jf);
    let mut merged = Rational::zero();
    for l in 1..=k {
        let b = census.by_blocks(2 * k - l, 2 * j - 1);
        if !b.is_zero() {
            merged += Rational::new(b, factorial((2 * k - l) as u64) * factorial((2 * j - 1) as u64));
        }
    }
    let ji = j as i64;
    let reference_next = &merged - Rational::from_integer((ji * ji).into()) / &scale;
    let assembled_next = &merged - Rational::from_integer((ji * (2 * k as i64 - ji)).into()) / &scale;
    Ok(VarianceCoefficients {
        pattern: pat.to_string(),
        k,
        j,
        top_is_zero: coef_top.is_zero(),
        coef_top,
        coef_next,
        reference_next,
        assembled_next,
        variance: var.to_string(),
    })
}

/// `−C(2k,k)²·C(2k,2)/((2k)!)² + a/((2k−1)!)² + 2C(k,2)/(k!)⁴` for a
/// classical pattern with `a = a_σ(2k−1)`.
pub fn classical_next_coefficient(k: usize, a: &Integer) -> Rational {
    let k_i = k as i64;
    let f2k = factorial(2 * k as u64);
    let f2k1 = factorial(2 * k as u64 - 1);
    let fk = factorial(k as u64);
    let c = binomial(2 * k_i, k_i);
    let first = Rational::new(&c * &c * binomial(2 * k_i, 2), &f2k * &f2k);
    let second = Rational::new(a.clone(), &f2k1 * &f2k1);
    let fk2 = &fk * &fk;
    let third = Rational::new(binomial(k_i, 2) * 2, &fk2 * &fk2);
    second + third - first
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VincularReport {
    pub pattern: String,
    pub k: usize,
    pub j: usize,
    pub max_block: usize,
    /// `b(2k−l, 2j−1)` for `l = 1..M`.
    pub b: Vec<OverlapCount>,
    #[serde(with = "serde_integer")]
    pub lhs: Integer,
    /// `C(2k,k)·C(2j−1,j)·j`.
    #[serde(with = "serde_integer")]
    pub rhs: Integer,
    pub holds: bool,
    /// Both sides divided by `2k`; for classical patterns these are
    /// `a_σ(2k−1)` and `C(2k−1,k)²`.
    #[serde(with = "serde_rational")]
    pub lhs_scaled: Rational,
    #[serde(with = "serde_rational")]
    pub rhs_scaled: Rational,
    /// `C(2k,k)·C(2j−1,j)·(2k−j)`, the bound equivalent to a positive
    /// `n^{2j−1}` variance coefficient.
    #[serde(with = "serde_integer")]
    pub rhs_exact: Integer,
    pub holds_exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapCount {
    pub l: usize,
    #[serde(with = "serde_integer")]
    pub count: Integer,
}

/// `Σ_{l=1}^{M} (2k)_l·b(2k−l, 2j−1)` against `C(2k,k)·C(2j−1,j)·j`.
pub fn vincular_inequality_check(pat: &Pattern) -> Result<VincularReport> {
    ensure_vincular(pat)?;
    let census = merge_census_with(pat, 2, &Limits::from_env())?;
    let bs = BlockStructure::of(pat);
    let (k, j) = (pat.len(), bs.j);
    let (k_i, j_i) = (k as i64, j as i64);
    let mut lhs = Integer::zero();
    let mut b = Vec::new();
    for l in 1..=bs.max_block {
        let count = census.by_blocks(2 * k - l, 2 * j - 1);
        lhs += falling_factorial(2 * k_i, l as u64) * &count;
        b.push(OverlapCount { l, count });
    }
    let base = binomial(2 * k_i, k_i) * binomial(2 * j_i - 1, j_i);
    let rhs = &base * j_i;
    let rhs_exact = &base * (2 * k_i - j_i);
    let two_k = Rational::from_integer((2 * k_i).into());
    Ok(VincularReport {
        pattern: pat.to_string(),
        k,
        j,
        max_block: bs.max_block,
        b,
        holds: lhs > rhs,
        holds_exact: lhs > rhs_exact,
        lhs_scaled: Rational::from_integer(lhs.clone()) / &two_k,
        rhs_scaled: Rational::from_integer(rhs.clone()) / &two_k,
        lhs,
        rhs,
        rhs_exact,
    })
}

/// Block interleaving of a `2j−1`-block merge of two copies.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Configuration {
    /// 1-based block indices of the merged pair, copy 1 then copy 2.
    pub merged: (usize, usize),
    /// Target blocks left to right: `1`, `2`, or `B` for the merged pair.
    pub word: String,
}

impl Configuration {
    /// Every interleaving with `j−1` blocks per copy and one merged block.
    pub fn all(j: usize) -> Vec<Configuration> {
        let mut out = Vec::new();
        let len = 2 * j - 1;
        let mut word = Vec::with_capacity(len);
        fn go(ones: usize, twos: usize, merged: bool, word: &mut Vec<char>, len: usize, out: &mut Vec<Configuration>) {
            if word.len() == len {
                out.push(Configuration::from_word(word.iter().collect()));
                return;
            }
            if ones > 0 {
                word.push('1');
                go(ones - 1, twos, merged, word, len, out);
                word.pop();
            }
            if twos > 0 {
                word.push('2');
                go(ones, twos - 1, merged, word, len, out);
                word.pop();
            }
            if !merged {
                word.push('B');
                go(ones, twos, true, word, len, out);
                word.pop();
            }
        }
        go(j - 1, j - 1, false, &mut word, len, &mut out);
        out
    }

    fn from_word(word: String) -> Self {
        let at = word.find('B').expect("one merged block");
        let before = &word[..at];
        let a = before.chars().filter(|&c| c == '1').count() + 1;
        let b = before.chars().filter(|&c| c == '2').count() + 1;
        Configuration { merged: (a, b), word }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfigurationRow {
    pub merged: (usize, usize),
    pub word: String,
    /// Smaller of the two merged block sizes.
    pub min_block: usize,
    /// Merges hosted by this configuration, by overlap `l`.
    pub merges: BTreeMap<usize, u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConjectureStatus {
    Holds,
    Fails,
    /// No configuration has this minimum block size.
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OverlapRow {
    pub l: usize,
    /// `c_{σ,l}`: configurations whose smaller merged block has size `l`.
    pub configurations: u64,
    /// `b′` with overlap exactly the smaller merged block size.
    pub strict: u64,
    /// `b′` with overlap at most the smaller merged block size.
    pub loose: u64,
    /// `C(2k−l, k)/k_(l)·c_{σ,l}`.
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub strict_status: ConjectureStatus,
    pub loose_status: ConjectureStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfigurationCensus {
    pub pattern: String,
    pub blocks: BlockStructure,
    pub total_configurations: u64,
    pub configurations: Vec<ConfigurationRow>,
    pub overlaps: Vec<OverlapRow>,
}

fn status(count: u64, configs: u64, bound: &Rational) -> ConjectureStatus {
    if configs == 0 {
        ConjectureStatus::Vacuous
    } else if Rational::from_integer(count.into()) > *bound {
        ConjectureStatus::Holds
    } else {
        ConjectureStatus::Fails
    }
}

/// Classifies every `2j−1`-block merge of two copies of a vincular pattern.
pub fn configuration_census(pat: &Pattern) -> Result<ConfigurationCensus> {
    ensure_vincular(pat)?;
    let limits = Limits::from_env();
    let bs = BlockStructure::of(pat);
    let (k, j) = (pat.len(), bs.j);
    let spans = bs.spans();
    let mut rows: BTreeMap<Configuration, BTreeMap<usize, u64>> = Configuration::all(j)
        .into_iter()
        .map(|c| (c, BTreeMap::new()))
        .collect();
    let ranks: Vec<usize> = pat.perm().values().to_vec();
    for l in 1..=bs.max_block {
        let merges = enumerate_merges_with(&[pat.clone(), pat.clone()], 2 * k - l, &limits)?;
        for m in merges.iter().filter(|m| m.target.block_count() == 2 * j - 1) {
            let config = classify(m.target.perm(), &m.target.blocks(), &m.maps, &ranks, &spans)?;
            *rows
                .get_mut(&config)
                .ok_or_else(|| Error::Precondition(format!("unexpected interleaving {}", config.word)))?
                .entry(l)
                .or_insert(0) += 1;
        }
    }
    let min_block = |c: &Configuration| bs.blocks[c.merged.0 - 1].min(bs.blocks[c.merged.1 - 1]);
    let configurations: Vec<ConfigurationRow> = rows
        .iter()
        .map(|(c, merges)| ConfigurationRow {
            merged: c.merged,
            word: c.word.clone(),
            min_block: min_block(c),
            merges: merges.clone(),
        })
        .collect();
    let overlaps = (1..=bs.max_block)
        .map(|l| {
            let configs = configurations.iter().filter(|c| c.min_block == l).count() as u64;
            let strict = configurations
                .iter()
                .filter(|c| c.min_block == l)
                .map(|c| c.merges.get(&l).copied().unwrap_or(0))
                .sum();
            let loose = configurations
                .iter()
                .filter(|c| c.min_block >= l)
                .map(|c| c.merges.get(&l).copied().unwrap_or(0))
                .sum();
            let bound = Rational::new(
                binomial((2 * k - l) as i64, k as i64) * configs,
                falling_factorial(k as i64, l as u64),
            );
            OverlapRow {
                l,
                configurations: configs,
                strict,
                loose,
                strict_status: status(strict, configs, &bound),
                loose_status: status(loose, configs, &bound),
                bound,
            }
        })
        .collect();
    Ok(ConfigurationCensus {
        pattern: pat.to_string(),
        total_configurations: configurations.len() as u64,
        blocks: bs,
        configurations,
        overlaps,
    })
}

fn classify(
    z: &Permutation,
    target_blocks: &[usize],
    maps: &[Vec<usize>],
    ranks: &[usize],
    spans: &[(usize, usize)],
) -> Result<Configuration> {
    let inv = z.inverse();
    let mut block_of_pos = Vec::with_capacity(z.len());
    for (b, &size) in target_blocks.iter().enumerate() {
        block_of_pos.extend(std::iter::repeat(b).take(size));
    }
    // Target block of each copy block, per copy.
    let hosts: Vec<Vec<usize>> = maps
        .iter()
        .map(|m| {
            spans
                .iter()
                .map(|&(start, _)| {
                    let value = m[ranks[start - 1] - 1];
                    block_of_pos[inv.position_of(value) - 1]
                })
                .collect()
        })
        .collect();
    let mut word = String::new();
    let mut merged = None;
    for t in 0..target_blocks.len() {
        let a = hosts[0].iter().position(|&h| h == t);
        let b = hosts[1].iter().position(|&h| h == t);
        let ca = hosts[0].iter().filter(|&&h| h == t).count();
        let cb = hosts[1].iter().filter(|&&h| h == t).count();
        match (ca, cb) {
            (1, 0) => word.push('1'),
            (0, 1) => word.push('2'),
            (1, 1) => {
                word.push('B');
                merged = Some((a.unwrap() + 1, b.unwrap() + 1));
            }
            _ => {
                return Err(Error::Precondition(format!(
                    "target block {} hosts {ca} + {cb} copy blocks",
                    t + 1
                )))
            }
        }
    }
    let merged = merged.ok_or_else(|| Error::Precondition("no merged block".into()))?;
    Ok(Configuration { merged, word })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PoissonRow {
    pub n: usize,
    #[serde(with = "serde_rational")]
    pub moment: Rational,
    #[serde(with = "serde_rational")]
    pub gap: Rational,
    pub gap_approx: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PoissonReport {
    pub r: u32,
    #[serde(with = "serde_integer")]
    pub bell: Integer,
    pub rows: Vec<PoissonRow>,
    pub nonincreasing: bool,
    pub tolerance: f64,
    pub below_tolerance: bool,
    /// Gap at the largest `n` is within ten times the first-order estimate
    /// `C/n`, with `C` read off the second-largest `n`.
    pub rate_ok: Option<bool>,
}

pub const DEFAULT_POISSON_TOLERANCE: f64 = 1e-2;

/// `|E(adj^r) − B_r|` at each `n`.
pub fn poisson_convergence(r: u32, n_values: &[usize], tolerance: f64) -> Result<PoissonReport> {
    if r == 0 {
        return Err(Error::OutOfRange("r must be ≥ 1".into()));
    }
    if n_values.is_empty() {
        return Err(Error::InsufficientData("no n values".into()));
    }
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let b = bell(r as usize);
    let target = Rational::from_integer(b.clone());
    let rows: Vec<PoissonRow> = ns
        .par_iter()
        .map(|&n| {
            let moment = adjacency_moment(r, n);
            let gap = (&moment - &target).abs();
            PoissonRow {
                n,
                gap_approx: to_f64(&gap),
                moment,
                gap,
            }
        })
        .collect();
    let nonincreasing = rows.windows(2).all(|w| w[1].gap <= w[0].gap);
    let last = rows.last().expect("nonempty");
    let rate_ok = (rows.len() >= 2).then(|| {
        let prev = &rows[rows.len() - 2];
        let c = prev.gap_approx * prev.n as f64;
        last.gap_approx < 10.0 * c / last.n as f64
    });
    Ok(PoissonReport {
        r,
        bell: b,
        nonincreasing,
        tolerance,
        below_tolerance: last.gap_approx < tolerance,
        rate_ok,
        rows,
    })
}
