//! Aggregates `M(f^r, n) = Σ_{σ∈S_n} f(σ)^r`, by exhaustive enumeration and
//! by the value/position product decomposition for simple statistics.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numbers::{binomial, factorial, serde_rational, Integer, Rational};
use crate::perm::{chunk_ranges, factorial_u64, for_each_in_range};
use crate::poly::CompiledPoly;
use crate::statistic::{SimpleStatistic, Statistic};
use crate::{Error, Limits, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Brute,
    Fast,
    ClosedForm,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Brute => "brute",
            Method::Fast => "fast",
            Method::ClosedForm => "closed-form",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub n: usize,
    pub r: u32,
    #[serde(with = "serde_rational")]
    pub value: Rational,
    pub method: Method,
}

/// Exhaustive-enumeration settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteConfig {
    pub max_n: usize,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
    /// Number of lexicographic rank intervals `S_n` is split into.
    pub chunks: usize,
}

impl Default for BruteConfig {
    fn default() -> Self {
        BruteConfig {
            max_n: Limits::from_env().max_n,
            threads: 0,
            chunks: 256,
        }
    }
}

impl BruteConfig {
    pub fn with_threads(threads: usize) -> Self {
        BruteConfig {
            threads,
            ..Default::default()
        }
    }

    pub(crate) fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> T {
        if self.threads == 0 {
            return job();
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .expect("thread pool")
            .install(job)
    }
}

/// Running sum that stays in `i128` until it would overflow.
#[derive(Clone, Debug, Default)]
struct Acc {
    small: i128,
    big: Integer,
}

impl Acc {
    fn add_i128(&mut self, v: i128) {
        match self.small.checked_add(v) {
            Some(s) => self.small = s,
            None => {
                self.big += self.small;
                self.small = v;
            }
        }
    }

    fn add_big(&mut self, v: Integer) {
        self.big += v;
    }

    fn merge(mut self, other: Acc) -> Acc {
        self.big += other.big;
        self.add_i128(other.small);
        self
    }

    fn total(self) -> Integer {
        self.big + self.small
    }
}

/// `[M(f¹,n), …, M(f^max_r,n)]` by enumerating `S_n`.
pub fn brute_power_sums(
    stat: &Statistic,
    n: usize,
    max_r: u32,
    cfg: &BruteConfig,
) -> Result<Vec<Rational>> {
    if n > cfg.max_n {
        return Err(Error::CapExceeded { n, cap: cfg.max_n });
    }
    if max_r == 0 {
        return Err(Error::OutOfRange("moment order r must be ≥ 1".into()));
    }
    let compiled = stat.compile();
    let total = factorial_u64(n);
    let ranges = chunk_ranges(total, cfg.chunks);
    let rs = max_r as usize;
    let sums = cfg.run(|| {
        ranges
            .into_par_iter()
            .map(|range| {
                let mut acc = vec![Acc::default(); rs];
                for_each_in_range(n, range, |sigma| match compiled.eval_i128(sigma) {
                    Some(0) => {}
                    Some(x) => {
                        let mut p: i128 = 1;
                        let mut spill = None;
                        for (i, a) in acc.iter_mut().enumerate() {
                            match p.checked_mul(x) {
                                Some(v) => {
                                    p = v;
                                    a.add_i128(v);
                                }
                                None => {
                                    spill = Some(i);
                                    break;
                                }
                            }
                        }
                        if let Some(i) = spill {
                            let xb = Integer::from(x);
                            let mut pb = Integer::from(p);
                            for a in &mut acc[i..] {
                                pb *= &xb;
                                a.add_big(pb.clone());
                            }
                        }
                    }
                    None => {
                        let xb = compiled.eval_big(sigma);
                        let mut p = Integer::one();
                        for a in acc.iter_mut() {
                            p *= &xb;
                            a.add_big(p.clone());
                        }
                    }
                });
                acc
            })
            .reduce(
                || vec![Acc::default(); rs],
                |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
            )
    });
    let denom = compiled.denom;
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            Rational::new(
                s.total(),
                num_traits::pow(denom.clone(), i + 1),
            )
        })
        .collect())
}

pub fn aggregate_brute(
    stat: &Statistic,
    n: usize,
    r: u32,
    cfg: &BruteConfig,
) -> Result<AggregateResult> {
    let sums = brute_power_sums(stat, n, r, cfg)?;
    Ok(AggregateResult {
        n,
        r,
        value: sums[r as usize - 1].clone(),
        method: Method::Brute,
    })
}

/// Calls `f` on each increasing `k`-tuple over `[n]` whose entries at the
/// flagged follower indices equal their predecessor plus one.
///
/// `follower[j]` marks index `j` (0-based) as following `j−1`. Tuples are
/// produced from compressed tuples over `[n − #followers]`.
pub(crate) fn for_each_compressed(
    n: usize,
    follower: &[bool],
    mut f: impl FnMut(&[usize]),
) {
    let k = follower.len();
    let d = follower.iter().filter(|&&x| x).count();
    if k > n {
        return;
    }
    let free: Vec<usize> = (0..k).filter(|&j| !follower[j]).collect();
    let kk = free.len();
    let nn = n - d;
    let mut y: Vec<usize> = (1..=kk).collect();
    let mut t = vec![0usize; k];
    loop {
        // t_{g(i)} = y_i + g(i) − i (1-based), followers copy predecessor + 1.
        let mut fi = 0;
        for j in 0..k {
            if follower[j] {
                t[j] = t[j - 1] + 1;
            } else {
                t[j] = y[fi] + j - fi;
                fi += 1;
            }
        }
        f(&t);
        let mut i = kk;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if y[i] < nn - (kk - 1 - i) {
                y[i] += 1;
                for j in i + 1..kk {
                    y[j] = y[j - 1] + 1;
                }
                break;
            }
        }
        if kk == 0 {
            return;
        }
    }
}

fn sum_poly_over(poly: &CompiledPoly, n: usize, count: &Integer, each: impl Fn(&mut dyn FnMut(&[usize]))) -> Integer {
    if let Some(c) = &poly.constant {
        return c * count;
    }
    let mut acc = Acc::default();
    each(&mut |y: &[usize]| match poly.eval_i128(y, n) {
        Some(v) => acc.add_i128(v),
        None => acc.add_big(poly.eval_big(y, n)),
    });
    acc.total()
}

/// `(n−k)! · Σ_{T′} Q₁ · Σ_{W′} Q₂`.
pub fn aggregate_fast_simple(s: &SimpleStatistic, n: usize) -> AggregateResult {
    let pat = &s.pattern;
    let k = pat.len();
    let result = |value| AggregateResult {
        n,
        r: 1,
        value,
        method: Method::Fast,
    };
    if k > n {
        return result(Rational::zero());
    }
    let (c, d) = (pat.c_count() as i64, pat.d_count() as i64);
    let (n_i, k_i) = (n as i64, k as i64);

    let mut value_follower = vec![false; k];
    for &i in pat.adj_d() {
        value_follower[i] = true;
    }
    let q1 = s.q1.compile();
    let sum1 = sum_poly_over(&q1, n, &binomial(n_i - d, k_i - d), |f| {
        for_each_compressed(n, &value_follower, |t| f(t))
    });

    let mut pos_follower = vec![false; k];
    for &i in pat.adj_c() {
        pos_follower[i] = true;
    }
    let p: Vec<usize> = pat.perm().values().to_vec();
    let q2 = s.q2.compile();
    let sum2 = sum_poly_over(&q2, n, &binomial(n_i - c, k_i - c), |f| {
        let mut w = vec![0usize; k];
        for_each_compressed(n, &pos_follower, |u| {
            // u lists positions by pattern position; w lists them by value rank.
            for (j, &uj) in u.iter().enumerate() {
                w[p[j] - 1] = uj;
            }
            f(&w)
        })
    });

    let num = factorial((n - k) as u64) * sum1 * sum2;
    result(Rational::new(num, &q1.denom * &q2.denom))
}

/// `M(f, n)` for a general statistic, term by term.
pub fn aggregate_fast(stat: &Statistic, n: usize) -> AggregateResult {
    let value = stat
        .terms()
        .iter()
        .map(|(c, s)| c * aggregate_fast_simple(s, n).value)
        .fold(Rational::zero(), |a, b| a + b);
    AggregateResult {
        n,
        r: 1,
        value,
        method: Method::Fast,
    }
}

/// `M(f^r, n)`: the product decomposition for `r = 1`, enumeration otherwise.
pub fn aggregate(stat: &Statistic, n: usize, r: u32, cfg: &BruteConfig) -> Result<AggregateResult> {
    match r {
        0 => Err(Error::OutOfRange("moment order r must be ≥ 1".into())),
        1 => Ok(aggregate_fast(stat, n)),
        _ => aggregate_brute(stat, n, r, cfg),
    }
}

/// `E(f^r) = M(f^r, n) / n!`.
pub fn expectation(stat: &Statistic, n: usize, r: u32, cfg: &BruteConfig) -> Result<Rational> {
    let m = aggregate(stat, n, r, cfg)?.value;
    Ok(m / Rational::from_integer(factorial(n as u64)))
}

/// `E(f²) − E(f)²`.
pub fn variance(stat: &Statistic, n: usize, cfg: &BruteConfig) -> Result<Rational> {
    let e1 = expectation(stat, n, 1, cfg)?;
    let e2 = expectation(stat, n, 2, cfg)?;
    Ok(e2 - &e1 * &e1)
}
