//! Explicit formulas: expected pattern counts, moments of descents and
//! adjacencies, and aggregates of linear valuations.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::numbers::{binomial, factorial, falling_factorial, multinomial, Integer, Rational};
use crate::pattern::Pattern;
use crate::statistic::SimpleStatistic;
use crate::{Error, Result};

/// Block sizes of a vincular pattern.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockStructure {
    pub blocks: Vec<usize>,
    pub j: usize,
    pub max_block: usize,
}

impl BlockStructure {
    pub fn of(pat: &Pattern) -> Self {
        let blocks = pat.blocks();
        BlockStructure {
            j: blocks.len(),
            max_block: blocks.iter().copied().max().unwrap_or(0),
            blocks,
        }
    }

    /// Index range of each block's pattern positions, 1-based inclusive.
    pub fn spans(&self) -> Vec<(usize, usize)> {
        let mut start = 1;
        self.blocks
            .iter()
            .map(|&b| {
                let span = (start, start + b - 1);
                start += b;
                span
            })
            .collect()
    }
}

/// `C(n−c, k−c)·C(n−d, k−d) / n_(k)`.
pub fn expected_count(pat: &Pattern, n: usize) -> Rational {
    let (k, c, d) = (pat.len() as i64, pat.c_count() as i64, pat.d_count() as i64);
    let n = n as i64;
    if n < k {
        return Rational::zero();
    }
    Rational::new(
        binomial(n - c, k - c) * binomial(n - d, k - d),
        falling_factorial(n, k as u64),
    )
}

/// Surjections from `[r]` onto `[s]`, by inclusion–exclusion.
fn surjections(r: u32, s: usize) -> Integer {
    let mut total = Integer::zero();
    for w in 0..=s {
        let term = binomial(s as i64, w as i64) * Integer::from(s - w).pow(r);
        if w % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// `Σ multinomial(m; q₁…q_u)` over compositions of `m` into `u` parts ≥ 2.
fn composition_multinomials(m: usize, u: usize) -> Integer {
    fn go(left: usize, parts_left: usize, parts: &mut Vec<u64>, acc: &mut Integer) {
        if parts_left == 0 {
            if left == 0 {
                *acc += multinomial(parts);
            }
            return;
        }
        let max = left.saturating_sub(2 * (parts_left - 1));
        for q in 2..=max {
            parts.push(q as u64);
            go(left - q, parts_left - 1, parts, acc);
            parts.pop();
        }
    }
    let mut acc = Integer::zero();
    go(m, u, &mut Vec::new(), &mut acc);
    acc
}

/// `E(des^r)` over uniform `S_n`.
pub fn euler_moment(r: u32, n: usize) -> Rational {
    let mut total = Rational::zero();
    let n_i = n as i64;
    for m in 2..=n.min(2 * r as usize) {
        for u in 1..=m / 2 {
            let weight = surjections(r, m - u) * composition_multinomials(m, u);
            if weight.is_zero() {
                continue;
            }
            total += Rational::new(
                weight * binomial(n_i - (m - u) as i64, u as i64),
                factorial(m as u64),
            );
        }
    }
    total
}

/// `E(adj^r)` over uniform `S_n`, where `adj` counts descents of two
/// consecutive values.
pub fn adjacency_moment(r: u32, n: usize) -> Rational {
    let mut total = Rational::zero();
    let n_i = n as i64;
    for m in 2..=n.min(2 * r as usize) {
        for u in 1..=m / 2 {
            let weight = surjections(r, m - u)
                * binomial((m - u - 1) as i64, (u - 1) as i64)
                * factorial(u as u64);
            if weight.is_zero() {
                continue;
            }
            let b = binomial(n_i - (m - u) as i64, u as i64);
            total += Rational::new(weight * &b * &b, falling_factorial(n_i, m as u64));
        }
    }
    total
}

/// The three linear-valuation cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearityCase {
    /// Linear in values, no value adjacency.
    ValuesOnly = 1,
    /// Linear in positions, no position adjacency.
    PositionsOnly = 2,
    /// Linear in both, classical pattern.
    Both = 3,
}

impl LinearityCase {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::ValuesOnly),
            2 => Ok(Self::PositionsOnly),
            3 => Ok(Self::Both),
            _ => Err(Error::OutOfRange(format!("linearity case must be 1, 2 or 3, got {i}"))),
        }
    }
}

fn padded(coeffs: &[Rational], k: usize, name: &str) -> Result<Vec<Rational>> {
    if coeffs.len() > k + 1 {
        return Err(Error::Precondition(format!(
            "{name} has {} coefficients, pattern length allows at most {}",
            coeffs.len(),
            k + 1
        )));
    }
    let mut v = coeffs.to_vec();
    v.resize(k + 1, Rational::zero());
    Ok(v)
}

fn is_one(v: &[Rational]) -> bool {
    v.first().is_some_and(|c| c.is_one()) && v[1..].iter().all(|c| c.is_zero())
}

/// `Σ_σ Σ_occ Q₁(t)·Q₂(w)` for `Q₁ = a₀ + Σ aᵢyᵢ` and `Q₂ = b₀ + Σ bⱼyⱼ`.
///
/// The `i`-th smallest value of an occurrence has mean `i(n+1)/(k+1)`; the
/// position of the `j`-th smallest value is the `P⁻¹(j)`-th smallest
/// position, with mean `P⁻¹(j)(n+1)/(k+1)`.
pub fn linearity_aggregate(
    case: LinearityCase,
    pat: &Pattern,
    a: &[Rational],
    b: &[Rational],
    n: usize,
) -> Result<Rational> {
    let k = pat.len();
    let a = padded(a, k, "Q1")?;
    let b = padded(b, k, "Q2")?;
    let (c, d) = (pat.c_count() as i64, pat.d_count() as i64);
    match case {
        LinearityCase::ValuesOnly if d != 0 || !is_one(&b) => {
            return Err(Error::Precondition("case 1 needs D = ∅ and Q2 = 1".into()))
        }
        LinearityCase::PositionsOnly if c != 0 || !is_one(&a) => {
            return Err(Error::Precondition("case 2 needs C = ∅ and Q1 = 1".into()))
        }
        LinearityCase::Both if c != 0 || d != 0 => {
            return Err(Error::Precondition("case 3 needs C = D = ∅".into()))
        }
        _ => {}
    }
    if n < k {
        return Ok(Rational::zero());
    }
    let (n_i, k_i) = (n as i64, k as i64);
    let ratio = Rational::new(Integer::from(n + 1), Integer::from(k + 1));
    let value_mean = |a: &[Rational]| -> Rational {
        let s: Rational = (1..=k).map(|i| &a[i] * Rational::from_integer(i.into())).sum();
        &a[0] + &ratio * s
    };
    let inv = pat.perm().inverse();
    let position_mean = |b: &[Rational]| -> Rational {
        let s: Rational = (1..=k)
            .map(|j| &b[j] * Rational::from_integer(inv.position_of(j).into()))
            .sum();
        &b[0] + &ratio * s
    };
    let base = binomial(n_i, k_i) * factorial((n - k) as u64);
    let out = match case {
        LinearityCase::ValuesOnly => Rational::from_integer(base * binomial(n_i - c, k_i - c)) * value_mean(&a),
        LinearityCase::PositionsOnly => {
            Rational::from_integer(base * binomial(n_i - d, k_i - d)) * position_mean(&b)
        }
        LinearityCase::Both => {
            Rational::from_integer(base * binomial(n_i, k_i)) * value_mean(&a) * position_mean(&b)
        }
    };
    Ok(out)
}

/// Picks the applicable case for a simple statistic with linear valuations.
pub fn linearity_case_for(s: &SimpleStatistic) -> Result<(LinearityCase, Vec<Rational>, Vec<Rational>)> {
    let a = s
        .q1
        .linear_coefficients()
        .ok_or_else(|| Error::Precondition("Q1 must be linear in y and free of m".into()))?;
    let b = s
        .q2
        .linear_coefficients()
        .ok_or_else(|| Error::Precondition("Q2 must be linear in y and free of m".into()))?;
    let p = &s.pattern;
    let case = if is_one(&b) && p.d_count() == 0 {
        LinearityCase::ValuesOnly
    } else if is_one(&a) && p.c_count() == 0 {
        LinearityCase::PositionsOnly
    } else if p.is_classical() {
        LinearityCase::Both
    } else {
        return Err(Error::Precondition(
            "no linearity case applies: need D = ∅ with Q2 = 1, C = ∅ with Q1 = 1, or a classical pattern".into(),
        ));
    };
    Ok((case, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::{aggregate_brute, aggregate_fast_simple, expectation, BruteConfig};
    use crate::numbers::rat;
    use crate::perm::Permutation;
    use crate::poly::ValuationPoly;
    use crate::statistic::Statistic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pat(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    #[test]
    fn expected_count_examples() {
        assert_eq!(expected_count(&pat("21"), 3), rat(3, 2));
        assert_eq!(expected_count(&pat("[21]"), 3), rat(1, 1));
        assert_eq!(expected_count(&pat("[21];D=1"), 3), rat(2, 3));
        assert_eq!(expected_count(&pat("1324"), 3), rat(0, 1));
    }

    #[test]
    fn block_structure() {
        let b = BlockStructure::of(&pat("[431][52]"));
        assert_eq!(b.blocks, vec![3, 2]);
        assert_eq!((b.j, b.max_block), (2, 3));
        assert_eq!(b.spans(), vec![(1, 3), (4, 5)]);
        let p = pat("2[31]4");
        let b = BlockStructure::of(&p);
        assert_eq!(b.blocks.iter().map(|x| x - 1).sum::<usize>(), p.c_count());
        assert_eq!(b.j, p.len() - p.c_count());
    }

    #[test]
    fn moment_examples() {
        assert_eq!(euler_moment(1, 3), rat(1, 1));
        assert_eq!(euler_moment(2, 3), rat(4, 3));
        assert_eq!(euler_moment(2, 1), rat(0, 1));
        assert_eq!(adjacency_moment(1, 3), rat(2, 3));
        assert_eq!(adjacency_moment(2, 3), rat(1, 1));
        assert_eq!(adjacency_moment(1, 1), rat(0, 1));
    }

    #[test]
    fn moments_match_brute_force() {
        let cfg = BruteConfig::default();
        let des = Statistic::preset("descents").unwrap();
        let adj = Statistic::preset("adjacency").unwrap();
        for r in 1..=3 {
            for n in 1..=7 {
                assert_eq!(euler_moment(r, n), expectation(&des, n, r, &cfg).unwrap(), "des r={r} n={n}");
                assert_eq!(adjacency_moment(r, n), expectation(&adj, n, r, &cfg).unwrap(), "adj r={r} n={n}");
            }
        }
    }

    #[test]
    fn adjacency_first_moment_closed_form() {
        for n in 1..60 {
            assert_eq!(adjacency_moment(1, n), rat(n as i64 - 1, n as i64));
        }
    }

    #[test]
    fn worked_example_is_forty() {
        let v = linearity_aggregate(LinearityCase::ValuesOnly, &pat("[21]"), &[rat(0, 1), rat(3, 1), rat(1, 1)], &[rat(1, 1)], 3)
            .unwrap();
        assert_eq!(v, rat(40, 1));
    }

    #[test]
    fn constant_valuation_reduces_to_expected_count() {
        for p in ["[21]", "2[31]4", "1324", "[123]"] {
            let p = pat(p);
            for n in 0..9 {
                let v = linearity_aggregate(LinearityCase::ValuesOnly, &p, &[rat(1, 1)], &[rat(1, 1)], n).unwrap();
                let expect = expected_count(&p, n) * Rational::from_integer(factorial(n as u64));
                assert_eq!(v, expect);
            }
        }
    }

    #[test]
    fn case_preconditions() {
        let one = [rat(1, 1)];
        let lin = [rat(0, 1), rat(1, 1)];
        assert!(linearity_aggregate(LinearityCase::ValuesOnly, &pat("21;D=1"), &lin, &one, 4).is_err());
        assert!(linearity_aggregate(LinearityCase::ValuesOnly, &pat("21"), &lin, &lin, 4).is_err());
        assert!(linearity_aggregate(LinearityCase::PositionsOnly, &pat("[21]"), &one, &lin, 4).is_err());
        assert!(linearity_aggregate(LinearityCase::Both, &pat("21;D=1"), &lin, &lin, 4).is_err());
        assert!(linearity_aggregate(LinearityCase::Both, &pat("21"), &vec![rat(1, 1); 4], &one, 4).is_err());
        assert!(LinearityCase::from_index(4).is_err());
    }

    fn linear_poly(coeffs: &[Rational]) -> ValuationPoly {
        let k = coeffs.len() - 1;
        let mut q = ValuationPoly::constant(k, coeffs[0].clone());
        for (i, c) in coeffs.iter().enumerate().skip(1) {
            q = q.add(&ValuationPoly::var(k, i).unwrap().scale(c));
        }
        q
    }

    fn random_coeffs(rng: &mut ChaCha8Rng, k: usize) -> Vec<Rational> {
        (0..=k).map(|_| rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))).collect()
    }

    #[test]
    fn linearity_matches_brute_force() {
        let cfg = BruteConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut done = 0;
        while done < 30 {
            let k = rng.gen_range(1..=3);
            let mut v: Vec<usize> = (1..=k).collect();
            for i in (1..k).rev() {
                v.swap(i, rng.gen_range(0..=i));
            }
            let case = LinearityCase::from_index(rng.gen_range(1..=3)).unwrap();
            let (c, d): (Vec<usize>, Vec<usize>) = match case {
                LinearityCase::ValuesOnly => ((1..k).filter(|_| rng.gen_bool(0.5)).collect(), vec![]),
                LinearityCase::PositionsOnly => (vec![], (1..k).filter(|_| rng.gen_bool(0.5)).collect()),
                LinearityCase::Both => (vec![], vec![]),
            };
            let p = Pattern::new(Permutation::new(v).unwrap(), c, d).unwrap();
            let one = {
                let mut o = vec![Rational::zero(); k + 1];
                o[0] = Rational::one();
                o
            };
            let (a, b) = match case {
                LinearityCase::ValuesOnly => (random_coeffs(&mut rng, k), one),
                LinearityCase::PositionsOnly => (one, random_coeffs(&mut rng, k)),
                LinearityCase::Both => (random_coeffs(&mut rng, k), random_coeffs(&mut rng, k)),
            };
            let s = SimpleStatistic::new(p.clone(), linear_poly(&a), linear_poly(&b)).unwrap();
            let stat = Statistic::simple(s.clone());
            for n in 0..=6 {
                let want = aggregate_brute(&stat, n, 1, &cfg).unwrap().value;
                assert_eq!(linearity_aggregate(case, &p, &a, &b, n).unwrap(), want, "{case:?} {p} n={n}");
                assert_eq!(aggregate_fast_simple(&s, n).value, want);
            }
            let (auto, _, _) = linearity_case_for(&s).unwrap();
            let v = linearity_aggregate(auto, &p, &a, &b, 6).unwrap();
            assert_eq!(v, aggregate_fast_simple(&s, 6).value);
            done += 1;
        }
    }

    #[test]
    fn case_three_classical_132() {
        let p = pat("132");
        let a = [rat(0, 1), rat(1, 1)];
        let b = [rat(1, 1)];
        let s = SimpleStatistic::new(p.clone(), linear_poly(&[rat(0, 1), rat(1, 1), rat(0, 1), rat(0, 1)]), ValuationPoly::one(3))
            .unwrap();
        let want = aggregate_brute(&Statistic::simple(s), 4, 1, &BruteConfig::default()).unwrap().value;
        assert_eq!(linearity_aggregate(LinearityCase::Both, &p, &a, &b, 4).unwrap(), want);
    }

    #[test]
    fn expected_count_matches_fast_aggregate() {
        let mut patterns = Vec::new();
        for k in 1..=4usize {
            for s in crate::perm::enumerate_sn(k, 0..u64::MAX, 11).unwrap() {
                for cm in 0..1u32 << (k - 1) {
                    for dm in 0..1u32 << (k - 1) {
                        let c = (1..k).filter(|i| cm >> (i - 1) & 1 == 1).collect();
                        let d = (1..k).filter(|i| dm >> (i - 1) & 1 == 1).collect();
                        patterns.push(Pattern::new(s.clone(), c, d).unwrap());
                    }
                }
            }
        }
        for p in patterns {
            let s = SimpleStatistic::count(p.clone());
            for n in 0..=10 {
                assert_eq!(
                    expected_count(&p, n) * Rational::from_integer(factorial(n as u64)),
                    aggregate_fast_simple(&s, n).value,
                    "{p} n={n}"
                );
            }
        }
    }
}
