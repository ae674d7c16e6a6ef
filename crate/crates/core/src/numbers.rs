//! Arbitrary-precision integers and rationals plus the combinatorial
//! number families: factorials, binomials, Stirling, Bell and Lah numbers.
//!
//! Every family is computed by recurrence and memoized in a process-wide
//! table, so repeated lookups inside the fitting loops are cheap.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;

use crate::{Error, Result};

pub type Integer = BigInt;
pub type Rational = BigRational;

/// `p/q` as a reduced rational.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(p.into())
}

pub fn from_integer(i: Integer) -> Rational {
    Rational::from_integer(i)
}

static FACTORIALS: Lazy<RwLock<Vec<Integer>>> = Lazy::new(|| RwLock::new(vec![Integer::one()]));

/// `n!`.
pub fn factorial(n: u64) -> Integer {
    let n = n as usize;
    {
        let table = FACTORIALS.read().unwrap();
        if let Some(v) = table.get(n) {
            return v.clone();
        }
    }
    let mut table = FACTORIALS.write().unwrap();
    while table.len() <= n {
        let next = table.last().unwrap() * Integer::from(table.len());
        table.push(next);
    }
    table[n].clone()
}

/// Falling factorial `n (n-1) ⋯ (n-k+1)`; the empty product when `k = 0`.
pub fn falling_factorial(n: i64, k: u64) -> Integer {
    let mut acc = Integer::one();
    for i in 0..k as i64 {
        let f = n - i;
        if f == 0 {
            return Integer::zero();
        }
        acc *= f;
    }
    acc
}

/// Binomial coefficient. For `n ≥ 0` this is the usual count (zero outside
/// `0 ≤ k ≤ n`); for negative `n` it is the polynomial `n_(k)/k!`.
pub fn binomial(n: i64, k: i64) -> Integer {
    if k < 0 {
        return Integer::zero();
    }
    if n >= 0 && k > n {
        return Integer::zero();
    }
    let k = if n >= 0 { k.min(n - k) } else { k };
    falling_factorial(n, k as u64) / factorial(k as u64)
}

/// Multinomial coefficient `(Σ parts)! / Π parts!`.
pub fn multinomial(parts: &[u64]) -> Integer {
    let total: u64 = parts.iter().sum();
    parts
        .iter()
        .fold(factorial(total), |acc, &p| acc / factorial(p))
}

static STIRLING1: Lazy<RwLock<Vec<Vec<Integer>>>> =
    Lazy::new(|| RwLock::new(vec![vec![Integer::one()]]));

/// Unsigned Stirling number of the first kind: permutations of `k`
/// elements with exactly `i` cycles.
pub fn stirling_first_unsigned(k: usize, i: usize) -> Integer {
    if i > k {
        return Integer::zero();
    }
    {
        let table = STIRLING1.read().unwrap();
        if let Some(row) = table.get(k) {
            return row[i].clone();
        }
    }
    let mut table = STIRLING1.write().unwrap();
    while table.len() <= k {
        let m = table.len();
        let prev = &table[m - 1];
        let row: Vec<Integer> = (0..=m)
            .map(|j| {
                let stay = if j < m { prev[j].clone() * (m - 1) } else { Integer::zero() };
                let new_cycle = if j >= 1 { prev[j - 1].clone() } else { Integer::zero() };
                stay + new_cycle
            })
            .collect();
        table.push(row);
    }
    table[k][i].clone()
}

static STIRLING2: Lazy<RwLock<Vec<Vec<Integer>>>> =
    Lazy::new(|| RwLock::new(vec![vec![Integer::one()]]));

/// Stirling number of the second kind: partitions of `[r]` into `k` blocks.
pub fn stirling_second(r: usize, k: usize) -> Integer {
    if k > r {
        return Integer::zero();
    }
    {
        let table = STIRLING2.read().unwrap();
        if let Some(row) = table.get(r) {
            return row[k].clone();
        }
    }
    let mut table = STIRLING2.write().unwrap();
    while table.len() <= r {
        let m = table.len();
        let prev = &table[m - 1];
        let row: Vec<Integer> = (0..=m)
            .map(|j| {
                let join = if j < m { prev[j].clone() * j } else { Integer::zero() };
                let new_block = if j >= 1 { prev[j - 1].clone() } else { Integer::zero() };
                join + new_block
            })
            .collect();
        table.push(row);
    }
    table[r][k].clone()
}

/// Bell number `B_r = Σ_k S(r, k)`.
pub fn bell(r: usize) -> Integer {
    (0..=r).map(|k| stirling_second(r, k)).sum()
}

/// Lah number `L(k, j) = C(k-1, j-1) k!/j!` for `1 ≤ j ≤ k`.
pub fn lah(k: u64, j: u64) -> Result<Integer> {
    if j < 1 || j > k {
        return Err(Error::OutOfRange(format!(
            "Lah number L({k}, {j}) needs 1 <= j <= k"
        )));
    }
    Ok(binomial(k as i64 - 1, j as i64 - 1) * factorial(k) / factorial(j))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"` (whitespace around the parts allowed).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::RationalSyntax(text.to_string());
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let num: Integer = num.parse().map_err(|_| bad())?;
    let den: Integer = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// Decimal rendering rounded half away from zero to `digits` places.
pub fn to_decimal(q: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(Integer::from(10), digits);
    let scaled = q.abs() * Rational::from_integer(scale.clone());
    let floor = scaled.floor().to_integer();
    let frac = scaled - Rational::from_integer(floor.clone());
    let rounded = if frac >= rat(1, 2) { floor + 1 } else { floor };
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let sign = if q.is_negative() && !rounded_is_zero(&int_part, &frac_part) {
        "-"
    } else {
        ""
    };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = digits)
    }
}

fn rounded_is_zero(a: &Integer, b: &Integer) -> bool {
    a.is_zero() && b.is_zero()
}

/// Lossy conversion for reporting only.
pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter writing a rational as its `"p/q"` string.
pub mod serde_rational {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing an integer as a JSON number when it fits in `i64`
/// and as a decimal string otherwise.
pub mod serde_integer {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Integer;
    use num_traits::ToPrimitive;

    pub fn serialize<S: Serializer>(i: &Integer, s: S) -> Result<S::Ok, S::Error> {
        match i.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&i.to_string()),
        }
    }

    #[derive(Deserialize, Serialize)]
    #[serde(untagged)]
    enum Repr {
        Num(i64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Integer, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v.into()),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0), 1.into());
        assert_eq!(factorial(5), 120.into());
        let oracle: u64 = (1..=12u64).product();
        assert_eq!(oracle, 479001600);
        assert_eq!(factorial(12), oracle.into());
    }

    #[test]
    fn falling_factorial_values() {
        assert_eq!(falling_factorial(5, 2), 20.into());
        assert_eq!(falling_factorial(17, 0), 1.into());
        assert_eq!(falling_factorial(-4, 0), 1.into());
        assert_eq!(falling_factorial(3, 4), 0.into());
    }

    #[test]
    fn falling_factorial_matches_factorial_quotient() {
        for n in 0..=20u64 {
            for k in 0..=n {
                assert_eq!(falling_factorial(n as i64, k), factorial(n) / factorial(n - k));
            }
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), 6.into());
        assert_eq!(binomial(9, 0), 1.into());
        assert_eq!(binomial(3, 5), 0.into());
        assert_eq!(binomial(3, -1), 0.into());
        // (-1 choose k) = (-1)^k
        assert_eq!(binomial(-1, 3), (-1).into());
    }

    #[test]
    fn stirling_first_values() {
        assert_eq!(stirling_first_unsigned(4, 3), 6.into());
        assert_eq!(stirling_first_unsigned(4, 3), binomial(4, 2));
        assert_eq!(stirling_first_unsigned(0, 0), 1.into());
        assert_eq!(stirling_first_unsigned(3, 1), 2.into());
    }

    /// Cycle counts by brute force over S_k.
    fn cycles_oracle(k: usize, i: usize) -> u64 {
        let mut count = 0;
        let mut p: Vec<usize> = (0..k).collect();
        loop {
            let mut seen = vec![false; k];
            let mut cycles = 0;
            for s in 0..k {
                if !seen[s] {
                    cycles += 1;
                    let mut x = s;
                    while !seen[x] {
                        seen[x] = true;
                        x = p[x];
                    }
                }
            }
            if cycles == i {
                count += 1;
            }
            if !crate::perm::next_lex(&mut p) {
                break;
            }
        }
        count
    }

    #[test]
    fn stirling_first_matches_cycle_enumeration() {
        for k in 1..=6 {
            for i in 0..=k {
                assert_eq!(stirling_first_unsigned(k, i), cycles_oracle(k, i).into(), "k={k} i={i}");
            }
        }
    }

    #[test]
    fn stirling_first_row_sums() {
        for k in 0..=8u64 {
            let s: Integer = (0..=k as usize).map(|i| stirling_first_unsigned(k as usize, i)).sum();
            assert_eq!(s, factorial(k));
        }
    }

    #[test]
    fn stirling_second_values() {
        assert_eq!(stirling_second(3, 2), 3.into());
        assert_eq!(stirling_second(6, 6), 1.into());
        assert_eq!(stirling_second(4, 0), 0.into());
        assert_eq!(stirling_second(0, 0), 1.into());
    }

    #[test]
    fn stirling_second_inclusion_exclusion() {
        for r in 0..=10u32 {
            for k in 0..=10i64 {
                let ie: Integer = (0..=k)
                    .map(|i| {
                        let term = binomial(k, i) * num_traits::pow(Integer::from(k - i), r as usize);
                        if i % 2 == 0 { term } else { -term }
                    })
                    .sum();
                assert_eq!(
                    factorial(k as u64) * stirling_second(r as usize, k as usize),
                    ie,
                    "r={r} k={k}"
                );
            }
        }
    }

    #[test]
    fn bell_values() {
        assert_eq!(bell(0), 1.into());
        assert_eq!(bell(1), 1.into());
        assert_eq!(bell(2), 2.into());
        assert_eq!(bell(3), 5.into());
        assert_eq!(bell(5), 52.into());
    }

    #[test]
    fn lah_values() {
        assert_eq!(lah(5, 5).unwrap(), 1.into());
        assert_eq!(lah(3, 1).unwrap(), 6.into());
        assert_eq!(lah(3, 2).unwrap(), 6.into());
        assert!(lah(3, 4).is_err());
        assert!(lah(3, 0).is_err());
    }

    #[test]
    fn rational_text_forms() {
        assert_eq!(format_rational(&rat(-2, 4)), "-1/2");
        assert_eq!(format_rational(&rat(6, 3)), "2");
        assert_eq!(parse_rational(" -1/2 ").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&rat(1, 3), 3), "0.333");
        assert_eq!(to_decimal(&rat(2, 3), 3), "0.667");
        assert_eq!(to_decimal(&rat(-1, 2), 0), "-1");
        assert_eq!(to_decimal(&rat(-1, 1000), 2), "0.00");
        assert_eq!(to_decimal(&int(40), 2), "40.00");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn rational_addition_is_exact(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let sum = rat(a, b) + rat(c, d);
            // lowest terms, positive denominator
            prop_assert!(sum.denom().is_positive());
            prop_assert_eq!(sum.numer().gcd(sum.denom()), Integer::one());
            // cross-multiplication identity
            prop_assert_eq!(
                sum.numer() * Integer::from(b * d),
                Integer::from(a * d + c * b) * sum.denom()
            );
        }
    }
}
