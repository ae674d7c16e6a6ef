//! Linear combinations of shifted factorials `Σ αᵢ (n+i)!`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::solve;
use crate::numbers::{factorial, format_rational, parse_rational, Rational};
use crate::statistic::Statistic;
use crate::univariate::UniPoly;
use crate::{Error, Result};

/// `Σ coeffs[i] · (n+i)!`, claimed for `n ≥ valid_from`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FactorialCombination {
    coeffs: BTreeMap<i64, Rational>,
    pub valid_from: i64,
}

/// `poly(n) · (n − shift)!`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyTimesShiftedFactorial {
    pub poly: UniPoly,
    pub shift: i64,
}

/// Where an offset window comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowSource {
    /// Single simple statistic: offsets `i − k`, `0 ≤ i ≤ d(f) − c − d`.
    SimpleStatistic,
    /// Rational combination or power of simple statistics, bounded through
    /// the merge closure.
    GeneralStatistic,
    /// Powers of a vincular count: offsets `0..r(k−c)`, valid from `n ≥ rk`.
    VincularPower,
    /// Powers of a bivincular count through the merge census.
    MergeCensus,
}

impl fmt::Display for WindowSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowSource::SimpleStatistic => "simple-statistic theorem: offsets i-k for 0 <= i <= d(f)-c-d",
            WindowSource::GeneralStatistic => "general-statistic theorem: offsets -L..m over the merge closure",
            WindowSource::VincularPower => "vincular moment theorem: offsets 0..r(k-c), valid for n >= rk",
            WindowSource::MergeCensus => "merge-census corollary: offsets -d~..k~-c~-d~ over all merges",
        })
    }
}

/// A contiguous offset range with its validity threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OffsetWindow {
    pub lo: i64,
    pub hi: i64,
    pub valid_from: i64,
    pub source: WindowSource,
}

impl OffsetWindow {
    pub fn offsets(&self) -> Vec<i64> {
        (self.lo..=self.hi).collect()
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Consecutive sample points starting at the threshold: the square system
    /// plus `held_out` verification points.
    pub fn sample_points(&self, held_out: usize) -> Vec<i64> {
        let start = self.valid_from.max(-self.lo).max(0);
        (start..start + (self.len() + held_out) as i64).collect()
    }
}

impl FactorialCombination {
    pub fn new(coeffs: impl IntoIterator<Item = (i64, Rational)>, valid_from: i64) -> Self {
        let mut fc = FactorialCombination {
            coeffs: BTreeMap::new(),
            valid_from,
        };
        for (i, c) in coeffs {
            fc.add_term(i, c);
        }
        fc
    }

    pub fn zero() -> Self {
        Self::default()
    }

    fn add_term(&mut self, i: i64, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(i).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&i);
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, i: i64) -> Rational {
        self.coeffs.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_offset(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_offset(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Same coefficients, different validity claim.
    pub fn with_valid_from(mut self, valid_from: i64) -> Self {
        self.valid_from = valid_from;
        self
    }

    /// Sums coefficients; the result is valid where both operands are.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&i, c) in &other.coeffs {
            out.add_term(i, c.clone());
        }
        out.valid_from = self.valid_from.max(other.valid_from);
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        FactorialCombination::new(
            self.coeffs.iter().map(|(&i, a)| (i, a * c)),
            self.valid_from,
        )
    }

    /// `Σ αᵢ (n+i)!`, ignoring the validity claim.
    pub fn evaluate_unchecked(&self, n: i64) -> Result<Rational> {
        let mut total = Rational::zero();
        for (&i, c) in &self.coeffs {
            if n + i < 0 {
                return Err(Error::OutOfRange(format!(
                    "(n{i:+})! is undefined at n = {n}"
                )));
            }
            total += c * Rational::from_integer(factorial((n + i) as u64));
        }
        Ok(total)
    }

    pub fn evaluate(&self, n: i64) -> Result<Rational> {
        if n < self.valid_from {
            return Err(Error::BelowValidity {
                n,
                valid_from: self.valid_from,
            });
        }
        self.evaluate_unchecked(n)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("combination serializes")
    }

    pub fn parse_formula(text: &str) -> Result<Self> {
        parse_formula(text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CombinationJson {
    coeffs: BTreeMap<String, String>,
    valid_from: i64,
}

impl Serialize for FactorialCombination {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        // Keys sort numerically in the output.
        use serde::ser::SerializeMap;
        struct Coeffs<'a>(&'a BTreeMap<i64, Rational>);
        impl Serialize for Coeffs<'_> {
            fn serialize<S: serde::Serializer>(
                &self,
                s: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (i, c) in self.0 {
                    m.serialize_entry(&i.to_string(), &format_rational(c))?;
                }
                m.end()
            }
        }
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("FactorialCombination", 2)?;
        st.serialize_field("coeffs", &Coeffs(&self.coeffs))?;
        st.serialize_field("validFrom", &self.valid_from)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for FactorialCombination {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CombinationJson::deserialize(d)?;
        let mut coeffs = Vec::new();
        for (k, v) in raw.coeffs {
            let i: i64 = k
                .trim()
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("bad offset {k:?}")))?;
            coeffs.push((i, parse_rational(&v).map_err(serde::de::Error::custom)?));
        }
        Ok(FactorialCombination::new(coeffs, raw.valid_from))
    }
}

fn factorial_text(i: i64) -> String {
    match i {
        0 => "n!".into(),
        i if i > 0 => format!("(n+{i})!"),
        i => format!("(n-{})!", -i),
    }
}

/// `-1/2*(n+1)! + 1/6*(n+2)!`, ascending offsets; `0` when empty.
pub fn format_formula(fc: &FactorialCombination) -> String {
    if fc.coeffs.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (idx, (&i, c)) in fc.coeffs.iter().enumerate() {
        let neg = c.is_negative();
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mag = c.abs();
        if !mag.is_one() {
            out.push_str(&format_rational(&mag));
            out.push('*');
        }
        out.push_str(&factorial_text(i));
    }
    out
}

impl fmt::Display for FactorialCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_formula(self))
    }
}

/// Inverse of [`format_formula`]; also accepts repeated offsets and
/// arbitrary spacing. The result has `valid_from = 0`.
pub fn parse_formula(text: &str) -> Result<FactorialCombination> {
    let err = |msg: &str| Error::FormulaSyntax(format!("{msg} in {text:?}"));
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s == "0" {
        return Ok(FactorialCombination::zero());
    }
    if s.is_empty() {
        return Err(err("empty formula"));
    }
    // Split at top-level signs, keeping the sign with its term.
    let bytes = s.as_bytes();
    let mut terms = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 && i > start => {
                terms.push(&s[start..i]);
                start = i;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(err("unbalanced ')'"));
        }
    }
    terms.push(&s[start..]);
    let mut fc = FactorialCombination::zero();
    for raw in terms {
        let (neg, body) = match raw.as_bytes().first() {
            Some(b'-') => (true, &raw[1..]),
            Some(b'+') => (false, &raw[1..]),
            _ => (false, raw),
        };
        let (coef, fact) = match body.rfind('*') {
            Some(i) => (parse_rational(&body[..i])?, &body[i + 1..]),
            None => (Rational::one(), body),
        };
        let offset = if fact == "n!" {
            0
        } else {
            let inner = fact
                .strip_prefix("(n")
                .and_then(|r| r.strip_suffix(")!"))
                .ok_or_else(|| err(&format!("bad factorial term {fact:?}")))?;
            let (sign, digits) = match inner.as_bytes().first() {
                Some(b'+') => (1, &inner[1..]),
                Some(b'-') => (-1, &inner[1..]),
                _ => return Err(err(&format!("bad offset {inner:?}"))),
            };
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err(&format!("bad offset {inner:?}")));
            }
            sign * digits
                .parse::<i64>()
                .map_err(|_| err("offset too large"))?
        };
        fc.add_term(offset, if neg { -coef } else { coef });
    }
    Ok(fc)
}

/// Exact change of basis from `poly(n)·(n−k)!` to `Σ βᵢ (n−k+i)!`.
///
/// With `x = n − k`, `poly` is expanded in `gᵢ(x) = (x+1)⋯(x+i)` by repeated
/// evaluation at `x = −1, −2, …` and synthetic division.
pub fn to_factorial_combination(pf: &PolyTimesShiftedFactorial) -> FactorialCombination {
    let k = pf.shift;
    let mut q = pf.poly.shift(&Rational::from_integer(k.into()));
    let mut coeffs = Vec::new();
    let mut i = 0i64;
    while !q.is_zero() {
        let root = Rational::from_integer((-(i + 1)).into());
        let (quot, rem) = q.div_linear(&root);
        coeffs.push((i - k, rem));
        q = quot;
        i += 1;
    }
    FactorialCombination::new(coeffs, k.max(0))
}

/// Solves on the first `offsets.len()` points and checks every remaining
/// point exactly.
pub fn fit(data: &[(i64, Rational)], offsets: &[i64]) -> Result<FactorialCombination> {
    let size = offsets.len();
    if data.len() < size + 2 {
        return Err(Error::InsufficientData(format!(
            "{} points for {size} unknowns; need at least {}",
            data.len(),
            size + 2
        )));
    }
    let mut ns: Vec<i64> = data.iter().map(|d| d.0).collect();
    ns.sort_unstable();
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InsufficientData("repeated n in data".into()));
    }
    let min_off = offsets.iter().copied().min().unwrap_or(0);
    let floor = 0.max(-min_off);
    if let Some(&(n, _)) = data.iter().find(|(n, _)| *n < floor) {
        return Err(Error::InsufficientData(format!(
            "n = {n} is below {floor}, where every (n+i)! is defined"
        )));
    }
    let rows: Vec<Vec<Rational>> = data[..size]
        .iter()
        .map(|(n, _)| {
            offsets
                .iter()
                .map(|i| Rational::from_integer(factorial((n + i) as u64)))
                .collect()
        })
        .collect();
    let rhs: Vec<Rational> = data[..size].iter().map(|d| d.1.clone()).collect();
    let x = if size == 0 { Vec::new() } else { solve(rows, rhs)? };
    let fc = FactorialCombination::new(
        offsets.iter().copied().zip(x),
        ns.first().copied().unwrap_or(0),
    );
    for (n, v) in &data[size..] {
        let fitted = fc.evaluate_unchecked(*n)?;
        if &fitted != v {
            return Err(Error::VerificationFailed {
                n: *n,
                expected: format_rational(v),
                fitted: format_rational(&fitted),
            });
        }
    }
    Ok(fc)
}

/// The narrowest sub-window of `window` (ties: lowest start) that fits all
/// of `data` with at least two held-out points.
pub fn minimal_window(
    data: &[(i64, Rational)],
    window: (i64, i64),
) -> Option<((i64, i64), FactorialCombination)> {
    if data.len() >= 2 && data.iter().all(|(_, v)| v.is_zero()) {
        return Some(((0, -1), FactorialCombination::zero()));
    }
    let (lo, hi) = window;
    for width in 1..=(hi - lo + 1) {
        if data.len() < width as usize + 2 {
            break;
        }
        for a in lo..=hi - width + 1 {
            let offs: Vec<i64> = (a..a + width).collect();
            if let Ok(fc) = fit(data, &offs) {
                return Some(((a, a + width - 1), fc));
            }
        }
    }
    None
}

/// The offset window and validity threshold guaranteed for `M(f^r, n)`.
pub fn default_offsets(stat: &Statistic, r: u32) -> OffsetWindow {
    let r_i = r.max(1) as i64;
    if let Some(p) = stat.as_count() {
        let (k, c, d) = (p.len() as i64, p.c_count() as i64, p.d_count() as i64);
        if d == 0 {
            return OffsetWindow {
                lo: 0,
                hi: r_i * (k - c),
                valid_from: r_i * k,
                source: WindowSource::VincularPower,
            };
        }
        // Each merge contributes C(n−c̃, k̃−c̃)·(n−d̃)!/(k̃−d̃)! with
        // d ≤ d̃ ≤ rd and k̃ − c̃ ≤ r(k − c).
        return OffsetWindow {
            lo: -r_i * d,
            hi: r_i * (k - c) - d,
            valid_from: (r_i * c).max(r_i * d),
            source: WindowSource::MergeCensus,
        };
    }
    // Per term: (k, c, d, deg Q₁ + deg Q₂).
    let terms: Vec<(i64, i64, i64, i64)> = stat
        .terms()
        .iter()
        .map(|(_, s)| {
            (
                s.pattern.len() as i64,
                s.pattern.c_count() as i64,
                s.pattern.d_count() as i64,
                (s.q1.degree() + s.q2.degree()) as i64,
            )
        })
        .collect();
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    let mut valid = 0;
    for_each_multiset(terms.len(), r as usize, &mut |picks: &[usize]| {
        let sum_k: i64 = picks.iter().map(|&t| terms[t].0).sum();
        let max_k = picks.iter().map(|&t| terms[t].0).max().unwrap_or(0);
        let upper: i64 = picks
            .iter()
            .map(|&t| {
                let (k, c, d, q) = terms[t];
                2 * k - c - d + q
            })
            .sum::<i64>()
            - max_k;
        lo = lo.min(-sum_k);
        hi = hi.max(upper);
        valid = valid.max(sum_k);
    });
    let source = if stat.terms().len() == 1 && r == 1 {
        WindowSource::SimpleStatistic
    } else {
        WindowSource::GeneralStatistic
    };
    OffsetWindow {
        lo,
        hi,
        valid_from: valid,
        source,
    }
}

fn for_each_multiset(n: usize, r: usize, f: &mut impl FnMut(&[usize])) {
    fn go(n: usize, r: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == r {
            f(cur);
            return;
        }
        for t in start..n {
            cur.push(t);
            go(n, r, t, cur, f);
            cur.pop();
        }
    }
    go(n, r, 0, &mut Vec::new(), f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::{aggregate_brute, aggregate_fast, BruteConfig};
    use crate::numbers::{binomial, int, lah, rat};
    use proptest::prelude::*;

    fn fc(pairs: &[(i64, Rational)]) -> FactorialCombination {
        FactorialCombination::new(pairs.iter().cloned(), 0)
    }

    #[test]
    fn evaluate_examples() {
        let drops = fc(&[(1, rat(-1, 2)), (2, rat(1, 6))]);
        assert_eq!(drops.evaluate(3).unwrap(), int(8));
        assert_eq!(fc(&[(0, int(1))]).evaluate(4).unwrap(), int(24));
        let c1324 = fc(&[
            (0, rat(1, 24)),
            (1, rat(-1, 6)),
            (2, rat(1, 8)),
            (3, rat(-1, 36)),
            (4, rat(1, 576)),
        ]);
        assert_eq!(c1324.evaluate(4).unwrap(), int(1));
        let guarded = drops.clone().with_valid_from(2);
        assert_eq!(
            guarded.evaluate(1),
            Err(Error::BelowValidity { n: 1, valid_from: 2 })
        );
    }

    #[test]
    fn fit_examples() {
        let c = BruteConfig::default();
        let drops = Statistic::preset("drops").unwrap();
        let data: Vec<_> = (2..=5)
            .map(|n| (n, aggregate_brute(&drops, n as usize, 1, &c).unwrap().value))
            .collect();
        let got = fit(&data, &[1, 2]).unwrap();
        assert_eq!(got.coeffs(), fc(&[(1, rat(-1, 2)), (2, rat(1, 6))]).coeffs());
        assert_eq!(got.valid_from, 2);

        let zeros: Vec<_> = (0..6).map(|n| (n, int(0))).collect();
        assert!(fit(&zeros, &[0, 1, 2]).unwrap().is_zero());

        assert!(matches!(fit(&data, &[0, 1, 2]), Err(Error::InsufficientData(_))));
        let wrong: Vec<_> = (2..=5).map(|n| (n, int(n))).collect();
        assert!(matches!(fit(&wrong, &[1, 2]), Err(Error::VerificationFailed { .. })));
        let dup = vec![(2, int(1)), (2, int(1)), (3, int(2))];
        assert!(matches!(fit(&dup, &[0]), Err(Error::InsufficientData(_))));
        // 2·n! and (n+1)! − (n−1)·n! coincide: singular on this basis pair.
        let sing = vec![(2, int(1)), (3, int(2)), (4, int(3)), (5, int(4))];
        let same_column = fit(&sing, &[0, 0]);
        assert_eq!(same_column, Err(Error::SingularSystem));
    }

    #[test]
    fn lah_conversion() {
        // binom(n,3)·n!/3! via the Lah expansion: (-1)^{k-j} L(k,j)... collapsed
        // to (-1)^{k-j}/((j!)^2 (k-j)!) for the coefficient of (n+j)!.
        let k = 3u64;
        let mut expect = Vec::new();
        for j in 0..=k as i64 {
            let sign = if (k as i64 - j) % 2 == 0 { 1 } else { -1 };
            let denom = factorial(j as u64) * factorial(j as u64) * factorial(k - j as u64);
            expect.push((j, Rational::new(sign.into(), denom)));
        }
        let poly = UniPoly::binomial_shifted(0, k).scale(&rat(1, 6));
        let got = to_factorial_combination(&PolyTimesShiftedFactorial { poly, shift: 0 });
        assert_eq!(got, FactorialCombination::new(expect, 0));
        assert_eq!(
            got,
            fc(&[(0, rat(-1, 6)), (1, rat(1, 2)), (2, rat(-1, 4)), (3, rat(1, 36))])
        );
        for n in 3..=8 {
            let direct = Rational::new(binomial(n, 3) * factorial(n as u64), 6.into());
            assert_eq!(got.evaluate(n).unwrap(), direct);
        }
        let _ = lah(3, 1).unwrap();
    }

    #[test]
    fn conversion_examples() {
        let one = PolyTimesShiftedFactorial {
            poly: UniPoly::constant(int(1)),
            shift: 0,
        };
        assert_eq!(to_factorial_combination(&one), fc(&[(0, int(1))]));
        let lin = PolyTimesShiftedFactorial {
            poly: UniPoly::linear(int(-1)),
            shift: 1,
        };
        assert_eq!(
            to_factorial_combination(&lin).coeffs(),
            fc(&[(0, int(1)), (-1, int(-1))]).coeffs()
        );
    }

    #[test]
    fn formula_text() {
        let drops = fc(&[(1, rat(-1, 2)), (2, rat(1, 6))]);
        assert_eq!(format_formula(&drops), "-1/2*(n+1)! + 1/6*(n+2)!");
        assert_eq!(format_formula(&FactorialCombination::zero()), "0");
        assert_eq!(format_formula(&fc(&[(0, int(1))])), "n!");
        let mixed = fc(&[(-2, int(-1)), (0, rat(3, 7)), (3, int(1))]);
        assert_eq!(format_formula(&mixed), "-(n-2)! + 3/7*n! + (n+3)!");
        assert_eq!(parse_formula(&format_formula(&mixed)).unwrap(), mixed);
        assert_eq!(parse_formula("n! + n!").unwrap(), fc(&[(0, int(2))]));
        for bad in ["", "n", "(n+)!", "2*", "x!", "(n+1!", "1/0*n!"] {
            assert!(parse_formula(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn json_form() {
        let drops = fc(&[(1, rat(-1, 2)), (2, rat(1, 6))]).with_valid_from(2);
        let j = serde_json::to_string(&drops).unwrap();
        assert_eq!(j, r#"{"coeffs":{"1":"-1/2","2":"1/6"},"validFrom":2}"#);
        let back: FactorialCombination = serde_json::from_str(&j).unwrap();
        assert_eq!(back, drops);
    }

    #[test]
    fn windows() {
        let dasc = Statistic::load("cnt:[123]").unwrap();
        let w = default_offsets(&dasc, 2);
        assert_eq!((w.lo, w.hi, w.valid_from), (0, 2, 6));
        assert_eq!(w.source, WindowSource::VincularPower);
        let drops = default_offsets(&Statistic::preset("drops").unwrap(), 1);
        assert_eq!((drops.lo, drops.hi, drops.valid_from), (-2, 2, 2));
        assert_eq!(drops.source, WindowSource::SimpleStatistic);
        let cls = default_offsets(&Statistic::load("cnt:1324").unwrap(), 1);
        assert_eq!((cls.lo, cls.hi), (0, 4));
        let biv = default_offsets(&Statistic::load("cnt:3[12];D=2").unwrap(), 2);
        assert_eq!((biv.lo, biv.hi, biv.valid_from), (-2, 3, 2));
        let peaks = default_offsets(&Statistic::preset("peakSqSum").unwrap(), 1);
        assert_eq!((peaks.lo, peaks.hi, peaks.valid_from), (-3, 3, 3));
    }

    #[test]
    fn default_windows_fit_presets() {
        for name in crate::statistic::PRESETS {
            let stat = Statistic::preset(name).unwrap();
            let w = default_offsets(&stat, 1);
            let data: Vec<_> = w
                .sample_points(2)
                .into_iter()
                .map(|n| (n, aggregate_fast(&stat, n as usize).value))
                .collect();
            let got = fit(&data, &w.offsets()).unwrap();
            let (_, small) = minimal_window(&data, (w.lo, w.hi)).unwrap();
            assert_eq!(got.coeffs(), small.coeffs(), "{name}");
        }
    }

    fn arb_combination() -> impl Strategy<Value = FactorialCombination> {
        proptest::collection::btree_map(-3i64..5, (-30i64..30, 1i64..12), 0..6).prop_map(|m| {
            FactorialCombination::new(m.into_iter().map(|(i, (p, q))| (i, rat(p, q))), 3)
        })
    }

    proptest! {
        #[test]
        fn fit_inverts_evaluate(fc in arb_combination()) {
            let offsets: Vec<i64> = (-3..5).collect();
            let data: Vec<_> = (3..3 + offsets.len() as i64 + 2)
                .map(|n| (n, fc.evaluate(n).unwrap()))
                .collect();
            let got = fit(&data, &offsets).unwrap();
            prop_assert_eq!(got.coeffs(), fc.coeffs());
        }

        #[test]
        fn conversion_agrees_with_evaluation(
            coeffs in proptest::collection::vec((-20i64..20, 1i64..7), 1..8),
            shift in 0i64..5,
        ) {
            let poly = UniPoly::new(coeffs.iter().map(|&(p, q)| rat(p, q)).collect());
            prop_assume!(!poly.is_zero());
            let pf = PolyTimesShiftedFactorial { poly: poly.clone(), shift };
            let got = to_factorial_combination(&pf);
            for n in shift..shift + 13 {
                let direct = poly.eval_int(n) * Rational::from_integer(factorial((n - shift) as u64));
                prop_assert_eq!(got.evaluate(n).unwrap(), direct);
            }
        }

        #[test]
        fn formula_round_trip(fc in arb_combination()) {
            let back = parse_formula(&format_formula(&fc)).unwrap();
            prop_assert_eq!(back.coeffs(), fc.coeffs());
        }
    }
}
