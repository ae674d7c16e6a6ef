//! Simple statistics `f_{P,Q}(σ) = Σ_s Q₁(s)·Q₂(σ⁻¹(s))` and their rational
//! linear combinations.

use num_integer::Integer as _;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::numbers::{format_rational, parse_rational, Integer, Rational};
use crate::pattern::{Matcher, Pattern};
use crate::perm::Permutation;
use crate::poly::{CompiledPoly, ValuationPoly};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimpleStatistic {
    pub pattern: Pattern,
    /// Evaluated on the occurrence values with `m = n`.
    pub q1: ValuationPoly,
    /// Evaluated on the occurrence positions, in value order, with `m = n`.
    pub q2: ValuationPoly,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Statistic {
    terms: Vec<(Rational, SimpleStatistic)>,
}

pub const PRESETS: &[&str] = &[
    "descents",
    "adjacency",
    "drops",
    "peakSqSum",
    "doubleAscents",
    "inversions",
];

impl SimpleStatistic {
    pub fn new(pattern: Pattern, q1: ValuationPoly, q2: ValuationPoly) -> Result<Self> {
        let k = pattern.len();
        for (name, q) in [("Q1", &q1), ("Q2", &q2)] {
            if q.arity() != k {
                return Err(Error::StatisticSpec {
                    term: None,
                    msg: format!("{name} has arity {}, pattern length is {k}", q.arity()),
                });
            }
        }
        Ok(SimpleStatistic { pattern, q1, q2 })
    }

    /// `cnt_P`: both valuations are 1.
    pub fn count(pattern: Pattern) -> Self {
        let k = pattern.len();
        SimpleStatistic {
            pattern,
            q1: ValuationPoly::one(k),
            q2: ValuationPoly::one(k),
        }
    }

    pub fn is_count(&self) -> bool {
        self.q1.is_one() && self.q2.is_one()
    }

    pub fn degree(&self) -> u32 {
        2 * self.pattern.len() as u32 + self.q1.degree() + self.q2.degree()
    }

    pub fn evaluate(&self, sigma: &Permutation) -> Rational {
        let n = sigma.len();
        let mut total = Rational::zero();
        self.pattern.matcher().for_each(sigma.values(), |t, w| {
            total += self.q1.eval(t, n) * self.q2.eval(w, n);
        });
        total
    }
}

impl Statistic {
    pub fn new(terms: Vec<(Rational, SimpleStatistic)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::StatisticSpec {
                term: None,
                msg: "a statistic needs at least one term".into(),
            });
        }
        Ok(Statistic { terms })
    }

    pub fn simple(s: SimpleStatistic) -> Self {
        Statistic {
            terms: vec![(Rational::one(), s)],
        }
    }

    pub fn count(pattern: Pattern) -> Self {
        Self::simple(SimpleStatistic::count(pattern))
    }

    pub fn terms(&self) -> &[(Rational, SimpleStatistic)] {
        &self.terms
    }

    /// The single term when the statistic is one simple statistic with
    /// coefficient 1.
    pub fn as_simple(&self) -> Option<&SimpleStatistic> {
        match self.terms.as_slice() {
            [(c, s)] if c.is_one() => Some(s),
            _ => None,
        }
    }

    /// The pattern when the statistic is `cnt_P`.
    pub fn as_count(&self) -> Option<&Pattern> {
        self.as_simple().filter(|s| s.is_count()).map(|s| &s.pattern)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, s)| s.degree()).max().unwrap_or(0)
    }

    pub fn min_pattern_len(&self) -> usize {
        self.terms.iter().map(|(_, s)| s.pattern.len()).min().unwrap_or(0)
    }

    pub fn max_pattern_len(&self) -> usize {
        self.terms.iter().map(|(_, s)| s.pattern.len()).max().unwrap_or(0)
    }

    pub fn evaluate(&self, sigma: &Permutation) -> Rational {
        self.terms
            .iter()
            .map(|(c, s)| c * s.evaluate(sigma))
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Statistic {
            terms: self.terms.iter().map(|(a, s)| (a * c, s.clone())).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Statistic { terms }
    }

    pub fn compile(&self) -> CompiledStatistic {
        CompiledStatistic::new(self)
    }

    /// A preset name, `cnt:<pattern>`, or a JSON spec document.
    pub fn load(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.starts_with('{') {
            return Self::from_json(t);
        }
        Self::preset(t)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let p = |s: &str| s.parse::<Pattern>().expect("preset pattern");
        let poly = |s: &str, k| ValuationPoly::parse(s, k).expect("preset polynomial");
        if let Some(rest) = name.strip_prefix("cnt:") {
            return Ok(Self::count(Pattern::parse_any(rest)?));
        }
        Ok(match name {
            "descents" => Self::count(p("[21]")),
            "adjacency" => Self::count(p("[21];D=1")),
            "doubleAscents" => Self::count(p("[123]")),
            "inversions" => Self::count(p("21")),
            "drops" => Self::simple(SimpleStatistic {
                pattern: p("[21]"),
                q1: poly("y2 - y1", 2),
                q2: ValuationPoly::one(2),
            }),
            "peakSqSum" => {
                let term = |s| {
                    (
                        Rational::one(),
                        SimpleStatistic {
                            pattern: p(s),
                            q1: poly("y3^2", 3),
                            q2: ValuationPoly::one(3),
                        },
                    )
                };
                Statistic {
                    terms: vec![term("[132]"), term("[231]")],
                }
            }
            other => {
                return Err(Error::StatisticSpec {
                    term: None,
                    msg: format!(
                        "unknown statistic {other:?}; expected one of {} or cnt:<pattern> or a JSON spec",
                        PRESETS.join(", ")
                    ),
                })
            }
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpecDoc = serde_json::from_str(text).map_err(|e| Error::StatisticSpec {
            term: None,
            msg: e.to_string(),
        })?;
        Self::from_doc(&doc)
    }

    fn from_doc(doc: &SpecDoc) -> Result<Self> {
        let mut terms = Vec::with_capacity(doc.terms.len());
        for (i, t) in doc.terms.iter().enumerate() {
            let wrap = |e: Error| Error::StatisticSpec {
                term: Some(i),
                msg: e.to_string(),
            };
            let coef = match &t.coef {
                None => Rational::one(),
                Some(serde_json::Value::String(s)) => parse_rational(s).map_err(wrap)?,
                Some(serde_json::Value::Number(n)) => {
                    let v = n.as_i64().ok_or_else(|| Error::StatisticSpec {
                        term: Some(i),
                        msg: format!("coef {n} is not an integer; write it as \"p/q\""),
                    })?;
                    Rational::from_integer(v.into())
                }
                Some(other) => {
                    return Err(Error::StatisticSpec {
                        term: Some(i),
                        msg: format!("coef must be a string or integer, got {other}"),
                    })
                }
            };
            let pattern = match &t.pattern {
                serde_json::Value::String(s) => Pattern::parse_any(s).map_err(wrap)?,
                v @ serde_json::Value::Object(_) => {
                    serde_json::from_value(v.clone()).map_err(|e| Error::StatisticSpec {
                        term: Some(i),
                        msg: e.to_string(),
                    })?
                }
                other => {
                    return Err(Error::StatisticSpec {
                        term: Some(i),
                        msg: format!("pattern must be a string or object, got {other}"),
                    })
                }
            };
            let k = pattern.len();
            let q1 = ValuationPoly::parse(t.q1.as_deref().unwrap_or("1"), k).map_err(wrap)?;
            let q2 = ValuationPoly::parse(t.q2.as_deref().unwrap_or("1"), k).map_err(wrap)?;
            terms.push((coef, SimpleStatistic { pattern, q1, q2 }));
        }
        Self::new(terms)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(c, s)| {
                serde_json::json!({
                    "coef": format_rational(c),
                    "pattern": s.pattern.to_string(),
                    "Q1": s.q1.to_string(),
                    "Q2": s.q2.to_string(),
                })
            })
            .collect();
        serde_json::json!({ "terms": terms })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    terms: Vec<SpecTerm>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecTerm {
    #[serde(default)]
    coef: Option<serde_json::Value>,
    pattern: serde_json::Value,
    #[serde(rename = "Q1", default)]
    q1: Option<String>,
    #[serde(rename = "Q2", default)]
    q2: Option<String>,
}

/// A statistic scaled to integers: `F(σ) = scaled(σ) / denom`.
#[derive(Clone, Debug)]
pub struct CompiledStatistic {
    pub denom: Integer,
    terms: Vec<CompiledTerm>,
}

#[derive(Clone, Debug)]
struct CompiledTerm {
    matcher: Matcher,
    mult: Integer,
    mult_small: Option<i128>,
    q1: CompiledPoly,
    q2: CompiledPoly,
}

impl CompiledStatistic {
    fn new(stat: &Statistic) -> Self {
        let parts: Vec<(Rational, CompiledPoly, CompiledPoly)> = stat
            .terms
            .iter()
            .map(|(c, s)| (c.clone(), s.q1.compile(), s.q2.compile()))
            .collect();
        // term value = c · (Σ q1·q2) / (D1·D2)
        let denom = parts.iter().fold(Integer::one(), |acc, (c, q1, q2)| {
            acc.lcm(&(c.denom() * &q1.denom * &q2.denom))
        });
        let terms = stat
            .terms
            .iter()
            .zip(parts)
            .map(|((_, s), (c, q1, q2))| {
                let mult = c.numer() * (&denom / (c.denom() * &q1.denom * &q2.denom));
                CompiledTerm {
                    matcher: s.pattern.matcher(),
                    mult_small: mult.to_i128(),
                    mult,
                    q1,
                    q2,
                }
            })
            .collect();
        CompiledStatistic { denom, terms }
    }

    /// `denom · F(σ)` in checked `i128`.
    pub fn eval_i128(&self, sigma: &[usize]) -> Option<i128> {
        let n = sigma.len();
        let mut total: i128 = 0;
        for term in &self.terms {
            let mut inner: Option<i128> = Some(0);
            match (&term.q1.constant, &term.q2.constant) {
                (Some(a), Some(b)) => {
                    let cnt = term.matcher.count(sigma) as i128;
                    let ab = (a * b).to_i128()?;
                    inner = cnt.checked_mul(ab);
                }
                _ => term.matcher.for_each(sigma, |t, w| {
                    inner = inner.and_then(|acc| {
                        let v1 = term.q1.eval_i128(t, n)?;
                        let v2 = term.q2.eval_i128(w, n)?;
                        acc.checked_add(v1.checked_mul(v2)?)
                    });
                }),
            }
            total = total.checked_add(inner?.checked_mul(term.mult_small?)?)?;
        }
        Some(total)
    }

    pub fn eval_big(&self, sigma: &[usize]) -> Integer {
        let n = sigma.len();
        let mut total = Integer::zero();
        for term in &self.terms {
            let mut inner = Integer::zero();
            term.matcher.for_each(sigma, |t, w| {
                inner += term.q1.eval_big(t, n) * term.q2.eval_big(w, n);
            });
            total += inner * &term.mult;
        }
        total
    }

    pub fn eval_scaled(&self, sigma: &[usize]) -> Integer {
        match self.eval_i128(sigma) {
            Some(v) => Integer::from(v),
            None => self.eval_big(sigma),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::numbers::{int, rat};
    use crate::perm::enumerate_sn;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn perm(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn preset_values() {
        let drops = Statistic::preset("drops").unwrap();
        assert_eq!(drops.evaluate(&perm("321")), int(2));
        let peaks = Statistic::preset("peakSqSum").unwrap();
        assert_eq!(peaks.evaluate(&perm("132")), int(9));
        assert_eq!(peaks.evaluate(&perm("14253")), int(16 + 25));
        assert_eq!(Statistic::preset("inversions").unwrap().evaluate(&perm("321")), int(3));
        let des = Statistic::preset("descents").unwrap();
        assert_eq!(des.as_count().unwrap().to_string(), "[21]");
        let adj = Statistic::preset("adjacency").unwrap();
        assert_eq!(adj.as_count().unwrap().adj_d(), &[1]);
        assert!(Statistic::preset("nope").is_err());
        assert_eq!(
            Statistic::load("cnt:3[12];D=2").unwrap().as_count().unwrap().to_string(),
            "3[12];D=2"
        );
    }

    #[test]
    fn degrees() {
        for k in 1..=4usize {
            let p = Pattern::classical(Permutation::identity(k));
            assert_eq!(Statistic::count(p).degree(), 2 * k as u32);
        }
        assert_eq!(Statistic::preset("drops").unwrap().degree(), 5);
        assert_eq!(Statistic::preset("peakSqSum").unwrap().degree(), 8);
    }

    #[test]
    fn json_spec() {
        let doc = r#"{"terms":[
            {"coef":"1/2","pattern":"[21]","Q1":"y2 - y1"},
            {"coef":3,"pattern":{"perm":[1,2],"C":[1]},"Q2":"m*y1"}
        ]}"#;
        let s = Statistic::load(doc).unwrap();
        assert_eq!(s.terms().len(), 2);
        assert_eq!(s.terms()[0].0, rat(1, 2));
        assert_eq!(s.degree(), 6);
        let back = Statistic::from_json(&s.to_json().to_string()).unwrap();
        assert_eq!(back, s);

        let bad = r#"{"terms":[{"pattern":"21"},{"pattern":"21","Q1":"y3"}]}"#;
        match Statistic::load(bad) {
            Err(Error::StatisticSpec { term: Some(1), .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Statistic::load(r#"{"terms":[]}"#),
            Err(Error::StatisticSpec { term: None, .. })
        ));
        assert!(Statistic::load(r#"{"terms":[{"pattern":"21","extra":1}]}"#).is_err());
    }

    #[test]
    fn unit_valuation_is_count() {
        for k in 1..=3 {
            for p in enumerate_sn(k, 0..u64::MAX, 11).unwrap() {
                for cm in 0..1u32 << (k - 1) {
                    for dm in 0..1u32 << (k - 1) {
                        let c = (1..k).filter(|i| cm >> (i - 1) & 1 == 1).collect();
                        let d = (1..k).filter(|i| dm >> (i - 1) & 1 == 1).collect();
                        let pat = Pattern::new(p.clone(), c, d).unwrap();
                        let stat = Statistic::count(pat.clone());
                        for n in 0..=6 {
                            for s in enumerate_sn(n, 0..u64::MAX, 11).unwrap() {
                                assert_eq!(
                                    stat.evaluate(&s),
                                    Rational::from_integer(pat.count(&s))
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    pub(crate) fn random_simple(rng: &mut ChaCha8Rng) -> SimpleStatistic {
        let k = rng.gen_range(1..=3);
        let mut values: Vec<usize> = (1..=k).collect();
        for i in (1..k).rev() {
            values.swap(i, rng.gen_range(0..=i));
        }
        let c = (1..k).filter(|_| rng.gen_bool(0.4)).collect();
        let d = (1..k).filter(|_| rng.gen_bool(0.3)).collect();
        let pattern = Pattern::new(Permutation::new(values).unwrap(), c, d).unwrap();
        let mut poly = || {
            let terms = (0..rng.gen_range(1..3))
                .map(|_| {
                    let mono = (0..=k).map(|_| rng.gen_range(0..2)).collect();
                    (mono, rat(rng.gen_range(-5..6), rng.gen_range(1..4)))
                })
                .collect::<Vec<_>>();
            ValuationPoly::from_terms(k, terms)
        };
        let q1 = poly();
        let q2 = poly();
        SimpleStatistic { pattern, q1, q2 }
    }

    #[test]
    fn compiled_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let stat = Statistic::new(vec![
                (rat(rng.gen_range(-4..5), rng.gen_range(1..4)), random_simple(&mut rng)),
                (rat(rng.gen_range(-4..5), rng.gen_range(1..4)), random_simple(&mut rng)),
            ])
            .unwrap();
            let c = stat.compile();
            for s in enumerate_sn(5, 0..u64::MAX, 11).unwrap() {
                let scaled = Rational::new(c.eval_scaled(s.values()), c.denom.clone());
                assert_eq!(scaled, stat.evaluate(&s));
                assert_eq!(c.eval_big(s.values()), c.eval_scaled(s.values()));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn evaluation_is_linear(seed in any::<u64>(), a in -5i64..6, b in -5i64..6, q in 1i64..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = Statistic::simple(random_simple(&mut rng));
            let g = Statistic::simple(random_simple(&mut rng));
            let (a, b) = (rat(a, q), rat(b, 1));
            let combo = f.scale(&a).plus(&g.scale(&b));
            let n = rng.gen_range(0..7usize);
            let mut v: Vec<usize> = (1..=n).collect();
            for i in (1..n).rev() {
                v.swap(i, rng.gen_range(0..=i));
            }
            let s = Permutation::new(v).unwrap();
            prop_assert_eq!(combo.evaluate(&s), &a * f.evaluate(&s) + &b * g.evaluate(&s));
        }
    }
}
