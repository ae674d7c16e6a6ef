//! Valuation polynomials in `y₁…y_k` and `m` with rational coefficients.
//!
//! Grammar: integer literals, `y1`…`yk`, `m`, binary `+ - * /`, unary `-`,
//! `^` with a non-negative integer exponent, parentheses. Division is only
//! by constants.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::numbers::{format_rational, Integer, Rational};
use crate::{Error, Result};

/// Exponent vector `(e₁, …, e_k, e_m)`.
pub type Monomial = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValuationPoly {
    arity: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl ValuationPoly {
    pub fn zero(arity: usize) -> Self {
        ValuationPoly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: Rational) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(vec![0; arity + 1], c);
        p
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, Rational::one())
    }

    /// `y_index` (1-based).
    pub fn var(arity: usize, index: usize) -> Result<Self> {
        if index == 0 || index > arity {
            return Err(Error::UnknownVariable { index, k: arity });
        }
        let mut mono = vec![0; arity + 1];
        mono[index - 1] = 1;
        let mut p = Self::zero(arity);
        p.add_term(mono, Rational::one());
        Ok(p)
    }

    pub fn m(arity: usize) -> Self {
        let mut mono = vec![0; arity + 1];
        mono[arity] = 1;
        let mut p = Self::zero(arity);
        p.add_term(mono, Rational::one());
        p
    }

    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Self::zero(arity);
        for (mono, c) in terms {
            assert_eq!(mono.len(), arity + 1, "monomial arity");
            p.add_term(mono, c);
        }
        p
    }

    fn add_term(&mut self, mono: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value when the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (mono, c) = self.terms.iter().next().unwrap();
                mono.iter().all(|&e| e == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// Total degree counting `m`; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|mono| mono.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Degree in `y` only.
    pub fn y_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|mono| mono[..self.arity].iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn m_degree(&self) -> u32 {
        self.terms.keys().map(|mono| mono[self.arity]).max().unwrap_or(0)
    }

    /// Affine coefficients `(a₀, a₁, …, a_k)` when the polynomial is linear in
    /// the `y` and free of `m`.
    pub fn linear_coefficients(&self) -> Option<Vec<Rational>> {
        let mut out = vec![Rational::zero(); self.arity + 1];
        for (mono, c) in &self.terms {
            if mono[self.arity] != 0 {
                return None;
            }
            match mono.iter().sum::<u32>() {
                0 => out[0] = c.clone(),
                1 => {
                    let i = mono.iter().position(|&e| e == 1).unwrap();
                    out[i + 1] = c.clone();
                }
                _ => return None,
            }
        }
        Some(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.add_term(mono.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.arity);
        for (mono, d) in &self.terms {
            out.add_term(mono.clone(), d * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let mut out = Self::zero(self.arity);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mono = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(mono, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(self.arity);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Renames `y_i` to `y_{map[i-1]}` in a polynomial of arity `new_arity`.
    pub fn remap(&self, map: &[usize], new_arity: usize) -> Self {
        assert_eq!(map.len(), self.arity);
        let mut out = Self::zero(new_arity);
        for (mono, c) in &self.terms {
            let mut m2 = vec![0; new_arity + 1];
            for (i, &e) in mono[..self.arity].iter().enumerate() {
                m2[map[i] - 1] += e;
            }
            m2[new_arity] = mono[self.arity];
            out.add_term(m2, c.clone());
        }
        out
    }

    /// Substitutes an arbitrary polynomial (of arity `target`) for each `y_i`.
    pub fn substitute(&self, images: &[ValuationPoly], target: usize) -> Self {
        assert_eq!(images.len(), self.arity);
        let mut out = Self::zero(target);
        let m = Self::m(target);
        for (mono, c) in &self.terms {
            let mut term = Self::constant(target, c.clone());
            for (i, &e) in mono[..self.arity].iter().enumerate() {
                if e > 0 {
                    term = term.mul(&images[i].pow(e));
                }
            }
            if mono[self.arity] > 0 {
                term = term.mul(&m.pow(mono[self.arity]));
            }
            out = out.add(&term);
        }
        out
    }

    pub fn eval(&self, y: &[usize], m: usize) -> Rational {
        assert_eq!(y.len(), self.arity);
        let mut total = Rational::zero();
        for (mono, c) in &self.terms {
            let mut v = Integer::one();
            for (i, &e) in mono[..self.arity].iter().enumerate() {
                if e > 0 {
                    v *= num_traits::pow(Integer::from(y[i]), e as usize);
                }
            }
            if mono[self.arity] > 0 {
                v *= num_traits::pow(Integer::from(m), mono[self.arity] as usize);
            }
            total += c * Rational::from_integer(v);
        }
        total
    }

    /// Integer form: `self = compiled / denom`.
    pub fn compile(&self) -> CompiledPoly {
        let denom = self
            .terms
            .values()
            .fold(Integer::one(), |acc, c| acc.lcm(c.denom()));
        let terms = self
            .terms
            .iter()
            .map(|(mono, c)| {
                let scaled = c.numer() * (&denom / c.denom());
                (scaled, mono.clone())
            })
            .collect::<Vec<_>>();
        let small = terms
            .iter()
            .map(|(c, mono)| c.to_i128().map(|c| (c, mono.clone())))
            .collect::<Option<Vec<_>>>();
        CompiledPoly {
            arity: self.arity,
            denom,
            constant: self.as_constant().map(|_| {
                terms
                    .first()
                    .map(|(c, _)| c.clone())
                    .unwrap_or_else(Integer::zero)
            }),
            big: terms,
            small,
        }
    }

    pub fn parse(text: &str, arity: usize) -> Result<Self> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
            arity,
        };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(out)
    }
}

/// `ValuationPoly` scaled to integer coefficients for fast evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    arity: usize,
    pub denom: Integer,
    /// Set when the polynomial is a constant: its scaled value.
    pub constant: Option<Integer>,
    big: Vec<(Integer, Monomial)>,
    small: Option<Vec<(i128, Monomial)>>,
}

impl CompiledPoly {
    /// `denom · poly(y, m)` in checked `i128`; `None` on overflow.
    pub fn eval_i128(&self, y: &[usize], m: usize) -> Option<i128> {
        let small = self.small.as_ref()?;
        let mut total: i128 = 0;
        for (c, mono) in small {
            let mut v = *c;
            for (i, &e) in mono[..self.arity].iter().enumerate() {
                if e > 0 {
                    v = v.checked_mul((y[i] as i128).checked_pow(e)?)?;
                }
            }
            let em = mono[self.arity];
            if em > 0 {
                v = v.checked_mul((m as i128).checked_pow(em)?)?;
            }
            total = total.checked_add(v)?;
        }
        Some(total)
    }

    pub fn eval_big(&self, y: &[usize], m: usize) -> Integer {
        let mut total = Integer::zero();
        for (c, mono) in &self.big {
            let mut v = c.clone();
            for (i, &e) in mono[..self.arity].iter().enumerate() {
                if e > 0 {
                    v *= num_traits::pow(Integer::from(y[i]), e as usize);
                }
            }
            let em = mono[self.arity];
            if em > 0 {
                v *= num_traits::pow(Integer::from(m), em as usize);
            }
            total += v;
        }
        total
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    arity: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::PolySyntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<ValuationPoly> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == b'+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<ValuationPoly> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            if op == b'*' {
                acc = acc.mul(&rhs);
            } else {
                let c = rhs.as_constant().ok_or(Error::PolySyntax {
                    pos: at,
                    msg: "division by a non-constant".into(),
                })?;
                if c.is_zero() {
                    return Err(Error::PolySyntax {
                        pos: at,
                        msg: "division by zero".into(),
                    });
                }
                acc = acc.scale(&c.recip());
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<ValuationPoly> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ValuationPoly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.uint()?;
            let e = e
                .to_u32()
                .filter(|&e| e <= 64)
                .ok_or_else(|| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<Integer> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().expect("digits parse"))
    }

    fn atom(&mut self) -> Result<ValuationPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'0'..=b'9') => {
                let v = self.uint()?;
                Ok(ValuationPoly::constant(self.arity, Rational::from_integer(v)))
            }
            Some(b'y') => {
                self.pos += 1;
                if !matches!(self.src.get(self.pos), Some(b'0'..=b'9')) {
                    return Err(self.err("expected a variable index after 'y'"));
                }
                let idx = self.uint()?;
                let idx = idx.to_usize().unwrap_or(usize::MAX);
                ValuationPoly::var(self.arity, idx)
            }
            Some(b'm') => {
                self.pos += 1;
                Ok(ValuationPoly::m(self.arity))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

fn monomial_text(mono: &Monomial, arity: usize) -> Vec<String> {
    let mut parts = Vec::new();
    for (i, &e) in mono.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let name = if i == arity {
            "m".to_string()
        } else {
            format!("y{}", i + 1)
        };
        parts.push(if e == 1 { name } else { format!("{name}^{e}") });
    }
    parts
}

impl fmt::Display for ValuationPoly {
    /// Terms by descending total degree, then by exponent vector descending.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut order: Vec<(&Monomial, &Rational)> = self.terms.iter().collect();
        order.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (idx, (mono, c)) in order.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let vars = monomial_text(mono, self.arity);
            if vars.is_empty() {
                f.write_str(&format_rational(&mag))?;
            } else if mag.is_one() {
                f.write_str(&vars.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), vars.join("*"))?;
            }
        }
        Ok(())
    }
}
