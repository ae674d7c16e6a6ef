//! Univariate polynomials in `n` with rational coefficients.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::numbers::{binomial, falling_factorial, format_rational, Rational};

/// `Σ coeffs[i] · nⁱ`, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        UniPoly::new(vec![c])
    }

    /// `n + a`.
    pub fn linear(a: Rational) -> Self {
        UniPoly::new(vec![a, Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `nⁱ`.
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_int(&self, n: i64) -> Rational {
        self.eval(&Rational::from_integer(n.into()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        UniPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    /// `p(n + a)`.
    pub fn shift(&self, a: &Rational) -> Self {
        let mut out = UniPoly::zero();
        let base = UniPoly::linear(a.clone());
        for c in self.coeffs.iter().rev() {
            out = out.mul(&base).add(&UniPoly::constant(c.clone()));
        }
        out
    }

    /// Synthetic division by `(n − root)`: quotient and remainder.
    pub fn div_linear(&self, root: &Rational) -> (Self, Rational) {
        if self.coeffs.is_empty() {
            return (UniPoly::zero(), Rational::zero());
        }
        let d = self.coeffs.len() - 1;
        let mut q = vec![Rational::zero(); d];
        let mut carry = Rational::zero();
        for i in (0..=d).rev() {
            let v = &self.coeffs[i] + &carry * root;
            if i == 0 {
                return (UniPoly::new(q), v);
            }
            q[i - 1] = v.clone();
            carry = v;
        }
        unreachable!()
    }

    /// `C(n − a, b)` as a polynomial in `n`.
    pub fn binomial_shifted(a: i64, b: u64) -> Self {
        let mut out = UniPoly::constant(Rational::one());
        for j in 0..b as i64 {
            out = out.mul(&UniPoly::linear(Rational::from_integer((-a - j).into())));
        }
        out.scale(&Rational::new(1.into(), falling_factorial(b as i64, b)))
    }

    /// `(n − a)_b = (n−a)(n−a−1)⋯` as a polynomial in `n`.
    pub fn falling_shifted(a: i64, b: u64) -> Self {
        Self::binomial_shifted(a, b).scale(&Rational::from_integer(falling_factorial(b as i64, b)))
    }

    /// Checks a value against `C(n − a, b)` at one point; used by tests.
    pub fn check_binomial(a: i64, b: u64, n: i64) -> bool {
        Self::binomial_shifted(a, b).eval_int(n) == Rational::from_integer(binomial(n - a, b as i64))
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            let var = match i {
                0 => String::new(),
                1 => "n".into(),
                _ => format!("n^{i}"),
            };
            if var.is_empty() {
                f.write_str(&format_rational(&mag))?;
            } else if mag.is_one() {
                f.write_str(&var)?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), var)?;
            }
        }
        Ok(())
    }
}
