//! Finite Laurent polynomials in one variable with big-integer coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::json::BigIntRepr;

/// A Laurent polynomial `Σ c_k x^k` with finitely many nonzero terms.
///
/// Zero coefficients are never stored, so two polynomials are equal exactly
/// when their term maps are equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "LaurentRepr", into = "LaurentRepr")]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, BigInt::one())
    }

    pub fn monomial(exp: i64, coeff: impl Into<BigInt>) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, &coeff.into());
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, &c.into());
        }
        p
    }

    /// Dense constructor: `coeffs[i]` is the coefficient of `x^(min_exp + i)`.
    pub fn from_dense(min_exp: i64, coeffs: &[BigInt]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (min_exp + i as i64, c.clone()))
            .collect();
        Self { terms }
    }

    pub fn add_term(&mut self, exp: i64, coeff: &BigInt) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(exp).or_default();
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> BigInt {
        self.terms.get(&exp).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> + '_ {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// Highest exponent with a nonzero coefficient.
    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let terms = self.terms.iter().map(|(&e, v)| (e, v * c)).collect();
        Self { terms }
    }

    /// Multiplies by `x^k`.
    pub fn shift(&self, k: i64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&e, v)| (e + k, v.clone()))
            .collect();
        Self { terms }
    }

    /// Substitutes `x -> x^-1`.
    pub fn invert_variable(&self) -> Self {
        let terms = self.terms.iter().map(|(&e, v)| (-e, v.clone())).collect();
        Self { terms }
    }

    /// Substitutes `x -> -x`.
    pub fn negate_variable(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&e, v)| (e, if e % 2 == 0 { v.clone() } else { -v }))
            .collect();
        Self { terms }
    }

    /// Value at `x = 1`.
    pub fn eval_at_one(&self) -> BigInt {
        self.terms.values().sum()
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// True iff the coefficient of `x^k` equals that of `x^-k` for every `k`.
    pub fn is_inversion_symmetric(&self) -> bool {
        self.terms
            .iter()
            .filter(|(&e, _)| e > 0)
            .all(|(&e, c)| self.terms.get(&-e) == Some(c))
            && self
                .terms
                .keys()
                .filter(|&&e| e < 0)
                .all(|e| self.terms.contains_key(&-e))
    }
}

/// Symmetry test under `z <-> z^-1`.
pub fn involution_check(p: &LaurentPoly) -> bool {
    p.is_inversion_symmetric()
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match e {
                0 => write!(f, "{c}")?,
                _ => write!(f, "{c}*x^{e}")?,
            }
        }
        Ok(())
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(e, c);
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(e, &-c);
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (&ea, ca) in &self.terms {
            for (&eb, cb) in &rhs.terms {
                out.add_term(ea + eb, &(ca * cb));
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        let terms = self.terms.iter().map(|(&e, c)| (e, -c)).collect();
        LaurentPoly { terms }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

#[derive(Serialize, Deserialize)]
struct LaurentRepr {
    terms: BTreeMap<String, BigIntRepr>,
}

impl TryFrom<LaurentRepr> for LaurentPoly {
    type Error = String;

    fn try_from(repr: LaurentRepr) -> Result<Self, String> {
        let mut p = LaurentPoly::zero();
        for (k, v) in repr.terms {
            let e: i64 = k
                .trim()
                .parse()
                .map_err(|_| format!("invalid exponent key {k:?}"))?;
            if p.terms.contains_key(&e) {
                return Err(format!("duplicate exponent {e}"));
            }
            p.add_term(e, &v.0);
        }
        Ok(p)
    }
}

impl From<LaurentPoly> for LaurentRepr {
    fn from(p: LaurentPoly) -> Self {
        let terms = p
            .terms
            .into_iter()
            .map(|(e, c)| (e.to_string(), BigIntRepr(c)))
            .collect();
        LaurentRepr { terms }
    }
}
