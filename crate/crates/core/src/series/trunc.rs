//! Truncated Laurent series in `q` with exact integer coefficients.
//!
//! A [`TruncSeries`] stores the coefficients for exponents
//! `min_exp..=order`. Coefficients below `min_exp` are zero; coefficients
//! above `order` are unknown and are never reported. Every arithmetic
//! operation derives the widest output window that its inputs determine.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::json::bigint_vec;
use super::laurent::LaurentPoly;
use super::SeriesError;

static ZERO: BigInt = BigInt::ZERO;

#[derive(Clone, Debug, Eq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct TruncSeries {
    min_exp: i64,
    order: i64,
    coeffs: Vec<BigInt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

fn window_len(min_exp: i64, order: i64) -> usize {
    (order - min_exp + 1).max(0) as usize
}

impl TruncSeries {
    /// Strict constructor: `coeffs` must cover `min_exp..=order` exactly.
    pub fn new(min_exp: i64, order: i64, coeffs: Vec<BigInt>) -> Result<Self, SeriesError> {
        if order < min_exp - 1 {
            return Err(SeriesError::InvalidWindow { min_exp, order });
        }
        let expected = window_len(min_exp, order);
        if coeffs.len() != expected {
            return Err(SeriesError::LengthMismatch {
                expected,
                found: coeffs.len(),
            });
        }
        Ok(Self {
            min_exp,
            order,
            coeffs,
        })
    }

    /// Exact polynomial `Σ coeffs[i] q^(min_exp+i)` viewed up to `order`.
    ///
    /// Missing coefficients are zero; terms above `order` are dropped.
    pub fn from_poly<C: Into<BigInt> + Clone>(min_exp: i64, coeffs: &[C], order: i64) -> Self {
        let order = order.max(min_exp - 1);
        let n = window_len(min_exp, order);
        let mut out: Vec<BigInt> = coeffs.iter().take(n).cloned().map(Into::into).collect();
        out.resize(n, BigInt::zero());
        Self {
            min_exp,
            order,
            coeffs: out,
        }
    }

    /// Series whose coefficient at `q^n` is `f(n)` for `n` in the window.
    pub fn from_fn(min_exp: i64, order: i64, f: impl FnMut(i64) -> BigInt) -> Self {
        let order = order.max(min_exp - 1);
        Self {
            min_exp,
            order,
            coeffs: (min_exp..=order).map(f).collect(),
        }
    }

    pub fn zero(min_exp: i64, order: i64) -> Self {
        Self::from_fn(min_exp, order, |_| BigInt::zero())
    }

    pub fn one(order: i64) -> Self {
        Self::monomial(0, BigInt::one(), order)
    }

    pub fn monomial(exp: i64, coeff: BigInt, order: i64) -> Self {
        Self::from_fn(exp, order, |n| {
            if n == exp {
                coeff.clone()
            } else {
                BigInt::zero()
            }
        })
    }

    pub fn min_exp(&self) -> i64 {
        self.min_exp
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_empty_window(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `q^n`, or `None` when `n` lies beyond the known window.
    pub fn coeff(&self, n: i64) -> Option<&BigInt> {
        if n > self.order {
            None
        } else if n < self.min_exp {
            Some(&ZERO)
        } else {
            Some(&self.coeffs[(n - self.min_exp) as usize])
        }
    }

    /// `(exponent, coefficient)` pairs over the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigInt)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.min_exp + i as i64, c))
    }

    /// Exponent of the lowest nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.iter().find(|(_, c)| !c.is_zero()).map(|(e, _)| e)
    }

    /// Lowest exponent whose coefficient might be nonzero; `order + 1` for a
    /// series known to vanish on its whole window.
    fn effective_valuation(&self) -> i64 {
        self.valuation().unwrap_or(self.order + 1)
    }

    /// Known coefficients as a finite Laurent polynomial.
    pub fn to_laurent(&self) -> LaurentPoly {
        LaurentPoly::from_dense(self.min_exp, &self.coeffs)
    }

    /// Forgets every coefficient above `order`.
    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order).max(self.min_exp - 1);
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(window_len(self.min_exp, order));
        Self {
            min_exp: self.min_exp,
            order,
            coeffs,
        }
    }

    /// Multiplies by `q^k`; the window moves with the series.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            min_exp: self.min_exp + k,
            order: self.order + k,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self {
            min_exp: self.min_exp,
            order: self.order,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Self, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> Self {
        let min_exp = self.min_exp.min(other.min_exp);
        let order = self.order.min(other.order);
        Self::from_fn(min_exp, order, |n| {
            f(self.coeff(n).unwrap(), other.coeff(n).unwrap())
        })
    }

    /// Exact product on the widest window both factors determine.
    pub fn try_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        let min_exp = self.min_exp + other.min_exp;
        let order = (self.order + other.effective_valuation())
            .min(other.order + self.effective_valuation());
        if order < min_exp {
            return Err(SeriesError::EmptyWindow);
        }
        let mut coeffs = vec![BigInt::zero(); window_len(min_exp, order)];
        for (ea, ca) in self.iter().filter(|(_, c)| !c.is_zero()) {
            for (eb, cb) in other.iter() {
                let e = ea + eb;
                if e > order {
                    break;
                }
                if !cb.is_zero() {
                    coeffs[(e - min_exp) as usize] += ca * cb;
                }
            }
        }
        Ok(Self {
            min_exp,
            order,
            coeffs,
        })
    }

    /// Substitutes `q -> -q`.
    pub fn q_negate(&self) -> Self {
        Self {
            min_exp: self.min_exp,
            order: self.order,
            coeffs: self
                .iter()
                .map(|(e, c)| if e.is_odd() { -c } else { c.clone() })
                .collect(),
        }
    }

    /// Multiplicative inverse, requested up to `q^order`.
    ///
    /// The lowest nonzero coefficient must be `±1`. The returned window is
    /// capped by the relative precision of `self`.
    pub fn inverse(&self, order: i64) -> Result<Self, SeriesError> {
        let v = self.valuation().ok_or(SeriesError::NonUnitLeading {
            exp: None,
            coeff: BigInt::zero(),
        })?;
        let lead = self.coeff(v).unwrap().clone();
        if lead.abs() != BigInt::one() {
            return Err(SeriesError::NonUnitLeading {
                exp: Some(v),
                coeff: lead,
            });
        }
        let out_order = order.min(self.order - 2 * v);
        if out_order < -v {
            return Err(SeriesError::EmptyWindow);
        }
        let len = window_len(-v, out_order);
        // self = q^v * u with u_0 = lead; solve u * w = 1 term by term.
        let u = |k: usize| self.coeff(v + k as i64).unwrap();
        let mut w: Vec<BigInt> = Vec::with_capacity(len);
        w.push(lead.clone());
        for k in 1..len {
            let mut acc = BigInt::zero();
            for i in 1..=k {
                let ui = u(i);
                if !ui.is_zero() {
                    acc += ui * &w[k - i];
                }
            }
            w.push(-(&lead * acc));
        }
        Ok(Self {
            min_exp: -v,
            order: out_order,
            coeffs: w,
        })
    }
}

impl PartialEq for TruncSeries {
    /// Equal windows and equal coefficients, with storage below `min_exp`
    /// read as zero.
    fn eq(&self, other: &Self) -> bool {
        if self.order != other.order {
            return false;
        }
        let lo = self.min_exp.min(other.min_exp);
        (lo..=self.order).all(|n| self.coeff(n) == other.coeff(n))
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.iter().filter(|(_, c)| !c.is_zero()) {
            if !first {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            first = false;
            let a = c.abs();
            match (e, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => f.write_str("q")?,
                (1, false) => write!(f, "{a}q")?,
                (_, true) => write!(f, "q^{e}")?,
                (_, false) => write!(f, "{a}q^{e}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(q^{})", self.order + 1)
    }
}

/// Add or multiply two truncated series.
pub fn series_arith(
    a: &TruncSeries,
    b: &TruncSeries,
    op: SeriesOp,
) -> Result<TruncSeries, SeriesError> {
    match op {
        SeriesOp::Add => Ok(a.add(b)),
        SeriesOp::Mul => a.try_mul(b),
    }
}

pub fn series_inverse(a: &TruncSeries, order: i64) -> Result<TruncSeries, SeriesError> {
    a.inverse(order)
}

pub fn q_negate(a: &TruncSeries) -> TruncSeries {
    a.q_negate()
}

/// `(1 ± q)^e` up to `q^order`, via the generalized binomial coefficients.
pub fn binom_pow(e: i64, sign: Sign, order: u32) -> TruncSeries {
    let e = BigInt::from(e);
    let mut coeffs = Vec::with_capacity(order as usize + 1);
    let mut c = BigInt::one();
    for k in 0..=order as i64 {
        if k > 0 {
            // binom(e, k) = binom(e, k-1) * (e - k + 1) / k, exact at each step
            c = c * (&e - k + 1) / k;
        }
        if c.is_zero() {
            // e >= 0 and k > e: the polynomial has ended.
            coeffs.resize(order as usize + 1, BigInt::zero());
            break;
        }
        coeffs.push(match sign {
            Sign::Minus if k % 2 == 1 => -&c,
            _ => c.clone(),
        });
    }
    TruncSeries {
        min_exp: 0,
        order: order as i64,
        coeffs,
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    min_exp: i64,
    order: i64,
    #[serde(with = "bigint_vec")]
    coeffs: Vec<BigInt>,
}

impl TryFrom<SeriesRepr> for TruncSeries {
    type Error = SeriesError;

    fn try_from(r: SeriesRepr) -> Result<Self, SeriesError> {
        TruncSeries::new(r.min_exp, r.order, r.coeffs)
    }
}

impl From<TruncSeries> for SeriesRepr {
    fn from(s: TruncSeries) -> Self {
        SeriesRepr {
            min_exp: s.min_exp,
            order: s.order,
            coeffs: s.coeffs,
        }
    }
}
