//! Change of basis between stable-pairs Laurent series and integer BPS
//! vectors, plus checks of the identities such series must satisfy.
//!
//! A pairs series of genus bound `g` is written as
//! `Z(q) = Σ_{r=0}^{g} n_r q^(1-r) (1+q)^(2r-2)`. The basis element for `r`
//! starts at `q^(1-r)` with coefficient 1, so ordering the basis by leading
//! exponent makes the change of basis unit-triangular and the inverse can be
//! read off coefficient by coefficient with integer arithmetic only.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::json::{bigint_str, bigint_vec};
use crate::series::{binom_pow, SeriesError, Sign, TruncSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BpsError {
    #[error("NotBpsForm: residual coefficient {residual} at q^{exponent}")]
    NotBpsForm { exponent: i64, residual: BigInt },
    #[error(
        "InsufficientWindow: need coefficients through q^{needed}, have through q^{available}"
    )]
    InsufficientWindow { needed: i64, available: i64 },
    #[error("BPS vector of genus {g} needs {} entries, found {found}", g + 1)]
    LengthMismatch { g: u32, found: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// BPS spectrum `n_0..n_g` of one curve class or one curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BpsVectorRepr", into = "BpsVectorRepr")]
pub struct BpsVector {
    g: u32,
    n: Vec<BigInt>,
}

impl BpsVector {
    pub fn new(g: u32, n: Vec<BigInt>) -> Result<Self, BpsError> {
        if n.len() != g as usize + 1 {
            return Err(BpsError::LengthMismatch { g, found: n.len() });
        }
        Ok(Self { g, n })
    }

    pub fn from_i64(n: &[i64]) -> Self {
        assert!(!n.is_empty(), "a BPS vector has at least n_0");
        Self {
            g: n.len() as u32 - 1,
            n: n.iter().map(|&x| x.into()).collect(),
        }
    }

    pub fn zero(g: u32) -> Self {
        Self {
            g,
            n: vec![BigInt::zero(); g as usize + 1],
        }
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    /// Entries ordered by genus `r = 0..=g`.
    pub fn n(&self) -> &[BigInt] {
        &self.n
    }

    pub fn get(&self, r: u32) -> Option<&BigInt> {
        self.n.get(r as usize)
    }

    pub(crate) fn entry_mut(&mut self, r: u32) -> &mut BigInt {
        &mut self.n[r as usize]
    }
}

#[derive(Serialize, Deserialize)]
struct BpsVectorRepr {
    g: u32,
    #[serde(with = "bigint_vec")]
    n: Vec<BigInt>,
}

impl TryFrom<BpsVectorRepr> for BpsVector {
    type Error = BpsError;
    fn try_from(r: BpsVectorRepr) -> Result<Self, BpsError> {
        BpsVector::new(r.g, r.n)
    }
}

impl From<BpsVector> for BpsVectorRepr {
    fn from(v: BpsVector) -> Self {
        BpsVectorRepr { g: v.g, n: v.n }
    }
}

/// A stable-pairs generating series `Σ P_n q^n` with its declared genus bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairsSeries {
    pub g: u32,
    pub series: TruncSeries,
}

impl PairsSeries {
    pub fn new(series: TruncSeries, g: u32) -> Self {
        Self { g, series }
    }

    /// Genus bound guessed from the series itself: `1 - (lowest exponent)`.
    pub fn with_default_genus(series: TruncSeries) -> Self {
        let low = series.valuation().unwrap_or(series.min_exp());
        let g = (1 - low).max(0) as u32;
        Self { g, series }
    }
}

/// `q^(1-r) (1+q)^(2r-2)` up to `q^order`, or `None` if it starts past `order`.
pub fn pairs_basis(r: u32, order: i64) -> Option<TruncSeries> {
    let r = r as i64;
    let lead = if r == 0 { 1 } else { 1 - r };
    if lead > order {
        return None;
    }
    let core = binom_pow(2 * r - 2, Sign::Plus, (order - (1 - r)) as u32);
    Some(core.shift(1 - r))
}

/// `q^(g-r) (1-q)^(2r-2)` up to `q^order`, or `None` if it starts past `order`.
pub fn hilbert_basis(g: u32, r: u32, order: i64) -> Option<TruncSeries> {
    let start = g as i64 - r as i64;
    if start > order {
        return None;
    }
    let core = binom_pow(2 * r as i64 - 2, Sign::Minus, (order - start) as u32);
    Some(core.shift(start))
}

pub(crate) struct Peeled {
    pub coeffs: Vec<BigInt>,
    pub residual: TruncSeries,
}

impl Peeled {
    /// First nonzero residual coefficient, as an error.
    pub fn check_residual(&self) -> Result<(), BpsError> {
        match self.residual.iter().find(|(_, c)| !c.is_zero()) {
            Some((exponent, c)) => Err(BpsError::NotBpsForm {
                exponent,
                residual: c.clone(),
            }),
            None => Ok(()),
        }
    }
}

/// Unit-triangular peel: `basis[i]` must vanish below `q^(start+i)` and have
/// coefficient 1 there.
pub(crate) fn peel(target: &TruncSeries, start: i64, basis: &[TruncSeries]) -> Peeled {
    let mut residual = target.clone();
    let mut coeffs = Vec::with_capacity(basis.len());
    for (i, b) in basis.iter().enumerate() {
        let e = start + i as i64;
        debug_assert_eq!(b.valuation(), Some(e));
        let c = residual.coeff(e).cloned().unwrap_or_default();
        if !c.is_zero() {
            residual = residual.sub(&b.scale(&c));
        }
        coeffs.push(c);
    }
    Peeled { coeffs, residual }
}

/// `Σ_r n_r q^(1-r) (1+q)^(2r-2)` up to `q^order`.
pub fn bps_recompose(v: &BpsVector, order: i64) -> Result<PairsSeries, BpsError> {
    let low = 1 - v.g as i64;
    if order < low {
        return Err(BpsError::InsufficientWindow {
            needed: low,
            available: order,
        });
    }
    let mut acc = TruncSeries::zero(low, order);
    for (r, n_r) in v.n.iter().enumerate() {
        if n_r.is_zero() {
            continue;
        }
        if let Some(b) = pairs_basis(r as u32, order) {
            acc = acc.add(&b.scale(n_r));
        }
    }
    Ok(PairsSeries::new(acc, v.g))
}

fn pairs_peel(z: &PairsSeries) -> Result<Peeled, BpsError> {
    let order = z.series.order();
    if order < 1 {
        return Err(BpsError::InsufficientWindow {
            needed: 1,
            available: order,
        });
    }
    let basis: Vec<TruncSeries> = (0..=z.g)
        .rev()
        .map(|r| pairs_basis(r, order).expect("order >= 1 covers every leading term"))
        .collect();
    Ok(peel(&z.series, 1 - z.g as i64, &basis))
}

/// Reads off the unique BPS vector of a pairs series, checking every known
/// coefficient beyond the peel.
pub fn bps_decompose(z: &PairsSeries) -> Result<BpsVector, BpsError> {
    let peeled = pairs_peel(z)?;
    peeled.check_residual()?;
    let mut n = peeled.coeffs;
    n.reverse();
    BpsVector::new(z.g, n)
}

/// `Σ_r n_r q^(g-r) (1-q)^(2r-2)` up to `q^order`.
pub fn hilbert_recompose(v: &BpsVector, order: i64) -> TruncSeries {
    let mut acc = TruncSeries::zero(0, order.max(-1));
    for (r, n_r) in v.n.iter().enumerate() {
        if n_r.is_zero() {
            continue;
        }
        if let Some(b) = hilbert_basis(v.g, r as u32, order) {
            acc = acc.add(&b.scale(n_r));
        }
    }
    acc
}

/// Writes a Hilbert-scheme Euler characteristic series in the basis
/// `q^(g-r) (1-q)^(2r-2)`.
pub fn hilbert_decompose(h: &TruncSeries, g: u32) -> Result<BpsVector, BpsError> {
    let order = h.order();
    let needed = g as i64 + 1;
    if order < needed {
        return Err(BpsError::InsufficientWindow {
            needed,
            available: order,
        });
    }
    let basis: Vec<TruncSeries> = (0..=g)
        .rev()
        .map(|r| hilbert_basis(g, r, order).expect("order > g covers every leading term"))
        .collect();
    let peeled = peel(h, 0, &basis);
    peeled.check_residual()?;
    let mut n = peeled.coeffs;
    n.reverse();
    BpsVector::new(g, n)
}

/// Outcome of checking one identity over a range of exponents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub pass: bool,
    pub first_failure: Option<i64>,
    #[serde(with = "opt_bigint")]
    pub expected: Option<BigInt>,
    #[serde(with = "opt_bigint")]
    pub actual: Option<BigInt>,
    /// Inclusive exponent range that was checked; empty when `from > to`.
    pub from: i64,
    pub to: i64,
}

mod opt_bigint {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_some(&x.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        let raw: Option<crate::series::json::BigIntRepr> = Option::deserialize(d)?;
        Ok(raw.map(|r| r.0))
    }
}

impl IdentityCheck {
    fn run(from: i64, to: i64, mut check: impl FnMut(i64) -> (BigInt, BigInt)) -> Self {
        for n in from..=to {
            let (expected, actual) = check(n);
            if expected != actual {
                return Self {
                    pass: false,
                    first_failure: Some(n),
                    expected: Some(expected),
                    actual: Some(actual),
                    from,
                    to,
                };
            }
        }
        Self {
            pass: true,
            first_failure: None,
            expected: None,
            actual: None,
            from,
            to,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GgtcReport {
    pub pass: bool,
    /// `P_n = (-1)^(n-1) n N` for `g <= n`.
    pub identity_g0: IdentityCheck,
    /// `P_n - P_-n = (-1)^(n-1) n N` for `0 < n < g`.
    pub identity_gg: IdentityCheck,
    /// `P_n = 0` for `n <= -g`.
    pub identity_0: IdentityCheck,
    pub checked_order: i64,
    /// `N = n_0`, as read off by the triangular peel.
    #[serde(with = "bigint_str")]
    pub n0: BigInt,
}

fn signed_multiple(n: i64, big_n: &BigInt) -> BigInt {
    let v = big_n * n;
    if (n - 1) % 2 == 0 {
        v
    } else {
        -v
    }
}

/// Checks the three identities linking the coefficients of a pairs series
/// to `N = n_0`.
///
/// `N` comes from the triangular peel alone, so a series that is not of BPS
/// form still yields a report naming the first identity that breaks.
pub fn validate_ggtc(z: &PairsSeries) -> Result<GgtcReport, BpsError> {
    let peeled = pairs_peel(z)?;
    let n0 = peeled.coeffs.last().cloned().unwrap_or_default();
    let s = &z.series;
    let g = z.g as i64;
    let order = s.order();
    let p = |n: i64| s.coeff(n).cloned().expect("exponent inside window");

    let identity_0 = IdentityCheck::run(s.min_exp(), -g, |n| (BigInt::zero(), p(n)));
    let identity_gg = IdentityCheck::run(1, (g - 1).min(order), |n| {
        (signed_multiple(n, &n0), p(n) - p(-n))
    });
    let identity_g0 = IdentityCheck::run(g, order, |n| (signed_multiple(n, &n0), p(n)));

    Ok(GgtcReport {
        pass: identity_0.pass && identity_gg.pass && identity_g0.pass,
        identity_g0,
        identity_gg,
        identity_0,
        checked_order: order,
        n0,
    })
}

/// Sign relating the Hilbert basis to the pairs basis after `q -> -q` and a
/// shift by `q^(1-g)`: `n_r(pairs) = (-1)^(g-r) n_r(hilbert)`.
pub fn hilbert_to_pairs_sign(g: u32, r: u32) -> BigInt {
    if (g + r).is_multiple_of(2) {
        BigInt::from(1)
    } else {
        BigInt::from(-1)
    }
}
