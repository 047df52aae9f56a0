//! K3 surfaces: the two-variable Euler characteristic series of stable-pair
//! moduli, its signed form, the product formula for all-genus BPS counts
//! `r_(g,h)` and the genus-zero specialization `Π (1-q^n)^-24`.
//!
//! Half-integer powers never appear: `(√y - 1/√y)^-2` is the series
//! `y/(1-y)^2 = Σ_{k≥1} k y^k`, and `(√z - 1/√z)^(2g)` is `(z - 2 + z^-1)^g`.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::json::bigint_str;
use crate::series::{
    euler_product_power, product_family, BiSeries, Factor, LaurentPoly, TruncSeries,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum K3Error {
    #[error("AsymmetricInput: q^{h} coefficient is not invariant under z <-> 1/z")]
    AsymmetricInput { h: u32 },
    #[error("NotKkvForm: residual {residual} at z^{exponent} in the q^{h} coefficient")]
    NotKkvForm {
        h: u32,
        exponent: i64,
        residual: BigInt,
    },
    #[error("y truncation order must be at least 1, got {0}")]
    InvalidYOrder(i64),
}

/// The factor multiset `(1-q^n)^-20 (1-z q^n)^-2 (1-z^-1 q^n)^-2`.
pub const KKV_FACTORS: [Factor; 3] = [
    Factor {
        z_exp: 0,
        power: -20,
    },
    Factor {
        z_exp: 1,
        power: -2,
    },
    Factor {
        z_exp: -1,
        power: -2,
    },
];

/// Expansion of `Π_n (1-q^n)^-20 (1-z q^n)^-2 (1-z^-1 q^n)^-2` to `q^h_max`.
pub fn kkv_product(h_max: u32) -> BiSeries {
    product_family(&KKV_FACTORS, h_max)
}

/// Genus-zero counts `Σ r_(0,h) q^h = Π (1-q^n)^-24` up to `q^h_max`.
pub fn yau_zaslow(h_max: u32) -> TruncSeries {
    euler_product_power(-24, h_max)
}

/// BPS counts `r_(g,h)` for `0 ≤ g ≤ h ≤ h_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KkvTable {
    h_max: u32,
    /// keyed by `(h, g)` so iteration follows the output order
    rows: BTreeMap<(u32, u32), BigInt>,
}

impl KkvTable {
    pub fn h_max(&self) -> u32 {
        self.h_max
    }

    /// `r_(g,h)`; zero for `g > h`, `None` beyond `h_max`.
    pub fn get(&self, g: u32, h: u32) -> Option<BigInt> {
        if h > self.h_max {
            return None;
        }
        Some(self.rows.get(&(h, g)).cloned().unwrap_or_default())
    }

    /// `(g, h, r_(g,h))` sorted by `(h, g)`.
    pub fn rows(&self) -> impl Iterator<Item = (u32, u32, &BigInt)> + '_ {
        self.rows.iter().map(|(&(h, g), r)| (g, h, r))
    }

    /// Row `g` as a power series in `q`.
    pub fn genus_row(&self, g: u32) -> TruncSeries {
        TruncSeries::from_fn(0, self.h_max as i64, |h| self.get(g, h as u32).unwrap())
    }

    /// Streams the table as CSV with header `g,h,r_gh`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["g", "h", "r_gh"])?;
        for (g, h, r) in self.rows() {
            w.write_record([g.to_string(), h.to_string(), r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct KkvRow {
    g: u32,
    h: u32,
    #[serde(with = "bigint_str")]
    r: BigInt,
}

#[derive(Serialize, Deserialize)]
struct KkvTableRepr {
    h_max: u32,
    rows: Vec<KkvRow>,
}

impl Serialize for KkvTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        KkvTableRepr {
            h_max: self.h_max,
            rows: self
                .rows()
                .map(|(g, h, r)| KkvRow { g, h, r: r.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KkvTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = KkvTableRepr::deserialize(d)?;
        let mut rows = BTreeMap::new();
        for row in repr.rows {
            if row.g > row.h || row.h > repr.h_max {
                return Err(serde::de::Error::custom(format!(
                    "row (g={}, h={}) outside 0 <= g <= h <= {}",
                    row.g, row.h, repr.h_max
                )));
            }
            rows.insert((row.h, row.g), row.r);
        }
        Ok(KkvTable {
            h_max: repr.h_max,
            rows,
        })
    }
}

/// Solves `coeff_h(z) = Σ_{g=0}^{h} (-1)^g r_(g,h) (z - 2 + z^-1)^g` for every
/// `q^h` coefficient by peeling from the top `z`-degree.
pub fn kkv_decompose(b: &BiSeries) -> Result<KkvTable, K3Error> {
    let w = LaurentPoly::from_terms([(1, 1), (0, -2), (-1, 1)]);
    let h_max = b.order_q();
    let mut powers = Vec::with_capacity(h_max as usize + 1);
    powers.push(LaurentPoly::one());
    for g in 1..=h_max as usize {
        let next = &powers[g - 1] * &w;
        powers.push(next);
    }

    let mut rows = BTreeMap::new();
    for (h, coeff) in b.coeffs().iter().enumerate() {
        let h = h as u32;
        if !coeff.is_inversion_symmetric() {
            return Err(K3Error::AsymmetricInput { h });
        }
        if let Some(top) = coeff.max_exp().filter(|&e| e > h as i64) {
            return Err(K3Error::NotKkvForm {
                h,
                exponent: top,
                residual: coeff.coeff(top),
            });
        }
        let mut residual = coeff.clone();
        for g in (0..=h).rev() {
            let t = residual.coeff(g as i64);
            if !t.is_zero() {
                residual = &residual - &powers[g as usize].scale(&t);
            }
            let r = if g % 2 == 0 { t } else { -t };
            rows.insert((h, g), r);
        }
        if let Some(exponent) = residual.min_exp() {
            return Err(K3Error::NotKkvForm {
                h,
                exponent,
                residual: residual.coeff(exponent),
            });
        }
    }
    Ok(KkvTable { h_max, rows })
}

/// Euler characteristics `e(P_n(S,h))` as the `y^n q^h` coefficients, with
/// every `y`-series cut at `y^y_order`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct K3PairsSeries {
    pub y_order: i64,
    pub data: BiSeries,
}

impl K3PairsSeries {
    pub fn h_max(&self) -> u32 {
        self.data.order_q()
    }

    /// `e(P_n(S,h))`, or `None` outside the computed window.
    pub fn coeff(&self, h: u32, n: i64) -> Option<BigInt> {
        if n > self.y_order {
            return None;
        }
        self.data.coeff(h).map(|p| p.coeff(n))
    }

    /// Adds `delta` to one coefficient. Used to exercise fault detection.
    pub fn perturb(&mut self, h: u32, n: i64, delta: &BigInt) {
        if let Some(p) = self.data.coeff_mut(h) {
            p.add_term(n, delta);
        }
    }

    /// Rows as CSV: `h,n,e`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["h", "n", "e"])?;
        for (h, p) in self.data.coeffs().iter().enumerate() {
            for (n, c) in p.terms() {
                w.write_record([h.to_string(), n.to_string(), c.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Keeps the terms of `poly · Σ_{k≥1} sign(k) k y^k` at exponents `≤ y_order`.
fn times_prefactor(poly: &LaurentPoly, y_order: i64, alternating: bool) -> LaurentPoly {
    let mut out = LaurentPoly::zero();
    for (m, c) in poly.terms() {
        for k in 1..=(y_order - m) {
            let mut t = c * k;
            if alternating && k % 2 == 0 {
                t = -t;
            }
            out.add_term(m + k, &t);
        }
    }
    out
}

/// Expands `(√y - 1/√y)^-2 Π_n [(1-q^n)^20 (1-y q^n)^2 (1-y^-1 q^n)^2]^-1`.
pub fn ky_series(h_max: u32, y_order: i64) -> Result<K3PairsSeries, K3Error> {
    if y_order < 1 {
        return Err(K3Error::InvalidYOrder(y_order));
    }
    let product = product_family(&KKV_FACTORS, h_max);
    let coeffs = product
        .coeffs()
        .iter()
        .map(|p| times_prefactor(p, y_order, false))
        .collect();
    let data = BiSeries::new(h_max, coeffs).expect("one coefficient per q-order");
    Ok(K3PairsSeries { y_order, data })
}

/// `Σ_k c_k y^(sk) q^(nk)` for one factor `(1 + s·y q^n)^-2` etc.
fn factor_series(h_max: u32, n: u32, term: impl Fn(u32) -> (i64, BigInt)) -> BiSeries {
    let mut coeffs = vec![LaurentPoly::zero(); h_max as usize + 1];
    let mut k = 0;
    while k * n <= h_max {
        let (e, c) = term(k);
        coeffs[(k * n) as usize] = LaurentPoly::monomial(e, c);
        k += 1;
    }
    BiSeries::new(h_max, coeffs).expect("sized to h_max")
}

/// Right-hand side of the signed conversion, expanded factor by factor:
/// `-(√(-y) - 1/√(-y))^-2 Π_n [(1-q^n)^20 (1+y q^n)^2 (1+y^-1 q^n)^2]^-1`,
/// where the prefactor equals `y/(1+y)^2 = Σ_{k≥1} (-1)^(k-1) k y^k`.
pub fn signed_ky_rhs(h_max: u32, y_order: i64) -> BiSeries {
    let mut acc = BiSeries::one(h_max);
    for n in 1..=h_max {
        // (1 - q^n)^-20 = Σ binom(19 + k, k) q^(nk)
        let eta = factor_series(h_max, n, |k| {
            let mut c = BigInt::one();
            for j in 1..=k as i64 {
                c = c * (19 + j) / j;
            }
            (0, c)
        });
        // (1 + y^±1 q^n)^-2 = Σ (-1)^k (k+1) y^(±k) q^(nk)
        let alt = |k: u32| {
            let c = BigInt::from(k + 1);
            if k.is_multiple_of(2) {
                c
            } else {
                -c
            }
        };
        let plus = factor_series(h_max, n, |k| (k as i64, alt(k)));
        let minus = factor_series(h_max, n, |k| (-(k as i64), alt(k)));
        acc = acc.mul(&eta).mul(&plus).mul(&minus);
    }
    let coeffs = acc
        .coeffs()
        .iter()
        .map(|p| times_prefactor(p, y_order, true))
        .collect();
    BiSeries::new(h_max, coeffs).expect("one coefficient per q-order")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub h: u32,
    pub n: i64,
    #[serde(with = "bigint_str")]
    pub lhs: BigInt,
    #[serde(with = "bigint_str")]
    pub rhs: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedCheckReport {
    pub pass: bool,
    pub h_max: u32,
    pub y_order: i64,
    pub checked_terms: u64,
    pub first_mismatch: Option<Mismatch>,
}

/// Compares `(-1)^(n+2h-1) e(P_n(S,h))` from `ky` against the independent
/// expansion of the signed product, term by term.
pub fn check_signed_conversion(ky: &K3PairsSeries) -> SignedCheckReport {
    let h_max = ky.h_max();
    let rhs = signed_ky_rhs(h_max, ky.y_order);
    let mut checked = 0u64;
    for h in 0..=h_max {
        let left = ky.data.coeff(h).unwrap();
        let right = rhs.coeff(h).unwrap();
        let low = [left.min_exp(), right.min_exp(), Some(1 - h as i64)]
            .into_iter()
            .flatten()
            .min()
            .unwrap();
        for n in low..=ky.y_order {
            let sign_exp = n + 2 * h as i64 - 1;
            let mut l = left.coeff(n);
            if sign_exp.rem_euclid(2) == 1 {
                l = -l;
            }
            let r = right.coeff(n);
            checked += 1;
            if l != r {
                return SignedCheckReport {
                    pass: false,
                    h_max,
                    y_order: ky.y_order,
                    checked_terms: checked,
                    first_mismatch: Some(Mismatch {
                        h,
                        n,
                        lhs: l,
                        rhs: r,
                    }),
                };
            }
        }
    }
    SignedCheckReport {
        pass: true,
        h_max,
        y_order: ky.y_order,
        checked_terms: checked,
        first_mismatch: None,
    }
}

pub fn signed_conversion_check(h_max: u32, y_order: i64) -> Result<SignedCheckReport, K3Error> {
    Ok(check_signed_conversion(&ky_series(h_max, y_order)?))
}
