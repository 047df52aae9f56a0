//! Bivariate `(q, z)` series and expansion of infinite products
//! `Π_n Π_(a,e) (1 - z^a q^n)^e`.
//!
//! Both expansions go through the logarithmic derivative: if
//! `F = Π_n Π_(a,e) (1 - z^a q^n)^e` then `q dF/dq = F * S` with
//! `S = Σ_N s_N q^N` and `s_N = -Σ_(a,e) e Σ_{m | N} (N/m) z^(a m)`.
//! Comparing coefficients gives `N f_N = Σ_{k=1}^{N} s_k f_{N-k}`, an exact
//! integer recurrence (the division by `N` never leaves a remainder).

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::laurent::LaurentPoly;
use super::trunc::TruncSeries;
use super::SeriesError;

/// Truncated series in `q` whose coefficients are Laurent polynomials in `z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BiSeriesRepr")]
pub struct BiSeries {
    order_q: u32,
    coeffs: Vec<LaurentPoly>,
}

impl BiSeries {
    pub fn new(order_q: u32, coeffs: Vec<LaurentPoly>) -> Result<Self, SeriesError> {
        if coeffs.len() != order_q as usize + 1 {
            return Err(SeriesError::LengthMismatch {
                expected: order_q as usize + 1,
                found: coeffs.len(),
            });
        }
        Ok(Self { order_q, coeffs })
    }

    pub fn one(order_q: u32) -> Self {
        let mut coeffs = vec![LaurentPoly::zero(); order_q as usize + 1];
        coeffs[0] = LaurentPoly::one();
        Self { order_q, coeffs }
    }

    pub fn order_q(&self) -> u32 {
        self.order_q
    }

    /// The `q^h` coefficient; `None` beyond the truncation order.
    pub fn coeff(&self, h: u32) -> Option<&LaurentPoly> {
        self.coeffs.get(h as usize)
    }

    pub fn coeffs(&self) -> &[LaurentPoly] {
        &self.coeffs
    }

    pub fn coeff_mut(&mut self, h: u32) -> Option<&mut LaurentPoly> {
        self.coeffs.get_mut(h as usize)
    }

    /// Truncated product in `q`; `z` is multiplied exactly.
    pub fn mul(&self, other: &Self) -> Self {
        let order_q = self.order_q.min(other.order_q);
        let n = order_q as usize;
        let mut coeffs = vec![LaurentPoly::zero(); n + 1];
        for (i, a) in self.coeffs.iter().take(n + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n + 1 - i).enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] = &coeffs[i + j] + &(a * b);
                }
            }
        }
        Self { order_q, coeffs }
    }

    /// Substitutes `z -> z^-1` in every coefficient.
    pub fn invert_z(&self) -> Self {
        Self {
            order_q: self.order_q,
            coeffs: self
                .coeffs
                .iter()
                .map(LaurentPoly::invert_variable)
                .collect(),
        }
    }

    /// Sets `z = 1`, leaving a power series in `q`.
    pub fn eval_z_at_one(&self) -> TruncSeries {
        TruncSeries::from_fn(0, self.order_q as i64, |h| {
            self.coeffs[h as usize].eval_at_one()
        })
    }
}

#[derive(Deserialize)]
struct BiSeriesRepr {
    order_q: u32,
    coeffs: Vec<LaurentPoly>,
}

impl TryFrom<BiSeriesRepr> for BiSeries {
    type Error = SeriesError;

    fn try_from(r: BiSeriesRepr) -> Result<Self, SeriesError> {
        BiSeries::new(r.order_q, r.coeffs)
    }
}

/// One factor family `Π_{n≥1} (1 - z^a q^n)^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Factor {
    pub z_exp: i64,
    pub power: i64,
}

impl From<(i64, i64)> for Factor {
    fn from((z_exp, power): (i64, i64)) -> Self {
        Self { z_exp, power }
    }
}

/// Divisor sums `σ(k)` for `0 <= k <= n` (`σ(0)` is unused and left 0).
fn divisor_sums(n: usize) -> Vec<u64> {
    let mut sigma = vec![0u64; n + 1];
    for d in 1..=n {
        for m in (d..=n).step_by(d) {
            sigma[m] += d as u64;
        }
    }
    sigma
}

/// `Π_{n≥1} (1 - q^n)^exponent` up to `q^order`.
pub fn euler_product_power(exponent: i64, order: u32) -> TruncSeries {
    let n = order as usize;
    let sigma = divisor_sums(n);
    let neg_e = BigInt::from(-exponent);
    let mut f: Vec<BigInt> = Vec::with_capacity(n + 1);
    f.push(BigInt::one());
    for big_n in 1..=n {
        let mut acc = BigInt::zero();
        for k in 1..=big_n {
            if !f[big_n - k].is_zero() {
                acc += &f[big_n - k] * sigma[k];
            }
        }
        acc *= &neg_e;
        f.push(acc / big_n);
    }
    TruncSeries::from_poly(0, &f, order as i64)
}

/// Expands `Π_{n=1}^{order_q} Π_(a,e) (1 - z^a q^n)^e` exactly to `q^order_q`.
///
/// Factors with `n > order_q` cannot reach the window, so the result is exact.
pub fn product_family(factors: &[Factor], order_q: u32) -> BiSeries {
    let n = order_q as usize;
    let reach = factors.iter().map(|f| f.z_exp.abs()).max().unwrap_or(0);
    // Every f_N has z-support inside [-reach*N, reach*N]; use one dense frame.
    let span = reach * n as i64;
    let width = (2 * span + 1) as usize;

    // s_k as sparse (z-exponent, coefficient) lists
    let mut log_deriv: Vec<Vec<(i64, BigInt)>> = vec![Vec::new(); n + 1];
    for (k, slot) in log_deriv.iter_mut().enumerate().skip(1) {
        let mut poly = LaurentPoly::zero();
        for m in (1..=k).filter(|m| k % m == 0) {
            for f in factors {
                poly.add_term(
                    f.z_exp * m as i64,
                    &BigInt::from(-(f.power) * (k / m) as i64),
                );
            }
        }
        *slot = poly.terms().map(|(e, c)| (e, c.clone())).collect();
    }

    let mut f: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    let mut f0 = vec![BigInt::zero(); width];
    f0[span as usize] = BigInt::one();
    f.push(f0);
    for big_n in 1..=n {
        let mut acc = vec![BigInt::zero(); width];
        for k in 1..=big_n {
            let prev = &f[big_n - k];
            for (t, c) in &log_deriv[k] {
                for (idx, p) in prev.iter().enumerate() {
                    if p.is_zero() {
                        continue;
                    }
                    let dest = idx as i64 + t;
                    debug_assert!((0..width as i64).contains(&dest));
                    acc[dest as usize] += p * c;
                }
            }
        }
        for a in acc.iter_mut() {
            if !a.is_zero() {
                *a = &*a / big_n;
            }
        }
        f.push(acc);
    }
    let coeffs = f
        .iter()
        .map(|dense| LaurentPoly::from_dense(-span, dense))
        .collect();
    BiSeries { order_q, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(terms: &[(i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().copied())
    }

    #[test]
    fn eta_power_low_orders() {
        let s = euler_product_power(-24, 3);
        assert_eq!(s, TruncSeries::from_poly(0, &[1, 24, 324, 3200], 3));
        // partitions
        let p = euler_product_power(-1, 7);
        assert_eq!(p, TruncSeries::from_poly(0, &[1, 1, 2, 3, 5, 7, 11, 15], 7));
        // Euler's pentagonal theorem
        let e = euler_product_power(1, 7);
        assert_eq!(e, TruncSeries::from_poly(0, &[1, -1, -1, 0, 0, 1, 0, 1], 7));
    }

    #[test]
    fn pure_q_family() {
        let b = product_family(&[Factor::from((0, -24))], 3);
        let coeffs: Vec<_> = b.coeffs().iter().map(|p| p.coeff(0)).collect();
        assert_eq!(
            coeffs,
            vec![1.into(), 24.into(), 324.into(), BigInt::from(3200)]
        );
    }

    #[test]
    fn first_order_kkv() {
        let b = product_family(&[(0, -20).into(), (1, -2).into(), (-1, -2).into()], 1);
        assert_eq!(b.coeff(0).unwrap(), &LaurentPoly::one());
        assert_eq!(b.coeff(1).unwrap(), &lp(&[(1, 2), (0, 20), (-1, 2)]));
    }

    #[test]
    fn empty_family_is_one() {
        for order in [0, 1, 5] {
            assert_eq!(product_family(&[], order), BiSeries::one(order));
        }
    }

    #[test]
    fn single_linear_factor() {
        // (1 - z q)(1 - z q^2)(1 - z q^3) to order 3
        let b = product_family(&[(1, 1).into()], 3);
        assert_eq!(b.coeff(1).unwrap(), &lp(&[(1, -1)]));
        assert_eq!(b.coeff(2).unwrap(), &lp(&[(1, -1)]));
        assert_eq!(b.coeff(3).unwrap(), &lp(&[(1, -1), (2, 1)]));
    }

    #[test]
    fn json_shape() {
        let b = product_family(&[(1, -1).into()], 1);
        let v = serde_json::to_value(&b).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"order_q": 1, "coeffs": [{"terms": {"0": "1"}}, {"terms": {"1": "1"}}]})
        );
        let back: BiSeries = serde_json::from_value(v).unwrap();
        assert_eq!(back, b);
    }
}
