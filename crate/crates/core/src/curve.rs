//! Local BPS contributions of single curves: symmetric-product Euler
//! characteristics, nonsingular and nodal curves, and the Q-series of a
//! singularity germ.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bps::{pairs_basis, peel, BpsError, BpsVector, PairsSeries};
use crate::series::json::BigIntRepr;
use crate::series::{binom_pow, Sign, TruncSeries};

/// Node sets larger than this are rejected: the subset table has `2^r` rows.
pub const MAX_NODES: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error(transparent)]
    Bps(#[from] BpsError),
    #[error("MilnorMismatch: germ has mu = {mu} but (2 - 2g) - e(C0) = {expected}")]
    MilnorMismatch { mu: i64, expected: i64 },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid germ: {0}")]
    InvalidGerm(String),
}

fn sign_pow(k: i64) -> BigInt {
    if k.rem_euclid(2) == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Euler characteristic of `S^k M` for a space `M` with `e(M) = e`: the
/// `q^k` coefficient of `(1-q)^(-e)`, i.e. `binom(e+k-1, k)`.
pub fn sym_euler(e: i64, k: u32) -> BigInt {
    let mut c = BigInt::one();
    for j in 1..=k as i64 {
        c = c * (e + j - 1) / j;
        if c.is_zero() {
            break;
        }
    }
    c
}

/// `e(S^k Σ_h)` for a closed genus-`h` surface; zero for negative `k`.
fn sym_euler_surface(h: i64, k: i64) -> BigInt {
    if k < 0 {
        BigInt::zero()
    } else {
        sym_euler(2 - 2 * h, k as u32)
    }
}

/// A nonsingular genus-`g` curve with constant weight `chi` contributes
/// `n_g = (-1)^g chi` and nothing else.
pub fn nonsingular_contribution(
    g: u32,
    chi: &BigInt,
    order: i64,
) -> Result<(BpsVector, PairsSeries), CurveError> {
    let low = 1 - g as i64;
    if order < low {
        return Err(BpsError::InsufficientWindow {
            needed: low,
            available: order,
        }
        .into());
    }
    let n_g = sign_pow(g as i64) * chi;
    let mut v = BpsVector::zero(g);
    *v.entry_mut(g) = n_g.clone();
    let basis = pairs_basis(g, order).expect("window reaches q^(1-g)");
    Ok((v, PairsSeries::new(basis.scale(&n_g), g)))
}

/// A curve of arithmetic genus `g` with `r` nodes, and the weight `χ_S` of
/// the sheaves pushed forward from the partial normalization at each node
/// subset `S`. Subsets are bitmasks over node indices `0..r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NodalCurveRepr", into = "NodalCurveRepr")]
pub struct NodalCurve {
    g: u32,
    r: u32,
    chi: Vec<BigInt>,
}

impl NodalCurve {
    pub fn new(g: u32, r: u32, chi: Vec<BigInt>) -> Result<Self, CurveError> {
        if r > g {
            return Err(CurveError::InvalidCurve(format!(
                "{r} nodes exceed arithmetic genus {g}"
            )));
        }
        if r > MAX_NODES {
            return Err(CurveError::InvalidCurve(format!(
                "at most {MAX_NODES} nodes are supported, got {r}"
            )));
        }
        if chi.len() != 1usize << r {
            return Err(CurveError::InvalidCurve(format!(
                "expected {} subset weights, found {}",
                1usize << r,
                chi.len()
            )));
        }
        Ok(Self { g, r, chi })
    }

    pub fn from_fn(g: u32, r: u32, f: impl FnMut(u32) -> BigInt) -> Result<Self, CurveError> {
        let chi = (0..1u32 << r.min(MAX_NODES)).map(f).collect();
        Self::new(g, r, chi)
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn geometric_genus(&self) -> u32 {
        self.g - self.r
    }

    /// Weight of the partial normalization at the node subset `mask`.
    pub fn chi(&self, mask: u32) -> &BigInt {
        &self.chi[mask as usize]
    }

    /// `Σ_{|S| = k} χ_S` for `k = 0..=r`.
    fn weight_by_size(&self) -> Vec<BigInt> {
        let mut w = vec![BigInt::zero(); self.r as usize + 1];
        for (mask, c) in self.chi.iter().enumerate() {
            w[(mask as u32).count_ones() as usize] += c;
        }
        w
    }
}

/// JSON key of a node subset: ascending node indices joined by commas.
pub fn subset_key(mask: u32) -> String {
    (0..32)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Inverse of [`subset_key`] for a curve with `r` nodes.
pub fn parse_subset_key(key: &str, r: u32) -> Result<u32, String> {
    let key = key.trim();
    if key.is_empty() {
        return Ok(0);
    }
    let mut mask = 0u32;
    let mut last: Option<u32> = None;
    for part in key.split(',') {
        let i: u32 = part
            .trim()
            .parse()
            .map_err(|_| format!("bad node index {part:?} in subset {key:?}"))?;
        if i >= r {
            return Err(format!("node index {i} out of range for {r} nodes"));
        }
        if last.is_some_and(|l| i <= l) {
            return Err(format!("subset {key:?} is not strictly ascending"));
        }
        last = Some(i);
        mask |= 1 << i;
    }
    Ok(mask)
}

#[derive(Serialize, Deserialize)]
struct NodalCurveRepr {
    g: u32,
    r: u32,
    chi: BTreeMap<String, BigIntRepr>,
}

impl TryFrom<NodalCurveRepr> for NodalCurve {
    type Error = CurveError;

    fn try_from(repr: NodalCurveRepr) -> Result<Self, CurveError> {
        if repr.r > MAX_NODES {
            return Err(CurveError::InvalidCurve(format!(
                "too many nodes: {}",
                repr.r
            )));
        }
        let mut chi: Vec<Option<BigInt>> = vec![None; 1usize << repr.r];
        for (k, v) in repr.chi {
            let mask = parse_subset_key(&k, repr.r).map_err(CurveError::InvalidCurve)?;
            if chi[mask as usize].replace(v.0).is_some() {
                return Err(CurveError::InvalidCurve(format!("duplicate subset {k:?}")));
            }
        }
        let chi = chi
            .into_iter()
            .enumerate()
            .map(|(mask, c)| {
                c.ok_or_else(|| {
                    CurveError::InvalidCurve(format!(
                        "missing weight for subset {:?}",
                        subset_key(mask as u32)
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        NodalCurve::new(repr.g, repr.r, chi)
    }
}

impl From<NodalCurve> for NodalCurveRepr {
    fn from(c: NodalCurve) -> Self {
        let chi = c
            .chi
            .into_iter()
            .enumerate()
            .map(|(mask, v)| (subset_key(mask as u32), BigIntRepr(v)))
            .collect();
        NodalCurveRepr {
            g: c.g,
            r: c.r,
            chi,
        }
    }
}

/// BPS contributions of a nodal curve: every partial normalization at a
/// node subset `S` behaves as a nonsingular curve of genus `g - |S|`, so
/// `n_h = (-1)^h Σ_{|S| = g-h} χ_S` and `n_h = 0` below the geometric genus.
pub fn nodal_contribution(c: &NodalCurve) -> BpsVector {
    let mut v = BpsVector::zero(c.g);
    for (k, w) in c.weight_by_size().into_iter().enumerate() {
        let h = c.g - k as u32;
        *v.entry_mut(h) = sign_pow(h as i64) * w;
    }
    v
}

/// Pairs series of a nodal curve assembled stratum by stratum:
/// `P_n = (-1)^(n-1) Σ_S χ_S e(S^(n-1+g_S) Σ_(g_S))` with `g_S = g - |S|`.
pub fn nodal_pairs_series(c: &NodalCurve, order: i64) -> Result<PairsSeries, CurveError> {
    let low = 1 - c.g as i64;
    if order < low {
        return Err(BpsError::InsufficientWindow {
            needed: low,
            available: order,
        }
        .into());
    }
    let weights = c.weight_by_size();
    let series = TruncSeries::from_fn(low, order, |n| {
        let total: BigInt = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(k, w)| {
                let g_s = c.g as i64 - k as i64;
                w * sym_euler_surface(g_s, n - 1 + g_s)
            })
            .sum();
        sign_pow(n - 1) * total
    });
    Ok(PairsSeries::new(series, c.g))
}

/// `μ_Z = (2 - 2g) - e(C^0)`: Euler characteristic of the Milnor fibre
/// read off from the arithmetic genus and the smooth locus.
pub fn milnor_from_geometry(g: u32, e_c0: i64) -> i64 {
    2 - 2 * g as i64 - e_c0
}

/// Germ of a curve singularity: δ-invariant, `μ_Z`, and the unsigned Euler
/// characteristics `e(Q_n)` of pairs whose cokernel sits at the germ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GermRepr", into = "GermRepr")]
pub struct SingularityGerm {
    delta: u32,
    mu: i64,
    q_euler: TruncSeries,
}

impl SingularityGerm {
    pub fn new(delta: u32, mu: i64, q_euler: TruncSeries) -> Result<Self, CurveError> {
        if q_euler.order() < 0 {
            return Err(CurveError::InvalidGerm("Q-series window is empty".into()));
        }
        if let Some(v) = q_euler.valuation() {
            if v < 0 {
                return Err(CurveError::InvalidGerm(format!(
                    "Q-series has a term at q^{v}"
                )));
            }
        }
        if !q_euler.coeff(0).is_some_and(|c| c.is_one()) {
            return Err(CurveError::InvalidGerm(
                "Q-series must have constant term 1".into(),
            ));
        }
        Ok(Self { delta, mu, q_euler })
    }

    /// The node: `δ = 1`, `μ = 0`, `e(Q_n) = n` for `n ≥ 1`.
    pub fn node(order: u32) -> Self {
        let q = TruncSeries::from_fn(0, order as i64, |n| {
            if n == 0 {
                BigInt::one()
            } else {
                BigInt::from(n)
            }
        });
        Self::new(1, 0, q).expect("node germ is well formed")
    }

    /// A smooth point: only the trivial pair.
    pub fn smooth(order: u32) -> Self {
        Self::new(0, 0, TruncSeries::one(order as i64)).expect("smooth germ is well formed")
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn mu(&self) -> i64 {
        self.mu
    }

    pub fn q_euler(&self) -> &TruncSeries {
        &self.q_euler
    }
}

#[derive(Serialize, Deserialize)]
struct GermRepr {
    delta: u32,
    mu: i64,
    q_euler: TruncSeries,
}

impl TryFrom<GermRepr> for SingularityGerm {
    type Error = CurveError;
    fn try_from(r: GermRepr) -> Result<Self, CurveError> {
        SingularityGerm::new(r.delta, r.mu, r.q_euler)
    }
}

impl From<SingularityGerm> for GermRepr {
    fn from(g: SingularityGerm) -> Self {
        GermRepr {
            delta: g.delta,
            mu: g.mu,
            q_euler: g.q_euler,
        }
    }
}

/// Writes `Σ (-1)^n e(Q_n) q^n` as `Σ_{r=0}^{δ} n_r q^(δ-r) (1+q)^(2r-2δ-μ)`.
///
/// The result is returned as a vector of length `δ + 1` indexed by `r`.
pub fn q_series_decompose(germ: &SingularityGerm) -> Result<BpsVector, CurveError> {
    let delta = germ.delta as i64;
    let order = germ.q_euler.order();
    if order < delta + 1 {
        return Err(BpsError::InsufficientWindow {
            needed: delta + 1,
            available: order,
        }
        .into());
    }
    let signed = germ.q_euler.q_negate();
    // basis[i] has r = δ - i and leads at q^i
    let basis: Vec<TruncSeries> = (0..=delta)
        .map(|i| {
            let r = delta - i;
            binom_pow(2 * r - 2 * delta - germ.mu, Sign::Plus, (order - i) as u32).shift(i)
        })
        .collect();
    let peeled = peel(&signed, 0, &basis);
    peeled.check_residual()?;
    let mut n = peeled.coeffs;
    n.reverse();
    Ok(BpsVector::new(germ.delta, n)?)
}

/// Signed pairs series `Σ e_n q^n` of a curve of arithmetic genus `g`
/// whose only singularity is `germ`, with `e(C^0) = e_c0`:
/// `[Σ_k (-1)^k e(Q_k) q^k] · q^(1-g) · (1+q)^(-e_c0)`.
pub fn stratify_pairs_series(
    germ: &SingularityGerm,
    e_c0: i64,
    g: u32,
    order: i64,
) -> Result<PairsSeries, CurveError> {
    let expected = milnor_from_geometry(g, e_c0);
    if germ.mu != expected {
        return Err(CurveError::MilnorMismatch {
            mu: germ.mu,
            expected,
        });
    }
    if germ.delta > g {
        return Err(CurveError::InvalidCurve(format!(
            "delta-invariant {} exceeds arithmetic genus {g}",
            germ.delta
        )));
    }
    let signed = germ.q_euler.q_negate();
    let smooth_part = binom_pow(-e_c0, Sign::Plus, signed.order().max(0) as u32);
    let product = signed
        .try_mul(&smooth_part)
        .map_err(BpsError::from)?
        .shift(1 - g as i64);
    Ok(PairsSeries::new(product.truncate(order), g))
}

/// The germ decomposition placed at genus `g`: entry `s` is
/// `n_(s - (g - δ))`, zero below the geometric genus `g - δ`.
pub fn shift_to_genus(germ_vector: &BpsVector, g: u32) -> Option<BpsVector> {
    let delta = germ_vector.g();
    let geometric = g.checked_sub(delta)?;
    let mut v = BpsVector::zero(g);
    for (r, n) in germ_vector.n().iter().enumerate() {
        *v.entry_mut(geometric + r as u32) = n.clone();
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bps::{bps_decompose, bps_recompose};

    fn big(x: i64) -> BigInt {
        x.into()
    }

    #[test]
    fn symmetric_products() {
        assert_eq!(sym_euler(2, 3), big(4));
        assert_eq!(sym_euler(0, 2), big(0));
        assert_eq!(sym_euler(0, 0), big(1));
        assert_eq!(sym_euler(-2, 2), big(1));
        assert_eq!(sym_euler(-2, 3), big(0));
        assert_eq!(sym_euler(-2, 1), big(-2));
        for k in 0..=50 {
            assert_eq!(sym_euler(2, k), big(k as i64 + 1));
        }
    }

    #[test]
    fn nonsingular_examples() {
        let (v, z) = nonsingular_contribution(0, &big(1), 4).unwrap();
        assert_eq!(v, BpsVector::from_i64(&[1]));
        assert_eq!(z.series, TruncSeries::from_poly(1, &[1, -2, 3, -4], 4));

        let (v, z) = nonsingular_contribution(2, &big(5), 3).unwrap();
        assert_eq!(v, BpsVector::from_i64(&[0, 0, 5]));
        assert_eq!(z.series, TruncSeries::from_poly(-1, &[5, 10, 5], 3));

        let (v, z) = nonsingular_contribution(1, &big(-1), 3).unwrap();
        assert_eq!(v, BpsVector::from_i64(&[0, 1]));
        assert_eq!(z.series, TruncSeries::from_poly(0, &[1], 3));
    }

    #[test]
    fn nonsingular_agrees_with_recompose() {
        for g in 0..6 {
            let (v, z) = nonsingular_contribution(g, &big(-3), 7).unwrap();
            assert_eq!(bps_recompose(&v, 7).unwrap(), z);
        }
    }

    #[test]
    fn elliptic_node() {
        let c = NodalCurve::new(1, 1, vec![big(3), big(-7)]).unwrap();
        assert_eq!(nodal_contribution(&c), BpsVector::from_i64(&[-7, -3]));
        let z = nodal_pairs_series(&c, 6).unwrap();
        assert_eq!(bps_decompose(&z).unwrap(), nodal_contribution(&c));
    }

    #[test]
    fn no_nodes_is_nonsingular() {
        for g in 0..5 {
            let c = NodalCurve::new(g, 0, vec![big(2)]).unwrap();
            let (v, z) = nonsingular_contribution(g, &big(2), 6).unwrap();
            assert_eq!(nodal_contribution(&c), v);
            assert_eq!(nodal_pairs_series(&c, 6).unwrap(), z);
        }
    }

    #[test]
    fn two_nodes_unit_weights() {
        let c = NodalCurve::from_fn(2, 2, |_| big(1)).unwrap();
        assert_eq!(nodal_contribution(&c), BpsVector::from_i64(&[1, -2, 1]));
    }

    #[test]
    fn torus_series_vanishes() {
        let c = NodalCurve::new(1, 0, vec![big(1)]).unwrap();
        let z = nodal_pairs_series(&c, 8).unwrap();
        assert_eq!(z.series.coeff(0), Some(&big(-1)));
        for n in 1..=8 {
            assert_eq!(z.series.coeff(n), Some(&big(0)));
        }
    }

    #[test]
    fn only_normalized_stratum() {
        // node index 0 resolved; empty subset weight 0
        let c = NodalCurve::new(2, 1, vec![big(0), big(1)]).unwrap();
        let z = nodal_pairs_series(&c, 6).unwrap();
        let (_, expected) = nonsingular_contribution(1, &big(1), 6).unwrap();
        assert_eq!(z.series, expected.series);
    }

    #[test]
    fn subset_keys_roundtrip() {
        assert_eq!(subset_key(0), "");
        assert_eq!(subset_key(0b101), "0,2");
        assert_eq!(parse_subset_key("0,2", 3), Ok(0b101));
        assert_eq!(parse_subset_key(" ", 3), Ok(0));
        assert!(parse_subset_key("2,0", 3).is_err());
        assert!(parse_subset_key("3", 3).is_err());
        assert!(parse_subset_key("x", 3).is_err());
    }

    #[test]
    fn nodal_json() {
        let c = NodalCurve::new(1, 1, vec![big(1), big(2)]).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"g": 1, "r": 1, "chi": {"": "1", "0": "2"}})
        );
        let parsed: NodalCurve =
            serde_json::from_str(r#"{"g": 1, "r": 1, "chi": {"": 1, "0": 2}}"#).unwrap();
        assert_eq!(parsed, c);
        assert!(serde_json::from_str::<NodalCurve>(r#"{"g": 1, "r": 1, "chi": {"": 1}}"#).is_err());
        assert!(
            serde_json::from_str::<NodalCurve>(r#"{"g": 0, "r": 1, "chi": {"": 1, "0": 1}}"#)
                .is_err()
        );
    }

    #[test]
    fn germ_examples() {
        let node = SingularityGerm::node(6);
        assert_eq!(
            q_series_decompose(&node).unwrap(),
            BpsVector::from_i64(&[-1, 1])
        );
        assert_eq!(
            q_series_decompose(&SingularityGerm::smooth(4)).unwrap(),
            BpsVector::from_i64(&[1])
        );
        assert_eq!(
            q_series_decompose(&SingularityGerm::node(1)).unwrap_err(),
            CurveError::Bps(BpsError::InsufficientWindow {
                needed: 2,
                available: 1
            })
        );
    }

    #[test]
    fn germ_validation() {
        assert!(SingularityGerm::new(1, 0, TruncSeries::from_poly(0, &[2, 1], 3)).is_err());
        assert!(SingularityGerm::new(1, 0, TruncSeries::from_poly(-1, &[1, 1], 3)).is_err());
        let bad_residual =
            SingularityGerm::new(1, 0, TruncSeries::from_poly(0, &[1, 1, 1, 1], 3)).unwrap();
        assert!(matches!(
            q_series_decompose(&bad_residual),
            Err(CurveError::Bps(BpsError::NotBpsForm { .. }))
        ));
    }

    #[test]
    fn milnor_examples() {
        assert_eq!(milnor_from_geometry(1, 0), 0);
        assert_eq!(milnor_from_geometry(0, 2), 0);
        assert_eq!(milnor_from_geometry(1, 1), -1);
    }

    #[test]
    fn stratify_examples() {
        let node = SingularityGerm::node(10);
        let z = stratify_pairs_series(&node, 0, 1, 8).unwrap();
        assert_eq!(bps_decompose(&z).unwrap(), BpsVector::from_i64(&[-1, 1]));

        // uniform weight 1: Z_C = (-1)^g times the signed stratified series
        let c = NodalCurve::from_fn(1, 1, |_| big(1)).unwrap();
        let zc = nodal_pairs_series(&c, 8).unwrap();
        assert_eq!(zc.series, z.series.scale(&big(-1)));

        for g in 0..4u32 {
            let smooth = SingularityGerm::smooth(12);
            let z = stratify_pairs_series(&smooth, 2 - 2 * g as i64, g, 8).unwrap();
            assert_eq!(z.series, pairs_basis(g, 8).unwrap());
        }

        assert_eq!(
            stratify_pairs_series(&node, 1, 1, 8).unwrap_err(),
            CurveError::MilnorMismatch {
                mu: 0,
                expected: -1
            }
        );
        assert!(matches!(
            stratify_pairs_series(&node, 2, 0, 8),
            Err(CurveError::InvalidCurve(_))
        ));
    }

    #[test]
    fn shift_helper() {
        let germ = BpsVector::from_i64(&[-1, 1]);
        assert_eq!(
            shift_to_genus(&germ, 3),
            Some(BpsVector::from_i64(&[0, 0, -1, 1]))
        );
        assert_eq!(shift_to_genus(&germ, 0), None);
    }
}
