//! Exact formal-series engine: Laurent polynomials, truncated Laurent
//! series, bivariate series and infinite-product expansion.

pub mod json;
mod laurent;
mod product;
mod trunc;

use num_bigint::BigInt;
use thiserror::Error;

pub use laurent::{involution_check, LaurentPoly};
pub use product::{euler_product_power, product_family, BiSeries, Factor};
pub use trunc::{binom_pow, q_negate, series_arith, series_inverse, SeriesOp, Sign, TruncSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("no output coefficient is determined by the input windows")]
    EmptyWindow,
    #[error("leading coefficient {coeff} (at exponent {exp:?}) is not a unit")]
    NonUnitLeading { exp: Option<i64>, coeff: BigInt },
    #[error("invalid window: order {order} is below min_exp {min_exp} - 1")]
    InvalidWindow { min_exp: i64, order: i64 },
    #[error("expected {expected} coefficients, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}
