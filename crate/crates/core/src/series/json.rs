//! Serde helpers: big integers travel as decimal strings.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Big integer wrapper that serializes as a decimal string and accepts either
/// a string or a native JSON integer on input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigIntRepr(pub BigInt);

impl Serialize for BigIntRepr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

struct BigIntVisitor;

impl Visitor<'_> for BigIntVisitor {
    type Value = BigIntRepr;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a decimal string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigIntRepr, E> {
        Ok(BigIntRepr(v.into()))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigIntRepr, E> {
        Ok(BigIntRepr(v.into()))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<BigIntRepr, E> {
        BigInt::from_str(v.trim())
            .map(BigIntRepr)
            .map_err(|_| E::custom(format!("invalid decimal integer {v:?}")))
    }
}

impl<'de> Deserialize<'de> for BigIntRepr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(BigIntVisitor)
    }
}

/// `#[serde(with = "bigint_vec")]` for `Vec<BigInt>` fields.
pub mod bigint_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw: Vec<BigIntRepr> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|r| r.0).collect())
    }
}

/// `#[serde(with = "bigint_str")]` for a single `BigInt` field.
pub mod bigint_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        BigIntRepr::deserialize(d).map(|r| r.0)
    }
}

/// Renders any serializable value as pretty JSON with lexicographically
/// sorted object keys.
pub fn to_sorted_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // serde_json::Map is a BTreeMap unless `preserve_order` is enabled.
    let v = serde_json::to_value(value)?;
    serde_json::to_string_pretty(&v)
}
