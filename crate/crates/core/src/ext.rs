//! Serde helpers for extended reals: `+inf` / `-inf` are emitted as strings,
//! NaN as `null`, everything else as a JSON number.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::fmt;

/// An `f64` that serializes infinities as `"+inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Ext(pub f64);

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("+inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else if self.0.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(self.0)
        }
    }
}

struct ExtVisitor;

impl Visitor<'_> for ExtVisitor {
    type Value = Ext;
    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number, \"+inf\", \"-inf\" or null")
    }
    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Ext, E> {
        Ok(Ext(v))
    }
    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Ext, E> {
        Ok(Ext(v as f64))
    }
    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Ext, E> {
        Ok(Ext(v as f64))
    }
    fn visit_unit<E: de::Error>(self) -> Result<Ext, E> {
        Ok(Ext(f64::NAN))
    }
    fn visit_none<E: de::Error>(self) -> Result<Ext, E> {
        Ok(Ext(f64::NAN))
    }
    fn visit_str<E: de::Error>(self, v: &str) -> Result<Ext, E> {
        match v {
            "+inf" | "inf" => Ok(Ext(f64::INFINITY)),
            "-inf" => Ok(Ext(f64::NEG_INFINITY)),
            _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
        }
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Ext, D::Error> {
        d.deserialize_any(ExtVisitor)
    }
}

/// `#[serde(with = "ext::real")]` for plain `f64` fields.
pub mod real {
    use super::*;
    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        Ext(*v).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ext::deserialize(d).map(|e| e.0)
    }
}

/// `#[serde(with = "ext::real_opt")]` for `Option<f64>` fields where `None` means `+∞`.
pub mod real_opt {
    use super::*;
    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => Ext(*x).serialize(s),
            None => s.serialize_none(),
        }
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        let e = Option::<Ext>::deserialize(d)?;
        Ok(match e {
            Some(Ext(x)) if x.is_nan() => None,
            Some(Ext(x)) if x == f64::INFINITY => None,
            Some(Ext(x)) => Some(x),
            None => None,
        })
    }
}

/// `#[serde(with = "ext::pairs")]` for `Vec<(f64, f64)>`.
pub mod pairs {
    use super::*;
    pub fn serialize<S: Serializer>(v: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for (a, b) in v {
            seq.serialize_element(&(Ext(*a), Ext(*b)))?;
        }
        seq.end()
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(f64, f64)>, D::Error> {
        let v = Vec::<(Ext, Ext)>::deserialize(d)?;
        Ok(v.into_iter().map(|(a, b)| (a.0, b.0)).collect())
    }
}

/// `#[serde(with = "ext::vec")]` for `Vec<f64>`.
pub mod vec {
    use super::*;
    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for a in v {
            seq.serialize_element(&Ext(*a))?;
        }
        seq.end()
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v = Vec::<Ext>::deserialize(d)?;
        Ok(v.into_iter().map(|a| a.0).collect())
    }
}
