//! Nonnegative extended reals: a finite value or `+∞`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);
    pub const ONE: ExtReal = ExtReal::Finite(1.0);

    /// Maps non-finite or overflowing inputs to `Infinite`.
    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            ExtReal::Finite(v)
        } else {
            ExtReal::Infinite
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    pub fn recip(&self) -> ExtReal {
        match *self {
            ExtReal::Infinite => ExtReal::ZERO,
            ExtReal::Finite(v) if v == 0.0 => ExtReal::Infinite,
            ExtReal::Finite(v) => ExtReal::Finite(1.0 / v),
        }
    }

    pub fn mul(self, rhs: ExtReal) -> ExtReal {
        ExtReal::from_f64(self.to_f64() * rhs.to_f64())
    }

    pub fn add(self, rhs: ExtReal) -> ExtReal {
        ExtReal::from_f64(self.to_f64() + rhs.to_f64())
    }

    pub fn min(self, rhs: ExtReal) -> ExtReal {
        if self <= rhs {
            self
        } else {
            rhs
        }
    }

    pub fn max(self, rhs: ExtReal) -> ExtReal {
        if self >= rhs {
            self
        } else {
            rhs
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

// Infinite values travel as the string "inf" in JSON.
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) if v >= 0.0 && v.is_finite() => Ok(ExtReal::Finite(v)),
            Repr::Num(v) => Err(serde::de::Error::custom(format!(
                "extended real must be a nonnegative finite number or \"inf\", got {v}"
            ))),
            Repr::Str(s) if s == "inf" => Ok(ExtReal::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected \"inf\", got {s:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_dominates() {
        assert!(ExtReal::Infinite > ExtReal::Finite(1e300));
        assert_eq!(ExtReal::Finite(2.0).min(ExtReal::Infinite), ExtReal::Finite(2.0));
        assert_eq!(ExtReal::Infinite.recip(), ExtReal::ZERO);
        assert_eq!(ExtReal::ZERO.recip(), ExtReal::Infinite);
    }

    #[test]
    fn json_round_trip() {
        let v = vec![ExtReal::Finite(2.5), ExtReal::Infinite];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[2.5,\"inf\"]");
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<ExtReal>("-1.0").is_err());
    }
}
