//! Exact rationals and their report encoding.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

pub type Rational = Ratio<i64>;

/// `{"num": p, "den": q, "decimal": p/q}`, always in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactRational {
    pub num: i64,
    pub den: i64,
    pub decimal: f64,
}

impl From<Rational> for ExactRational {
    fn from(r: Rational) -> Self {
        ExactRational {
            num: *r.numer(),
            den: *r.denom(),
            decimal: r.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl ExactRational {
    pub fn to_rational(self) -> Rational {
        Rational::new(self.num, self.den)
    }
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter writing a [`Rational`] as an [`ExactRational`].
pub mod exact {
    use super::{ExactRational, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        ExactRational::from(*r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let e = ExactRational::deserialize(d)?;
        if e.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(e.to_rational())
    }
}

/// Like [`exact`], for optional values (`null` when absent).
pub mod exact_opt {
    use super::{ExactRational, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        r.map(ExactRational::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        match Option::<ExactRational>::deserialize(d)? {
            Some(e) if e.den == 0 => Err(serde::de::Error::custom("zero denominator")),
            other => Ok(other.map(ExactRational::to_rational)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_lowest_terms() {
        let e = ExactRational::from(ratio(32, 14));
        assert_eq!((e.num, e.den), (16, 7));
        assert!((e.decimal - 2.285714).abs() < 1e-6);
        assert_eq!(e.to_rational(), ratio(32, 14));
    }
}
