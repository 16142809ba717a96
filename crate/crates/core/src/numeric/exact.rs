use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Digits kept when a value has no terminating decimal expansion.
const INEXACT_DIGITS: u32 = 12;

/// An exact rational number.
///
/// Serializes as `{"decimal": "...", "exact": bool}`; when the decimal is
/// rounded, a `"fraction": "n/d"` field carries the exact value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(BigRational);

impl Exact {
    pub fn new(r: BigRational) -> Exact {
        Exact(r)
    }

    pub fn from_integer(n: i64) -> Exact {
        Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Exact {
        Exact(BigRational::from_integer(n))
    }

    pub fn ratio(num: i64, den: i64) -> Exact {
        Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Exact value of a finite float; `None` for NaN or infinities.
    pub fn from_f64(x: f64) -> Option<Exact> {
        BigRational::from_float(x).map(Exact)
    }

    pub fn zero() -> Exact {
        Exact(BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn abs(&self) -> Exact {
        Exact(self.0.abs())
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Parses a plain decimal such as `"44613"`, `"-3.25"` or `".5"`.
    pub fn parse_decimal(s: &str) -> Option<Exact> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if (int.is_empty() && frac.is_empty())
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return None;
        }
        let digits = format!("{int}{frac}");
        let mut num: BigInt = digits.parse().ok()?;
        if neg {
            num = -num;
        }
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        Some(Exact(BigRational::new(num, den)))
    }

    /// Decimal rendering and whether it is exact.
    pub fn to_decimal(&self) -> (String, bool) {
        let r = &self.0;
        let mut den = r.denom().clone();
        let (mut twos, mut fives) = (0u32, 0u32);
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        while den.is_even() {
            den /= &two;
            twos += 1;
        }
        while (&den % &five).is_zero() {
            den /= &five;
            fives += 1;
        }
        if den.is_one() {
            (render_scaled(r, twos.max(fives)), true)
        } else {
            (render_scaled(r, INEXACT_DIGITS), false)
        }
    }
}

/// Renders `r` rounded half away from zero to `digits` decimal places,
/// trimming trailing zeros.
fn render_scaled(r: &BigRational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = r * BigRational::from_integer(scale);
    let rounded = scaled.round().to_integer();
    let neg = rounded.is_negative();
    let mut s = rounded.abs().to_string();
    if digits > 0 {
        let d = digits as usize;
        if s.len() <= d {
            s = format!("{}{s}", "0".repeat(d + 1 - s.len()));
        }
        let (i, f) = s.split_at(s.len() - d);
        let f = f.trim_end_matches('0');
        s = if f.is_empty() {
            i.to_string()
        } else {
            format!("{i}.{f}")
        };
    }
    if neg && s != "0" {
        format!("-{s}")
    } else {
        s
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (s, exact) = self.to_decimal();
        if exact {
            f.write_str(&s)
        } else {
            write!(f, "{}/{} (~{s})", self.0.numer(), self.0.denom())
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr for &Exact {
            type Output = Exact;
            fn $m(self, rhs: &Exact) -> Exact {
                Exact((&self.0).$m(&rhs.0))
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Div for &Exact {
    type Output = Option<Exact>;
    fn div(self, rhs: &Exact) -> Option<Exact> {
        if rhs.0.is_zero() {
            None
        } else {
            Some(Exact(&self.0 / &rhs.0))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExactRepr {
    decimal: String,
    exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fraction: Option<String>,
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (decimal, exact) = self.to_decimal();
        let fraction = (!exact).then(|| format!("{}/{}", self.0.numer(), self.0.denom()));
        ExactRepr {
            decimal,
            exact,
            fraction,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Exact, D::Error> {
        use serde::de::Error;
        let repr = ExactRepr::deserialize(d)?;
        if let Some(fr) = repr.fraction {
            let (n, den) = fr
                .split_once('/')
                .ok_or_else(|| D::Error::custom(format!("bad fraction `{fr}`")))?;
            let n: BigInt = n.parse().map_err(D::Error::custom)?;
            let den: BigInt = den.parse().map_err(D::Error::custom)?;
            if den.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            return Ok(Exact(BigRational::new(n, den)));
        }
        if !repr.exact {
            return Err(D::Error::custom("inexact decimal without fraction"));
        }
        Exact::parse_decimal(&repr.decimal)
            .ok_or_else(|| D::Error::custom(format!("bad decimal `{}`", repr.decimal)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decimals() {
        assert_eq!(Exact::from_integer(44613).to_decimal(), ("44613".into(), true));
        assert_eq!(Exact::ratio(1, 4).to_decimal(), ("0.25".into(), true));
        assert_eq!(Exact::ratio(-3, 8).to_decimal(), ("-0.375".into(), true));
        assert_eq!(Exact::ratio(1, 3).to_decimal(), ("0.333333333333".into(), false));
        assert_eq!(Exact::ratio(2, 3).to_decimal(), ("0.666666666667".into(), false));
        assert_eq!(Exact::zero().to_decimal(), ("0".into(), true));
    }

    #[test]
    fn parse() {
        assert_eq!(Exact::parse_decimal("0.5"), Some(Exact::ratio(1, 2)));
        assert_eq!(Exact::parse_decimal("-12.50"), Some(Exact::ratio(-25, 2)));
        assert_eq!(Exact::parse_decimal(".5"), Some(Exact::ratio(1, 2)));
        assert_eq!(Exact::parse_decimal("1,000"), None);
        assert_eq!(Exact::parse_decimal("."), None);
        assert_eq!(Exact::parse_decimal("abc"), None);
    }

    #[test]
    fn json_shape() {
        let j = serde_json::to_string(&Exact::from_integer(60)).unwrap();
        assert_eq!(j, r#"{"decimal":"60","exact":true}"#);
        let j = serde_json::to_string(&Exact::ratio(1, 3)).unwrap();
        assert_eq!(
            j,
            r#"{"decimal":"0.333333333333","exact":false,"fraction":"1/3"}"#
        );
    }

    #[test]
    fn division_by_zero_is_none() {
        assert!((&Exact::from_integer(1) / &Exact::zero()).is_none());
    }

    proptest! {
        #[test]
        fn serde_round_trip(n in -1_000_000i64..1_000_000, d in 1i64..10_000) {
            let x = Exact::ratio(n, d);
            let back: Exact = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
