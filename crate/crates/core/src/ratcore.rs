//! Exact rational arithmetic and precision levels.
//!
//! [`Rational`] wraps an arbitrary-precision fraction that is kept in lowest
//! terms with a positive denominator after every operation, so structural
//! equality is numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid rational literal {0:?}")]
    Parse(String),
}

/// Exact fraction in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Applies `op` to `a` and `b` exactly.
pub fn rat_arith(a: &Rational, b: &Rational, op: ArithOp) -> Result<Rational, RatError> {
    match op {
        ArithOp::Add => Ok(a + b),
        ArithOp::Sub => Ok(a - b),
        ArithOp::Mul => Ok(a * b),
        ArithOp::Div => a.checked_div(b),
    }
}

pub fn rat_cmp(a: &Rational, b: &Rational) -> Ordering {
    a.cmp(b)
}

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, RatError> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(RatError::DivisionByZero);
        }
        Ok(Self(BigRational::new(numer.into(), denom)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn from_big(value: BigRational) -> Self {
        // BigRational::new reduces; from_integer and arithmetic results are
        // already reduced, but values built with new_raw are not.
        let (n, d) = value.into_raw();
        Self(BigRational::new(n, d))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Self(BigRational::new(BigInt::one(), BigInt::one() << k))
    }

    /// `2^k`.
    pub fn pow2(k: u32) -> Self {
        Self::from_integer(BigInt::one() << k)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn signum(&self) -> Ordering {
        self.numer().sign().cmp_zero()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, RatError> {
        if self.is_zero() {
            return Err(RatError::DivisionByZero);
        }
        Ok(Self(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self, RatError> {
        if rhs.is_zero() {
            return Err(RatError::DivisionByZero);
        }
        Ok(Self(&self.0 / &rhs.0))
    }

    pub fn pow(&self, exp: u32) -> Self {
        Self(num_traits::pow(self.0.clone(), exp as usize))
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Smallest `e >= 0` with `2^e >= self`.
    pub fn ceil_log2(&self) -> u32 {
        let c = self.ceil();
        if c <= BigInt::one() {
            return 0;
        }
        let c_minus_one: BigInt = c - 1;
        c_minus_one.bits() as u32
    }

    /// Lossy conversion for display and diagnostics only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn to_u64(&self) -> Option<u64> {
        if self.is_integer() {
            self.numer().to_u64()
        } else {
            None
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "num": self.numer().to_string(),
            "den": self.denom().to_string(),
        })
    }

    /// Parses the `{"num": "...", "den": "..."}` object form.
    pub fn from_json(value: &serde_json::Value) -> Result<Self, RatError> {
        let field = |name: &str| -> Result<BigInt, RatError> {
            value
                .get(name)
                .and_then(|v| v.as_str())
                .and_then(|s| BigInt::from_str(s).ok())
                .ok_or_else(|| RatError::Parse(value.to_string()))
        };
        let num = field("num")?;
        let den = field("den")?;
        if den.sign() != Sign::Plus {
            return Err(RatError::Parse(value.to_string()));
        }
        Rational::new(num, den)
    }
}

trait CmpZero {
    fn cmp_zero(self) -> Ordering;
}

impl CmpZero for Sign {
    fn cmp_zero(self) -> Ordering {
        match self {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Self::from_integer(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Self::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Self::from_integer(n)
    }
}

impl From<BigUint> for Rational {
    fn from(n: BigUint) -> Self {
        Self::from_integer(BigInt::from(n))
    }
}

/// Accepts `p/q`, integers and finite decimals, each with an optional sign.
impl FromStr for Rational {
    type Err = RatError;

    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let bad = || RatError::Parse(src.to_string());
        let s = src.trim();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest.trim_start()),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        let value = if let Some((p, q)) = body.split_once('/') {
            let (p, q) = (p.trim(), q.trim());
            if !digits(p) || !digits(q) {
                return Err(bad());
            }
            let q = BigInt::from_str(q).map_err(|_| bad())?;
            Rational::new(BigInt::from_str(p).map_err(|_| bad())?, q)?
        } else if let Some((int, frac)) = body.split_once('.') {
            if !digits(int) || !digits(frac) {
                return Err(bad());
            }
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let whole = BigInt::from_str(int).map_err(|_| bad())?;
            let part = BigInt::from_str(frac).map_err(|_| bad())?;
            Rational::new(whole * &scale + part, scale)?
        } else {
            if !digits(body) {
                return Err(bad());
            }
            Rational::from_integer(BigInt::from_str(body).map_err(|_| bad())?)
        };
        Ok(if negative { -value } else { value })
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Rational", 2)?;
        st.serialize_field("num", &self.numer().to_string())?;
        st.serialize_field("den", &self.denom().to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        Rational::from_json(&value).map_err(de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(&self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// Precision level `k`, standing for the error bound `2^-k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Precision(pub u32);

impl Precision {
    pub fn get(self) -> u32 {
        self.0
    }

    /// The error bound `2^-k`.
    pub fn eps(self) -> Rational {
        Rational::pow2_neg(self.0)
    }

    pub fn shift(self, by: u32) -> Precision {
        Precision(self.0 + by)
    }
}

impl From<u32> for Precision {
    fn from(k: u32) -> Self {
        Precision(k)
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^-{}", self.0)
    }
}

/// `gcd(a, b)` on big integers, used when scaling grids to a common denominator.
pub(crate) fn big_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

pub(crate) fn big_lcm(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}
