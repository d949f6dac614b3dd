//! Exact dyadic rationals: non-negative values of the form `num / 2^exp`.
//!
//! Every size, weight and measure in the game suite is one of these.
//! Arithmetic is exact; there is no rounding anywhere.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

/// A non-negative dyadic rational in canonical form: the numerator is odd
/// or zero, and zero is represented with exponent 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigUint,
    exp: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { num: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigUint::one(), exp: 0 }
    }

    /// 2^(-k).
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic { num: BigUint::one(), exp: k }
    }

    /// `num / 2^exp`, canonicalized.
    pub fn from_ratio(num: impl Into<BigUint>, exp: u32) -> Self {
        let mut d = Dyadic { num: num.into(), exp };
        d.canonicalize();
        d
    }

    pub fn from_int(n: u64) -> Self {
        Dyadic::from_ratio(n, 0)
    }

    fn canonicalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0) as u32;
        let shift = tz.min(self.exp);
        if shift > 0 {
            self.num >>= shift;
            self.exp -= shift;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    /// If the value is a power of two, returns its base-2 logarithm
    /// (negative for values below one).
    pub fn log2(&self) -> Option<i64> {
        if self.num.is_zero() {
            return None;
        }
        // canonical numerator is odd, so it is a power of two only when 1
        if self.num.is_one() {
            Some(-(self.exp as i64))
        } else {
            let bits = self.num.bits();
            if self.num == BigUint::one() << (bits - 1) {
                Some(bits as i64 - 1 - self.exp as i64)
            } else {
                None
            }
        }
    }

    pub fn is_pow2(&self) -> bool {
        self.log2().is_some()
    }

    /// Value divided by 2^k, exact.
    pub fn shr(&self, k: u32) -> Self {
        if self.num.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { num: self.num.clone(), exp: self.exp + k }
    }

    /// Value multiplied by 2^k, exact.
    pub fn shl(&self, k: u32) -> Self {
        let mut d = self.clone();
        if d.num.is_zero() {
            return d;
        }
        if d.exp >= k {
            d.exp -= k;
        } else {
            d.num <<= k - d.exp;
            d.exp = 0;
        }
        d
    }

    pub fn checked_sub(&self, other: &Dyadic) -> Option<Dyadic> {
        if self < other {
            return None;
        }
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        Some(Dyadic::from_ratio(a - b, exp))
    }

    pub fn scale_int(&self, k: u64) -> Dyadic {
        Dyadic::from_ratio(&self.num * k, self.exp)
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, other: &Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        Dyadic::from_ratio(a + b, exp)
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, other: &Dyadic) {
        *self = &*self + other;
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, other: &Dyadic) -> Dyadic {
        Dyadic::from_ratio(&self.num * &other.num, self.exp + other.exp)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("malformed dyadic: {0:?} (expected \"k/2^m\")")]
pub struct ParseDyadicError(pub String);

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseDyadicError(s.to_string());
        let (num, exp) = match s.split_once('/') {
            None => (s, "2^0"),
            Some((n, e)) => (n, e),
        };
        let exp = exp.strip_prefix("2^").ok_or_else(bad)?;
        let num: BigUint = num.trim().parse().map_err(|_| bad())?;
        let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
        Ok(Dyadic::from_ratio(num, exp))
    }
}

impl serde::Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Dyadic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
