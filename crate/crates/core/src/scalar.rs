//! Scalar abstraction shared by the schedules and the exact probability code.
//!
//! Everything that has to be reproducible bit-for-bit against rational
//! arithmetic is written once against [`Scalar`] and instantiated with
//! `f64` (simulation), `f32` (cheap sweeps) or [`BigRational`] (exact oracles).

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

pub trait Scalar: Num + Clone + PartialOrd + Debug {
    fn from_ratio(num: i64, den: i64) -> Self;

    /// For rationals: the shortest decimal that round-trips to `value`
    /// (see [`Scalar::to_rational`]). For floats: a cast.
    fn from_f64(value: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Rational value of `self`. Floats map to their shortest round-trip
    /// decimal, so `0.4` becomes exactly `2/5`; the map is injective and
    /// order-preserving.
    fn to_rational(&self) -> BigRational;

    fn from_u64(value: u64) -> Self {
        let mut out = Self::zero();
        // Binary expansion keeps this exact for every implementor.
        let mut bit = Self::one();
        let mut rest = value;
        while rest > 0 {
            if rest & 1 == 1 {
                out = out + bit.clone();
            }
            bit = bit.clone() + bit;
            rest >>= 1;
        }
        out
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(value: f64) -> Self {
        value
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> BigRational {
        decimal_rational(&format!("{self:e}"))
    }

    fn from_u64(value: u64) -> Self {
        value as f64
    }
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn from_f64(value: f64) -> Self {
        value as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn to_rational(&self) -> BigRational {
        decimal_rational(&format!("{self:e}"))
    }

    fn from_u64(value: u64) -> Self {
        value as f32
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(value: f64) -> Self {
        value.to_rational()
    }

    fn to_f64(&self) -> f64 {
        self.to_f64_lossy()
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }

    fn from_u64(value: u64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }
}

/// Parses scientific notation as printed by `{:e}` (`-1.25e-3`).
fn decimal_rational(text: &str) -> BigRational {
    let (mantissa, exponent) = text.split_once('e').expect("finite float");
    let exponent: i64 = exponent.parse().expect("integer exponent");
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{whole}{frac}").parse().expect("decimal digits");
    let scale = exponent - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    value
}

trait LossyF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyF64 for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        // Scale so both parts fit in f64 before dividing.
        let (num, den) = (self.numer(), self.denom());
        let shift = (num.bits().max(den.bits()) as i64 - 1000).max(0) as usize;
        let n = (num >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (den >> shift).to_f64().unwrap_or(f64::NAN);
        if d == 0.0 {
            // Denominator collapsed: the value is astronomically large.
            return if num.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        n / d
    }
}

/// Exact ceiling of a rational, saturating at `u64::MAX`.
pub fn ceil_rational(value: &BigRational) -> u64 {
    let ceil = value.numer().div_ceil(value.denom());
    ceil.to_u64().unwrap_or(if ceil.is_negative() { 0 } else { u64::MAX })
}

/// `base^exp` by repeated squaring.
pub fn powu<T: Scalar>(base: &T, exp: u32) -> T {
    num_traits::pow(base.clone(), exp as usize)
}

/// `a ≥ b` evaluated without rounding for any implementor.
pub fn exact_ge<T: Scalar>(a: &T, b: &T) -> bool {
    a.to_rational() >= b.to_rational()
}

pub fn is_positive<T: Scalar>(v: &T) -> bool {
    *v > T::zero()
}

pub fn one_half<T: Scalar>() -> T {
    T::from_ratio(1, 2)
}
