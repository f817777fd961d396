//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar accepted by the library (`f32`, `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + Sum
    + FromStr
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count.
    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon as `f64`, for tolerance arithmetic.
    #[inline]
    fn eps_f() -> f64 {
        Self::epsilon().to_f()
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + LowerExp
        + Default
        + Send
        + Sync
        + Sum
        + FromStr
        + Serialize
        + DeserializeOwned
        + 'static
{
}

/// Shortest decimal that parses back to `x`: positional for moderate
/// magnitudes, scientific otherwise.
pub fn format_shortest<T: Real>(x: T) -> String {
    let a = x.abs();
    if a == T::zero() || (a >= T::lit(1e-4) && a < T::lit(1e15)) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Parses a float written by [`format_shortest`] (or any decimal form).
pub fn parse_real<T: Real>(s: &str) -> Option<T> {
    s.trim().parse().ok()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Compensated<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.add(other.sum);
        self.add(other.carry);
        self
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.carry
    }

    /// Multiplies both parts by `s`.
    pub fn scale(&mut self, s: T) {
        self.sum = self.sum * s;
        self.carry = self.carry * s;
    }
}

impl<T: Real> FromIterator<T> for Compensated<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn sum_compensated<T: Real, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<Compensated<T>>().value()
}

/// A positive quantity held as `mantissa * exp(ln_scale)` so that factorially
/// large partial sums survive without overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled<T> {
    pub mantissa: T,
    pub ln_scale: T,
}

impl<T: Real> Scaled<T> {
    pub fn zero() -> Self {
        Self {
            mantissa: T::zero(),
            ln_scale: T::zero(),
        }
    }

    pub fn from_ln(sign: T, ln_abs: T) -> Self {
        Self {
            mantissa: sign,
            ln_scale: ln_abs,
        }
    }

    /// Adds `sign * exp(ln_abs)`.
    pub fn add_ln(&mut self, sign: T, ln_abs: T) {
        if sign == T::zero() || ln_abs == T::neg_infinity() {
            return;
        }
        if self.mantissa == T::zero() {
            self.mantissa = sign;
            self.ln_scale = ln_abs;
            return;
        }
        if ln_abs > self.ln_scale {
            self.mantissa = self.mantissa * (self.ln_scale - ln_abs).exp() + sign;
            self.ln_scale = ln_abs;
        } else {
            self.mantissa = self.mantissa + sign * (ln_abs - self.ln_scale).exp();
        }
    }

    pub fn add(&mut self, other: Self) {
        if other.mantissa == T::zero() {
            return;
        }
        let s = other.mantissa.signum();
        self.add_ln(s, other.ln_scale + other.mantissa.abs().ln());
    }

    pub fn ln_abs(&self) -> T {
        self.mantissa.abs().ln() + self.ln_scale
    }

    pub fn value(&self) -> T {
        if self.mantissa == T::zero() {
            T::zero()
        } else {
            self.mantissa * self.ln_scale.exp()
        }
    }
}
