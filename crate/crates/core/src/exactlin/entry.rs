//! Coefficient rings used by the sparse eliminations.
//!
//! `i64` is the fast path; every operation is checked and reports overflow so the
//! caller can restart in `BigInt`. `F2` serves the mod-2 ranks.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

pub(crate) trait Entry: Clone + PartialEq + fmt::Debug + Send + Sync + Zero {
    fn is_unit(&self) -> bool;
    fn cmp_abs(&self, other: &Self) -> Ordering;
    fn bits(&self) -> u64;
    /// `self - f * x`
    fn sub_mul(&self, f: &Self, x: &Self) -> Result<Self, Overflow>;
    fn mul(&self, x: &Self) -> Result<Self, Overflow>;
    /// Truncated quotient; `b` is non-zero.
    fn quot(&self, b: &Self) -> Self;
    fn from_big(b: &BigInt) -> Result<Self, Overflow>;
    fn to_big(&self) -> BigInt;
}

impl Entry for i64 {
    #[inline]
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    #[inline]
    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.unsigned_abs().cmp(&other.unsigned_abs())
    }
    #[inline]
    fn bits(&self) -> u64 {
        64 - self.unsigned_abs().leading_zeros() as u64
    }
    #[inline]
    fn sub_mul(&self, f: &Self, x: &Self) -> Result<Self, Overflow> {
        f.checked_mul(*x).and_then(|p| self.checked_sub(p)).ok_or(Overflow)
    }
    #[inline]
    fn mul(&self, x: &Self) -> Result<Self, Overflow> {
        self.checked_mul(*x).ok_or(Overflow)
    }
    #[inline]
    fn quot(&self, b: &Self) -> Self {
        // i64::MIN / -1 cannot occur: entries never reach i64::MIN magnitude
        // without an earlier checked overflow
        self.wrapping_div(*b)
    }
    fn from_big(b: &BigInt) -> Result<Self, Overflow> {
        match b.to_i64() {
            Some(v) if v != i64::MIN => Ok(v),
            _ => Err(Overflow),
        }
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Entry for BigInt {
    fn is_unit(&self) -> bool {
        self.magnitude().is_one()
    }
    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.magnitude().cmp(other.magnitude())
    }
    fn bits(&self) -> u64 {
        self.magnitude().bits()
    }
    fn sub_mul(&self, f: &Self, x: &Self) -> Result<Self, Overflow> {
        Ok(self - f * x)
    }
    fn mul(&self, x: &Self) -> Result<Self, Overflow> {
        Ok(self * x)
    }
    fn quot(&self, b: &Self) -> Self {
        self / b
    }
    fn from_big(b: &BigInt) -> Result<Self, Overflow> {
        Ok(b.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// The field with two elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct F2(pub bool);

impl std::ops::Add for F2 {
    type Output = F2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, other: F2) -> F2 {
        F2(self.0 ^ other.0)
    }
}

impl Zero for F2 {
    fn zero() -> Self {
        F2(false)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
}

impl Entry for F2 {
    fn is_unit(&self) -> bool {
        self.0
    }
    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
    fn bits(&self) -> u64 {
        self.0 as u64
    }
    fn sub_mul(&self, f: &Self, x: &Self) -> Result<Self, Overflow> {
        Ok(F2(self.0 ^ (f.0 & x.0)))
    }
    fn mul(&self, x: &Self) -> Result<Self, Overflow> {
        Ok(F2(self.0 & x.0))
    }
    fn quot(&self, _b: &Self) -> Self {
        *self
    }
    fn from_big(b: &BigInt) -> Result<Self, Overflow> {
        Ok(F2(b.is_odd()))
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(self.0 as u8)
    }
}
