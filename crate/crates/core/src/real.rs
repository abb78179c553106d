//! Extended-precision real scalar backed by MPFR.
//!
//! Binary operations produce a result at the larger of the operand
//! precisions; operations with a primitive scalar keep the precision of the
//! `Real` operand.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::ops::Pow;
use rug::Float;

#[derive(Clone, Debug)]
pub struct Real(Float);

impl Real {
    pub fn from_f64(prec: u32, v: f64) -> Self {
        Real(Float::with_val(prec, v))
    }

    pub fn from_int(prec: u32, v: i64) -> Self {
        Real(Float::with_val(prec, v))
    }

    pub fn zero(prec: u32) -> Self {
        Self::from_int(prec, 0)
    }

    pub fn one(prec: u32) -> Self {
        Self::from_int(prec, 1)
    }

    /// Parses a decimal literal such as `"1.7"` or `"-5e-3"`, rounding once.
    pub fn parse(prec: u32, s: &str) -> Option<Self> {
        let p = Float::parse(s.trim()).ok()?;
        let f = Float::with_val(prec, p);
        f.is_finite().then_some(Real(f))
    }

    pub fn pi(prec: u32) -> Self {
        Real(Float::with_val(prec, rug::float::Constant::Pi))
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Copy rounded (or widened) to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        Real(Float::with_val(prec, &self.0))
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_sign_positive() && !self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        Real(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.clone().sqrt())
    }

    pub fn square(&self) -> Self {
        Real(self.0.clone().square())
    }

    pub fn ln(&self) -> Self {
        Real(self.0.clone().ln())
    }

    pub fn log2(&self) -> Self {
        Real(self.0.clone().log2())
    }

    pub fn exp(&self) -> Self {
        Real(self.0.clone().exp())
    }

    pub fn cos(&self) -> Self {
        Real(self.0.clone().cos())
    }

    pub fn gamma(&self) -> Self {
        Real(self.0.clone().gamma())
    }

    pub fn ln_gamma(&self) -> Self {
        Real(self.0.clone().ln_gamma())
    }

    pub fn recip(&self) -> Self {
        Real(self.0.clone().recip())
    }

    pub fn powi(&self, k: i32) -> Self {
        Real(self.0.clone().pow(k))
    }

    pub fn pow(&self, e: &Real) -> Self {
        let p = self.prec().max(e.prec());
        Real(Float::with_val(p, (&self.0).pow(&e.0)))
    }

    /// 2^k at the given precision (exact).
    pub fn exp2i(prec: u32, k: i32) -> Self {
        Real(Float::with_val(prec, 1) << k)
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Decimal rendering with `digits` significant digits.
    ///
    /// Positional notation is used for decimal exponents in `[-4, 16)`,
    /// scientific otherwise. Output depends only on the value, not on the
    /// working precision beyond the digits requested.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.0.is_nan() {
            return "nan".into();
        }
        if self.0.is_infinite() {
            return if self.0.is_sign_negative() { "-inf".into() } else { "inf".into() };
        }
        if self.0.is_zero() {
            return "0".into();
        }
        let (neg, mant, exp) = self.0.to_sign_string_exp(10, Some(digits));
        // value = 0.mant × 10^exp
        let exp = exp.unwrap_or(0);
        let mant = mant.trim_end_matches('0');
        let mant = if mant.is_empty() { "0" } else { mant };
        let sign = if neg { "-" } else { "" };
        let sci = exp - 1;
        if (-4..16).contains(&sci) {
            let s = if exp <= 0 {
                format!("0.{}{}", "0".repeat((-exp) as usize), mant)
            } else if (exp as usize) >= mant.len() {
                format!("{}{}", mant, "0".repeat(exp as usize - mant.len()))
            } else {
                let (i, f) = mant.split_at(exp as usize);
                format!("{i}.{f}")
            };
            format!("{sign}{s}")
        } else {
            let (i, f) = mant.split_at(1);
            if f.is_empty() {
                format!("{sign}{i}e{sci}")
            } else {
                format!("{sign}{i}.{f}e{sci}")
            }
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(40))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl PartialEq<&Real> for Real {
    fn eq(&self, other: &&Real) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd<&Real> for Real {
    fn partial_cmp(&self, other: &&Real) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0.clone())
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                let p = self.prec().max(rhs.prec());
                Real(Float::with_val(p, (&self.0).$m(&rhs.0)))
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                (&self).$m(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self.$m(&rhs)
            }
        }
        impl $atr<&Real> for Real {
            fn $am(&mut self, rhs: &Real) {
                *self = (&*self).$m(rhs);
            }
        }
        impl $atr<Real> for Real {
            fn $am(&mut self, rhs: Real) {
                *self = (&*self).$m(&rhs);
            }
        }
        real_binop!(@prim $tr, $m, $atr, $am, f64);
        real_binop!(@prim $tr, $m, $atr, $am, i64);
    };
    (@prim $tr:ident, $m:ident, $atr:ident, $am:ident, $t:ty) => {
        impl $tr<$t> for &Real {
            type Output = Real;
            fn $m(self, rhs: $t) -> Real {
                let r = Real::prim(self.prec(), rhs);
                self.$m(&r)
            }
        }
        impl $tr<$t> for Real {
            type Output = Real;
            fn $m(self, rhs: $t) -> Real {
                (&self).$m(rhs)
            }
        }
        impl $tr<&Real> for $t {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                Real::prim(rhs.prec(), self).$m(rhs)
            }
        }
        impl $tr<Real> for $t {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self.$m(&rhs)
            }
        }
        impl $atr<$t> for Real {
            fn $am(&mut self, rhs: $t) {
                *self = (&*self).$m(rhs);
            }
        }
    };
}

trait Prim {
    fn into_float(self, prec: u32) -> Float;
}

macro_rules! prim_impl {
    ($($t:ty),*) => {$(
        impl Prim for $t {
            fn into_float(self, prec: u32) -> Float {
                Float::with_val(prec, self)
            }
        }
    )*};
}
prim_impl!(f64, i64);

impl Real {
    fn prim<T: Prim>(prec: u32, v: T) -> Real {
        Real(v.into_float(prec))
    }
}

real_binop!(Add, add, AddAssign, add_assign);
real_binop!(Sub, sub, SubAssign, sub_assign);
real_binop!(Mul, mul, MulAssign, mul_assign);
real_binop!(Div, div, DivAssign, div_assign);

/// Sum of a slice at the precision of `like`.
pub fn sum<'a, I: IntoIterator<Item = &'a Real>>(like: &Real, it: I) -> Real {
    it.into_iter().fold(Real::zero(like.prec()), |acc, x| acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_keeps_widest_precision() {
        let a = Real::from_f64(100, 1.5);
        let b = Real::from_f64(200, 2.0);
        let c = &a * &b;
        assert_eq!(c.prec(), 200);
        assert_eq!(c, 3.0);
        assert_eq!((2 * &a).prec(), 100);
        assert_eq!(1.0 - &a, -0.5);
    }

    #[test]
    fn parse_is_exact_to_precision() {
        let x = Real::parse(256, "0.1").unwrap();
        let tenth = Real::one(256) / 10;
        assert_eq!(x, tenth);
        assert!(Real::parse(64, "abc").is_none());
    }

    #[test]
    fn decimal_rendering() {
        let x = Real::from_f64(128, 0.5);
        assert_eq!(x.to_decimal(40), "0.5");
        assert_eq!(Real::from_int(64, 12).to_decimal(10), "12");
        assert_eq!(Real::from_f64(64, -1.25e-7).to_decimal(5), "-1.25e-7");
        assert_eq!(Real::from_f64(64, 1e20).to_decimal(5), "1e20");
        assert_eq!(Real::zero(64).to_decimal(40), "0");
        let e = Real::one(256).exp();
        assert_eq!(e.to_decimal(12), "2.71828182846");
    }
}
