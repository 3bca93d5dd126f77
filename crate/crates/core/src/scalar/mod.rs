//! Scalar profiles.
//!
//! Every kernel in this crate is written once against [`ScalarProfile`] and
//! then run under whichever arithmetic is needed: binary64, exact rationals,
//! bit-true fixed point, symbolic polynomials, an op-counting wrapper, or a
//! graph tracer. A profile is a strategy object; its values are plain data.

mod counting;
mod fixed;

pub use counting::{counted, Counted, OpCountLedger};
pub use fixed::{Fixed, FixedPointFormat, FixedProfile, FormatError, OverflowMode, Quantized};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// The arithmetic contract the kernels are generic over.
///
/// `square` is a separate operation from `mul` on purpose: the whole point of
/// the squaring kernel is that a dedicated squarer is cheaper than a general
/// multiplier, so the two must never be conflated by a profile.
pub trait ScalarProfile {
    type Value: Clone + std::fmt::Debug;

    fn zero(&self) -> Self::Value;
    fn one(&self) -> Self::Value;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn square(&self, a: &Self::Value) -> Self::Value;
    /// Multiplication by two (a left shift in hardware).
    fn double(&self, a: &Self::Value) -> Self::Value;
    /// Division by two (a right shift in hardware).
    fn halve(&self, a: &Self::Value) -> Self::Value;
}

/// IEEE-754 binary64.
#[derive(Debug, Clone, Copy, Default)]
pub struct F64Profile;

impl ScalarProfile for F64Profile {
    type Value = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn sub(&self, a: &f64, b: &f64) -> f64 {
        a - b
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn square(&self, a: &f64) -> f64 {
        a * a
    }
    fn double(&self, a: &f64) -> f64 {
        a + a
    }
    fn halve(&self, a: &f64) -> f64 {
        a * 0.5
    }
}

/// Exact arbitrary-precision rationals.
#[derive(Debug, Clone, Copy, Default)]
pub struct RationalProfile;

impl RationalProfile {
    pub fn from_int(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
}

impl ScalarProfile for RationalProfile {
    type Value = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn square(&self, a: &BigRational) -> BigRational {
        a * a
    }
    fn double(&self, a: &BigRational) -> BigRational {
        a + a
    }
    fn halve(&self, a: &BigRational) -> BigRational {
        a / BigRational::from_integer(BigInt::from(2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_square_is_mul() {
        let p = RationalProfile;
        let a = rat(-7, 3);
        assert_eq!(p.square(&a), p.mul(&a, &a));
        assert_eq!(p.halve(&p.double(&a)), a);
    }

    #[test]
    fn f64_double_is_add() {
        let p = F64Profile;
        assert_eq!(p.double(&0.3), p.add(&0.3, &0.3));
        assert_eq!(p.halve(&p.double(&0.3)), 0.3);
    }

    proptest! {
        #[test]
        fn rational_ops_are_exact_and_repeatable(
            an in -1000i64..1000, ad in 1i64..50, bn in -1000i64..1000, bd in 1i64..50
        ) {
            let p = RationalProfile;
            let (a, b) = (rat(an, ad), rat(bn, bd));
            let once = p.sub(&p.square(&p.add(&a, &b)), &p.mul(&a, &b));
            let twice = p.sub(&p.square(&p.add(&a, &b)), &p.mul(&a, &b));
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(p.square(&a), p.mul(&a, &a));
            prop_assert_eq!(p.double(&a), p.add(&a, &a));
            prop_assert_eq!(p.halve(&p.double(&b)), b);
        }
    }
}
