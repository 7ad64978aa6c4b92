//! Scalar abstraction shared by the weighted stages (cluster weights, time
//! costs, K-means means and the assignment solver).

use std::fmt::Debug;

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// An ordered field element. Implemented for `f32`, `f64` and `Rational64`.
pub trait Scalar:
    Num + Copy + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Relative slack used when two sums of the same terms are compared after
    /// being accumulated in different orders. Zero for exact types.
    fn tolerance() -> Self;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Conversion for configuration values (psi, beta, service times).
    fn from_real(x: f64) -> Self {
        Self::from_f64(x).expect("finite configuration value")
    }

    fn to_real(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn abs_diff(self, other: Self) -> Self {
        if self >= other {
            self - other
        } else {
            other - self
        }
    }

    fn approx_eq(self, other: Self) -> bool {
        let mut scale = Self::one();
        for v in [self, other] {
            let a = if v < Self::zero() { Self::zero() - v } else { v };
            if a > scale {
                scale = a;
            }
        }
        self.abs_diff(other) <= Self::tolerance() * scale
    }

    /// `self < other` by more than the tolerance.
    fn definitely_lt(self, other: Self) -> bool {
        self < other && !self.approx_eq(other)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-4
    }
}

impl Scalar for Rational64 {
    fn tolerance() -> Self {
        Rational64::from_integer(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_comparison_absorbs_summation_order() {
        let a: f64 = 0.1 + 0.2 + 0.3;
        let b: f64 = 0.3 + 0.2 + 0.1;
        assert!(a.approx_eq(b));
        assert!(!a.definitely_lt(b) && !b.definitely_lt(a));
        assert!(1.0f64.definitely_lt(1.001));
    }

    #[test]
    fn rationals_compare_exactly() {
        let third = Rational64::new(1, 3);
        assert!((third + third + third).approx_eq(Rational64::from_count(1)));
        assert!(!third.approx_eq(Rational64::new(333_333, 1_000_000)));
        assert_eq!(Rational64::from_real(0.5), Rational64::new(1, 2));
    }
}
