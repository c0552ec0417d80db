//! Scalar abstraction shared by every numerical module.
//!
//! Field dynamics need an FFT and are therefore limited to [`SpectralReal`]
//! (`f32`, `f64`). The two-state-vector algebra only needs field operations
//! and elementary functions, so it also runs on the 256-bit [`f256`], which
//! is what makes nearly orthogonal pre/post pairs tractable.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

pub use f256::f256;
use num_traits::Num;

pub trait Real:
    Num
    + Copy
    + Debug
    + Display
    + PartialOrd
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    fn lit(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn fabs(self) -> Self;
    fn is_finite(self) -> bool;
    /// Machine epsilon of the representation.
    fn epsilon() -> Self;
    fn pi() -> Self;

    /// Smallest `|<post|pre>|` for which a weak value is still meaningful at
    /// this precision.
    fn overlap_floor() -> Self;

    fn count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn from_int(n: i64) -> Self {
        Self::lit(n as f64)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }

    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

/// Scalars with an FFT implementation.
pub trait SpectralReal: Real + rustfft::FftNum {}

macro_rules! impl_native {
    ($t:ty, $floor:expr) => {
        impl Real for $t {
            fn lit(x: f64) -> Self {
                x as $t
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            fn fabs(self) -> Self {
                <$t>::abs(self)
            }
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
            fn epsilon() -> Self {
                <$t>::EPSILON
            }
            fn pi() -> Self {
                std::f64::consts::PI as $t
            }
            fn overlap_floor() -> Self {
                $floor
            }
            fn powi(self, n: i32) -> Self {
                <$t>::powi(self, n)
            }
        }

        impl SpectralReal for $t {}
    };
}

impl_native!(f64, 1e-14);
impl_native!(f32, 1e-6);

impl Real for f256 {
    fn lit(x: f64) -> Self {
        f256::from(x)
    }

    fn to_f64(self) -> f64 {
        if self.eq_zero() {
            return 0.0;
        }
        if !f256::is_finite(self) {
            return if self.is_nan() {
                f64::NAN
            } else if self.is_sign_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
        }
        let (sign, exp, (hi, lo)) = self.as_sign_exp_signif();
        // value = (-1)^sign * (hi * 2^128 + lo) * 2^exp
        let mut mantissa = hi as f64 * 2f64.powi(128) + lo as f64;
        let mut e = exp;
        while e > 0 {
            let step = e.min(512);
            mantissa *= 2f64.powi(step);
            e -= step;
        }
        while e < 0 {
            let step = (-e).min(512);
            mantissa /= 2f64.powi(step);
            e += step;
        }
        if sign == 1 {
            -mantissa
        } else {
            mantissa
        }
    }

    fn sqrt(self) -> Self {
        f256::sqrt(self)
    }
    fn exp(self) -> Self {
        f256::exp(&self)
    }
    fn ln(self) -> Self {
        f256::ln(&self)
    }
    fn sin(self) -> Self {
        f256::sin(&self)
    }
    fn cos(self) -> Self {
        f256::cos(&self)
    }
    fn fabs(self) -> Self {
        f256::abs(&self)
    }
    fn is_finite(self) -> bool {
        f256::is_finite(self)
    }
    fn epsilon() -> Self {
        f256::EPSILON
    }
    fn pi() -> Self {
        ::f256::consts::PI
    }
    fn overlap_floor() -> Self {
        f256::from(1e-60)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f256_round_trips_through_f64() {
        for x in [1.0, -3.5, 1e-300, 6.02e23, 0.1, -2.0f64.powi(-1070)] {
            assert_eq!(<f256 as Real>::lit(x).to_f64(), x);
        }
    }

    #[test]
    fn f256_resolves_what_f64_cannot() {
        let one = f256::ONE;
        let tiny = <f256 as Real>::lit(1e-40);
        let diff = (one + tiny) - one;
        assert!((diff.to_f64() - 1e-40).abs() < 1e-55);
    }

    #[test]
    fn generic_powi_matches_native() {
        let x = <f256 as Real>::lit(1.7);
        assert!((Real::powi(x, 13).to_f64() - 1.7f64.powi(13)).abs() < 1e-9);
        assert!((Real::powi(x, -3).to_f64() - 1.7f64.powi(-3)).abs() < 1e-15);
    }
}
