//! Scalar fields the Lax builders are generic over.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Gaussian rational `a + b i` with arbitrary-precision parts.
pub type GaussRational = Complex<BigRational>;

/// Complex field used by both the exact and the floating-point backend.
pub trait LaxScalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_ratio(num: i64, den: i64) -> Self;
    fn imag_unit() -> Self;
    /// Zero test used for singular-point detection.
    fn near_zero(&self) -> bool;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }
}

impl LaxScalar for Complex64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn imag_unit() -> Self {
        Complex64::i()
    }

    fn near_zero(&self) -> bool {
        self.norm() < 1e-14
    }
}

impl LaxScalar for GaussRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(BigRational::new(BigInt::from(num), BigInt::from(den)), BigRational::zero())
    }

    fn imag_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn near_zero(&self) -> bool {
        self.is_zero()
    }
}

pub fn gauss(re: BigRational, im: BigRational) -> GaussRational {
    Complex::new(re, im)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn gauss_to_c64(z: &GaussRational) -> Complex64 {
    use num_traits::ToPrimitive;
    Complex64::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}
