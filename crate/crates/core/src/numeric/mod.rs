//! Scalar abstraction shared by every kernel in the crate.
//!
//! Everything numeric is written once against [`Real`] and instantiated at
//! `f64` for speed or at [`Dd`] when the quantity of interest sits below the
//! double-precision noise floor of the matrix (σ_min of clustered confluent
//! Vandermonde matrices reaches 1e-19 relative to σ_max in ordinary sweeps).

mod dd;

use std::fmt::Debug;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

pub use dd::Dd;
use num_complex::Complex;
use num_traits::{Num, NumAssign};

pub type C64 = Complex<f64>;

pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Num
    + NumAssign
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn atan2(self, x: Self) -> Self;
    fn is_finite(self) -> bool;
    /// Unit roundoff of the representation.
    fn epsilon() -> Self;
    fn pi() -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
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

    fn powi(self, n: i32) -> Self {
        let mut acc = Self::one();
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn epsilon() -> Self {
        f64::EPSILON / 2.0
    }
    #[inline]
    fn pi() -> Self {
        std::f64::consts::PI
    }
}

impl Real for Dd {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Dd::from_f64(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        Dd::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        Dd::abs(self)
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        Dd::sin_cos(self)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        Dd::atan2(self, x)
    }
    #[inline]
    fn is_finite(self) -> bool {
        Dd::is_finite(self)
    }
    #[inline]
    fn epsilon() -> Self {
        Dd::EPSILON
    }
    #[inline]
    fn pi() -> Self {
        Dd::PI
    }
}

/// Modulus without overflow guards; magnitudes here stay far from the limits.
#[inline]
pub fn cabs<R: Real>(z: Complex<R>) -> R {
    (z.re * z.re + z.im * z.im).sqrt()
}

#[inline]
pub fn cabs2<R: Real>(z: Complex<R>) -> R {
    z.re * z.re + z.im * z.im
}

/// `exp(i θ)`.
#[inline]
pub fn cis<R: Real>(theta: R) -> Complex<R> {
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}

/// Principal argument in (-π, π].
#[inline]
pub fn carg<R: Real>(z: Complex<R>) -> R {
    z.im.atan2(z.re)
}

/// Principal square root.
pub fn csqrt<R: Real>(z: Complex<R>) -> Complex<R> {
    let r = cabs(z);
    if r == R::zero() {
        return Complex::new(R::zero(), R::zero());
    }
    let two = R::from_f64(2.0);
    let re = ((r + z.re) / two).sqrt();
    let im = ((r - z.re) / two).sqrt();
    if z.im < R::zero() {
        Complex::new(re, -im)
    } else {
        Complex::new(re, im)
    }
}

#[inline]
pub fn cscale<R: Real>(z: Complex<R>, k: R) -> Complex<R> {
    Complex::new(z.re * k, z.im * k)
}

#[inline]
pub fn lift<R: Real>(z: C64) -> Complex<R> {
    Complex::new(R::from_f64(z.re), R::from_f64(z.im))
}

#[inline]
pub fn lower<R: Real>(z: Complex<R>) -> C64 {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

/// Euclidean norm of a complex vector.
pub fn vnorm<R: Real>(v: &[Complex<R>]) -> R {
    v.iter().fold(R::zero(), |acc, z| acc + cabs2(*z)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csqrt_branch() {
        let z = csqrt(Complex::new(-4.0, 0.0));
        assert!((z - Complex::new(0.0, 2.0)).norm() < 1e-15);
        let w = Complex::new(0.3, -1.7);
        let r = csqrt(w);
        assert!((r * r - w).norm() < 1e-15);
        assert!(r.re >= 0.0);
    }

    #[test]
    fn dd_cis_matches_f64() {
        let z: Complex<Dd> = cis(Dd::from_f64(0.7));
        assert!((lower(z) - Complex::new(0.7f64.cos(), 0.7f64.sin())).norm() < 1e-16);
        assert!((carg(z).to_f64() - 0.7).abs() < 1e-16);
    }

    #[test]
    fn powi_negative() {
        assert!((2.0f64.powi(-3) - Real::powi(2.0, -3)).abs() < 1e-16);
        assert_eq!(Real::powi(Dd::from_f64(3.0), 4).to_f64(), 81.0);
    }
}
