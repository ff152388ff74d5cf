//! Double-double floating point.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, which
//! gives roughly 106 bits of significand. The algorithms are the classical
//! error-free transformations (Dekker, Knuth) as used in the QD library.
//! Only the operations needed by the Vandermonde kernels are provided.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{Num, One, Zero};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: 3.141_592_653_589_793_1,
        lo: 1.224_646_799_147_353_2e-16,
    };
    pub const TAU: Dd = Dd {
        hi: 6.283_185_307_179_586_2,
        lo: 2.449_293_598_294_706_4e-16,
    };
    pub const FRAC_PI_2: Dd = Dd {
        hi: 1.570_796_326_794_896_6,
        lo: 6.123_233_995_736_766e-17,
    };
    /// 2^-104.
    pub const EPSILON: Dd = Dd {
        hi: 4.930_380_657_631_324e-32,
        lo: 0.0,
    };

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn mul_f64(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        if self.hi < 0.0 {
            return Dd::from_f64(f64::NAN);
        }
        let q = self.hi.sqrt();
        let (p, e) = two_prod(q, q);
        let r = self - Dd { hi: p, lo: e };
        let (hi, lo) = quick_two_sum(q, r.hi / (2.0 * q));
        Dd { hi, lo }
    }

    /// Nearest integer, ties away from zero.
    pub fn round(self) -> Self {
        let hi = self.hi.round();
        if hi == self.hi {
            let lo = self.lo.round();
            let (hi, lo) = quick_two_sum(hi, lo);
            Dd { hi, lo }
        } else if (hi - self.hi).abs() == 0.5 && self.lo != 0.0 {
            // the low word decides which way a half-way high word goes
            if (hi > self.hi) == (self.lo > 0.0) {
                Dd::from_f64(hi)
            } else {
                Dd::from_f64(hi - (hi - self.hi).signum())
            }
        } else {
            Dd::from_f64(hi)
        }
    }

    pub fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            let f = Dd::from_f64(self.hi.floor());
            if f.hi == self.hi {
                let (hi, lo) = quick_two_sum(f.hi, self.lo.floor());
                Dd { hi, lo }
            } else {
                f
            }
        } else {
            -(-self).trunc()
        }
    }

    /// Simultaneous sine and cosine.
    pub fn sin_cos(self) -> (Dd, Dd) {
        if self.hi == 0.0 {
            return (Dd::ZERO, Dd::ONE);
        }
        let n = (self / Dd::FRAC_PI_2).round();
        let r = self - n * Dd::FRAC_PI_2;
        let (s, c) = sin_cos_taylor(r);
        match (n.hi.rem_euclid(4.0)) as i64 {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sin(self) -> Dd {
        self.sin_cos().0
    }

    pub fn cos(self) -> Dd {
        self.sin_cos().1
    }

    /// Four-quadrant arctangent, refined from the f64 estimate by one Newton step.
    pub fn atan2(self, x: Dd) -> Dd {
        if self.hi == 0.0 && x.hi == 0.0 {
            return Dd::ZERO;
        }
        let t0 = Dd::from_f64(self.to_f64().atan2(x.to_f64()));
        let (s, c) = t0.sin_cos();
        // rotate (x, y) by -t0; the residual angle is tiny
        let xr = x * c + self * s;
        let yr = self * c - x * s;
        t0 + yr / xr
    }

    pub fn powi(self, mut n: u32) -> Dd {
        let mut base = self;
        let mut acc = Dd::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base *= base;
            n >>= 1;
        }
        acc
    }
}

fn sin_cos_taylor(r: Dd) -> (Dd, Dd) {
    let r2 = r * r;
    let thresh = 1e-34;
    let mut sin = r;
    let mut term = r;
    let mut k = 1.0;
    loop {
        term = -term * r2 / Dd::from_f64((k + 1.0) * (k + 2.0));
        sin += term;
        k += 2.0;
        if term.hi.abs() < thresh || k > 60.0 {
            break;
        }
    }
    let mut cos = Dd::ONE;
    let mut term = Dd::ONE;
    let mut k = 0.0;
    loop {
        term = -term * r2 / Dd::from_f64((k + 1.0) * (k + 2.0));
        cos += term;
        k += 2.0;
        if term.hi.abs() < thresh || k > 60.0 {
            break;
        }
    }
    (sin, cos)
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Dd::from_f64(q1);
        }
        let r = self - b * Dd::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + Dd::from_f64(q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, b: Dd) -> Dd {
        self - (self / b).trunc() * b
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Dd {
            #[inline]
            fn $m(&mut self, b: Dd) {
                *self = *self $op b;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);
assign_op!(RemAssign, rem_assign, %);

impl Zero for Dd {
    fn zero() -> Self {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dd::from_f64)
    }
}

impl std::iter::Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}
