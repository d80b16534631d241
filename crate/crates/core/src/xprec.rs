//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` of two `f64`s with `|lo| <= ulp(hi)/2`,
//! which carries roughly 106 bits (about 32 significant decimal digits). Used
//! internally wherever plain `f64` loses too many digits: quadrature rule
//! construction, moments, and the Mittag-Leffler series in its cancellation range.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
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

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    #[allow(clippy::excessive_precision)]
    pub const LN2: Self = Self {
        hi: std::f64::consts::LN_2,
        lo: 2.319046813846299558e-17,
    };
    #[allow(clippy::excessive_precision)]
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.224646799147353207e-16,
    };

    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn from_parts(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Rounds to the nearest `f64`.
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    pub fn abs(self) -> Self {
        if self.is_sign_negative() {
            -self
        } else {
            self
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Self {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn sqr(self) -> Self {
        let (p, mut e) = two_prod(self.hi, self.hi);
        e += 2.0 * self.hi * self.lo;
        e += self.lo * self.lo;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Self::ZERO;
        }
        if self.hi < 0.0 {
            return Self::new(f64::NAN, f64::NAN);
        }
        let s = self.hi.sqrt();
        let s_dd = Self::from(s);
        s_dd + (self - s_dd.sqr()) / (s_dd * 2.0)
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let mut base = self;
        let mut m = n.unsigned_abs();
        let mut acc = Self::ONE;
        while m > 0 {
            if m & 1 == 1 {
                acc *= base;
            }
            base = base.sqr();
            m >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::new(f64::INFINITY, 0.0);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        const SQUARINGS: i32 = 10;
        let k = (self.hi / Self::LN2.hi).round();
        let r = (self - Self::LN2 * k).ldexp(-SQUARINGS);
        // expm1(r) by Taylor; |r| < 3.4e-4 so a handful of terms reach 1e-34.
        let mut term = r;
        let mut sum = r;
        let mut i = 2.0;
        loop {
            term = term * r / i;
            sum += term;
            if term.hi.abs() < 1e-36 * sum.hi.abs().max(1e-300) || i > 30.0 {
                break;
            }
            i += 1.0;
        }
        for _ in 0..SQUARINGS {
            sum = sum * 2.0 + sum.sqr();
        }
        (sum + 1.0).ldexp(k as i32)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::new(f64::NAN, f64::NAN);
        }
        if !self.hi.is_finite() {
            return self;
        }
        let mut y = Self::from(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - 1.0;
        }
        y
    }

    /// `self^y` for `self > 0`.
    pub fn powf(self, y: Self) -> Self {
        if self.hi == 0.0 {
            return if y.hi > 0.0 { Self::ZERO } else { Self::new(f64::INFINITY, 0.0) };
        }
        (y * self.ln()).exp()
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl From<i64> for DoubleDouble {
    fn from(x: i64) -> Self {
        let hi = x as f64;
        let lo = (x - hi as i64) as f64;
        Self::from_parts(hi, lo)
    }
}

impl From<usize> for DoubleDouble {
    fn from(x: usize) -> Self {
        Self::from(x as i64)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, mut e) = two_prod(self.hi, rhs.hi);
        e += self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * q2;
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + q3
    }
}

macro_rules! mixed_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for DoubleDouble {
            type Output = Self;
            fn $m(self, rhs: f64) -> Self {
                $tr::$m(self, DoubleDouble::from(rhs))
            }
        }
        impl $tr<DoubleDouble> for f64 {
            type Output = DoubleDouble;
            fn $m(self, rhs: DoubleDouble) -> DoubleDouble {
                $tr::$m(DoubleDouble::from(self), rhs)
            }
        }
    )*};
}
mixed_ops!(Add add, Sub sub, Mul mul, Div div);

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl AddAssign<f64> for DoubleDouble {
    fn add_assign(&mut self, rhs: f64) {
        *self = *self + rhs;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for DoubleDouble {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(s: &str) -> DoubleDouble {
        // Parses a decimal literal to double-double; enough for test constants.
        let (mantissa, exp) = match s.split_once('e') {
            Some((m, e)) => (m, e.parse::<i32>().unwrap()),
            None => (s, 0),
        };
        let neg = mantissa.starts_with('-');
        let digits = mantissa.trim_start_matches('-');
        let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
        let mut acc = DoubleDouble::ZERO;
        for c in int.chars().chain(frac.chars()) {
            acc = acc * 10.0 + f64::from(c.to_digit(10).unwrap());
        }
        let scale = exp - frac.len() as i32;
        acc = if scale >= 0 {
            acc * DoubleDouble::from(10.0).powi(scale)
        } else {
            acc / DoubleDouble::from(10.0).powi(-scale)
        };
        if neg {
            -acc
        } else {
            acc
        }
    }

    fn rel(a: DoubleDouble, b: DoubleDouble) -> f64 {
        ((a - b) / b).to_f64().abs()
    }

    #[test]
    fn basic_arithmetic_carries_extra_digits() {
        let third = DoubleDouble::ONE / 3.0;
        assert!(rel(third * 3.0, DoubleDouble::ONE) < 1e-31);
        let x = DoubleDouble::from(1.0) + 1e-20;
        assert_eq!((x - 1.0).to_f64(), 1e-20);
    }

    #[test]
    fn sqrt_two() {
        let expected = dd("1.4142135623730950488016887242096980786");
        assert!(rel(DoubleDouble::from(2.0).sqrt(), expected) < 1e-31);
    }

    #[test]
    fn exp_and_ln_match_reference_digits() {
        // Reference digits from a 50-digit multiprecision evaluation.
        let e = dd("2.7182818284590452353602874713526624978");
        assert!(rel(DoubleDouble::ONE.exp(), e) < 1e-31);
        let ln10 = dd("2.3025850929940456840179914546843642076");
        assert!(rel(DoubleDouble::from(10.0).ln(), ln10) < 1e-31);
        let e_m50 = dd("1.9287498479639177830173428165270125e-22");
        assert!(rel(DoubleDouble::from(-50.0).exp(), e_m50) < 1e-30);
        let two_pow = dd("3.4822022531844965");
        assert!(rel(DoubleDouble::from(2.0).powf(DoubleDouble::from(1.8)), two_pow) < 1e-16);
    }

    #[test]
    fn ln_exp_round_trip() {
        for &x in &[1e-8, 0.3, 1.0, 2.5, 17.0, 1e5] {
            let v = DoubleDouble::from(x);
            assert!(rel(v.ln().exp(), v) < 1e-30, "x = {x}");
        }
    }

    #[test]
    fn ordering_uses_low_part() {
        let a = DoubleDouble::from_parts(1.0, 1e-20);
        let b = DoubleDouble::from(1.0);
        assert!(a > b);
        assert!(-a < -b);
    }
}
