//! Minimal double-double arithmetic (about 106 bits of mantissa).
//!
//! Only the handful of operations needed by the Bessel series and the
//! phase reduction are provided.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> DoubleDouble {
    let p = a * b;
    let err = a.mul_add(b, -p);
    DoubleDouble { hi: p, lo: err }
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let p = two_prod(self.hi, b);
        let lo = p.lo + self.lo * b;
        let (hi, lo) = quick_two_sum(p.hi, lo);
        Self { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - two_prod(q1, b);
        let q2 = r.hi / b;
        let r = r - two_prod(q2, b);
        let q3 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }

    /// Addition without the second error-free sum. The error is bounded by
    /// a small multiple of `eps^2 (|a| + |b|)`, which is all a Horner step
    /// with bounded cancellation needs.
    #[inline]
    pub fn add_sloppy(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + b.lo);
        Self { hi, lo }
    }

    /// Natural logarithm of a positive finite double, to double-double accuracy.
    pub fn ln_f64(x: f64) -> Self {
        debug_assert!(x > 0.0 && x.is_finite());
        // x = m * 2^e with m in [1, 2), then m = c (m / c) with c = 1 + j/64
        let (m, e) = frexp(x);
        let (m, e) = (2.0 * m, e - 1);
        let j = ((m - 1.0) * LN_TABLE_STEPS as f64) as usize;
        let c = 1.0 + j as f64 / LN_TABLE_STEPS as f64;
        LN_2.mul_f64(e as f64) + ln_table()[j] + ln_near_one(m, c)
    }
}

const LN_TABLE_STEPS: usize = 64;

fn ln_table() -> &'static [DoubleDouble; LN_TABLE_STEPS] {
    static TABLE: OnceLock<[DoubleDouble; LN_TABLE_STEPS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [DoubleDouble::ZERO; LN_TABLE_STEPS];
        for (j, entry) in t.iter_mut().enumerate() {
            let c = 1.0 + j as f64 / LN_TABLE_STEPS as f64;
            // pivot at 1 or 2, whichever is closer, keeps the atanh argument below 0.18
            *entry = if c < std::f64::consts::SQRT_2 {
                ln_near_one(c, 1.0)
            } else {
                ln_near_one(c, 2.0) + LN_2
            };
        }
        t
    })
}

/// `ln(m / c) = 2 atanh((m - c) / (m + c))` for `m`, `c` within a factor of
/// two of each other, so that `m - c` is exact.
fn ln_near_one(m: f64, c: f64) -> DoubleDouble {
    let num = DoubleDouble::from_f64(m - c);
    let (dh, dl) = two_sum(m, c);
    let s = num / DoubleDouble::new(dh, dl);
    let s2 = s * s;
    let mut power = s;
    let mut sum = s;
    let mut k = 1.0;
    while power.hi.abs() > 1e-34 * sum.hi.abs() {
        power = power * s2;
        k += 2.0;
        sum = sum + power.div_f64(k);
    }
    sum.mul_f64(2.0)
}

/// Splits a positive normal or subnormal double into mantissa in [0.5, 1) and exponent.
fn frexp(x: f64) -> (f64, i32) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        let (m, e) = frexp(x * 2f64.powi(54));
        return (m, e - 54);
    }
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, exp - 1022)
}

pub(crate) const LN_2: DoubleDouble = DoubleDouble::new(std::f64::consts::LN_2, 2.3190468138462996e-17);
pub(crate) const EULER_GAMMA: DoubleDouble =
    DoubleDouble::new(0.5772156649015329, -4.942915152430645e-18);
pub(crate) const TWO_OVER_PI: DoubleDouble =
    DoubleDouble::new(std::f64::consts::FRAC_2_PI, -3.935735335036497e-17);
pub(crate) const ONE_OVER_PI: DoubleDouble =
    DoubleDouble::new(std::f64::consts::FRAC_1_PI, -1.9678676675182486e-17);
pub(crate) const FRAC_PI_4: DoubleDouble =
    DoubleDouble::new(std::f64::consts::FRAC_PI_4, 3.061616997868383e-17);
pub(crate) const FRAC_3PI_4: DoubleDouble =
    DoubleDouble::new(2.356194490192345, 9.184850993605148e-17);
/// pi/2 as an unevaluated sum of three doubles.
pub(crate) const FRAC_PI_2_PARTS: [f64; 3] =
    [std::f64::consts::FRAC_PI_2, 6.123233995736766e-17, -1.4973849048591698e-33];

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let p = two_prod(self.hi, b.hi);
        let lo = p.lo + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p.hi, lo);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}
