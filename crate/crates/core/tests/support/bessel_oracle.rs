//! Slow reference values for J0, J1, J2, Y0, Y1 from the ascending series in
//! binary fixed point over big integers. Every step is an exact integer
//! operation followed by truncation to a fixed number of fraction bits. The
//! number of fraction bits grows with `x` so that truncation errors in the
//! harmonic numbers stay negligible after multiplication by the largest series
//! term (about e^x).

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};


// 80 digits of the Euler-Mascheroni constant.
const EULER_DIGITS: &str =
    "57721566490153286060651209008240243104215933593992359880576723488486772677766467";

#[derive(Debug, Clone, Copy)]
pub struct OracleValues {
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
    pub y0: f64,
    pub y1: f64,
}

fn one(p: u32) -> BigInt {
    BigInt::one() << p
}

fn mul(a: &BigInt, b: &BigInt, p: u32) -> BigInt {
    (a * b) >> p
}

fn shift(a: BigInt, by: i64) -> BigInt {
    if by >= 0 {
        a << (by as u64)
    } else {
        a >> ((-by) as u64)
    }
}

/// Exact fixed-point image of a finite positive double.
fn from_f64(x: f64, p: u32) -> BigInt {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    shift(BigInt::from(mant), e + p as i64)
}

fn to_f64(a: &BigInt, p: u32) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let bits = a.bits() as i64;
    let drop = (bits - 64).max(0);
    let top = (a.abs() >> (drop as u64)).to_u64().unwrap() as f64;
    let v = top * 2f64.powi((drop - p as i64) as i32);
    if a.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

/// atanh(1/q) for a small integer q.
fn atanh_inv(q: u64, p: u32) -> BigInt {
    let q = BigInt::from(q);
    let q2 = &q * &q;
    let mut power = one(p) / &q;
    let mut sum = power.clone();
    let mut k = 1u64;
    loop {
        power /= &q2;
        k += 2;
        let term = &power / BigInt::from(k);
        if term.is_zero() {
            break;
        }
        sum += term;
    }
    sum
}

/// atan(1/q) for a small integer q.
fn atan_inv(q: u64, p: u32) -> BigInt {
    let q = BigInt::from(q);
    let q2 = &q * &q;
    let mut power = one(p) / &q;
    let mut sum = power.clone();
    let mut k = 1u64;
    let mut sign = -1i32;
    loop {
        power /= &q2;
        k += 2;
        let term = &power / BigInt::from(k);
        if term.is_zero() {
            break;
        }
        if sign < 0 {
            sum -= term;
        } else {
            sum += term;
        }
        sign = -sign;
    }
    sum
}

fn pi(p: u32) -> BigInt {
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    atan_inv(5, p) * 16 - atan_inv(239, p) * 4
}

/// ln(x) for a positive fixed-point value: x = f 2^e with f in [1, 2),
/// ln f = 2 atanh((f - 1)/(f + 1)).
fn ln(x: &BigInt, p: u32) -> BigInt {
    let e = x.bits() as i64 - 1 - p as i64;
    let f = shift(x.clone(), -e);
    let s = ((&f - one(p)) << p) / (&f + one(p));
    let s2 = mul(&s, &s, p);
    let mut power = s.clone();
    let mut sum = s;
    let mut k = 1u64;
    loop {
        power = mul(&power, &s2, p);
        k += 2;
        let term = &power / BigInt::from(k);
        if term.is_zero() {
            break;
        }
        sum += term;
    }
    sum * 2 + atanh_inv(3, p) * 2 * e
}

fn euler_gamma(p: u32) -> BigInt {
    let digits: BigInt = EULER_DIGITS.parse().unwrap();
    (digits << p) / BigInt::from(10u32).pow(EULER_DIGITS.len() as u32)
}

pub fn evaluate(x: f64) -> OracleValues {
    assert!(x > 0.0 && x.is_finite());
    let p = 256 + (1.5 * x) as u32;
    let xf = from_f64(x, p);
    let half = &xf >> 1u32;
    let z = mul(&half, &half, p);

    // t_k = (-z)^k/(k!)^2, u_k = (x/2)(-z)^k/(k!(k+1)!), v_k = (x/2)^2(-z)^k/(k!(k+2)!)
    let mut t = one(p);
    let mut u = half.clone();
    let mut v: BigInt = z.clone() / 2;
    let mut j0 = t.clone();
    let mut j1 = u.clone();
    let mut j2 = v.clone();
    let mut h_k = BigInt::zero();
    let mut h_k1 = one(p);
    let mut s0 = BigInt::zero();
    let mut s1 = mul(&u, &(&h_k + &h_k1), p);
    let mut k = 1u64;
    loop {
        let kk = BigInt::from(k);
        t = -mul(&t, &z, p) / (&kk * &kk);
        u = -mul(&u, &z, p) / (&kk * BigInt::from(k + 1));
        v = -mul(&v, &z, p) / (&kk * BigInt::from(k + 2));
        h_k = h_k1.clone();
        h_k1 += one(p) / BigInt::from(k + 1);
        j0 += &t;
        j1 += &u;
        j2 += &v;
        s0 += mul(&t, &h_k, p);
        s1 += mul(&u, &(&h_k + &h_k1), p);
        if t.is_zero() && u.is_zero() && v.is_zero() {
            break;
        }
        k += 1;
    }

    let pi = pi(p);
    let log_term = ln(&half, p) + euler_gamma(p);
    // Y0 = (2/pi) [ (ln(x/2) + gamma) J0 - s0 ]
    let y0 = ((mul(&log_term, &j0, p) - s0) << (p + 1)) / &pi;
    // Y1 = (1/pi) [ 2 (ln(x/2) + gamma) J1 - s1 ] - 2/(pi x)
    let y1 = ((mul(&log_term, &j1, p) * 2 - s1) << p) / &pi
        - (one(p) << (p + 1)) / mul(&pi, &xf, p);
    OracleValues {
        j0: to_f64(&j0, p),
        j1: to_f64(&j1, p),
        j2: to_f64(&j2, p),
        y0: to_f64(&y0, p),
        y1: to_f64(&y1, p),
    }
}
