//! Bessel functions of the first and second kind of orders 0 and 1, and the
//! first-kind Hankel functions built from them, for real positive arguments.
//!
//! Two regimes are used:
//!
//! * `x <= 20`: the ascending power series (with the logarithmic series for
//!   `Y0`, `Y1`) summed in double-double arithmetic. The extra precision absorbs
//!   the cancellation between terms, so the result carries full relative
//!   accuracy even next to a zero.
//! * `x > 20`: Hankel's asymptotic expansion written in amplitude-phase form,
//!   `J = M cos(theta)`, `Y = M sin(theta)`. The phase is reduced modulo pi/2 in
//!   double-double so that values near zeros keep their relative accuracy.

use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::dd::{self, DoubleDouble};

/// Largest supported argument. The phase reduction assumes `x / (pi/2) < 2^20`.
pub const MAX_ARGUMENT: f64 = 1.0e6;

const SERIES_LIMIT: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecfunError {
    #[error("argument {0} outside the supported domain (0, 1e6]")]
    Domain(f64),
    #[error("unsupported Hankel order {0} (supported: 0, 1)")]
    UnsupportedOrder(u32),
}

/// `J0`, `J1`, `Y0`, `Y1` evaluated at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselValues {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl BesselValues {
    pub fn hankel0(&self) -> Complex64 {
        Complex64::new(self.j0, self.y0)
    }

    pub fn hankel1(&self) -> Complex64 {
        Complex64::new(self.j1, self.y1)
    }
}

fn check(x: f64) -> Result<(), SpecfunError> {
    if x.is_finite() && x > 0.0 && x <= MAX_ARGUMENT {
        Ok(())
    } else {
        Err(SpecfunError::Domain(x))
    }
}

/// All four real Bessel functions at `x`; the kernels need them together.
pub fn bessel_all(x: f64) -> Result<BesselValues, SpecfunError> {
    check(x)?;
    Ok(if x <= SERIES_LIMIT {
        series(x)
    } else {
        let (j0, y0) = asymptotic(0, x);
        let (j1, y1) = asymptotic(1, x);
        BesselValues { j0, j1, y0, y1 }
    })
}

pub fn bessel_j0(x: f64) -> Result<f64, SpecfunError> {
    check(x)?;
    Ok(if x <= SERIES_LIMIT { series_j(x).0.to_f64() } else { asymptotic(0, x).0 })
}

pub fn bessel_j1(x: f64) -> Result<f64, SpecfunError> {
    check(x)?;
    Ok(if x <= SERIES_LIMIT { series_j(x).1.to_f64() } else { asymptotic(1, x).0 })
}

pub fn bessel_y0(x: f64) -> Result<f64, SpecfunError> {
    Ok(bessel_all(x)?.y0)
}

pub fn bessel_y1(x: f64) -> Result<f64, SpecfunError> {
    Ok(bessel_all(x)?.y1)
}

/// `H_order^(1)(x) = J_order(x) + i Y_order(x)` for order 0 or 1.
pub fn hankel1(order: u32, x: f64) -> Result<Complex64, SpecfunError> {
    if order > 1 {
        return Err(SpecfunError::UnsupportedOrder(order));
    }
    let b = bessel_all(x)?;
    Ok(if order == 0 { b.hankel0() } else { b.hankel1() })
}

/// Both `H0^(1)(x)` and `H1^(1)(x)`.
pub fn hankel1_pair(x: f64) -> Result<(Complex64, Complex64), SpecfunError> {
    let b = bessel_all(x)?;
    Ok((b.hankel0(), b.hankel1()))
}

/// Coefficients of the four power series in `-z = -(x/2)^2`, highest index
/// large enough for `x <= 20`.
struct SeriesTable {
    /// `1 / (k!)^2`
    j0: Vec<DoubleDouble>,
    /// `1 / (k! (k+1)!)`
    j1: Vec<DoubleDouble>,
    /// `H_k / (k!)^2`
    log0: Vec<DoubleDouble>,
    /// `(H_k + H_{k+1}) / (k! (k+1)!)`
    log1: Vec<DoubleDouble>,
}

const SERIES_TERMS: usize = 72;

fn series_table() -> &'static SeriesTable {
    static TABLE: OnceLock<SeriesTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = SeriesTable {
            j0: Vec::with_capacity(SERIES_TERMS),
            j1: Vec::with_capacity(SERIES_TERMS),
            log0: Vec::with_capacity(SERIES_TERMS),
            log1: Vec::with_capacity(SERIES_TERMS),
        };
        let mut c = DoubleDouble::ONE;
        let mut d = DoubleDouble::ONE;
        let mut h_k = DoubleDouble::ZERO;
        let mut h_k1 = DoubleDouble::ONE;
        for k in 0..SERIES_TERMS {
            if k > 0 {
                let kf = k as f64;
                c = c.div_f64(kf * kf);
                d = d.div_f64(kf * (kf + 1.0));
                h_k = h_k1;
                h_k1 = h_k1 + DoubleDouble::ONE.div_f64(kf + 1.0);
            }
            t.j0.push(c);
            t.j1.push(d);
            t.log0.push(c * h_k);
            t.log1.push(d * (h_k + h_k1));
        }
        t
    })
}

/// Number of series terms needed at `z = (x/2)^2`: the first index past the
/// peak where the largest term family has dropped below 1e-36.
fn series_length(table: &SeriesTable, z: f64) -> usize {
    let mut power = 1.0f64;
    for k in 0..SERIES_TERMS {
        let size = table.log1[k].hi.max(table.j0[k].hi) * power;
        if (k as f64) * (k as f64) > z && size < 1e-36 {
            return k + 1;
        }
        power *= z;
    }
    SERIES_TERMS
}

fn horner(coeffs: &[DoubleDouble], neg_z: DoubleDouble) -> DoubleDouble {
    coeffs.iter().rev().fold(DoubleDouble::ZERO, |acc, &c| (acc * neg_z).add_sloppy(c))
}

fn series_j(x: f64) -> (DoubleDouble, DoubleDouble) {
    let table = series_table();
    let half = DoubleDouble::from_f64(0.5 * x);
    let z = half * half;
    let n = series_length(table, z.hi);
    (horner(&table.j0[..n], -z), half * horner(&table.j1[..n], -z))
}

fn series(x: f64) -> BesselValues {
    let table = series_table();
    let half = DoubleDouble::from_f64(0.5 * x);
    let z = half * half;
    let n = series_length(table, z.hi);
    let j0 = horner(&table.j0[..n], -z);
    let j1 = half * horner(&table.j1[..n], -z);
    let log_sum0 = horner(&table.log0[..n], -z);
    let log_sum1 = half * horner(&table.log1[..n], -z);

    // Y0 = (2/pi) [(ln(x/2) + gamma) J0 - sum_k H_k t_k]
    // Y1 = (1/pi) [2 (ln(x/2) + gamma) J1 - sum_k (H_k + H_{k+1}) u_k] - 2 / (pi x)
    let log_term = DoubleDouble::ln_f64(0.5 * x) + dd::EULER_GAMMA;
    let y0 = dd::TWO_OVER_PI * (log_term * j0 - log_sum0);
    let y1 = dd::ONE_OVER_PI * ((log_term * j1).mul_f64(2.0) - log_sum1)
        - dd::TWO_OVER_PI.div_f64(x);
    BesselValues { j0: j0.to_f64(), j1: j1.to_f64(), y0: y0.to_f64(), y1: y1.to_f64() }
}

/// Hankel's expansion in amplitude-phase form, returning `(J_order, Y_order)`.
fn asymptotic(order: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (order * order) as f64;
    let inv_x = 1.0 / x;
    // a_k(nu) / x^k with alternating sign pattern split into P (even k) and Q (odd k)
    let mut p = 1.0f64;
    let mut q = 0.0f64;
    let mut term = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (8.0 * kf) * inv_x;
        if term.abs() >= prev || term.abs() < 1e-18 * p.abs() {
            break;
        }
        prev = term.abs();
        // P = a0 - a2/x^2 + a4/x^4 ...,  Q = a1/x - a3/x^3 + ...
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    let amplitude = (2.0 / (std::f64::consts::PI * x)).sqrt() * p.hypot(q);
    let phase_shift = q.atan2(p);
    let offset = if order == 0 { dd::FRAC_PI_4 } else { dd::FRAC_3PI_4 };
    let theta = DoubleDouble::from_f64(x) - offset + DoubleDouble::from_f64(phase_shift);
    let (c, s) = cos_sin_reduced(theta);
    (amplitude * c, amplitude * s)
}

/// cos and sin of a double-double angle with the reduction done in extended precision.
fn cos_sin_reduced(theta: DoubleDouble) -> (f64, f64) {
    let [p0, p1, p2] = dd::FRAC_PI_2_PARTS;
    let n = (theta.hi / p0).round();
    let r = theta - dd::two_prod(n, p0) - dd::two_prod(n, p1) - DoubleDouble::from_f64(n * p2);
    let (sh, ch) = r.hi.sin_cos();
    let sin_r = sh + r.lo * ch;
    let cos_r = ch - r.lo * sh;
    match (n as i64).rem_euclid(4) {
        0 => (cos_r, sin_r),
        1 => (-sin_r, cos_r),
        2 => (-cos_r, -sin_r),
        _ => (sin_r, -cos_r),
    }
}
