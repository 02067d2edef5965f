//! The two-dimensional Helmholtz kernel and the derived kernels that couple
//! the truncation boundary to the scatterer boundary.
//!
//! With `r = |x - y|` and `g(r) = (i/4) H0(kappa r)`:
//!
//! * `g'(r)  = -(i kappa / 4) H1(kappa r)`
//! * `g''(r) = -(i kappa^2 / 4) (H0(kappa r) - H1(kappa r) / (kappa r))`

use num_complex::Complex64;
use thiserror::Error;

use crate::mesh::Point;
use crate::specfun::{self, SpecfunError};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum KernelError {
    #[error("wave number must be positive and finite (got {0})")]
    InvalidWaveNumber(f64),
    #[error("kernel evaluated at coincident points ({0}, {1})")]
    CoincidentPoints(f64, f64),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    kappa: f64,
}

impl KernelParams {
    pub fn new(kappa: f64) -> Result<Self, KernelError> {
        if kappa > 0.0 && kappa.is_finite() {
            Ok(Self { kappa })
        } else {
            Err(KernelError::InvalidWaveNumber(kappa))
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Radial profile of the kernel at one distance.
struct Radial {
    r: f64,
    value: Complex64,
    d1: Complex64,
    h0: Complex64,
    h1: Complex64,
}

fn radial(x: Point, y: Point, p: &KernelParams) -> Result<Radial, KernelError> {
    let r = (x[0] - y[0]).hypot(x[1] - y[1]);
    if r == 0.0 {
        return Err(KernelError::CoincidentPoints(x[0], x[1]));
    }
    let (h0, h1) = specfun::hankel1_pair(p.kappa * r)?;
    let quarter_i = Complex64::new(0.0, 0.25);
    Ok(Radial { r, value: quarter_i * h0, d1: -quarter_i * p.kappa * h1, h0, h1 })
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn diff(a: Point, b: Point) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// `(i/4) H0(kappa |x - y|)`.
pub fn kernel_k(x: Point, y: Point, p: &KernelParams) -> Result<Complex64, KernelError> {
    Ok(radial(x, y, p)?.value)
}

/// Derivative of [`kernel_k`] with respect to `y` in direction `n_y`.
pub fn kernel_dk_dny(x: Point, y: Point, n_y: [f64; 2], p: &KernelParams) -> Result<Complex64, KernelError> {
    let rad = radial(x, y, p)?;
    Ok(rad.d1 * (dot(n_y, diff(y, x)) / rad.r))
}

/// `(i kappa - d/dn_x)` applied to [`kernel_dk_dny`].
pub fn kernel_ktilde(
    x: Point,
    y: Point,
    n_x: [f64; 2],
    n_y: [f64; 2],
    p: &KernelParams,
) -> Result<Complex64, KernelError> {
    let rad = radial(x, y, p)?;
    let r = rad.r;
    let kappa = p.kappa;
    let d2 = Complex64::new(0.0, -0.25 * kappa * kappa) * (rad.h0 - rad.h1 / (kappa * r));
    let cos_x = dot(diff(x, y), n_x) / r;
    let cos_y = dot(diff(y, x), n_y) / r;
    let dk_dny = rad.d1 * cos_y;
    let d_dnx = d2 * (cos_x * cos_y) + rad.d1 * ((-dot(n_x, n_y) - cos_y * cos_x) / r);
    Ok(Complex64::new(0.0, kappa) * dk_dny - d_dnx)
}

/// `(i kappa - d/dn_x)` applied to [`kernel_k`].
pub fn kernel_rhs(x: Point, y: Point, n_x: [f64; 2], p: &KernelParams) -> Result<Complex64, KernelError> {
    let rad = radial(x, y, p)?;
    Ok(Complex64::new(0.0, p.kappa) * rad.value - rad.d1 * (dot(diff(x, y), n_x) / rad.r))
}

/// One evaluation configuration for the finite-difference check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub x: Point,
    pub y: Point,
    pub n_x: [f64; 2],
    pub n_y: [f64; 2],
    pub kappa: f64,
}

/// Absolute deviations between each analytic derivative and a central
/// difference of the kernel it is derived from.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FiniteDifferenceDeviation {
    /// `d/dn_x K` against `-dK/dn_y` with `n_y = n_x`.
    pub k: f64,
    pub dk_dny: f64,
    pub ktilde: f64,
    pub rhs: f64,
}

impl FiniteDifferenceDeviation {
    pub fn max(&self) -> f64 {
        self.k.max(self.dk_dny).max(self.ktilde).max(self.rhs)
    }

    fn merge(self, o: Self) -> Self {
        Self { k: self.k.max(o.k), dk_dny: self.dk_dny.max(o.dk_dny), ktilde: self.ktilde.max(o.ktilde), rhs: self.rhs.max(o.rhs) }
    }
}

fn central<F>(f: F, at: Point, dir: [f64; 2], step: f64) -> Result<Complex64, KernelError>
where
    F: Fn(Point) -> Result<Complex64, KernelError>,
{
    let plus = f([at[0] + step * dir[0], at[1] + step * dir[1]])?;
    let minus = f([at[0] - step * dir[0], at[1] - step * dir[1]])?;
    Ok((plus - minus) / (2.0 * step))
}

/// Compares every analytic derivative in this module with central differences
/// (step `step`) of its parent kernel and returns the worst deviations.
pub fn finite_difference_check(samples: &[KernelSample], step: f64) -> Result<FiniteDifferenceDeviation, KernelError> {
    let mut worst = FiniteDifferenceDeviation::default();
    for s in samples {
        let p = KernelParams::new(s.kappa)?;
        let ik = Complex64::new(0.0, s.kappa);
        let fd_k_y = central(|y| kernel_k(s.x, y, &p), s.y, s.n_y, step)?;
        let fd_k_x = central(|x| kernel_k(x, s.y, &p), s.x, s.n_x, step)?;
        let fd_dk_x = central(|x| kernel_dk_dny(x, s.y, s.n_y, &p), s.x, s.n_x, step)?;

        let dk_dny = kernel_dk_dny(s.x, s.y, s.n_y, &p)?;
        let k_gradient = -kernel_dk_dny(s.x, s.y, s.n_x, &p)?;
        let ktilde_normal = ik * dk_dny - kernel_ktilde(s.x, s.y, s.n_x, s.n_y, &p)?;
        let rhs_normal = ik * kernel_k(s.x, s.y, &p)? - kernel_rhs(s.x, s.y, s.n_x, &p)?;
        worst = worst.merge(FiniteDifferenceDeviation {
            k: (k_gradient - fd_k_x).norm(),
            dk_dny: (dk_dny - fd_k_y).norm(),
            ktilde: (ktilde_normal - fd_dk_x).norm(),
            rhs: (rhs_normal - fd_k_x).norm(),
        });
    }
    Ok(worst)
}
