use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::quadrature::TriangleRule;
use super::{barycentric_gradients, basis_gradients, basis_values, from_barycentric, local_dof_count, FeSpace, FemError};
use crate::mesh::Point;

/// Tolerance on barycentric coordinates when deciding whether a point lies in a cell.
const INSIDE_TOLERANCE: f64 = 1e-12;

/// A finite element function: a space and one complex coefficient per dof.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    space: Arc<FeSpace>,
    coeffs: Vec<Complex64>,
}

/// Absolute errors and the norms of the exact solution, from one pass of
/// quadrature. `h1` is the full H1 norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
    pub exact_l2: f64,
    pub exact_h1: f64,
}

impl ErrorNorms {
    pub fn relative_l2(&self) -> f64 {
        self.l2 / self.exact_l2
    }

    pub fn relative_h1(&self) -> f64 {
        self.h1 / self.exact_h1
    }
}

impl FeFunction {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<Complex64>) -> Result<Self, FemError> {
        if coeffs.len() != space.ndofs() {
            return Err(FemError::DimensionMismatch { expected: space.ndofs(), got: coeffs.len() });
        }
        Ok(Self { space, coeffs })
    }

    pub fn zero(space: Arc<FeSpace>) -> Self {
        let n = space.ndofs();
        Self { space, coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate<F>(space: Arc<FeSpace>, f: F) -> Self
    where
        F: Fn(Point) -> Complex64,
    {
        let coeffs = space.dof_coords().iter().map(|&p| f(p)).collect();
        Self { space, coeffs }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Value at `point`, which must lie in triangle `cell`.
    pub fn evaluate(&self, point: Point, cell: usize) -> Result<Complex64, FemError> {
        let pts = self.space.mesh().triangle_points(cell);
        let (grad_lam, _) = barycentric_gradients(pts);
        let rel = [point[0] - pts[0][0], point[1] - pts[0][1]];
        let l1 = grad_lam[1][0] * rel[0] + grad_lam[1][1] * rel[1];
        let l2 = grad_lam[2][0] * rel[0] + grad_lam[2][1] * rel[1];
        let lam = [1.0 - l1 - l2, l1, l2];
        if lam.iter().any(|&l| l < -INSIDE_TOLERANCE) {
            return Err(FemError::PointOutsideCell(point[0], point[1], cell));
        }
        Ok(self.value_at(cell, lam))
    }

    fn value_at(&self, cell: usize, lam: [f64; 3]) -> Complex64 {
        let degree = self.space.degree();
        let phi = basis_values(degree, lam);
        self.space.cell_dofs(cell).iter().zip(&phi).map(|(&d, &p)| self.coeffs[d] * p).sum()
    }

    /// Errors against an exact solution given as `x -> (u(x), grad u(x))`,
    /// with a cell rule exact for polynomials of degree `2 * degree + 4`.
    pub fn error_norms<F>(&self, exact: F) -> ErrorNorms
    where
        F: Fn(Point) -> (Complex64, [Complex64; 2]) + Sync,
    {
        let space = &self.space;
        let degree = space.degree();
        let nloc = local_dof_count(degree);
        let rule = TriangleRule::collapsed(degree + 3);
        let per_cell: Vec<[f64; 4]> = (0..space.mesh().triangles().len())
            .into_par_iter()
            .map(|t| {
                let pts = space.mesh().triangle_points(t);
                let (grad_lam, area) = barycentric_gradients(pts);
                let dofs = space.cell_dofs(t);
                let mut acc = [0.0; 4];
                for (lam, &w) in rule.points.iter().zip(&rule.weights) {
                    let phi = basis_values(degree, *lam);
                    let grads = basis_gradients(degree, *lam, grad_lam);
                    let mut uh = Complex64::new(0.0, 0.0);
                    let mut guh = [Complex64::new(0.0, 0.0); 2];
                    for k in 0..nloc {
                        let c = self.coeffs[dofs[k]];
                        uh += c * phi[k];
                        guh[0] += c * grads[k][0];
                        guh[1] += c * grads[k][1];
                    }
                    let (u, gu) = exact(from_barycentric(pts, *lam));
                    let wa = w * area;
                    acc[0] += wa * (u - uh).norm_sqr();
                    acc[1] += wa * ((gu[0] - guh[0]).norm_sqr() + (gu[1] - guh[1]).norm_sqr());
                    acc[2] += wa * u.norm_sqr();
                    acc[3] += wa * (gu[0].norm_sqr() + gu[1].norm_sqr());
                }
                acc
            })
            .collect();
        let mut sums = [0.0; 4];
        for acc in &per_cell {
            for k in 0..4 {
                sums[k] += acc[k];
            }
        }
        ErrorNorms {
            l2: sums[0].sqrt(),
            h1: (sums[0] + sums[1]).sqrt(),
            exact_l2: sums[2].sqrt(),
            exact_h1: (sums[2] + sums[3]).sqrt(),
        }
    }

    pub fn l2_error<F>(&self, exact: F) -> f64
    where
        F: Fn(Point) -> Complex64 + Sync,
    {
        self.error_norms(|x| (exact(x), [Complex64::new(0.0, 0.0); 2])).l2
    }

    pub fn h1_error<F>(&self, exact: F) -> f64
    where
        F: Fn(Point) -> (Complex64, [Complex64; 2]) + Sync,
    {
        self.error_norms(exact).h1
    }
}
