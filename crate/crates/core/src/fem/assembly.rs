use num_complex::Complex64;

use super::quadrature::{GaussLegendre, TriangleRule};
use super::{
    barycentric_gradients, basis_gradients, basis_values, facet_basis, local_dof_count,
    ComplexCsrMatrix, FeSpace,
};
use crate::mesh::{BoundaryTag, Point};

/// Points of the facet rule used for Neumann data.
const NEUMANN_RULE_POINTS: usize = 8;

/// The three real forms that make up the local operator, assembled on a
/// common sparsity pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalParts {
    pub stiffness: ComplexCsrMatrix,
    pub mass: ComplexCsrMatrix,
    /// Boundary mass on `Sigma`.
    pub sigma_mass: ComplexCsrMatrix,
}

/// `(grad u, grad v) - kappa^2 (u, v) - i kappa <u, v>_Sigma`.
pub fn assemble_local(space: &FeSpace, kappa: f64) -> ComplexCsrMatrix {
    assemble_combination(space, Complex64::new(1.0, 0.0), Complex64::new(-kappa * kappa, 0.0), Complex64::new(0.0, -kappa))
}

pub fn assemble_local_parts(space: &FeSpace) -> LocalParts {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    LocalParts {
        stiffness: assemble_combination(space, one, zero, zero),
        mass: assemble_combination(space, zero, one, zero),
        sigma_mass: assemble_combination(space, zero, zero, one),
    }
}

fn assemble_combination(
    space: &FeSpace,
    stiffness_coef: Complex64,
    mass_coef: Complex64,
    sigma_coef: Complex64,
) -> ComplexCsrMatrix {
    let mesh = space.mesh();
    let degree = space.degree();
    let nloc = local_dof_count(degree);
    // degree 2p integrands need n >= p + 1 points per direction
    let rule = TriangleRule::collapsed(degree + 1);
    let mut triplets = Vec::with_capacity(nloc * nloc * mesh.triangles().len());

    let mut local = [[0.0f64; 6]; 6];
    let mut local_mass = [[0.0f64; 6]; 6];
    for t in 0..mesh.triangles().len() {
        let pts = mesh.triangle_points(t);
        let (grad_lam, area) = barycentric_gradients(pts);
        for row in local.iter_mut().chain(local_mass.iter_mut()) {
            row.fill(0.0);
        }
        for (lam, &w) in rule.points.iter().zip(&rule.weights) {
            let values = basis_values(degree, *lam);
            let grads = basis_gradients(degree, *lam, grad_lam);
            let wa = w * area;
            for i in 0..nloc {
                for j in 0..nloc {
                    local[i][j] += wa * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                    local_mass[i][j] += wa * values[i] * values[j];
                }
            }
        }
        let dofs = space.cell_dofs(t);
        for i in 0..nloc {
            for j in 0..nloc {
                let v = stiffness_coef * local[i][j] + mass_coef * local_mass[i][j];
                triplets.push((dofs[i], dofs[j], v));
            }
        }
    }

    let line = GaussLegendre::new(degree + 1);
    let nf = degree + 1;
    for (k, facet) in mesh.boundary_facets().iter().enumerate() {
        if facet.tag != BoundaryTag::Sigma {
            continue;
        }
        let length = mesh.facet_geometry(facet).length;
        let mut m = [[0.0f64; 3]; 3];
        for (&t, &w) in line.nodes.iter().zip(&line.weights) {
            let phi = facet_basis(degree, t);
            for i in 0..nf {
                for j in 0..nf {
                    m[i][j] += w * length * phi[i] * phi[j];
                }
            }
        }
        let dofs = space.facet_dofs(k);
        for i in 0..nf {
            for j in 0..nf {
                triplets.push((dofs[i], dofs[j], sigma_coef * m[i][j]));
            }
        }
    }
    ComplexCsrMatrix::from_triplets(space.ndofs(), space.ndofs(), &triplets)
}

/// `<f, v>_Gamma` for every basis function `v`. `f` receives a point on
/// `Gamma` and the unit normal there, which points out of the computational
/// domain (into the scatterer).
pub fn assemble_neumann_rhs<F>(space: &FeSpace, f: F) -> Vec<Complex64>
where
    F: Fn(Point, [f64; 2]) -> Complex64,
{
    let mesh = space.mesh();
    let degree = space.degree();
    let line = GaussLegendre::new(NEUMANN_RULE_POINTS);
    let mut rhs = vec![Complex64::new(0.0, 0.0); space.ndofs()];
    for (k, facet) in mesh.boundary_facets().iter().enumerate() {
        if facet.tag != BoundaryTag::Gamma {
            continue;
        }
        let [a, b] = mesh.facet_points(facet);
        let geom = mesh.facet_geometry(facet);
        let dofs = space.facet_dofs(k);
        for (&t, &w) in line.nodes.iter().zip(&line.weights) {
            let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let value = f(x, geom.unit_normal) * (w * geom.length);
            let phi = facet_basis(degree, t);
            for (i, &dof) in dofs.iter().enumerate() {
                rhs[dof] += value * phi[i];
            }
        }
    }
    rhs
}
