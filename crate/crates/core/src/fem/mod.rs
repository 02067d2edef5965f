//! Continuous Lagrange finite elements of degree 1 and 2 on triangles.
//!
//! Local degrees of freedom on a triangle `[v0, v1, v2]` are ordered as the
//! three vertices followed (degree 2) by the edge midpoints `v0v1`, `v1v2`,
//! `v2v0`. On a boundary facet `[a, b]` they are `a`, `b` and (degree 2) the
//! midpoint.

mod assembly;
mod csr;
mod function;
pub mod quadrature;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::mesh::{BoundaryTag, Mesh, Point};

pub use assembly::{assemble_local, assemble_local_parts, assemble_neumann_rhs, LocalParts};
pub use csr::ComplexCsrMatrix;
pub use function::{ErrorNorms, FeFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    #[error("unsupported polynomial degree {0} (supported degrees: 1, 2)")]
    UnsupportedDegree(usize),
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point ({0}, {1}) is outside triangle {2}")]
    PointOutsideCell(f64, f64, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    dof_coords: Vec<Point>,
    cell_dofs: Vec<usize>,
    facet_dofs: Vec<usize>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Self, FemError> {
        if !(1..=2).contains(&degree) {
            return Err(FemError::UnsupportedDegree(degree));
        }
        let mut dof_coords = mesh.vertices().to_vec();
        let nloc = local_dof_count(degree);
        let mut cell_dofs = Vec::with_capacity(nloc * mesh.triangles().len());
        let mut edge_dof: HashMap<(usize, usize), usize> = HashMap::new();
        for t in mesh.triangles() {
            cell_dofs.extend_from_slice(t);
            if degree == 2 {
                for k in 0..3 {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    let dof = *edge_dof.entry(key).or_insert_with(|| {
                        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
                        dof_coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                        dof_coords.len() - 1
                    });
                    cell_dofs.push(dof);
                }
            }
        }
        let mut facet_dofs = Vec::with_capacity((degree + 1) * mesh.boundary_facets().len());
        for f in mesh.boundary_facets() {
            let [a, b] = f.vertices;
            facet_dofs.extend_from_slice(&[a, b]);
            if degree == 2 {
                facet_dofs.push(edge_dof[&(a.min(b), a.max(b))]);
            }
        }
        Ok(Self { mesh, degree, dof_coords, cell_dofs, facet_dofs })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ndofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn dof_coords(&self) -> &[Point] {
        &self.dof_coords
    }

    /// Global dofs of triangle `t` in local order.
    pub fn cell_dofs(&self, t: usize) -> &[usize] {
        let n = local_dof_count(self.degree);
        &self.cell_dofs[n * t..n * (t + 1)]
    }

    /// Global dofs of the boundary facet with index `f` in `mesh.boundary_facets()`.
    pub fn facet_dofs(&self, f: usize) -> &[usize] {
        let n = self.degree + 1;
        &self.facet_dofs[n * f..n * (f + 1)]
    }

    /// Sorted dofs whose basis functions do not vanish on the tagged boundary.
    pub fn boundary_dofs(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut dofs: Vec<usize> = self
            .mesh
            .boundary_facets()
            .iter()
            .enumerate()
            .filter(|(_, f)| f.tag == tag)
            .flat_map(|(k, _)| self.facet_dofs(k).iter().copied())
            .collect();
        dofs.sort_unstable();
        dofs.dedup();
        dofs
    }
}

pub(crate) fn local_dof_count(degree: usize) -> usize {
    if degree == 1 {
        3
    } else {
        6
    }
}

/// Values of the local basis at barycentric coordinates `lam`; only the first
/// `local_dof_count(degree)` entries are meaningful.
pub(crate) fn basis_values(degree: usize, lam: [f64; 3]) -> [f64; 6] {
    if degree == 1 {
        [lam[0], lam[1], lam[2], 0.0, 0.0, 0.0]
    } else {
        [
            lam[0] * (2.0 * lam[0] - 1.0),
            lam[1] * (2.0 * lam[1] - 1.0),
            lam[2] * (2.0 * lam[2] - 1.0),
            4.0 * lam[0] * lam[1],
            4.0 * lam[1] * lam[2],
            4.0 * lam[2] * lam[0],
        ]
    }
}

/// Physical gradients of the local basis given the barycentric gradients.
pub(crate) fn basis_gradients(degree: usize, lam: [f64; 3], grad_lam: [[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut g = [[0.0; 2]; 6];
    if degree == 1 {
        g[..3].copy_from_slice(&grad_lam);
        return g;
    }
    for i in 0..3 {
        let s = 4.0 * lam[i] - 1.0;
        g[i] = [s * grad_lam[i][0], s * grad_lam[i][1]];
    }
    for (k, (i, j)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
        g[3 + k] = [
            4.0 * (lam[i] * grad_lam[j][0] + lam[j] * grad_lam[i][0]),
            4.0 * (lam[i] * grad_lam[j][1] + lam[j] * grad_lam[i][1]),
        ];
    }
    g
}

/// Facet basis at parameter `t` running from the first to the second vertex.
pub(crate) fn facet_basis(degree: usize, t: f64) -> [f64; 3] {
    if degree == 1 {
        [1.0 - t, t, 0.0]
    } else {
        [(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)]
    }
}

/// Gradients of the barycentric coordinates and the area of a triangle.
pub(crate) fn barycentric_gradients([a, b, c]: [Point; 3]) -> ([[f64; 2]; 3], f64) {
    let twice_area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let inv = 1.0 / twice_area;
    (
        [
            [(b[1] - c[1]) * inv, (c[0] - b[0]) * inv],
            [(c[1] - a[1]) * inv, (a[0] - c[0]) * inv],
            [(a[1] - b[1]) * inv, (b[0] - a[0]) * inv],
        ],
        0.5 * twice_area,
    )
}

pub(crate) fn from_barycentric([a, b, c]: [Point; 3], lam: [f64; 3]) -> Point {
    [lam[0] * a[0] + lam[1] * b[0] + lam[2] * c[0], lam[0] * a[1] + lam[1] * b[1] + lam[2] * c[1]]
}
