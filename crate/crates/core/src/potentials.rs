//! Boundary quadrature on the scatterer and truncation boundaries, and the
//! two nonlocal maps built from layer potentials: the action of the nonlocal
//! form on finite element functions and the nonlocal part of the load.
//!
//! Sources live on `Gamma`, targets on `Sigma`. Facet normals from the mesh
//! point out of the computational domain; the layer potentials use the
//! scatterer-outward normal `-n` on `Gamma`.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fem::quadrature::GaussLegendre;
use crate::fem::{facet_basis, FeSpace};
use crate::kernels::{kernel_dk_dny, kernel_k, kernel_ktilde, kernel_rhs, KernelError, KernelParams};
use crate::mesh::{point_segment_distance, BoundaryTag, Mesh, Point};
use crate::specfun;

/// Largest dense Sigma x Gamma block [`assemble_nonlocal_dense`] will build.
pub const DENSE_ENTRY_LIMIT: usize = 100_000_000;
pub const MAX_POINTS_PER_FACET: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("points per facet must be in 1..=32 (got {0})")]
    InvalidQuadratureOrder(usize),
    #[error("no facets tagged {0}")]
    EmptyBoundary(BoundaryTag),
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dense block of {rows} x {cols} entries exceeds the limit of {limit}")]
    TooLarge { rows: usize, cols: usize, limit: usize },
    #[error("target {index} at distance {distance} from Gamma is closer than the facet length {facet_length}")]
    TargetTooClose { index: usize, distance: f64, facet_length: f64 },
    #[error("operator was built on a different mesh than the space")]
    MeshMismatch,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Gauss-Legendre points on every facet of one tagged boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryQuadrature {
    pub tag: BoundaryTag,
    pub points_per_facet: usize,
    pub points: Vec<Point>,
    /// Includes the facet length.
    pub weights: Vec<f64>,
    /// Mesh normals, pointing out of the computational domain.
    pub normals: Vec<[f64; 2]>,
    /// Index into `mesh.boundary_facets()` of the facet each point lies on.
    pub facet: Vec<usize>,
    /// Position along the facet in `[0, 1]`, from its first to its second vertex.
    pub reference: Vec<f64>,
}

impl BoundaryQuadrature {
    pub fn new(mesh: &Mesh, tag: BoundaryTag, points_per_facet: usize) -> Result<Self, PotentialError> {
        if !(1..=MAX_POINTS_PER_FACET).contains(&points_per_facet) {
            return Err(PotentialError::InvalidQuadratureOrder(points_per_facet));
        }
        let rule = GaussLegendre::new(points_per_facet);
        let mut q = Self {
            tag,
            points_per_facet,
            points: Vec::new(),
            weights: Vec::new(),
            normals: Vec::new(),
            facet: Vec::new(),
            reference: Vec::new(),
        };
        for (k, f) in mesh.boundary_facets().iter().enumerate() {
            if f.tag != tag {
                continue;
            }
            let [a, b] = mesh.facet_points(f);
            let g = mesh.facet_geometry(f);
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                q.points.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                q.weights.push(w * g.length);
                q.normals.push(g.unit_normal);
                q.facet.push(k);
                q.reference.push(t);
            }
        }
        if q.points.is_empty() {
            return Err(PotentialError::EmptyBoundary(tag));
        }
        Ok(q)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Values of a finite element function at the quadrature points.
    fn trace(&self, space: &FeSpace, coeffs: &[Complex64]) -> Vec<Complex64> {
        (0..self.len())
            .map(|p| {
                let phi = facet_basis(space.degree(), self.reference[p]);
                space.facet_dofs(self.facet[p]).iter().zip(&phi).map(|(&d, &v)| coeffs[d] * v).sum()
            })
            .collect()
    }

    /// Adds `sum_p w_p g_p phi_i(x_p)` to `out[i]`.
    fn test_against_basis(&self, space: &FeSpace, values: &[Complex64], out: &mut [Complex64]) {
        for p in 0..self.len() {
            let phi = facet_basis(space.degree(), self.reference[p]);
            let wg = values[p] * self.weights[p];
            for (&d, &v) in space.facet_dofs(self.facet[p]).iter().zip(&phi) {
                out[d] += wg * v;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// Kernel values are recomputed on every application.
    MatrixFree,
    /// The weighted target x source kernel matrix is computed once and cached.
    #[default]
    ExplicitDense,
}

/// `(i kappa - d/dn) D` from `Gamma` to `Sigma`, discretized by boundary quadrature.
#[derive(Debug, Clone)]
pub struct NonlocalOperator {
    params: KernelParams,
    sources: BoundaryQuadrature,
    targets: BoundaryQuadrature,
    mode: EvalMode,
    /// Row-major, targets x sources, source weights folded in.
    dense: Option<Vec<Complex64>>,
    mesh_vertices: usize,
}

impl NonlocalOperator {
    pub fn new(mesh: &Mesh, kappa: f64, points_per_facet: usize, mode: EvalMode) -> Result<Self, PotentialError> {
        let params = KernelParams::new(kappa)?;
        let sources = BoundaryQuadrature::new(mesh, BoundaryTag::Gamma, points_per_facet)?;
        let targets = BoundaryQuadrature::new(mesh, BoundaryTag::Sigma, points_per_facet)?;
        // every source-target distance is bounded by the diameter of the point cloud
        let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
        for p in sources.points.iter().chain(&targets.points) {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let reach = kappa * (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
        if reach > specfun::MAX_ARGUMENT {
            return Err(KernelError::Specfun(specfun::SpecfunError::Domain(reach)).into());
        }
        let mut op = Self { params, sources, targets, mode, dense: None, mesh_vertices: mesh.vertices().len() };
        if mode == EvalMode::ExplicitDense {
            let rows: Result<Vec<Vec<Complex64>>, KernelError> =
                (0..op.targets.len()).into_par_iter().map(|p| op.kernel_row(p)).collect();
            op.dense = Some(rows?.concat());
        }
        Ok(op)
    }

    pub fn kappa(&self) -> f64 {
        self.params.kappa()
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn sources(&self) -> &BoundaryQuadrature {
        &self.sources
    }

    pub fn targets(&self) -> &BoundaryQuadrature {
        &self.targets
    }

    /// Shape of the cached kernel matrix, if any.
    pub fn dense_shape(&self) -> Option<(usize, usize)> {
        self.dense.as_ref().map(|_| (self.targets.len(), self.sources.len()))
    }

    fn source_normal(&self, s: usize) -> [f64; 2] {
        let n = self.sources.normals[s];
        [-n[0], -n[1]]
    }

    /// Weighted kernel values from every source to target `p`.
    fn kernel_row(&self, p: usize) -> Result<Vec<Complex64>, KernelError> {
        let x = self.targets.points[p];
        let n_x = self.targets.normals[p];
        (0..self.sources.len())
            .map(|s| {
                let k = kernel_ktilde(x, self.sources.points[s], n_x, self.source_normal(s), &self.params)?;
                Ok(k * self.sources.weights[s])
            })
            .collect()
    }

    /// `(i kappa - d/dn) D(density)` at every target point.
    ///
    /// Kernel arguments were range-checked at construction, so kernel errors
    /// cannot occur here for a density of the right length.
    pub fn potential_at_targets(&self, density: &[Complex64]) -> Result<Vec<Complex64>, PotentialError> {
        if density.len() != self.sources.len() {
            return Err(PotentialError::DimensionMismatch { expected: self.sources.len(), got: density.len() });
        }
        let ns = self.sources.len();
        let result: Result<Vec<Complex64>, KernelError> = (0..self.targets.len())
            .into_par_iter()
            .map(|p| match &self.dense {
                Some(matrix) => Ok(matrix[p * ns..(p + 1) * ns].iter().zip(density).map(|(k, d)| k * d).sum()),
                None => {
                    let x = self.targets.points[p];
                    let n_x = self.targets.normals[p];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for s in 0..ns {
                        let k = kernel_ktilde(x, self.sources.points[s], n_x, self.source_normal(s), &self.params)?;
                        acc += k * (self.sources.weights[s] * density[s]);
                    }
                    Ok(acc)
                }
            })
            .collect();
        Ok(result?)
    }

    fn check_space(&self, space: &FeSpace) -> Result<(), PotentialError> {
        let facets = space.mesh().boundary_facets().len();
        let ok = space.mesh().vertices().len() == self.mesh_vertices
            && self.sources.facet.iter().chain(&self.targets.facet).all(|&f| f < facets);
        if ok {
            Ok(())
        } else {
            Err(PotentialError::MeshMismatch)
        }
    }
}

/// `a_NL(v_h, phi_i)` for every basis function, with `v_h` given by `coeffs`.
pub fn apply_nonlocal(
    op: &NonlocalOperator,
    space: &FeSpace,
    coeffs: &[Complex64],
) -> Result<Vec<Complex64>, PotentialError> {
    op.check_space(space)?;
    if coeffs.len() != space.ndofs() {
        return Err(PotentialError::DimensionMismatch { expected: space.ndofs(), got: coeffs.len() });
    }
    let density = op.sources.trace(space, coeffs);
    let potential = op.potential_at_targets(&density)?;
    let mut out = vec![Complex64::new(0.0, 0.0); space.ndofs()];
    op.targets.test_against_basis(space, &potential, &mut out);
    Ok(out)
}

/// The nonlocal form restricted to rows supported on `Sigma` and columns
/// supported on `Gamma`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalBlock {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Row-major `rows.len() x cols.len()`.
    pub values: Vec<Complex64>,
}

impl NonlocalBlock {
    /// `y[rows] += B x[cols]` in the full dof numbering.
    pub fn apply_add(&self, x: &[Complex64], y: &mut [Complex64]) {
        let nc = self.cols.len();
        let gathered: Vec<Complex64> = self.cols.iter().map(|&c| x[c]).collect();
        let products: Vec<Complex64> = (0..self.rows.len())
            .into_par_iter()
            .map(|r| self.values[r * nc..(r + 1) * nc].iter().zip(&gathered).map(|(a, b)| a * b).sum())
            .collect();
        for (&r, v) in self.rows.iter().zip(products) {
            y[r] += v;
        }
    }

    pub fn column_norms(&self) -> Vec<f64> {
        let nc = self.cols.len();
        (0..nc)
            .map(|c| (0..self.rows.len()).map(|r| self.values[r * nc + c].norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }
}

/// Explicit matrix of [`apply_nonlocal`].
pub fn assemble_nonlocal_dense(op: &NonlocalOperator, space: &FeSpace) -> Result<NonlocalBlock, PotentialError> {
    op.check_space(space)?;
    let rows = space.boundary_dofs(BoundaryTag::Sigma);
    let cols = space.boundary_dofs(BoundaryTag::Gamma);
    if rows.len().saturating_mul(cols.len()) > DENSE_ENTRY_LIMIT {
        return Err(PotentialError::TooLarge { rows: rows.len(), cols: cols.len(), limit: DENSE_ENTRY_LIMIT });
    }
    let mut col_of = vec![usize::MAX; space.ndofs()];
    for (k, &c) in cols.iter().enumerate() {
        col_of[c] = k;
    }
    let mut row_of = vec![usize::MAX; space.ndofs()];
    for (k, &r) in rows.iter().enumerate() {
        row_of[r] = k;
    }
    let degree = space.degree();
    let nc = cols.len();
    let ns = op.sources.len();

    // kernel row at each target point, contracted with the source traces of the basis
    let target_rows: Result<Vec<Vec<Complex64>>, KernelError> = (0..op.targets.len())
        .into_par_iter()
        .map(|p| {
            let kernel = match &op.dense {
                Some(matrix) => matrix[p * ns..(p + 1) * ns].to_vec(),
                None => op.kernel_row(p)?,
            };
            let mut row = vec![Complex64::new(0.0, 0.0); nc];
            for (s, k) in kernel.iter().enumerate() {
                let phi = facet_basis(degree, op.sources.reference[s]);
                for (&d, &v) in space.facet_dofs(op.sources.facet[s]).iter().zip(&phi) {
                    row[col_of[d]] += k * v;
                }
            }
            Ok(row)
        })
        .collect();
    let target_rows = target_rows?;

    let mut values = vec![Complex64::new(0.0, 0.0); rows.len() * nc];
    for (p, row) in target_rows.iter().enumerate() {
        let phi = facet_basis(degree, op.targets.reference[p]);
        for (&d, &v) in space.facet_dofs(op.targets.facet[p]).iter().zip(&phi) {
            let scale = op.targets.weights[p] * v;
            let dst = &mut values[row_of[d] * nc..(row_of[d] + 1) * nc];
            for (a, b) in dst.iter_mut().zip(row) {
                *a += b * scale;
            }
        }
    }
    Ok(NonlocalBlock { rows, cols, values })
}

/// Nonlocal part of the load vector for Neumann data `neumann(y, n)` on
/// `Gamma`, where `n` is the mesh normal (out of the computational domain).
///
/// With the scatterer-outward normal `nu = -n` the exterior representation is
/// `u = D(u) - S(du/dnu) = D(u) + S(neumann)`, so moving the single layer term
/// to the right-hand side gives `-<(i kappa - d/dn) S(neumann), v>_Sigma`.
pub fn nonlocal_rhs<F>(op: &NonlocalOperator, space: &FeSpace, neumann: F) -> Result<Vec<Complex64>, PotentialError>
where
    F: Fn(Point, [f64; 2]) -> Complex64 + Sync,
{
    op.check_space(space)?;
    let density: Vec<Complex64> =
        (0..op.sources.len()).map(|s| -neumann(op.sources.points[s], op.sources.normals[s])).collect();
    let potential: Result<Vec<Complex64>, KernelError> = (0..op.targets.len())
        .into_par_iter()
        .map(|p| {
            let x = op.targets.points[p];
            let n_x = op.targets.normals[p];
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..op.sources.len() {
                acc += kernel_rhs(x, op.sources.points[s], n_x, &op.params)? * (op.sources.weights[s] * density[s]);
            }
            Ok(acc)
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); space.ndofs()];
    op.targets.test_against_basis(space, &potential?, &mut out);
    Ok(out)
}

/// Exterior Green's representation `D(u) + S(neumann)` at points away from
/// `Gamma`, from traces sampled at the source quadrature points of `op`.
/// `neumann` is the normal derivative along the mesh normal.
///
/// Every target must be at least one facet length away from every `Gamma` facet.
pub fn evaluate_representation(
    op: &NonlocalOperator,
    mesh: &Mesh,
    trace: &[Complex64],
    neumann: &[Complex64],
    targets: &[Point],
) -> Result<Vec<Complex64>, PotentialError> {
    let ns = op.sources.len();
    for len in [trace.len(), neumann.len()] {
        if len != ns {
            return Err(PotentialError::DimensionMismatch { expected: ns, got: len });
        }
    }
    for (index, &x) in targets.iter().enumerate() {
        for f in mesh.facets_with_tag(BoundaryTag::Gamma) {
            let seg = mesh.facet_points(f);
            let distance = point_segment_distance(x, seg);
            let facet_length = mesh.facet_geometry(f).length;
            if distance < facet_length {
                return Err(PotentialError::TargetTooClose { index, distance, facet_length });
            }
        }
    }
    let values: Result<Vec<Complex64>, KernelError> = targets
        .par_iter()
        .map(|&x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..ns {
                let y = op.sources.points[s];
                let double = kernel_dk_dny(x, y, op.source_normal(s), &op.params)? * trace[s];
                let single = kernel_k(x, y, &op.params)? * neumann[s];
                acc += (double + single) * op.sources.weights[s];
            }
            Ok(acc)
        })
        .collect();
    Ok(values?)
}
