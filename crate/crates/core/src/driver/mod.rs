//! Problem setup with a manufactured radiating solution, solution of the
//! coupled system, parameter studies and CSV output.

mod output;
mod study;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use thiserror::Error;

use crate::fem::{assemble_local, assemble_neumann_rhs, ComplexCsrMatrix, FeFunction, FeSpace, FemError};
use crate::krylov::{gmres, GmresOptions, KrylovError, LinearOperator, Preconditioner, PreconditionerKind, SolveReport};
use crate::mesh::gmsh::{read_gmsh, GmshError};
use crate::mesh::{
    generate_annulus, generate_square_frame, generate_square_with_hole, mesh_size, BoundaryTag, Mesh, MeshError,
    Point,
};
use crate::potentials::{
    apply_nonlocal, assemble_nonlocal_dense, evaluate_representation, nonlocal_rhs, EvalMode, NonlocalBlock,
    NonlocalOperator, PotentialError,
};
use crate::specfun::{self, SpecfunError};

pub use output::{write_csv, CSV_HEADER};
pub use study::{
    convergence_levels, run_convergence_study, run_domain_study, run_iteration_study, run_rows, StudyRow,
    DOMAIN_STUDY_SIDES,
};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("invalid configuration: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("{path}: {source}")]
    Gmsh { path: String, source: GmshError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("Green's identity check failed: max error {0:e} exceeds {GREENS_TOLERANCE:e}; refusing to run")]
    SignCertification(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Annulus { r_inner: f64, r_outer: f64, n_radial: usize, n_angular: usize },
    SquareFrame { a_half: f64, b_half: f64, n: usize },
    /// Square of half side `half_side` around a polygonal disc of radius `radius`.
    SquareWithHole { half_side: f64, radius: f64, target_h: f64 },
    Gmsh(PathBuf),
}

impl Geometry {
    pub fn build(&self) -> Result<Mesh, DriverError> {
        Ok(match *self {
            Geometry::Annulus { r_inner, r_outer, n_radial, n_angular } => {
                generate_annulus(r_inner, r_outer, n_radial, n_angular)?
            }
            Geometry::SquareFrame { a_half, b_half, n } => generate_square_frame(a_half, b_half, n)?,
            Geometry::SquareWithHole { half_side, radius, target_h } => {
                generate_square_with_hole(half_side, radius, target_h)?
            }
            Geometry::Gmsh(ref path) => {
                let name = path.display().to_string();
                let text = std::fs::read_to_string(path).map_err(|source| DriverError::Io { path: name.clone(), source })?;
                read_gmsh(&text).map_err(|source| DriverError::Gmsh { path: name, source })?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// Exact nonlocal condition built from layer potentials on the scatterer.
    Nonlocal,
    /// Local absorbing condition `i kappa u - du/dn = 0`.
    Transmission,
}

impl BoundaryCondition {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryCondition::Nonlocal => "nonlocal",
            BoundaryCondition::Transmission => "transmission",
        }
    }
}

pub fn preconditioner_name(kind: PreconditionerKind) -> &'static str {
    match kind {
        PreconditionerKind::Identity => "none",
        PreconditionerKind::Ilu0 => "ilu0",
        PreconditionerKind::Direct => "direct",
    }
}

/// How the nonlocal block is applied inside GMRES.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonlocalApply {
    /// Dense Sigma x Gamma dof block assembled once.
    #[default]
    AssembledBlock,
    /// Kernel values cached at quadrature points.
    CachedKernel,
    /// Kernel values recomputed on every application.
    MatrixFree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub geometry: Geometry,
    pub kappa: f64,
    pub degree: usize,
    pub bc: BoundaryCondition,
    pub pc: PreconditionerKind,
    pub rtol: f64,
    pub restart: usize,
    pub max_iterations: usize,
    /// Gauss points per boundary facet for the layer potentials.
    pub points_per_facet: usize,
    pub nonlocal_apply: NonlocalApply,
}

impl ProblemSpec {
    pub fn new(geometry: Geometry) -> Self {
        let gmres = GmresOptions::default();
        Self {
            geometry,
            kappa: 1.0,
            degree: 1,
            bc: BoundaryCondition::Nonlocal,
            pc: PreconditionerKind::Direct,
            rtol: gmres.rtol,
            restart: gmres.restart,
            max_iterations: gmres.max_iterations,
            points_per_facet: 8,
            nonlocal_apply: NonlocalApply::default(),
        }
    }

    /// Checks the scalar parameters; geometry checks need the mesh.
    pub fn validate(&self) -> Result<(), DriverError> {
        let bad = |msg: String| Err(DriverError::InvalidSpec(msg));
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive and finite (got {})", self.kappa));
        }
        if !(1..=2).contains(&self.degree) {
            return bad(format!("unsupported degree {} (supported degrees: 1, 2)", self.degree));
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return bad(format!("rtol must be in (0, 1) (got {})", self.rtol));
        }
        if self.restart == 0 || self.max_iterations == 0 {
            return bad("restart and max iterations must be at least 1".into());
        }
        if !(1..=crate::potentials::MAX_POINTS_PER_FACET).contains(&self.points_per_facet) {
            return bad(format!("points per facet must be in 1..=32 (got {})", self.points_per_facet));
        }
        Ok(())
    }
}

/// The manufactured solution `u(x) = (i/4) H0(kappa |x|)`, radiating from the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub kappa: f64,
}

impl ManufacturedSolution {
    pub fn new(kappa: f64) -> Self {
        Self { kappa }
    }

    /// `u(x)` and `grad u(x)`.
    pub fn value_and_gradient(&self, x: Point) -> Result<(Complex64, [Complex64; 2]), SpecfunError> {
        let r = x[0].hypot(x[1]);
        let (h0, h1) = specfun::hankel1_pair(self.kappa * r)?;
        let radial = Complex64::new(0.0, -0.25 * self.kappa) * h1 / r;
        Ok((Complex64::new(0.0, 0.25) * h0, [radial * x[0], radial * x[1]]))
    }

    pub fn value(&self, x: Point) -> Result<Complex64, SpecfunError> {
        Ok(self.value_and_gradient(x)?.0)
    }

    pub fn gradient(&self, x: Point) -> Result<[Complex64; 2], SpecfunError> {
        Ok(self.value_and_gradient(x)?.1)
    }

    /// `grad u . n`.
    pub fn neumann(&self, x: Point, n: [f64; 2]) -> Result<Complex64, SpecfunError> {
        let g = self.gradient(x)?;
        Ok(g[0] * n[0] + g[1] * n[1])
    }
}

/// Checks that the origin lies in a hole enclosed by `Gamma` and that the
/// manufactured solution can be evaluated everywhere on the mesh.
fn check_geometry(mesh: &Mesh, kappa: f64) -> Result<(), DriverError> {
    let winding: f64 = mesh
        .facets_with_tag(BoundaryTag::Gamma)
        .map(|f| {
            let [a, b] = mesh.facet_points(f);
            (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1])
        })
        .sum();
    let inside_triangle = (0..mesh.triangles().len()).any(|t| {
        let [a, b, c] = mesh.triangle_points(t);
        let o = [0.0, 0.0];
        crate::mesh::signed_area(a, b, o) >= 0.0
            && crate::mesh::signed_area(b, c, o) >= 0.0
            && crate::mesh::signed_area(c, a, o) >= 0.0
    });
    if winding.abs() < std::f64::consts::PI || inside_triangle {
        return Err(DriverError::InvalidSpec(
            "the origin must lie inside the scatterer enclosed by Gamma".into(),
        ));
    }
    let reach = mesh.vertices().iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    if kappa * 2.0 * reach > specfun::MAX_ARGUMENT {
        return Err(DriverError::InvalidSpec(format!("kappa * diameter exceeds {}", specfun::MAX_ARGUMENT)));
    }
    Ok(())
}

/// `A^L + A^NL` as a linear operator.
struct SystemOperator<'a> {
    local: &'a ComplexCsrMatrix,
    nonlocal: NonlocalPart<'a>,
}

enum NonlocalPart<'a> {
    None,
    Block(NonlocalBlock),
    Operator(&'a NonlocalOperator, &'a FeSpace),
}

impl LinearOperator for SystemOperator<'_> {
    fn dim(&self) -> usize {
        self.local.nrows()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.local.matvec(x, y);
        match &self.nonlocal {
            NonlocalPart::None => {}
            NonlocalPart::Block(block) => block.apply_add(x, y),
            NonlocalPart::Operator(op, space) => {
                let extra = apply_nonlocal(op, space, x).expect("operator and space were built together");
                for (yi, e) in y.iter_mut().zip(extra) {
                    *yi += e;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub h: f64,
    pub ndofs: usize,
    pub kappa: f64,
    pub degree: usize,
    pub bc: BoundaryCondition,
    pub pc: PreconditionerKind,
    pub rel_l2_error: f64,
    pub rel_h1_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub function: FeFunction,
    pub report: SolveReport,
    pub row: ExperimentRow,
}

pub fn solve_problem(spec: &ProblemSpec) -> Result<Solution, DriverError> {
    let started = Instant::now();
    spec.validate()?;
    let mesh = Arc::new(spec.geometry.build()?);
    check_geometry(&mesh, spec.kappa)?;
    let space = Arc::new(FeSpace::new(mesh.clone(), spec.degree)?);
    let exact = ManufacturedSolution::new(spec.kappa);
    // check_geometry keeps every evaluation point away from the origin and in range
    let neumann = |x: Point, n: [f64; 2]| exact.neumann(x, n).expect("geometry was validated");

    let local = assemble_local(&space, spec.kappa);
    let mut rhs = assemble_neumann_rhs(&space, neumann);
    let mut operator = None;
    if spec.bc == BoundaryCondition::Nonlocal {
        let mode = match spec.nonlocal_apply {
            NonlocalApply::MatrixFree => EvalMode::MatrixFree,
            _ => EvalMode::ExplicitDense,
        };
        let op = NonlocalOperator::new(&mesh, spec.kappa, spec.points_per_facet, mode)?;
        for (r, extra) in rhs.iter_mut().zip(nonlocal_rhs(&op, &space, neumann)?) {
            *r += extra;
        }
        operator = Some(op);
    }
    let nonlocal = match (&operator, spec.nonlocal_apply) {
        (None, _) => NonlocalPart::None,
        (Some(op), NonlocalApply::AssembledBlock) => NonlocalPart::Block(assemble_nonlocal_dense(op, &space)?),
        (Some(op), _) => NonlocalPart::Operator(op, &space),
    };
    let system = SystemOperator { local: &local, nonlocal };
    let pc = Preconditioner::build(spec.pc, &local)?;
    let options = GmresOptions { rtol: spec.rtol, restart: spec.restart, max_iterations: spec.max_iterations };
    let (coeffs, report) = gmres(&system, &rhs, &pc, &options)?;

    let function = FeFunction::new(space.clone(), coeffs)?;
    let norms = function.error_norms(|x| exact.value_and_gradient(x).expect("geometry was validated"));
    let row = ExperimentRow {
        h: mesh_size(&mesh),
        ndofs: space.ndofs(),
        kappa: spec.kappa,
        degree: spec.degree,
        bc: spec.bc,
        pc: spec.pc,
        rel_l2_error: norms.relative_l2(),
        rel_h1_error: norms.relative_h1(),
        iterations: report.iterations,
        converged: report.converged,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(Solution { function, report, row })
}

pub const GREENS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GreensCheck {
    pub probes: Vec<Point>,
    pub errors: Vec<f64>,
}

impl GreensCheck {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Eight points between the two circles of the reference annulus, each at
/// least one facet length away from the inner polygon.
pub fn greens_probes() -> Vec<Point> {
    (0..8)
        .map(|k| {
            let angle = 0.3 + k as f64 * std::f64::consts::FRAC_PI_4;
            let r = 1.5 + 0.2 * k as f64;
            [r * angle.cos(), r * angle.sin()]
        })
        .collect()
}

/// Reproduces the manufactured solution at interior probes from its exact
/// traces on the polygonal inner boundary of `annulus(1, 3, 1, n_angular)`.
pub fn greens_identity_check(kappa: f64, n_angular: usize, points_per_facet: usize) -> Result<GreensCheck, DriverError> {
    let mesh = generate_annulus(1.0, 3.0, 1, n_angular)?;
    let op = NonlocalOperator::new(&mesh, kappa, points_per_facet, EvalMode::MatrixFree)?;
    let exact = ManufacturedSolution::new(kappa);
    let sources = op.sources();
    let trace = sources.points.iter().map(|&p| exact.value(p)).collect::<Result<Vec<_>, _>>()?;
    let neumann = sources
        .points
        .iter()
        .zip(&sources.normals)
        .map(|(&p, &n)| exact.neumann(p, n))
        .collect::<Result<Vec<_>, _>>()?;
    let probes = greens_probes();
    let values = evaluate_representation(&op, &mesh, &trace, &neumann, &probes)?;
    let errors = values
        .iter()
        .zip(&probes)
        .map(|(v, &p)| Ok((v - exact.value(p)?).norm()))
        .collect::<Result<Vec<_>, SpecfunError>>()?;
    Ok(GreensCheck { probes, errors })
}

/// Fails unless the Green's identity check passes at `kappa`; guards every
/// study against sign errors in the boundary terms.
pub fn certify_sign_convention(kappa: f64) -> Result<f64, DriverError> {
    let err = greens_identity_check(kappa, 64, 16)?.max_error();
    if err <= GREENS_TOLERANCE {
        Ok(err)
    } else {
        Err(DriverError::SignCertification(err))
    }
}
