use std::path::Path;

use rayon::prelude::*;

use super::{certify_sign_convention, solve_problem, DriverError, ExperimentRow, Geometry, ProblemSpec};
use crate::krylov::PreconditionerKind;
use crate::mesh::generate_square_with_hole;
use crate::mesh::gmsh::write_gmsh;

/// Side lengths of the square truncation boundary in the domain study.
pub const DOMAIN_STUDY_SIDES: [f64; 6] = [2.25, 2.5, 3.0, 4.0, 5.0, 6.0];

/// One run of a study: the spec it used and its result.
#[derive(Debug)]
pub struct StudyRow {
    pub spec: ProblemSpec,
    pub outcome: Result<ExperimentRow, DriverError>,
}

/// `levels` uniformly refined versions of `geometry`, coarsest first.
pub fn convergence_levels(geometry: &Geometry, levels: usize) -> Result<Vec<Geometry>, DriverError> {
    let scale = |k: usize| 1usize << k;
    (0..levels)
        .map(|k| match *geometry {
            Geometry::Annulus { r_inner, r_outer, n_radial, n_angular } => Ok(Geometry::Annulus {
                r_inner,
                r_outer,
                n_radial: n_radial * scale(k),
                n_angular: n_angular * scale(k),
            }),
            Geometry::SquareFrame { a_half, b_half, n } => Ok(Geometry::SquareFrame { a_half, b_half, n: n * scale(k) }),
            Geometry::SquareWithHole { half_side, radius, target_h } => {
                Ok(Geometry::SquareWithHole { half_side, radius, target_h: target_h / scale(k) as f64 })
            }
            Geometry::Gmsh(_) => Err(DriverError::InvalidSpec("gmsh meshes cannot be refined".into())),
        })
        .collect()
}

/// Solves every spec, in parallel when `jobs > 1`. Results keep the input order.
pub fn run_rows(specs: Vec<ProblemSpec>, jobs: usize) -> Vec<StudyRow> {
    let solve = |spec: ProblemSpec| {
        let outcome = solve_problem(&spec).map(|s| s.row);
        StudyRow { spec, outcome }
    };
    if jobs <= 1 {
        return specs.into_iter().map(solve).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| specs.into_par_iter().map(solve).collect()),
        Err(_) => specs.into_iter().map(solve).collect(),
    }
}

pub fn run_convergence_study(base: &ProblemSpec, levels: usize, jobs: usize) -> Result<Vec<StudyRow>, DriverError> {
    base.validate()?;
    certify_sign_convention(base.kappa)?;
    let specs = convergence_levels(&base.geometry, levels)?
        .into_iter()
        .map(|geometry| ProblemSpec { geometry, ..base.clone() })
        .collect();
    Ok(run_rows(specs, jobs))
}

/// All combinations of wave number, preconditioner and refinement level, in
/// that nesting order.
pub fn run_iteration_study(
    base: &ProblemSpec,
    kappas: &[f64],
    preconditioners: &[PreconditionerKind],
    levels: usize,
    jobs: usize,
) -> Result<Vec<StudyRow>, DriverError> {
    base.validate()?;
    let geometries = convergence_levels(&base.geometry, levels)?;
    let mut specs = Vec::new();
    for &kappa in kappas {
        certify_sign_convention(kappa)?;
        for &pc in preconditioners {
            for geometry in &geometries {
                specs.push(ProblemSpec { geometry: geometry.clone(), kappa, pc, ..base.clone() });
            }
        }
    }
    for spec in &specs {
        spec.validate()?;
    }
    Ok(run_rows(specs, jobs))
}

/// Square truncation boundaries of side `s` around the unit disc, meshed at a
/// common target size. With `mesh_dir`, every mesh is written in the gmsh
/// subset format and the runs read it back from there.
pub fn run_domain_study(
    base: &ProblemSpec,
    sides: &[f64],
    target_h: f64,
    mesh_dir: Option<&Path>,
    jobs: usize,
) -> Result<Vec<StudyRow>, DriverError> {
    base.validate()?;
    certify_sign_convention(base.kappa)?;
    let mut specs = Vec::with_capacity(sides.len());
    for &side in sides {
        let mut geometry = Geometry::SquareWithHole { half_side: 0.5 * side, radius: 1.0, target_h };
        if let Some(dir) = mesh_dir {
            let mesh = generate_square_with_hole(0.5 * side, 1.0, target_h)?;
            let path = dir.join(format!("square_s{side}.msh"));
            std::fs::write(&path, write_gmsh(&mesh))
                .map_err(|source| DriverError::Io { path: path.display().to_string(), source })?;
            geometry = Geometry::Gmsh(path);
        }
        specs.push(ProblemSpec { geometry, ..base.clone() });
    }
    Ok(run_rows(specs, jobs))
}
