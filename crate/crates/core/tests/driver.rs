use nlbc_core::driver::*;
use nlbc_core::krylov::PreconditionerKind;
use num_complex::Complex64;

fn annulus(n: usize) -> Geometry {
    Geometry::Annulus { r_inner: 1.0, r_outer: 3.0, n_radial: n, n_angular: 4 * n }
}

#[test]
fn manufactured_flux_on_unit_circle() {
    let u = ManufacturedSolution::new(1.0);
    // normal pointing into the scatterer
    let f = u.neumann([1.0, 0.0], [-1.0, 0.0]).unwrap();
    assert!((f - Complex64::new(0.19530320533, 0.11001264644)).norm() < 1e-10);
}

#[test]
fn manufactured_gradient_matches_differences() {
    for kappa in [0.1, 1.0, 5.0] {
        let u = ManufacturedSolution::new(kappa);
        let x = [2.0, 1.0];
        let g = u.gradient(x).unwrap();
        let step = 1e-5;
        for axis in 0..2 {
            let mut plus = x;
            let mut minus = x;
            plus[axis] += step;
            minus[axis] -= step;
            let fd = (u.value(plus).unwrap() - u.value(minus).unwrap()) / (2.0 * step);
            assert!((fd - g[axis]).norm() < 1e-8 * (1.0 + g[axis].norm()), "kappa {kappa} axis {axis}");
        }
    }
}

#[test]
fn invalid_specs_are_rejected() {
    let mut spec = ProblemSpec::new(annulus(2));
    spec.degree = 3;
    let err = solve_problem(&spec).unwrap_err().to_string();
    assert!(err.contains("supported degrees: 1, 2"), "{err}");

    let mut spec = ProblemSpec::new(annulus(2));
    spec.kappa = -1.0;
    assert!(matches!(solve_problem(&spec), Err(DriverError::InvalidSpec(_))));

    let mut spec = ProblemSpec::new(annulus(2));
    spec.restart = 0;
    assert!(solve_problem(&spec).is_err());
}

#[test]
fn nonlocal_beats_transmission() {
    let mut spec = ProblemSpec::new(annulus(4));
    let nonlocal = solve_problem(&spec).unwrap().row;
    spec.bc = BoundaryCondition::Transmission;
    let transmission = solve_problem(&spec).unwrap().row;
    assert!(nonlocal.converged && transmission.converged);
    assert!(nonlocal.rel_l2_error < 0.5 * transmission.rel_l2_error);
}

#[test]
fn nonlocal_apply_variants_agree() {
    let mut spec = ProblemSpec::new(annulus(2));
    spec.pc = PreconditionerKind::Identity;
    let reference = solve_problem(&spec).unwrap();
    for apply in [NonlocalApply::CachedKernel, NonlocalApply::MatrixFree] {
        spec.nonlocal_apply = apply;
        let other = solve_problem(&spec).unwrap();
        let diff: f64 = reference
            .function
            .coeffs()
            .iter()
            .zip(other.function.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "{apply:?}: {diff}");
    }
}

#[test]
fn preconditioners_give_the_same_solution() {
    let mut rows = Vec::new();
    for pc in [PreconditionerKind::Identity, PreconditionerKind::Ilu0, PreconditionerKind::Direct] {
        let mut spec = ProblemSpec::new(annulus(3));
        spec.pc = pc;
        rows.push(solve_problem(&spec).unwrap().row);
    }
    for r in &rows[1..] {
        assert!((r.rel_l2_error - rows[0].rel_l2_error).abs() < 1e-8 * rows[0].rel_l2_error);
    }
    assert!(rows[2].iterations <= rows[0].iterations);
}

#[test]
fn non_convergence_is_reported() {
    let mut spec = ProblemSpec::new(annulus(4));
    spec.pc = PreconditionerKind::Identity;
    spec.max_iterations = 2;
    let row = solve_problem(&spec).unwrap().row;
    assert!(!row.converged);
    assert_eq!(row.iterations, 2);
}

#[test]
fn refinement_levels() {
    let levels = convergence_levels(&annulus(2), 3).unwrap();
    assert_eq!(levels[2], annulus(8));
    let frame = convergence_levels(&Geometry::SquareFrame { a_half: 1.0, b_half: 2.0, n: 4 }, 2).unwrap();
    assert_eq!(frame[1], Geometry::SquareFrame { a_half: 1.0, b_half: 2.0, n: 8 });
    assert!(convergence_levels(&Geometry::Gmsh("x.msh".into()), 2).is_err());
}

#[test]
fn csv_output_is_deterministic() {
    let base = ProblemSpec::new(annulus(2));
    let render = |jobs| {
        let rows = run_convergence_study(&base, 2, jobs).unwrap();
        let mut out = Vec::new();
        write_csv(&mut out, &rows, false).unwrap();
        String::from_utf8(out).unwrap()
    };
    let serial = render(1);
    assert_eq!(serial, render(1));
    assert_eq!(serial, render(2));
    let mut lines = serial.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(lines.count(), 2);
    assert!(!serial.contains('\r'));
}

#[test]
fn failed_rows_are_written_with_nan() {
    let mut spec = ProblemSpec::new(Geometry::Gmsh("/nonexistent/mesh.msh".into()));
    spec.kappa = 2.0;
    let rows = run_rows(vec![spec], 1);
    assert!(rows[0].outcome.is_err());
    let mut out = Vec::new();
    write_csv(&mut out, &rows, true).unwrap();
    let text = String::from_utf8(out).unwrap();
    let record = text.lines().nth(1).unwrap();
    assert!(record.starts_with("NaN,0,2.0"), "{record}");
    assert!(record.contains(",nonlocal,direct,NaN,NaN,0,false,"));
}

#[test]
fn domain_study_through_gmsh_files() {
    let dir = std::env::temp_dir().join(format!("nlbc-domain-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let base = ProblemSpec::new(annulus(1));
    let rows = run_domain_study(&base, &[2.5, 4.0], 0.5, Some(&dir), 1).unwrap();
    for row in &rows {
        assert!(matches!(row.spec.geometry, Geometry::Gmsh(_)));
        let r = row.outcome.as_ref().unwrap();
        assert!(r.converged && r.rel_l2_error < 0.1, "{r:?}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sign_convention_is_certified() {
    let err = certify_sign_convention(1.0).unwrap();
    assert!(err < GREENS_TOLERANCE);
    let check = greens_identity_check(2.0, 64, 8).unwrap();
    assert_eq!(check.errors.len(), greens_probes().len());
}

#[test]
fn errors_are_quadrature_converged() {
    let mut spec = ProblemSpec::new(annulus(8));
    let coarse = solve_problem(&spec).unwrap().row;
    spec.points_per_facet = 16;
    let fine = solve_problem(&spec).unwrap().row;
    let change = (coarse.rel_l2_error - fine.rel_l2_error).abs() / fine.rel_l2_error;
    assert!(change < 1e-6, "{change:e}");
}
