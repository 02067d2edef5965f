use nlbc_core::mesh::gmsh::{read_gmsh, write_gmsh, GmshErrorKind};
use nlbc_core::mesh::{
    generate_annulus, generate_square_frame, generate_square_with_hole, mesh_size, BoundaryTag, Mesh, MeshError,
};
use proptest::prelude::*;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn check_normals(mesh: &Mesh) {
    for f in mesh.boundary_facets() {
        let g = mesh.facet_geometry(f);
        let n = g.unit_normal;
        assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() <= 1e-14);
        let [a, b, c] = mesh.triangle_points(f.triangle);
        let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
        let d = [g.midpoint[0] - centroid[0], g.midpoint[1] - centroid[1]];
        assert!(n[0] * d[0] + n[1] * d[1] > 0.0);
    }
}

#[test]
fn valid_fixture_loads() {
    let mesh = read_gmsh(&fixture("valid.msh")).unwrap();
    assert_eq!(mesh.vertices().len(), 8);
    assert_eq!(mesh.triangles().len(), 8);
    assert_eq!(mesh.facets_with_tag(BoundaryTag::Gamma).count(), 4);
    assert_eq!(mesh.facets_with_tag(BoundaryTag::Sigma).count(), 4);
    assert!((mesh.area() - 32.0).abs() < 1e-12);
    assert!((mesh.boundary_separation() - 2.0).abs() < 1e-12);
    check_normals(&mesh);
    // Gamma normals point into the hole
    for f in mesh.facets_with_tag(BoundaryTag::Gamma) {
        let g = mesh.facet_geometry(f);
        assert!(g.unit_normal[0] * g.midpoint[0] + g.unit_normal[1] * g.midpoint[1] < 0.0);
    }
}

#[test]
fn bad_element_type_names_line() {
    let e = read_gmsh(&fixture("bad_element_type.msh")).unwrap_err();
    assert_eq!(e.kind, GmshErrorKind::UnsupportedElement(4));
    assert_eq!(e.line, 39);
    assert!(e.to_string().starts_with("line 39:"));
}

#[test]
fn open_gamma_loop_is_invariant_violation() {
    let e = read_gmsh(&fixture("open_gamma_loop.msh")).unwrap_err();
    assert!(matches!(e.kind, GmshErrorKind::Invariant(MeshError::OpenLoop(BoundaryTag::Gamma, ..))), "{e}");
}

#[test]
fn dangling_node_and_unknown_tag() {
    let text = fixture("valid.msh").replace("16 2 2 3 3 4 5 1", "16 2 2 3 3 4 5 99");
    let e = read_gmsh(&text).unwrap_err();
    assert_eq!(e.kind, GmshErrorKind::DanglingNode(99));
    let text = fixture("valid.msh").replace("8 1 2 2 2 8 5", "8 1 2 7 7 8 5");
    let e = read_gmsh(&text).unwrap_err();
    assert_eq!(e.kind, GmshErrorKind::UnknownPhysicalTag(7));
}

#[test]
fn clockwise_triangles_are_reoriented() {
    let text = fixture("valid.msh").replace("9 2 2 3 3 1 5 6", "9 2 2 3 3 1 6 5");
    let mesh = read_gmsh(&text).unwrap();
    assert!((mesh.area() - 32.0).abs() < 1e-12);
}

#[test]
fn generated_meshes_round_trip() {
    for mesh in [
        generate_annulus(1.0, 3.0, 3, 17).unwrap(),
        generate_square_frame(1.0, 2.0, 8).unwrap(),
        generate_square_with_hole(1.25, 1.0, 0.3).unwrap(),
    ] {
        let back = read_gmsh(&write_gmsh(&mesh)).unwrap();
        assert_eq!(back, mesh);
    }
}

#[test]
fn annulus_mesh_size_is_brute_force_maximum() {
    let mesh = generate_annulus(1.0, 3.0, 2, 8).unwrap();
    let mut brute = 0.0f64;
    for t in 0..mesh.triangles().len() {
        let p = mesh.triangle_points(t);
        // circumcenter by solving the perpendicular-bisector system
        let (ax, ay) = (p[1][0] - p[0][0], p[1][1] - p[0][1]);
        let (bx, by) = (p[2][0] - p[0][0], p[2][1] - p[0][1]);
        let d = 2.0 * (ax * by - ay * bx);
        let ux = (by * (ax * ax + ay * ay) - ay * (bx * bx + by * by)) / d;
        let uy = (ax * (bx * bx + by * by) - bx * (ax * ax + ay * ay)) / d;
        brute = brute.max(2.0 * ux.hypot(uy));
    }
    assert!((mesh_size(&mesh) - brute).abs() < 1e-12);
}

#[test]
fn annulus_area_converges_quadratically() {
    let exact = std::f64::consts::PI * (9.0 - 1.0);
    for n in [16usize, 32, 64, 128] {
        let mesh = generate_annulus(1.0, 3.0, 2, n).unwrap();
        let rel = (mesh.area() - exact).abs() / exact;
        assert!(rel <= 7.0 / (n * n) as f64, "n = {n}: {rel}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn annulus_invariants(r_in in 0.2f64..2.0, gap in 0.1f64..3.0, nr in 1usize..5, na in 3usize..40) {
        let mesh = generate_annulus(r_in, r_in + gap, nr, na).unwrap();
        prop_assert_eq!(mesh.vertices().len(), (nr + 1) * na);
        prop_assert_eq!(mesh.triangles().len(), 2 * nr * na);
        check_normals(&mesh);
        prop_assert!(mesh.boundary_separation() > 0.0);
        let back = read_gmsh(&write_gmsh(&mesh)).unwrap();
        prop_assert_eq!(back, mesh);
    }

    #[test]
    fn square_frame_area(k in 1usize..6) {
        let mesh = generate_square_frame(1.0, 2.0, 4 * k).unwrap();
        prop_assert!((mesh.area() - 12.0).abs() <= 1e-12);
        check_normals(&mesh);
    }
}
