use std::collections::HashMap;

use super::{dist, BoundaryTag, Mesh, MeshError, Point};

/// Structured polar mesh of `r_inner <= |x| <= r_outer`. The inner polygon is
/// tagged `Gamma` and the outer one `Sigma`.
pub fn generate_annulus(
    r_inner: f64,
    r_outer: f64,
    n_radial: usize,
    n_angular: usize,
) -> Result<Mesh, MeshError> {
    if !(r_inner > 0.0 && r_outer > r_inner && r_outer.is_finite()) {
        return Err(MeshError::InvalidParameters(format!(
            "annulus radii must satisfy 0 < r_inner < r_outer (got {r_inner}, {r_outer})"
        )));
    }
    if n_radial < 1 || n_angular < 3 {
        return Err(MeshError::InvalidParameters(format!(
            "annulus needs n_radial >= 1 and n_angular >= 3 (got {n_radial}, {n_angular})"
        )));
    }
    let mut vertices = Vec::with_capacity((n_radial + 1) * n_angular);
    for i in 0..=n_radial {
        let r = r_inner + (r_outer - r_inner) * i as f64 / n_radial as f64;
        for j in 0..n_angular {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_angular as f64;
            vertices.push([r * phi.cos(), r * phi.sin()]);
        }
    }
    let idx = |i: usize, j: usize| i * n_angular + j % n_angular;
    let mut triangles = Vec::with_capacity(2 * n_radial * n_angular);
    for i in 0..n_radial {
        for j in 0..n_angular {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut facets = Vec::with_capacity(2 * n_angular);
    for j in 0..n_angular {
        facets.push((idx(0, j), idx(0, j + 1), BoundaryTag::Gamma));
        facets.push((idx(n_radial, j), idx(n_radial, j + 1), BoundaryTag::Sigma));
    }
    Mesh::new(vertices, triangles, &facets)
}

/// Uniform `n x n` grid on `[-b_half, b_half]^2` with the cells inside
/// `[-a_half, a_half]^2` removed; every cell is split into two triangles.
pub fn generate_square_frame(a_half: f64, b_half: f64, n: usize) -> Result<Mesh, MeshError> {
    if !(a_half > 0.0 && b_half > a_half && b_half.is_finite()) {
        return Err(MeshError::InvalidParameters(format!(
            "square frame needs 0 < a_half < b_half (got {a_half}, {b_half})"
        )));
    }
    let hole = a_half / b_half * n as f64;
    let hole_cells = hole.round() as usize;
    if (hole - hole_cells as f64).abs() > 1e-9 || hole_cells == 0 || !(n - hole_cells).is_multiple_of(2) {
        return Err(MeshError::InvalidParameters(format!(
            "hole [-{a_half}, {a_half}]^2 is not aligned with an {n} x {n} grid on [-{b_half}, {b_half}]^2"
        )));
    }
    let offset = (n - hole_cells) / 2;
    if offset == 0 {
        return Err(MeshError::InvalidParameters(format!("grid size {n} too small: hole touches the outer boundary")));
    }
    let in_hole = |i: usize| i >= offset && i < offset + hole_cells;
    let spacing = 2.0 * b_half / n as f64;

    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut vertex = |i: usize, j: usize, vertices: &mut Vec<Point>| {
        *index.entry((i, j)).or_insert_with(|| {
            vertices.push([-b_half + i as f64 * spacing, -b_half + j as f64 * spacing]);
            vertices.len() - 1
        })
    };
    for j in 0..n {
        for i in 0..n {
            if in_hole(i) && in_hole(j) {
                continue;
            }
            let p00 = vertex(i, j, &mut vertices);
            let p10 = vertex(i + 1, j, &mut vertices);
            let p11 = vertex(i + 1, j + 1, &mut vertices);
            let p01 = vertex(i, j + 1, &mut vertices);
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
        }
    }
    let limit = a_half + 0.5 * spacing;
    let facets = classify_boundary(&vertices, &triangles, |m| {
        if m[0].abs() < limit && m[1].abs() < limit {
            BoundaryTag::Gamma
        } else {
            BoundaryTag::Sigma
        }
    });
    Mesh::new(vertices, triangles, &facets)
}

/// Square `[-half_side, half_side]^2` minus a polygonal disc of the given radius
/// (vertices on the circle), with mesh spacing close to `target_h`.
///
/// Points on the circle and on the square are paired along rays from the
/// origin and joined by uniformly spaced layers.
pub fn generate_square_with_hole(half_side: f64, radius: f64, target_h: f64) -> Result<Mesh, MeshError> {
    if !(radius > 0.0 && half_side > radius && target_h > 0.0 && half_side.is_finite()) {
        return Err(MeshError::InvalidParameters(format!(
            "square with hole needs 0 < radius < half_side and h > 0 (got {half_side}, {radius}, {target_h})"
        )));
    }
    let per_side = 2 * (half_side / target_h).ceil().max(1.0) as usize;
    let n_angular = 4 * per_side;
    let step = 2.0 * half_side / per_side as f64;
    let max_gap = half_side * std::f64::consts::SQRT_2 - radius;
    let n_layers = (max_gap / target_h).ceil().max(1.0) as usize;

    let outer: Vec<Point> = (0..n_angular)
        .map(|k| square_perimeter_point(half_side, k as f64 * step))
        .collect();
    let mut vertices = Vec::with_capacity((n_layers + 1) * n_angular);
    for layer in 0..=n_layers {
        let t = layer as f64 / n_layers as f64;
        for s in &outer {
            let norm = s[0].hypot(s[1]);
            let c = [radius * s[0] / norm, radius * s[1] / norm];
            vertices.push([(1.0 - t) * c[0] + t * s[0], (1.0 - t) * c[1] + t * s[1]]);
        }
    }
    let idx = |layer: usize, k: usize| layer * n_angular + k % n_angular;
    let mut triangles = Vec::with_capacity(2 * n_layers * n_angular);
    for layer in 0..n_layers {
        for k in 0..n_angular {
            let (a, b, c, d) = (idx(layer, k), idx(layer + 1, k), idx(layer + 1, k + 1), idx(layer, k + 1));
            if dist(vertices[a], vertices[c]) <= dist(vertices[b], vertices[d]) {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    let mut facets = Vec::with_capacity(2 * n_angular);
    for k in 0..n_angular {
        facets.push((idx(0, k), idx(0, k + 1), BoundaryTag::Gamma));
        facets.push((idx(n_layers, k), idx(n_layers, k + 1), BoundaryTag::Sigma));
    }
    Mesh::new(vertices, triangles, &facets)
}

/// Point at arclength `s` along the square boundary, starting at `(half, 0)`
/// and running counterclockwise.
fn square_perimeter_point(half: f64, s: f64) -> Point {
    let side = 2.0 * half;
    let s = s.rem_euclid(4.0 * side);
    if s < half {
        [half, s]
    } else if s < half + side {
        [half - (s - half), half]
    } else if s < half + 2.0 * side {
        [-half, half - (s - half - side)]
    } else if s < half + 3.0 * side {
        [-half + (s - half - 2.0 * side), -half]
    } else {
        [half, -half + (s - half - 3.0 * side)]
    }
}

/// Tags every boundary edge (edge of exactly one triangle) by its midpoint.
fn classify_boundary(
    vertices: &[Point],
    triangles: &[[usize; 3]],
    tag_of: impl Fn(Point) -> BoundaryTag,
) -> Vec<(usize, usize, BoundaryTag)> {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut edges: Vec<_> = count.into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect();
    edges.sort_unstable();
    edges
        .into_iter()
        .map(|(a, b)| {
            let m = [0.5 * (vertices[a][0] + vertices[b][0]), 0.5 * (vertices[a][1] + vertices[b][1])];
            (a, b, tag_of(m))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::mesh_size;

    #[test]
    fn annulus_counts() {
        let m = generate_annulus(1.0, 3.0, 2, 8).unwrap();
        assert_eq!(m.vertices().len(), 24);
        assert_eq!(m.triangles().len(), 32);
        assert_eq!(m.facets_with_tag(BoundaryTag::Gamma).count(), 8);
        assert_eq!(m.facets_with_tag(BoundaryTag::Sigma).count(), 8);
    }

    #[test]
    fn annulus_refinement_halves_h() {
        let hs: Vec<f64> = [2, 4, 8, 16]
            .iter()
            .map(|&n| mesh_size(&generate_annulus(1.0, 3.0, n, 4 * n).unwrap()))
            .collect();
        for w in hs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
        }
    }

    #[test]
    fn annulus_rejects_bad_input() {
        assert!(generate_annulus(3.0, 1.0, 2, 8).is_err());
        assert!(generate_annulus(1.0, 3.0, 0, 8).is_err());
        assert!(generate_annulus(1.0, 3.0, 2, 2).is_err());
    }

    #[test]
    fn square_frame_counts() {
        let m = generate_square_frame(1.0, 2.0, 4).unwrap();
        assert_eq!(m.triangles().len(), 24);
        assert_eq!(m.facets_with_tag(BoundaryTag::Gamma).count(), 8);
        assert_eq!(m.facets_with_tag(BoundaryTag::Sigma).count(), 16);
        assert!((m.area() - 12.0).abs() < 1e-12);

        let m = generate_square_frame(1.0, 3.0, 6).unwrap();
        assert_eq!(m.triangles().len(), 2 * (36 - 4));
        assert!((m.boundary_length(BoundaryTag::Gamma) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn square_frame_alignment() {
        assert!(matches!(generate_square_frame(1.0, 2.0, 3), Err(MeshError::InvalidParameters(_))));
        assert!(matches!(generate_square_frame(1.0, 2.0, 2), Err(MeshError::InvalidParameters(_))));
        assert!(generate_square_frame(1.0, 2.0, 8).is_ok());
    }

    #[test]
    fn square_with_hole_is_valid() {
        for s in [2.25, 2.5, 3.0, 6.0] {
            let m = generate_square_with_hole(0.5 * s, 1.0, 0.2).unwrap();
            // domain on the left of every facet: the enclosed area follows from the boundary
            let enclosed: f64 = m
                .boundary_facets()
                .iter()
                .map(|f| {
                    let [a, b] = m.facet_points(f);
                    0.5 * (a[0] * b[1] - a[1] * b[0])
                })
                .sum();
            assert!((m.area() - enclosed).abs() < 1e-10);
            assert!(m.area() < s * s - 3.0 && m.area() > s * s - std::f64::consts::PI);
            assert!((m.boundary_length(BoundaryTag::Sigma) - 4.0 * s).abs() < 1e-12);
            assert!(mesh_size(&m) < 0.5);
        }
    }
}
