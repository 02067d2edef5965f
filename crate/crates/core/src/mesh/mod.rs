//! Triangulations of the region between a scatterer boundary (`Gamma`) and an
//! artificial truncation boundary (`Sigma`).

mod generate;
pub mod gmsh;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use generate::{generate_annulus, generate_square_frame, generate_square_with_hole};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    /// Scatterer boundary, carries the Neumann data.
    Gamma,
    /// Truncation boundary, carries the absorbing condition.
    Sigma,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryTag::Gamma => f.write_str("Gamma"),
            BoundaryTag::Sigma => f.write_str("Sigma"),
        }
    }
}

/// A boundary edge. `vertices` follow the counterclockwise order of the
/// adjacent triangle, so the domain lies to the left of `vertices[0] -> vertices[1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFacet {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
    pub triangle: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetGeometry {
    pub midpoint: Point,
    /// Unit normal pointing out of the computational domain.
    pub unit_normal: [f64; 2],
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("invalid mesh parameters: {0}")]
    InvalidParameters(String),
    #[error("triangle {0} references a vertex that does not exist")]
    VertexOutOfRange(usize),
    #[error("triangle {0} has non-positive signed area")]
    NonPositiveArea(usize),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("boundary facet ({0}, {1}) is not a boundary edge of the triangulation")]
    FacetNotOnBoundary(usize, usize),
    #[error("boundary edge ({0}, {1}) carries no tag")]
    UntaggedBoundaryEdge(usize, usize),
    #[error("boundary edge ({0}, {1}) is tagged more than once")]
    DuplicateFacet(usize, usize),
    #[error("the {0} facets do not form closed loops (vertex {1} has {2} incident facets)")]
    OpenLoop(BoundaryTag, usize, usize),
    #[error("no facets tagged {0}")]
    MissingBoundary(BoundaryTag),
    #[error("Gamma and Sigma are not separated (distance {0})")]
    BoundariesTouch(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_facets: Vec<BoundaryFacet>,
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds and validates a mesh. Triangles must be counterclockwise; facets
    /// are given as unordered vertex pairs and get oriented along their triangle.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        facets: &[(usize, usize, BoundaryTag)],
    ) -> Result<Self, MeshError> {
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(MeshError::VertexOutOfRange(t));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(MeshError::NonPositiveArea(t));
            }
        }

        // edge -> (triangle, oriented pair, count)
        let mut edges: HashMap<(usize, usize), (usize, [usize; 2], u8)> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let entry = edges.entry(edge_key(a, b)).or_insert((t, [a, b], 0));
                entry.2 += 1;
                if entry.2 > 2 {
                    return Err(MeshError::NonManifoldEdge(a.min(b), a.max(b)));
                }
            }
        }

        let mut tagged: HashMap<(usize, usize), BoundaryTag> = HashMap::new();
        let mut boundary_facets = Vec::with_capacity(facets.len());
        for &(a, b, tag) in facets {
            let key = edge_key(a, b);
            match edges.get(&key) {
                Some(&(t, oriented, 1)) => {
                    if tagged.insert(key, tag).is_some() {
                        return Err(MeshError::DuplicateFacet(key.0, key.1));
                    }
                    boundary_facets.push(BoundaryFacet { vertices: oriented, tag, triangle: t });
                }
                _ => return Err(MeshError::FacetNotOnBoundary(key.0, key.1)),
            }
        }
        let mesh = Mesh { vertices, triangles, boundary_facets };
        for tag in [BoundaryTag::Gamma, BoundaryTag::Sigma] {
            let mut degree: HashMap<usize, usize> = HashMap::new();
            let mut any = false;
            for f in mesh.facets_with_tag(tag) {
                any = true;
                for v in f.vertices {
                    *degree.entry(v).or_default() += 1;
                }
            }
            if !any {
                return Err(MeshError::MissingBoundary(tag));
            }
            let mut bad: Vec<_> = degree.into_iter().filter(|&(_, d)| d != 2).collect();
            bad.sort_unstable();
            if let Some(&(v, d)) = bad.first() {
                return Err(MeshError::OpenLoop(tag, v, d));
            }
        }
        let mut untagged: Vec<_> =
            edges.iter().filter(|(k, v)| v.2 == 1 && !tagged.contains_key(k)).map(|(k, _)| *k).collect();
        untagged.sort_unstable();
        if let Some(&(a, b)) = untagged.first() {
            return Err(MeshError::UntaggedBoundaryEdge(a, b));
        }
        let sep = mesh.boundary_separation();
        if !(sep > 0.0) {
            return Err(MeshError::BoundariesTouch(sep));
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    pub fn facets_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryFacet> + '_ {
        self.boundary_facets.iter().filter(move |f| f.tag == tag)
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn facet_points(&self, facet: &BoundaryFacet) -> [Point; 2] {
        [self.vertices[facet.vertices[0]], self.vertices[facet.vertices[1]]]
    }

    pub fn facet_geometry(&self, facet: &BoundaryFacet) -> FacetGeometry {
        let [a, b] = self.facet_points(facet);
        let d = [b[0] - a[0], b[1] - a[1]];
        let length = d[0].hypot(d[1]);
        // the domain is on the left of a -> b, so the right normal points outward
        FacetGeometry {
            midpoint: [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
            unit_normal: [d[1] / length, -d[0] / length],
            length,
        }
    }

    /// Sum of triangle areas.
    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                signed_area(a, b, c)
            })
            .sum()
    }

    /// Total length of the facets carrying `tag`.
    pub fn boundary_length(&self, tag: BoundaryTag) -> f64 {
        self.facets_with_tag(tag).map(|f| self.facet_geometry(f).length).sum()
    }

    /// Smallest distance between a `Sigma` facet and a `Gamma` facet.
    pub fn boundary_separation(&self) -> f64 {
        let gamma: Vec<[Point; 2]> =
            self.facets_with_tag(BoundaryTag::Gamma).map(|f| self.facet_points(f)).collect();
        self.facets_with_tag(BoundaryTag::Sigma)
            .flat_map(|s| {
                let s = self.facet_points(s);
                gamma.iter().map(move |g| segment_distance(s, *g))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of distinct edges.
    pub fn edge_count(&self) -> usize {
        let mut keys: Vec<_> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| edge_key(t[k], t[(k + 1) % 3])))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    }
}

/// Maximum triangle circumdiameter.
pub fn mesh_size(mesh: &Mesh) -> f64 {
    (0..mesh.triangles.len())
        .map(|t| circumdiameter(mesh.triangle_points(t)))
        .fold(0.0, f64::max)
}

pub(crate) fn circumdiameter([a, b, c]: [Point; 3]) -> f64 {
    let la = dist(b, c);
    let lb = dist(a, c);
    let lc = dist(a, b);
    la * lb * lc / (2.0 * signed_area(a, b, c).abs())
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub(crate) fn point_segment_distance(p: Point, [a, b]: [Point; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

fn segments_intersect(s: [Point; 2], g: [Point; 2]) -> bool {
    let o1 = signed_area(s[0], s[1], g[0]);
    let o2 = signed_area(s[0], s[1], g[1]);
    let o3 = signed_area(g[0], g[1], s[0]);
    let o4 = signed_area(g[0], g[1], s[1]);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

pub(crate) fn segment_distance(s: [Point; 2], g: [Point; 2]) -> f64 {
    if segments_intersect(s, g) {
        return 0.0;
    }
    point_segment_distance(s[0], g)
        .min(point_segment_distance(s[1], g))
        .min(point_segment_distance(g[0], s))
        .min(point_segment_distance(g[1], s))
}
