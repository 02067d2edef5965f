//! ASCII Gmsh MSH 2.2 subset: 2-node lines (type 1) carry the boundary tags
//! through their physical tag (1 = `Gamma`, 2 = `Sigma`), 3-node triangles
//! (type 2) form the domain. Other sections are skipped.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{signed_area, BoundaryTag, Mesh, MeshError, Point};

pub const PHYSICAL_GAMMA: i64 = 1;
pub const PHYSICAL_SIGMA: i64 = 2;
pub const PHYSICAL_DOMAIN: i64 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GmshErrorKind {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("missing section ${0}")]
    MissingSection(&'static str),
    #[error("unsupported element type {0}")]
    UnsupportedElement(i64),
    #[error("unknown physical tag {0} on a boundary line")]
    UnknownPhysicalTag(i64),
    #[error("reference to undefined node {0}")]
    DanglingNode(i64),
    #[error("node has nonzero z coordinate {0}")]
    NonPlanar(f64),
    #[error("degenerate triangle")]
    DegenerateTriangle,
    #[error("mesh invariant violated: {0}")]
    Invariant(MeshError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct GmshError {
    pub line: usize,
    pub kind: GmshErrorKind,
}

fn err(line: usize, kind: GmshErrorKind) -> GmshError {
    GmshError { line, kind }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            let l = l.trim();
            if !l.is_empty() {
                return Some((i + 1, l));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), GmshError> {
        self.next()
            .ok_or_else(|| err(self.last, GmshErrorKind::Malformed(format!("unexpected end of input, expected {what}"))))
    }
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, GmshError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| err(line, GmshErrorKind::Malformed(format!("expected {what}"))))
}

/// Parses MSH 2.2 ASCII text into a validated [`Mesh`].
pub fn read_gmsh(text: &str) -> Result<Mesh, GmshError> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let mut seen_format = false;
    let mut nodes: Option<(usize, Vec<(i64, Point)>)> = None;
    // (line, physical tag, node ids)
    let mut segments: Vec<(usize, i64, [i64; 2])> = Vec::new();
    let mut triangles: Vec<(usize, [i64; 3])> = Vec::new();
    let mut elements_line = None;

    while let Some((ln, line)) = lines.next() {
        match line {
            "$MeshFormat" => {
                let (ln, l) = lines.expect("format line")?;
                let mut tok = l.split_whitespace();
                let version: String = parse(tok.next(), ln, "version")?;
                let file_type: i64 = parse(tok.next(), ln, "file type")?;
                if !version.starts_with("2.") || file_type != 0 {
                    return Err(err(
                        ln,
                        GmshErrorKind::Malformed(format!("only ASCII MSH 2.x is supported (got {version} {file_type})")),
                    ));
                }
                end_section(&mut lines, "$EndMeshFormat")?;
                seen_format = true;
            }
            "$Nodes" => {
                let (ln, l) = lines.expect("node count")?;
                let count: usize = parse(Some(l), ln, "node count")?;
                let mut list = Vec::with_capacity(count);
                for _ in 0..count {
                    let (ln, l) = lines.expect("node")?;
                    let mut tok = l.split_whitespace();
                    let id: i64 = parse(tok.next(), ln, "node id")?;
                    let x: f64 = parse(tok.next(), ln, "x coordinate")?;
                    let y: f64 = parse(tok.next(), ln, "y coordinate")?;
                    let z: f64 = parse(tok.next(), ln, "z coordinate")?;
                    if z != 0.0 {
                        return Err(err(ln, GmshErrorKind::NonPlanar(z)));
                    }
                    list.push((id, [x, y]));
                }
                end_section(&mut lines, "$EndNodes")?;
                nodes = Some((ln, list));
            }
            "$Elements" => {
                elements_line = Some(ln);
                let (ln, l) = lines.expect("element count")?;
                let count: usize = parse(Some(l), ln, "element count")?;
                for _ in 0..count {
                    let (ln, l) = lines.expect("element")?;
                    let tok: Vec<&str> = l.split_whitespace().collect();
                    let _id: i64 = parse(tok.first().copied(), ln, "element id")?;
                    let kind: i64 = parse(tok.get(1).copied(), ln, "element type")?;
                    let ntags: usize = parse(tok.get(2).copied(), ln, "tag count")?;
                    let tags: Vec<i64> = (0..ntags)
                        .map(|k| parse(tok.get(3 + k).copied(), ln, "tag"))
                        .collect::<Result<_, _>>()?;
                    let rest = &tok[(3 + ntags).min(tok.len())..];
                    let node_ids = |n: usize| -> Result<Vec<i64>, GmshError> {
                        if rest.len() != n {
                            return Err(err(ln, GmshErrorKind::Malformed(format!("expected {n} node ids"))));
                        }
                        rest.iter().map(|t| parse(Some(*t), ln, "node id")).collect()
                    };
                    match kind {
                        1 => {
                            let physical = *tags.first().ok_or_else(|| err(ln, GmshErrorKind::UnknownPhysicalTag(0)))?;
                            let ids = node_ids(2)?;
                            segments.push((ln, physical, [ids[0], ids[1]]));
                        }
                        2 => {
                            let ids = node_ids(3)?;
                            triangles.push((ln, [ids[0], ids[1], ids[2]]));
                        }
                        other => return Err(err(ln, GmshErrorKind::UnsupportedElement(other))),
                    }
                }
                end_section(&mut lines, "$EndElements")?;
            }
            l if l.starts_with("$End") => {
                return Err(err(ln, GmshErrorKind::Malformed(format!("unexpected {l}"))));
            }
            l if l.starts_with('$') => {
                let name = &l[1..];
                let end = format!("$End{name}");
                loop {
                    match lines.next() {
                        Some((_, l)) if l == end => break,
                        Some(_) => continue,
                        None => {
                            return Err(err(lines.last, GmshErrorKind::Malformed(format!("unterminated section {l}"))))
                        }
                    }
                }
            }
            _ => return Err(err(ln, GmshErrorKind::Malformed(format!("unexpected content '{line}'")))),
        }
    }

    if !seen_format {
        return Err(err(lines.last, GmshErrorKind::MissingSection("MeshFormat")));
    }
    let (_, node_list) = nodes.ok_or_else(|| err(lines.last, GmshErrorKind::MissingSection("Nodes")))?;
    let elements_line = elements_line.ok_or_else(|| err(lines.last, GmshErrorKind::MissingSection("Elements")))?;

    let id_to_node: HashMap<i64, usize> = node_list.iter().enumerate().map(|(k, (id, _))| (*id, k)).collect();
    // keep nodes referenced by triangles, in file order
    let mut used = vec![false; node_list.len()];
    let mut tri_nodes = Vec::with_capacity(triangles.len());
    for &(ln, ids) in &triangles {
        let mut t = [0usize; 3];
        for (slot, id) in t.iter_mut().zip(ids) {
            *slot = *id_to_node.get(&id).ok_or_else(|| err(ln, GmshErrorKind::DanglingNode(id)))?;
            used[*slot] = true;
        }
        tri_nodes.push((ln, t));
    }
    let mut compact = vec![usize::MAX; node_list.len()];
    let mut vertices = Vec::new();
    for (k, (_, p)) in node_list.iter().enumerate() {
        if used[k] {
            compact[k] = vertices.len();
            vertices.push(*p);
        }
    }
    let mut tris = Vec::with_capacity(tri_nodes.len());
    for (ln, t) in tri_nodes {
        let mut t = t.map(|k| compact[k]);
        let area = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        if area == 0.0 || !area.is_finite() {
            return Err(err(ln, GmshErrorKind::DegenerateTriangle));
        }
        if area < 0.0 {
            t.swap(1, 2);
        }
        tris.push(t);
    }
    let mut facets = Vec::with_capacity(segments.len());
    for &(ln, physical, ids) in &segments {
        let tag = match physical {
            PHYSICAL_GAMMA => BoundaryTag::Gamma,
            PHYSICAL_SIGMA => BoundaryTag::Sigma,
            other => return Err(err(ln, GmshErrorKind::UnknownPhysicalTag(other))),
        };
        let mut v = [0usize; 2];
        for (slot, id) in v.iter_mut().zip(ids) {
            let k = *id_to_node.get(&id).ok_or_else(|| err(ln, GmshErrorKind::DanglingNode(id)))?;
            if compact[k] == usize::MAX {
                return Err(err(ln, GmshErrorKind::Invariant(MeshError::FacetNotOnBoundary(k, k))));
            }
            *slot = compact[k];
        }
        facets.push((v[0], v[1], tag));
    }
    Mesh::new(vertices, tris, &facets).map_err(|e| err(elements_line, GmshErrorKind::Invariant(e)))
}

fn end_section(lines: &mut Lines<'_>, end: &str) -> Result<(), GmshError> {
    let (ln, l) = lines.expect(end)?;
    if l != end {
        return Err(err(ln, GmshErrorKind::Malformed(format!("expected {end}, found '{l}'"))));
    }
    Ok(())
}

/// Writes a mesh in the same subset; coordinates carry 17 significant digits.
pub fn write_gmsh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(out, "{}", mesh.vertices().len());
    for (k, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(out, "{} {:.16e} {:.16e} 0", k + 1, p[0], p[1]);
    }
    out.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(out, "{}", mesh.boundary_facets().len() + mesh.triangles().len());
    let mut id = 1;
    for f in mesh.boundary_facets() {
        let tag = match f.tag {
            BoundaryTag::Gamma => PHYSICAL_GAMMA,
            BoundaryTag::Sigma => PHYSICAL_SIGMA,
        };
        let _ = writeln!(out, "{id} 1 2 {tag} {tag} {} {}", f.vertices[0] + 1, f.vertices[1] + 1);
        id += 1;
    }
    for t in mesh.triangles() {
        let _ = writeln!(
            out,
            "{id} 2 2 {PHYSICAL_DOMAIN} {PHYSICAL_DOMAIN} {} {} {}",
            t[0] + 1,
            t[1] + 1,
            t[2] + 1
        );
        id += 1;
    }
    out.push_str("$EndElements\n");
    out
}
