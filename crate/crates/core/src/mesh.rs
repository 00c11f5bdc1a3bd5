//! Triangulations of the L-shaped test domain (-1,1)^2 \ (0,1)^2.
//!
//! The coarse mesh partitions the domain into three unit squares, each split
//! into a 5x5 grid of cells with two right triangles per cell. That yields 96
//! vertices and 150 triangles, close to the 100-node coarse mesh the
//! experiments assume. Uniform red refinement produces the level hierarchy;
//! level 1 is the coarse mesh.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

/// Coordinate tolerance for vertex deduplication, in domain units.
pub const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh invariant violated: {0}")]
    Invariant(String),
    #[error("parse error in mesh text at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(&self, other: &Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

/// Triangle as counter-clockwise vertex indices into the mesh vertex array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub v: [usize; 3],
}

impl Triangle {
    pub fn new(v0: usize, v1: usize, v2: usize) -> Self {
        Self { v: [v0, v1, v2] }
    }

    pub fn edges(&self) -> [(usize, usize); 3] {
        [
            (self.v[0], self.v[1]),
            (self.v[1], self.v[2]),
            (self.v[2], self.v[0]),
        ]
    }
}

/// Conforming triangulation with boundary edges and a refinement level.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<Triangle>,
    /// Oriented boundary edges (domain on the left), each owned by one triangle.
    pub boundary_edges: Vec<(usize, usize)>,
    /// Refinement level; the coarse mesh is level 1.
    pub level: u32,
}

/// Maximum element diameter (longest edge over all triangles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSize {
    pub h: f64,
}

impl Mesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn signed_area(&self, t: &Triangle) -> f64 {
        let [a, b, c] = t.v;
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        0.5 * ((pb.x - pa.x) * (pc.y - pa.y) - (pc.x - pa.x) * (pb.y - pa.y))
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| self.signed_area(t)).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|&(a, b)| self.vertices[a].dist(&self.vertices[b]))
            .sum()
    }

    /// Distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        let mut edges = std::collections::HashSet::new();
        for t in &self.triangles {
            for (a, b) in t.edges() {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    /// True for vertices that lie on some boundary edge.
    pub fn boundary_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertex_count()];
        for &(a, b) in &self.boundary_edges {
            mask[a] = true;
            mask[b] = true;
        }
        mask
    }

    /// Checks the structural invariants; used by tests and after I/O.
    pub fn validate(&self) -> Result<(), MeshError> {
        if self.level < 1 {
            return Err(MeshError::Invariant("level must be >= 1".into()));
        }
        for (i, p) in self.vertices.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(MeshError::Invariant(format!("vertex {i} not finite")));
            }
        }
        for (i, t) in self.triangles.iter().enumerate() {
            let [a, b, c] = t.v;
            if a == b || b == c || a == c {
                return Err(MeshError::Invariant(format!("triangle {i} repeats a vertex")));
            }
            if a >= self.vertex_count() || b >= self.vertex_count() || c >= self.vertex_count() {
                return Err(MeshError::Invariant(format!("triangle {i} index out of range")));
            }
            if self.signed_area(t) <= 0.0 {
                return Err(MeshError::Invariant(format!(
                    "triangle {i} is not counter-clockwise (signed area {})",
                    self.signed_area(t)
                )));
            }
        }
        // Edge incidence: boundary edges in exactly one triangle, interior in two.
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for (a, b) in t.edges() {
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        for (&(a, b), &c) in &counts {
            if c > 2 {
                return Err(MeshError::Invariant(format!(
                    "edge ({a},{b}) shared by {c} triangles"
                )));
            }
        }
        let mut boundary_set = std::collections::HashSet::new();
        for &(a, b) in &self.boundary_edges {
            boundary_set.insert((a.min(b), a.max(b)));
        }
        for (&e, &c) in &counts {
            let on_boundary = boundary_set.contains(&e);
            if on_boundary && c != 1 {
                return Err(MeshError::Invariant(format!(
                    "boundary edge {e:?} in {c} triangles"
                )));
            }
            if !on_boundary && c != 2 {
                return Err(MeshError::Invariant(format!(
                    "interior edge {e:?} in {c} triangles"
                )));
            }
        }
        if boundary_set.len() != self.boundary_edges.len() {
            return Err(MeshError::Invariant("duplicate boundary edge".into()));
        }
        for &e in &boundary_set {
            if !counts.contains_key(&e) {
                return Err(MeshError::Invariant(format!(
                    "boundary edge {e:?} not in any triangle"
                )));
            }
        }
        // Duplicate vertices within tolerance: sweep on x with a sorted index.
        let mut order: Vec<usize> = (0..self.vertex_count()).collect();
        order.sort_by(|&i, &j| {
            self.vertices[i]
                .x
                .partial_cmp(&self.vertices[j].x)
                .unwrap()
                .then(self.vertices[i].y.partial_cmp(&self.vertices[j].y).unwrap())
        });
        for w in 0..order.len() {
            let i = order[w];
            for &j in order[w + 1..].iter() {
                if self.vertices[j].x - self.vertices[i].x > DEDUP_TOL {
                    break;
                }
                if self.vertices[i].dist(&self.vertices[j]) <= DEDUP_TOL {
                    return Err(MeshError::Invariant(format!(
                        "vertices {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Plain-text serialization:
    /// header `vertices N triangles T boundary_edges B level L`, then N lines
    /// `x y`, T lines `v0 v1 v2`, B lines `va vb`. Indices zero-based.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "vertices {} triangles {} boundary_edges {} level {}",
            self.vertex_count(),
            self.triangle_count(),
            self.boundary_edges.len(),
            self.level
        );
        for p in &self.vertices {
            let _ = writeln!(s, "{} {}", p.x, p.y);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t.v[0], t.v[1], t.v[2]);
        }
        for &(a, b) in &self.boundary_edges {
            let _ = writeln!(s, "{} {}", a, b);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, MeshError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or(MeshError::Parse { line: 1, msg: "empty input".into() })?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 8
            || toks[0] != "vertices"
            || toks[2] != "triangles"
            || toks[4] != "boundary_edges"
            || toks[6] != "level"
        {
            return Err(MeshError::Parse { line: 1, msg: format!("bad header: {header}") });
        }
        let parse_usize = |s: &str, line: usize| {
            s.parse::<usize>()
                .map_err(|e| MeshError::Parse { line, msg: e.to_string() })
        };
        let nv = parse_usize(toks[1], 1)?;
        let nt = parse_usize(toks[3], 1)?;
        let nb = parse_usize(toks[5], 1)?;
        let level = toks[7]
            .parse::<u32>()
            .map_err(|e| MeshError::Parse { line: 1, msg: e.to_string() })?;
        let mut vertices = Vec::with_capacity(nv);
        let mut triangles = Vec::with_capacity(nt);
        let mut boundary_edges = Vec::with_capacity(nb);
        for _ in 0..nv {
            let (ln, line) = lines
                .next()
                .ok_or(MeshError::Parse { line: 0, msg: "truncated vertex list".into() })?;
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 2 {
                return Err(MeshError::Parse { line: ln + 1, msg: "expected `x y`".into() });
            }
            let x = t[0]
                .parse::<f64>()
                .map_err(|e| MeshError::Parse { line: ln + 1, msg: e.to_string() })?;
            let y = t[1]
                .parse::<f64>()
                .map_err(|e| MeshError::Parse { line: ln + 1, msg: e.to_string() })?;
            vertices.push(Point2::new(x, y));
        }
        for _ in 0..nt {
            let (ln, line) = lines
                .next()
                .ok_or(MeshError::Parse { line: 0, msg: "truncated triangle list".into() })?;
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return Err(MeshError::Parse { line: ln + 1, msg: "expected `v0 v1 v2`".into() });
            }
            triangles.push(Triangle::new(
                parse_usize(t[0], ln + 1)?,
                parse_usize(t[1], ln + 1)?,
                parse_usize(t[2], ln + 1)?,
            ));
        }
        for _ in 0..nb {
            let (ln, line) = lines
                .next()
                .ok_or(MeshError::Parse { line: 0, msg: "truncated boundary list".into() })?;
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 2 {
                return Err(MeshError::Parse { line: ln + 1, msg: "expected `va vb`".into() });
            }
            boundary_edges.push((parse_usize(t[0], ln + 1)?, parse_usize(t[1], ln + 1)?));
        }
        let mesh = Mesh { vertices, triangles, boundary_edges, level };
        mesh.validate()?;
        Ok(mesh)
    }
}

/// Oriented boundary edges: edges owned by exactly one triangle, in the
/// orientation that triangle traverses them (domain on the left).
fn derive_boundary_edges(triangles: &[Triangle]) -> Vec<(usize, usize)> {
    let mut counts: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
    for t in triangles {
        for (a, b) in t.edges() {
            let key = (a.min(b), a.max(b));
            let e = counts.entry(key).or_insert((0, (a, b)));
            e.0 += 1;
        }
    }
    let mut out: Vec<(usize, usize)> = counts
        .values()
        .filter(|(c, _)| *c == 1)
        .map(|&(_, e)| e)
        .collect();
    out.sort_unstable();
    out
}

/// Level-1 triangulation of (-1,1)^2 \ (0,1)^2: three unit squares in a 5x5
/// cell layout, two right triangles per cell, shared edges merged.
pub fn make_lshape_coarse() -> Mesh {
    const CELLS: i64 = 5;
    // Squares by lower-left corner on the integer lattice scaled by CELLS.
    let squares = [(-CELLS, -CELLS), (0, -CELLS), (-CELLS, 0)];
    let mut key_to_index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut vertices: Vec<Point2> = Vec::new();
    let mut triangles: Vec<Triangle> = Vec::new();
    let step = 1.0 / CELLS as f64;
    let mut vertex_at = |ix: i64, iy: i64, vertices: &mut Vec<Point2>| -> usize {
        *key_to_index.entry((ix, iy)).or_insert_with(|| {
            vertices.push(Point2::new(ix as f64 * step, iy as f64 * step));
            vertices.len() - 1
        })
    };
    for &(sx, sy) in &squares {
        for cy in 0..CELLS {
            for cx in 0..CELLS {
                let x0 = sx + cx;
                let y0 = sy + cy;
                let ll = vertex_at(x0, y0, &mut vertices);
                let lr = vertex_at(x0 + 1, y0, &mut vertices);
                let ur = vertex_at(x0 + 1, y0 + 1, &mut vertices);
                let ul = vertex_at(x0, y0 + 1, &mut vertices);
                triangles.push(Triangle::new(ll, lr, ur));
                triangles.push(Triangle::new(ll, ur, ul));
            }
        }
    }
    let boundary_edges = derive_boundary_edges(&triangles);
    Mesh { vertices, triangles, boundary_edges, level: 1 }
}

/// Uniform red refinement: each triangle is replaced by the four children cut
/// off by its edge midpoints. Children are similar to the parent at half
/// scale, so the mesh size halves exactly and shape regularity is unchanged.
pub fn refine_uniform(m: &Mesh) -> Mesh {
    let mut vertices = m.vertices.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point2>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            let p = vertices[a].midpoint(&vertices[b]);
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * m.triangle_count());
    for t in &m.triangles {
        let [a, b, c] = t.v;
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        triangles.push(Triangle::new(a, ab, ca));
        triangles.push(Triangle::new(b, bc, ab));
        triangles.push(Triangle::new(c, ca, bc));
        triangles.push(Triangle::new(ab, bc, ca));
    }
    let boundary_edges = derive_boundary_edges(&triangles);
    Mesh { vertices, triangles, boundary_edges, level: m.level + 1 }
}

/// h = maximum longest-edge length over all triangles.
pub fn mesh_size(m: &Mesh) -> MeshSize {
    let mut h: f64 = 0.0;
    for t in &m.triangles {
        for (a, b) in t.edges() {
            h = h.max(m.vertices[a].dist(&m.vertices[b]));
        }
    }
    MeshSize { h }
}

/// The level-k mesh: coarse mesh refined k-1 times.
pub fn lshape_at_level(level: u32) -> Mesh {
    assert!(level >= 1, "mesh levels start at 1");
    let mut m = make_lshape_coarse();
    for _ in 1..level {
        m = refine_uniform(&m);
    }
    m
}
