//! Adaptive complex-plane grids for pseudospectrum computation.
//!
//! A structured triangular grid covers a window of the complex plane, the
//! resolvent norm is sampled at every vertex, and triangles straddling a
//! requested level set (in log10 of the norm) are red-refined until they
//! reach the target depth. Hanging nodes are closed by green bisection, so
//! linear interpolation stays continuous and marching-triangles extraction
//! produces chained isolines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{resolvent_norm, LinalgError, ResolventOpts, ResolventQuery};
use crate::sparse::SparseComplexMatrix;

/// Decades added above the largest finite sample when clamping infinities
/// for interpolation.
const INFINITY_CLAMP_DECADES: f64 = 3.0;

/// Endpoint merge tolerance for isoline chaining.
const CHAIN_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("window is degenerate: {0}")]
    DegenerateWindow(String),
    #[error("initial subdivision must be >= 4, got {0}")]
    SubdivisionTooSmall(usize),
    #[error("level list must be strictly increasing and positive")]
    BadLevels,
    #[error("grid evaluation failed at z = {z}: {source}")]
    Evaluation { z: Complex64, source: LinalgError },
    #[error("csv parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Rectangular window in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, GridError> {
        if !(re_min < re_max && im_min < im_max)
            || !re_min.is_finite()
            || !re_max.is_finite()
            || !im_min.is_finite()
            || !im_max.is_finite()
        {
            return Err(GridError::DegenerateWindow(format!(
                "[{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    /// Bounding box of a field-of-values polygon, dilated on every side.
    pub fn from_fov(poly: &crate::linalg::FovPolygon, margin: f64) -> Result<Self, GridError> {
        let (re_min, re_max, im_min, im_max) = poly.bounding_box();
        // Degenerate polygons (segments, points) still get a 2D window.
        let pad = margin.max(1e-3);
        Self::new(re_min - pad, re_max + pad, im_min - pad, im_max + pad)
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

/// Strictly increasing positive epsilon levels; the target level sets are
/// resolvent norm = 1 / epsilon.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSpec {
    epsilons: Vec<f64>,
}

impl LevelSpec {
    pub fn new(mut epsilons: Vec<f64>) -> Result<Self, GridError> {
        if epsilons.is_empty() {
            return Err(GridError::BadLevels);
        }
        epsilons.sort_by(|a, b| a.partial_cmp(b).expect("levels must not be NaN"));
        for w in epsilons.windows(2) {
            if w[0] >= w[1] {
                return Err(GridError::BadLevels);
            }
        }
        if epsilons[0] <= 0.0 || !epsilons.iter().all(|e| e.is_finite()) {
            return Err(GridError::BadLevels);
        }
        Ok(Self { epsilons })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn max_epsilon(&self) -> f64 {
        *self.epsilons.last().unwrap()
    }

    pub fn min_epsilon(&self) -> f64 {
        self.epsilons[0]
    }
}

/// Triangle of the complex-plane grid with its red-refinement depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridTri {
    pub v: [usize; 3],
    pub depth: u32,
}

/// Evaluated triangulation of a complex-plane window.
///
/// `values[i]` is the resolvent norm at `vertices[i]` (infinity for singular
/// shifts, NaN while unevaluated).
#[derive(Debug, Clone)]
pub struct ComplexGrid {
    pub vertices: Vec<Complex64>,
    pub values: Vec<f64>,
    pub triangles: Vec<GridTri>,
    /// Total vertex evaluations spent on this grid.
    pub evaluations: usize,
    /// Set when adaptive refinement stopped on the evaluation budget.
    pub budget_exceeded: bool,
}

/// Per-point resolvent evaluation; `attempt` reseeds retries.
pub trait ResolventEvaluator: Sync {
    fn eval(&self, z: Complex64, attempt: u32) -> Result<f64, LinalgError>;
}

fn reseeded(opts: &ResolventOpts, attempt: u32) -> ResolventOpts {
    let mut o = *opts;
    o.seed = o.seed.wrapping_add(attempt as u64 * 0x9E3779B97F4A7C15);
    o
}

/// Resolvent norm of z I - A.
pub struct MatrixResolvent<'a> {
    pub a: &'a SparseComplexMatrix,
    pub opts: ResolventOpts,
}

impl ResolventEvaluator for MatrixResolvent<'_> {
    fn eval(&self, z: Complex64, attempt: u32) -> Result<f64, LinalgError> {
        let opts = reseeded(&self.opts, attempt);
        Ok(resolvent_norm(&ResolventQuery::plain(z, self.a), &opts)?.as_f64())
    }
}

/// Resolvent norm of z I - A B^{-1}.
pub struct PreconditionedResolvent<'a> {
    pub a: &'a SparseComplexMatrix,
    pub b: &'a SparseComplexMatrix,
    pub opts: ResolventOpts,
}

impl ResolventEvaluator for PreconditionedResolvent<'_> {
    fn eval(&self, z: Complex64, attempt: u32) -> Result<f64, LinalgError> {
        let opts = reseeded(&self.opts, attempt);
        Ok(resolvent_norm(&ResolventQuery::preconditioned(z, self.a, self.b), &opts)?.as_f64())
    }
}

/// 1x1 operator [a]: resolvent norm is 1 / |z - a|. The simplest exact
/// reference, used by tests.
pub struct ScalarResolvent {
    pub a: Complex64,
}

impl ResolventEvaluator for ScalarResolvent {
    fn eval(&self, z: Complex64, _attempt: u32) -> Result<f64, LinalgError> {
        let d = (z - self.a).norm();
        Ok(if d == 0.0 { f64::INFINITY } else { 1.0 / d })
    }
}

/// Structured triangulation of the window with 2 n^2 triangles.
pub fn initial_grid(window: &Window, n: usize) -> Result<ComplexGrid, GridError> {
    if n < 4 {
        return Err(GridError::SubdivisionTooSmall(n));
    }
    initial_grid_rect(window, n, n)
}

/// Structured triangulation with separate subdivision counts per axis, for
/// wide or tall windows where square cells matter more than the count.
pub fn initial_grid_rect(
    window: &Window,
    nx: usize,
    ny: usize,
) -> Result<ComplexGrid, GridError> {
    if nx < 1 || ny < 1 {
        return Err(GridError::SubdivisionTooSmall(nx.min(ny)));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for row in 0..=ny {
        let im = window.im_min + window.height() * row as f64 / ny as f64;
        for col in 0..=nx {
            let re = window.re_min + window.width() * col as f64 / nx as f64;
            vertices.push(Complex64::new(re, im));
        }
    }
    let at = |row: usize, col: usize| row * (nx + 1) + col;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for row in 0..ny {
        for col in 0..nx {
            let ll = at(row, col);
            let lr = at(row, col + 1);
            let ul = at(row + 1, col);
            let ur = at(row + 1, col + 1);
            triangles.push(GridTri { v: [ll, lr, ur], depth: 0 });
            triangles.push(GridTri { v: [ll, ur, ul], depth: 0 });
        }
    }
    let values = vec![f64::NAN; vertices.len()];
    Ok(ComplexGrid { vertices, values, triangles, evaluations: 0, budget_exceeded: false })
}

/// Near-square cells: `n` subdivisions along the longer side, proportionally
/// fewer along the shorter one.
pub fn initial_grid_aspect(window: &Window, n: usize) -> Result<ComplexGrid, GridError> {
    if n < 4 {
        return Err(GridError::SubdivisionTooSmall(n));
    }
    let (w, h) = (window.width(), window.height());
    if w >= h {
        let ny = ((n as f64 * h / w).round() as usize).max(2);
        initial_grid_rect(window, n, ny)
    } else {
        let nx = ((n as f64 * w / h).round() as usize).max(2);
        initial_grid_rect(window, nx, n)
    }
}

impl ComplexGrid {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_diameter(&self, t: &GridTri) -> f64 {
        let p = [self.vertices[t.v[0]], self.vertices[t.v[1]], self.vertices[t.v[2]]];
        (p[0] - p[1])
            .norm()
            .max((p[1] - p[2]).norm())
            .max((p[2] - p[0]).norm())
    }

    pub fn finest_diameter(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| self.triangle_diameter(t))
            .fold(f64::INFINITY, f64::min)
    }

    /// Resolution achieved along the requested level sets: the largest
    /// diameter among triangles straddling any of them. This is the scale
    /// that bounds isoline extraction error (small closure triangles do not
    /// help accuracy elsewhere).
    pub fn level_set_resolution(&self, levels: &LevelSpec) -> f64 {
        let logs = self.clamped_logs();
        let level_logs: Vec<f64> =
            levels.epsilons().iter().map(|e| (1.0 / e).log10()).collect();
        let mut worst: f64 = 0.0;
        for t in &self.triangles {
            if straddles(&logs, t, &level_logs) {
                worst = worst.max(self.triangle_diameter(t));
            }
        }
        if worst == 0.0 {
            self.finest_diameter()
        } else {
            worst
        }
    }

    pub fn total_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let a = self.vertices[t.v[0]];
                let b = self.vertices[t.v[1]];
                let c = self.vertices[t.v[2]];
                0.5 * ((b - a).re * (c - a).im - (c - a).re * (b - a).im).abs()
            })
            .sum()
    }

    /// Per-vertex log10 values with infinities clamped a fixed number of
    /// decades above the largest finite sample.
    pub fn clamped_logs(&self) -> Vec<f64> {
        let mut max_finite = f64::NEG_INFINITY;
        for &v in &self.values {
            if v.is_finite() && v > 0.0 {
                max_finite = max_finite.max(v.log10());
            }
        }
        if !max_finite.is_finite() {
            max_finite = 0.0;
        }
        let clamp = max_finite + INFINITY_CLAMP_DECADES;
        self.values
            .iter()
            .map(|&v| {
                if !v.is_finite() {
                    clamp
                } else if v <= 0.0 {
                    -clamp.abs() - INFINITY_CLAMP_DECADES
                } else {
                    v.log10().min(clamp)
                }
            })
            .collect()
    }

    /// Structural conformity: every edge is shared by at most two triangles
    /// and no vertex hangs on the interior of a used edge.
    pub fn check_conforming(&self) -> Result<(), GridError> {
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in &self.triangles {
            for (a, b) in tri_edges(t) {
                *counts.entry(key(a, b)).or_insert(0) += 1;
            }
        }
        for (&(a, b), &c) in &counts {
            if c > 2 {
                return Err(GridError::DegenerateWindow(format!(
                    "edge ({a},{b}) shared by {c} triangles"
                )));
            }
        }
        let vertex_keys: std::collections::HashMap<(i64, i64), usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, p)| ((quantize(p.re), quantize(p.im)), i))
            .collect();
        for (&(a, b), _) in counts.iter() {
            let mid = (self.vertices[a] + self.vertices[b]) * 0.5;
            if let Some(&m) = vertex_keys.get(&(quantize(mid.re), quantize(mid.im))) {
                if m != a && m != b {
                    return Err(GridError::DegenerateWindow(format!(
                        "hanging node {m} on edge ({a},{b})"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn quantize(x: f64) -> i64 {
    (x * 1e12).round() as i64
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn tri_edges(t: &GridTri) -> [(usize, usize); 3] {
    [(t.v[0], t.v[1]), (t.v[1], t.v[2]), (t.v[2], t.v[0])]
}

/// Fills every unevaluated vertex value; vertices that already carry a value
/// keep it, so re-running is idempotent. Failures retry once with a reseed;
/// a second failure aborts.
pub fn evaluate_grid(
    grid: &mut ComplexGrid,
    ev: &dyn ResolventEvaluator,
) -> Result<(), GridError> {
    let missing: Vec<usize> = (0..grid.values.len())
        .filter(|&i| grid.values[i].is_nan())
        .collect();
    if missing.is_empty() {
        return Ok(());
    }
    let vertices = &grid.vertices;
    let results: Vec<(usize, Result<f64, LinalgError>)> = missing
        .par_iter()
        .map(|&i| {
            let z = vertices[i];
            let r = match ev.eval(z, 0) {
                Ok(v) => Ok(v),
                Err(_) => ev.eval(z, 1),
            };
            (i, r)
        })
        .collect();
    for (i, r) in results {
        match r {
            Ok(v) => grid.values[i] = v,
            Err(source) => return Err(GridError::Evaluation { z: grid.vertices[i], source }),
        }
    }
    grid.evaluations += missing.len();
    Ok(())
}

fn straddles(logs: &[f64], t: &GridTri, level_logs: &[f64]) -> bool {
    let a = logs[t.v[0]];
    let b = logs[t.v[1]];
    let c = logs[t.v[2]];
    let lo = a.min(b).min(c);
    let hi = a.max(b).max(c);
    level_logs.iter().any(|&l| lo <= l && l <= hi && lo < hi)
}

/// Red refinement of straddling triangles with green-bisection closure,
/// repeated until every straddling triangle sits at `max_depth` or the
/// evaluation budget runs out (which sets the grid's warning flag).
pub fn refine_adaptive(
    mut grid: ComplexGrid,
    levels: &LevelSpec,
    max_depth: u32,
    budget: usize,
    ev: &dyn ResolventEvaluator,
) -> Result<ComplexGrid, GridError> {
    evaluate_grid(&mut grid, ev)?;
    let level_logs: Vec<f64> = levels.epsilons().iter().map(|e| (1.0 / e).log10()).collect();
    loop {
        let logs = grid.clamped_logs();
        let marked: Vec<bool> = grid
            .triangles
            .iter()
            .map(|t| t.depth < max_depth && straddles(&logs, t, &level_logs))
            .collect();
        if !marked.iter().any(|&m| m) {
            break;
        }
        if grid.evaluations >= budget {
            grid.budget_exceeded = true;
            break;
        }

        // Close the red set: any triangle with two or more split edges is
        // itself red-refined, iterated to a fixed point.
        let mut red = marked;
        loop {
            let mut red_edges: std::collections::HashSet<(usize, usize)> =
                std::collections::HashSet::new();
            for (t, &is_red) in grid.triangles.iter().zip(&red) {
                if is_red {
                    for (a, b) in tri_edges(t) {
                        red_edges.insert(key(a, b));
                    }
                }
            }
            let mut changed = false;
            for (i, t) in grid.triangles.iter().enumerate() {
                if red[i] {
                    continue;
                }
                let split_count = tri_edges(t)
                    .iter()
                    .filter(|&&(a, b)| red_edges.contains(&key(a, b)))
                    .count();
                if split_count >= 2 {
                    red[i] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        // Midpoints of every edge of a red triangle (BTreeMap keeps vertex
        // numbering deterministic).
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (t, &is_red) in grid.triangles.iter().zip(&red) {
            if is_red {
                for (a, b) in tri_edges(t) {
                    midpoint.entry(key(a, b)).or_insert(0);
                }
            }
        }
        let base = grid.vertices.len();
        for (i, (&(a, b), idx)) in midpoint.iter_mut().enumerate() {
            *idx = base + i;
            let _ = (a, b);
        }
        {
            let mut new_pts: Vec<Complex64> = vec![Complex64::ZERO; midpoint.len()];
            for (&(a, b), &idx) in &midpoint {
                new_pts[idx - base] = (grid.vertices[a] + grid.vertices[b]) * 0.5;
            }
            grid.vertices.extend(new_pts);
            grid.values.resize(grid.vertices.len(), f64::NAN);
        }

        let mut new_triangles = Vec::with_capacity(grid.triangles.len() * 2);
        for (t, &is_red) in grid.triangles.iter().zip(&red) {
            if is_red {
                let [a, b, c] = t.v;
                let ab = midpoint[&key(a, b)];
                let bc = midpoint[&key(b, c)];
                let ca = midpoint[&key(c, a)];
                let d = t.depth + 1;
                new_triangles.push(GridTri { v: [a, ab, ca], depth: d });
                new_triangles.push(GridTri { v: [b, bc, ab], depth: d });
                new_triangles.push(GridTri { v: [c, ca, bc], depth: d });
                new_triangles.push(GridTri { v: [ab, bc, ca], depth: d });
            } else {
                // At most one edge is split: green-bisect toward it.
                let mut split: Option<(usize, usize)> = None;
                for (e, (a, b)) in tri_edges(t).iter().enumerate() {
                    if let Some(&m) = midpoint.get(&key(*a, *b)) {
                        split = Some((e, m));
                    }
                }
                match split {
                    None => new_triangles.push(*t),
                    Some((e, m)) => {
                        let [a, b, c] = t.v;
                        // Rotate so the split edge is (p, q); r is opposite.
                        let (p, q, r) = match e {
                            0 => (a, b, c),
                            1 => (b, c, a),
                            _ => (c, a, b),
                        };
                        new_triangles.push(GridTri { v: [p, m, r], depth: t.depth });
                        new_triangles.push(GridTri { v: [m, q, r], depth: t.depth });
                    }
                }
            }
        }
        grid.triangles = new_triangles;
        evaluate_grid(&mut grid, ev)?;
    }
    Ok(grid)
}

/// A chained isoline: ordered points, closed when the curve returns to its
/// first point.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Complex64>,
    pub closed: bool,
}

/// Isolines grouped per epsilon.
#[derive(Debug, Clone, PartialEq)]
pub struct IsolineSet {
    pub per_eps: Vec<(f64, Vec<Polyline>)>,
}

impl IsolineSet {
    pub fn polylines_for(&self, eps: f64) -> &[Polyline] {
        self.per_eps
            .iter()
            .find(|(e, _)| *e == eps)
            .map(|(_, p)| p.as_slice())
            .unwrap_or(&[])
    }

    pub fn all_points(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.per_eps.iter().flat_map(|(e, polys)| {
            polys
                .iter()
                .flat_map(move |p| p.points.iter().map(move |&z| (*e, z)))
        })
    }
}

/// Marching triangles with linear interpolation of log10(resolvent norm),
/// chained into polylines across shared edges.
pub fn extract_isolines(grid: &ComplexGrid, levels: &LevelSpec) -> IsolineSet {
    let logs = grid.clamped_logs();
    let mut per_eps = Vec::with_capacity(levels.epsilons().len());
    for &eps in levels.epsilons() {
        let level = (1.0 / eps).log10();
        // Signed distances, with exact hits nudged so crossings stay
        // transversal.
        let s: Vec<f64> = logs
            .iter()
            .map(|&l| {
                let d = l - level;
                if d == 0.0 {
                    1e-30
                } else {
                    d
                }
            })
            .collect();
        let mut crossings: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        let mut segments: Vec<((usize, usize), (usize, usize))> = Vec::new();
        for t in &grid.triangles {
            let mut cut_edges: Vec<(usize, usize)> = Vec::with_capacity(2);
            for (a, b) in tri_edges(t) {
                if s[a] * s[b] < 0.0 {
                    cut_edges.push(key(a, b));
                }
            }
            if cut_edges.len() != 2 {
                continue;
            }
            for &(a, b) in &cut_edges {
                crossings.entry((a, b)).or_insert_with(|| {
                    let t_param = s[a] / (s[a] - s[b]);
                    grid.vertices[a] + (grid.vertices[b] - grid.vertices[a]) * t_param
                });
            }
            segments.push((cut_edges[0], cut_edges[1]));
        }

        // Node adjacency; a grid edge hosts at most two incident segments.
        let mut adjacency: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, (e1, e2)) in segments.iter().enumerate() {
            adjacency.entry(*e1).or_default().push(i);
            adjacency.entry(*e2).or_default().push(i);
        }
        let mut seg_used = vec![false; segments.len()];
        let mut polylines = Vec::new();
        let walk = |start: (usize, usize), seg_used: &mut Vec<bool>| -> Vec<(usize, usize)> {
            let mut chain = vec![start];
            let mut node = start;
            loop {
                let next_seg = adjacency[&node].iter().copied().find(|&s| !seg_used[s]);
                let Some(si) = next_seg else { break };
                seg_used[si] = true;
                let (e1, e2) = segments[si];
                node = if e1 == node { e2 } else { e1 };
                chain.push(node);
            }
            chain
        };
        // Open chains start at degree-1 nodes.
        let endpoints: Vec<(usize, usize)> = adjacency
            .iter()
            .filter(|(_, segs)| segs.len() == 1)
            .map(|(&k, _)| k)
            .collect();
        for start in endpoints {
            if adjacency[&start].iter().all(|&s| seg_used[s]) {
                continue;
            }
            let chain = walk(start, &mut seg_used);
            if chain.len() >= 2 {
                polylines.push(chain_to_polyline(&chain, &crossings, false));
            }
        }
        // Remaining segments form closed loops.
        for i in 0..segments.len() {
            if seg_used[i] {
                continue;
            }
            seg_used[i] = true;
            let (start, second) = segments[i];
            let mut chain = walk(second, &mut seg_used);
            chain.insert(0, start);
            if chain.len() >= 3 {
                polylines.push(chain_to_polyline(&chain, &crossings, true));
            }
        }
        per_eps.push((eps, polylines));
    }
    IsolineSet { per_eps }
}

fn chain_to_polyline(
    chain: &[(usize, usize)],
    crossings: &BTreeMap<(usize, usize), Complex64>,
    closed: bool,
) -> Polyline {
    let mut points: Vec<Complex64> = Vec::with_capacity(chain.len());
    for node in chain {
        let p = crossings[node];
        if points
            .last()
            .map_or(true, |&q| (p - q).norm() > CHAIN_MERGE_TOL)
        {
            points.push(p);
        }
    }
    if closed && points.len() > 1 {
        let first = points[0];
        if (first - *points.last().unwrap()).norm() <= CHAIN_MERGE_TOL {
            points.pop();
        }
    }
    Polyline { points, closed }
}

/// Pseudospectrum membership: resolvent norm at z at least 1 / eps.
pub fn contains(
    ev: &dyn ResolventEvaluator,
    z: Complex64,
    eps: f64,
) -> Result<bool, GridError> {
    if !(eps > 0.0) {
        return Err(GridError::BadLevels);
    }
    let v = ev
        .eval(z, 0)
        .or_else(|_| ev.eval(z, 1))
        .map_err(|source| GridError::Evaluation { z, source })?;
    Ok(v >= 1.0 / eps)
}

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------

/// Flat per-vertex dump of a grid: re, im, resolvent norm, depth. The depth
/// column carries the deepest incident triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDump {
    pub rows: Vec<(f64, f64, f64, u32)>,
}

impl ComplexGrid {
    pub fn to_dump(&self) -> GridDump {
        let mut depth = vec![0u32; self.vertices.len()];
        for t in &self.triangles {
            for &v in &t.v {
                depth[v] = depth[v].max(t.depth);
            }
        }
        GridDump {
            rows: self
                .vertices
                .iter()
                .zip(&self.values)
                .zip(&depth)
                .map(|((z, &v), &d)| (z.re, z.im, v, d))
                .collect(),
        }
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64, GridError> {
    match s.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|e| GridError::Parse { line, msg: e.to_string() }),
    }
}

impl GridDump {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,resnorm,depth\n");
        for &(re, im, v, d) in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", fmt_f64(re), fmt_f64(im), fmt_f64(v), d);
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, GridError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line.trim() != "re,im,resnorm,depth" {
                    return Err(GridError::Parse { line: 1, msg: format!("bad header: {line}") });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(GridError::Parse { line: i + 1, msg: "expected 4 fields".into() });
            }
            rows.push((
                parse_f64(f[0], i + 1)?,
                parse_f64(f[1], i + 1)?,
                parse_f64(f[2], i + 1)?,
                f[3].trim()
                    .parse::<u32>()
                    .map_err(|e| GridError::Parse { line: i + 1, msg: e.to_string() })?,
            ));
        }
        Ok(Self { rows })
    }
}

/// Isoline CSV: epsilon, polyline_id, point_index, re, im. Closed polylines
/// repeat their first point in the final row.
pub fn isolines_to_csv(set: &IsolineSet) -> String {
    let mut s = String::from("epsilon,polyline_id,point_index,re,im\n");
    for (eps, polys) in &set.per_eps {
        for (pid, poly) in polys.iter().enumerate() {
            let mut idx = 0usize;
            for p in &poly.points {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    fmt_f64(*eps),
                    pid,
                    idx,
                    fmt_f64(p.re),
                    fmt_f64(p.im)
                );
                idx += 1;
            }
            if poly.closed && !poly.points.is_empty() {
                let p = poly.points[0];
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    fmt_f64(*eps),
                    pid,
                    idx,
                    fmt_f64(p.re),
                    fmt_f64(p.im)
                );
            }
        }
    }
    s
}

pub fn isolines_from_csv(text: &str) -> Result<IsolineSet, GridError> {
    let mut per_eps: Vec<(f64, Vec<Polyline>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "epsilon,polyline_id,point_index,re,im" {
                return Err(GridError::Parse { line: 1, msg: format!("bad header: {line}") });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(GridError::Parse { line: i + 1, msg: "expected 5 fields".into() });
        }
        let eps = parse_f64(f[0], i + 1)?;
        let pid = f[1]
            .trim()
            .parse::<usize>()
            .map_err(|e| GridError::Parse { line: i + 1, msg: e.to_string() })?;
        let z = Complex64::new(parse_f64(f[3], i + 1)?, parse_f64(f[4], i + 1)?);
        if per_eps.last().map(|(e, _)| *e) != Some(eps) {
            per_eps.push((eps, Vec::new()));
        }
        let polys = &mut per_eps.last_mut().unwrap().1;
        if polys.len() <= pid {
            polys.resize(pid + 1, Polyline { points: Vec::new(), closed: false });
        }
        polys[pid].points.push(z);
    }
    // Recover the closed flag from the repeated first point.
    for (_, polys) in &mut per_eps {
        for poly in polys {
            if poly.points.len() >= 3 && poly.points[0] == *poly.points.last().unwrap() {
                poly.points.pop();
                poly.closed = true;
            }
        }
    }
    Ok(IsolineSet { per_eps })
}

/// Winding number of a closed polyline around a point (0 when outside).
pub fn winding_number(points: &[Complex64], z: Complex64) -> i32 {
    let mut total = 0.0;
    for i in 0..points.len() {
        let a = points[i] - z;
        let b = points[(i + 1) % points.len()] - z;
        total += (a.re * b.im - a.im * b.re).atan2(a.re * b.re + a.im * b.im);
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i32
}
