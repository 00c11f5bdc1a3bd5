//! Field-of-values boundary by angle sweeps.
//!
//! For each rotation angle theta, the top eigenvector of the Hermitian part
//! of e^{-i theta} A marks a boundary support point of FOV(A); the Rayleigh
//! quotient of that eigenvector is the point itself. The convex hull of the
//! support points is an inscribed polygon of the (convex) field of values.

use num_complex::Complex64;

use super::lanczos::{lanczos_largest, HermitianOp};
use super::{LinalgError, LinearOp};

/// Convex polygon of field-of-values support points, counter-clockwise.
/// Degenerate cases (segment, point) keep fewer than three vertices.
#[derive(Debug, Clone)]
pub struct FovPolygon {
    pub points: Vec<Complex64>,
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Andrew monotone chain; collinear points are dropped.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|p, q| {
        p.re.partial_cmp(&q.re)
            .unwrap()
            .then(p.im.partial_cmp(&q.im).unwrap())
    });
    pts.dedup_by(|p, q| (*p - *q).norm() < 1e-300);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn point_segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = ((z - a).re * ab.re + (z - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

impl FovPolygon {
    pub fn new(points: Vec<Complex64>) -> Self {
        Self { points: convex_hull(&points) }
    }

    pub fn is_degenerate(&self) -> bool {
        self.points.len() < 3
    }

    /// Euclidean distance from z to the polygon (0 inside).
    pub fn distance(&self, z: Complex64) -> f64 {
        match self.points.len() {
            0 => f64::INFINITY,
            1 => (z - self.points[0]).norm(),
            2 => point_segment_distance(z, self.points[0], self.points[1]),
            n => {
                let mut inside = true;
                let mut min_edge = f64::INFINITY;
                for i in 0..n {
                    let a = self.points[i];
                    let b = self.points[(i + 1) % n];
                    if cross(a, b, z) < 0.0 {
                        inside = false;
                    }
                    min_edge = min_edge.min(point_segment_distance(z, a, b));
                }
                if inside {
                    0.0
                } else {
                    min_edge
                }
            }
        }
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.distance(z) <= tol
    }

    /// Axis-aligned bounding box (re_min, re_max, im_min, im_max).
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let mut re_min = f64::INFINITY;
        let mut re_max = f64::NEG_INFINITY;
        let mut im_min = f64::INFINITY;
        let mut im_max = f64::NEG_INFINITY;
        for p in &self.points {
            re_min = re_min.min(p.re);
            re_max = re_max.max(p.re);
            im_min = im_min.min(p.im);
            im_max = im_max.max(p.im);
        }
        (re_min, re_max, im_min, im_max)
    }

    /// Extends the polygon with extra genuine support points.
    pub fn merged_with(&self, extra: &[Complex64]) -> FovPolygon {
        let mut pts = self.points.clone();
        pts.extend_from_slice(extra);
        FovPolygon::new(pts)
    }
}

/// Hermitian part of e^{-i theta} A as an operator.
struct RotatedHermitianPart<'a> {
    op: &'a dyn LinearOp,
    phase: Complex64,
}

impl HermitianOp for RotatedHermitianPart<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = x.len();
        let mut ax = vec![Complex64::ZERO; n];
        self.op.apply(x, &mut ax);
        let mut ahx = vec![Complex64::ZERO; n];
        self.op.apply_adjoint(x, &mut ahx);
        let half = Complex64::new(0.5, 0.0);
        for i in 0..n {
            y[i] = half * (self.phase * ax[i] + self.phase.conj() * ahx[i]);
        }
    }
}

/// Controls for the support-point eigensolves.
#[derive(Debug, Clone, Copy)]
pub struct FovOpts {
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for FovOpts {
    fn default() -> Self {
        Self { max_iter: 300, tol: 1e-10, seed: 20240501 }
    }
}

/// Boundary support point of FOV(A) in direction theta: the Rayleigh quotient
/// of the top eigenvector of the Hermitian part of e^{-i theta} A.
pub fn fov_support_point(
    op: &dyn LinearOp,
    theta: f64,
    opts: &FovOpts,
) -> Result<Complex64, LinalgError> {
    let phase = Complex64::from_polar(1.0, -theta);
    let herm = RotatedHermitianPart { op, phase };
    let res = lanczos_largest(&herm, opts.max_iter, opts.tol, opts.seed)?;
    if !res.converged {
        return Err(LinalgError::NotConverged {
            best: res.eigenvalue,
            iterations: res.iterations,
        });
    }
    let v = res.eigenvector;
    let mut av = vec![Complex64::ZERO; v.len()];
    op.apply(&v, &mut av);
    let num: Complex64 = v.iter().zip(&av).map(|(u, w)| u.conj() * w).sum();
    let den: f64 = v.iter().map(|u| u.norm_sqr()).sum();
    Ok(num / den)
}

/// Support-point polygon of the field of values over `n_angles` directions.
pub fn fov_boundary(
    op: &dyn LinearOp,
    n_angles: usize,
    opts: &FovOpts,
) -> Result<FovPolygon, LinalgError> {
    if n_angles < 8 {
        return Err(LinalgError::InvalidArgument(format!(
            "n_angles must be >= 8, got {n_angles}"
        )));
    }
    let mut points = Vec::with_capacity(n_angles);
    for k in 0..n_angles {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n_angles as f64;
        points.push(fov_support_point(op, theta, opts)?);
    }
    Ok(FovPolygon::new(points))
}
