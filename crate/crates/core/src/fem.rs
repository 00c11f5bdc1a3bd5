//! P1 finite-element assembly on triangular meshes.
//!
//! Element matrices for stiffness, mass and boundary mass are closed-form
//! exact for P1, so no quadrature error enters the operators. Load vectors
//! use a 6-point order-4 triangle rule and 3-point Gauss on boundary edges,
//! which keeps sharply peaked sources accurate under refinement.
//!
//! Every element contribution is written symmetrically in the same pass, so
//! the assembled matrices satisfy K = K^T, M = M^T, Mb = Mb^T bitwise, and
//! the composed operators stay complex symmetric.

use num_complex::Complex64;
use thiserror::Error;

use crate::mesh::Mesh;
use crate::sparse::{SparseComplexMatrix, SparseError};

#[derive(Debug, Error)]
pub enum FemError {
    #[error("degenerate triangle {index} (signed area {area})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("boundary edge ({a}, {b}) is not an edge of exactly one triangle")]
    EdgeNotOnBoundary { a: usize, b: usize },
    #[error("mesh has no interior vertices")]
    NoInteriorVertices,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Wavenumber and loss parameter for the Helmholtz forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelmholtzParams {
    kappa: f64,
    sigma: f64,
}

impl HelmholtzParams {
    pub fn new(kappa: f64, sigma: f64) -> Result<Self, FemError> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(FemError::InvalidParameter(format!("kappa must be > 0, got {kappa}")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(FemError::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { kappa, sigma })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// The three assembled Gram matrices plus the interior-dof restriction.
#[derive(Debug, Clone)]
pub struct FemMatrices {
    /// Stiffness (grad, grad); real-valued, stored complex.
    pub k: SparseComplexMatrix,
    /// Mass (u, v).
    pub m: SparseComplexMatrix,
    /// Boundary mass (u, v) over the domain boundary.
    pub mb: SparseComplexMatrix,
    /// Interior vertex indices (global numbering), for Dirichlet restriction.
    pub dirichlet_map: Option<Vec<usize>>,
}

/// Volume and boundary source fields for load assembly.
pub struct LoadSpec {
    pub f: Box<dyn Fn(f64, f64) -> Complex64 + Send + Sync>,
    pub g: Option<Box<dyn Fn(f64, f64) -> Complex64 + Send + Sync>>,
}

impl LoadSpec {
    pub fn volume<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        Self { f: Box::new(f), g: None }
    }

    pub fn with_boundary<F, G>(f: F, g: G) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        Self { f: Box::new(f), g: Some(Box::new(g)) }
    }

    /// Sharp Gaussian volume source exp(-s * ((x-cx)^2 + (y-cy)^2)).
    pub fn gaussian(cx: f64, cy: f64, sharpness: f64) -> Self {
        Self::volume(move |x, y| {
            let r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            Complex64::new((-sharpness * r2).exp(), 0.0)
        })
    }
}

fn triangle_area(m: &Mesh, index: usize) -> Result<f64, FemError> {
    let area = m.signed_area(&m.triangles[index]);
    if !(area > 1e-300) || !area.is_finite() {
        return Err(FemError::DegenerateTriangle { index, area });
    }
    Ok(area)
}

/// K_ij = integral of grad(phi_j) . grad(phi_i); exact per-element gradients.
pub fn assemble_stiffness(m: &Mesh) -> Result<SparseComplexMatrix, FemError> {
    let n = m.vertex_count();
    let mut triplets = Vec::with_capacity(9 * m.triangle_count());
    for (ti, t) in m.triangles.iter().enumerate() {
        let area = triangle_area(m, ti)?;
        let p = [m.vertices[t.v[0]], m.vertices[t.v[1]], m.vertices[t.v[2]]];
        // grad(phi_a) = (b_a, c_a) / (2 area) with the cyclic differences.
        let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
        let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
        for a in 0..3 {
            for bb in a..3 {
                let v = (b[a] * b[bb] + c[a] * c[bb]) / (4.0 * area);
                let v = Complex64::new(v, 0.0);
                triplets.push((t.v[a], t.v[bb], v));
                if bb != a {
                    triplets.push((t.v[bb], t.v[a], v));
                }
            }
        }
    }
    Ok(SparseComplexMatrix::from_triplets(n, &triplets)?)
}

/// M_ij = integral of phi_j phi_i; element matrix (area/12) [[2,1,1],...].
pub fn assemble_mass(m: &Mesh) -> Result<SparseComplexMatrix, FemError> {
    let n = m.vertex_count();
    let mut triplets = Vec::with_capacity(9 * m.triangle_count());
    for (ti, t) in m.triangles.iter().enumerate() {
        let area = triangle_area(m, ti)?;
        for a in 0..3 {
            for bb in a..3 {
                let w = if a == bb { 2.0 } else { 1.0 };
                let v = Complex64::new(area / 12.0 * w, 0.0);
                triplets.push((t.v[a], t.v[bb], v));
                if bb != a {
                    triplets.push((t.v[bb], t.v[a], v));
                }
            }
        }
    }
    Ok(SparseComplexMatrix::from_triplets(n, &triplets)?)
}

/// (Mb)_ij = boundary integral of phi_j phi_i; edge matrix (len/6) [[2,1],[1,2]].
pub fn assemble_boundary_mass(m: &Mesh) -> Result<SparseComplexMatrix, FemError> {
    let n = m.vertex_count();
    // An edge is on the boundary iff exactly one triangle owns it.
    let mut counts = std::collections::HashMap::new();
    for t in &m.triangles {
        for (a, b) in t.edges() {
            *counts.entry((a.min(b), a.max(b))).or_insert(0usize) += 1;
        }
    }
    let mut triplets = Vec::with_capacity(4 * m.boundary_edges.len());
    for &(a, b) in &m.boundary_edges {
        if counts.get(&(a.min(b), a.max(b))) != Some(&1) {
            return Err(FemError::EdgeNotOnBoundary { a, b });
        }
        let len = m.vertices[a].dist(&m.vertices[b]);
        let diag = Complex64::new(len / 3.0, 0.0);
        let off = Complex64::new(len / 6.0, 0.0);
        triplets.push((a, a, diag));
        triplets.push((b, b, diag));
        triplets.push((a, b, off));
        triplets.push((b, a, off));
    }
    Ok(SparseComplexMatrix::from_triplets(n, &triplets)?)
}

/// Assembles K, M, Mb and the interior-dof map in one pass.
pub fn assemble_fem(m: &Mesh) -> Result<FemMatrices, FemError> {
    let k = assemble_stiffness(m)?;
    let mass = assemble_mass(m)?;
    let mb = assemble_boundary_mass(m)?;
    let mask = m.boundary_vertex_mask();
    let interior: Vec<usize> = (0..m.vertex_count()).filter(|&i| !mask[i]).collect();
    Ok(FemMatrices { k, m: mass, mb, dirichlet_map: Some(interior) })
}

/// A = K + i kappa Mb - kappa^2 M.
pub fn assemble_helmholtz(
    fm: &FemMatrices,
    p: &HelmholtzParams,
) -> Result<SparseComplexMatrix, FemError> {
    let kappa = p.kappa();
    Ok(SparseComplexMatrix::linear_combination(&[
        (Complex64::new(1.0, 0.0), &fm.k),
        (Complex64::new(0.0, kappa), &fm.mb),
        (Complex64::new(-kappa * kappa, 0.0), &fm.m),
    ])?)
}

/// B = K + i kappa Mb - kappa^2 M + i sigma M; requires sigma > 0.
pub fn assemble_shifted_laplace(
    fm: &FemMatrices,
    p: &HelmholtzParams,
) -> Result<SparseComplexMatrix, FemError> {
    if !(p.sigma() > 0.0) {
        return Err(FemError::InvalidParameter(format!(
            "shifted-Laplace loss term requires sigma > 0, got {}",
            p.sigma()
        )));
    }
    let kappa = p.kappa();
    Ok(SparseComplexMatrix::linear_combination(&[
        (Complex64::new(1.0, 0.0), &fm.k),
        (Complex64::new(0.0, kappa), &fm.mb),
        (Complex64::new(-kappa * kappa, p.sigma()), &fm.m),
    ])?)
}

/// Stiffness restricted to interior vertices (rows/columns of boundary
/// vertices deleted). Returns the matrix and the interior-to-global map.
pub fn assemble_poisson_dirichlet(
    m: &Mesh,
) -> Result<(SparseComplexMatrix, Vec<usize>), FemError> {
    let k = assemble_stiffness(m)?;
    let mask = m.boundary_vertex_mask();
    let interior: Vec<usize> = (0..m.vertex_count()).filter(|&i| !mask[i]).collect();
    if interior.is_empty() {
        return Err(FemError::NoInteriorVertices);
    }
    Ok((k.restricted(&interior), interior))
}

// 6-point order-4 triangle rule (barycentric coordinates and weights; the
// weights sum to one and get multiplied by the element area).
const TRI_QUAD: [([f64; 3], f64); 6] = [
    ([0.108103018168070, 0.445948490915965, 0.445948490915965], 0.223381589678011),
    ([0.445948490915965, 0.108103018168070, 0.445948490915965], 0.223381589678011),
    ([0.445948490915965, 0.445948490915965, 0.108103018168070], 0.223381589678011),
    ([0.816847572980459, 0.091576213509771, 0.091576213509771], 0.109951743655322),
    ([0.091576213509771, 0.816847572980459, 0.091576213509771], 0.109951743655322),
    ([0.091576213509771, 0.091576213509771, 0.816847572980459], 0.109951743655322),
];

// 3-point Gauss-Legendre on [0,1] (degree 5).
const EDGE_QUAD: [(f64, f64); 3] = [
    (0.1127016653792583, 0.2777777777777778),
    (0.5, 0.4444444444444444),
    (0.8872983346207417, 0.2777777777777778),
];

/// b_i = (f, phi_i) + (g, phi_i)_boundary by quadrature.
pub fn assemble_load(m: &Mesh, load: &LoadSpec) -> Result<Vec<Complex64>, FemError> {
    let n = m.vertex_count();
    let mut b = vec![Complex64::ZERO; n];
    for (ti, t) in m.triangles.iter().enumerate() {
        let area = triangle_area(m, ti)?;
        let p = [m.vertices[t.v[0]], m.vertices[t.v[1]], m.vertices[t.v[2]]];
        for &(bary, w) in &TRI_QUAD {
            let x = bary[0] * p[0].x + bary[1] * p[1].x + bary[2] * p[2].x;
            let y = bary[0] * p[0].y + bary[1] * p[1].y + bary[2] * p[2].y;
            let fv = (load.f)(x, y) * (w * area);
            for a in 0..3 {
                b[t.v[a]] += fv * bary[a];
            }
        }
    }
    if let Some(g) = &load.g {
        for &(va, vb) in &m.boundary_edges {
            let pa = m.vertices[va];
            let pb = m.vertices[vb];
            let len = pa.dist(&pb);
            for &(s, w) in &EDGE_QUAD {
                let x = pa.x + s * (pb.x - pa.x);
                let y = pa.y + s * (pb.y - pa.y);
                let gv = g(x, y) * (w * len);
                b[va] += gv * (1.0 - s);
                b[vb] += gv * s;
            }
        }
    }
    Ok(b)
}

/// L2 norm of a scalar field over the domain, by the same triangle rule.
pub fn l2_norm_volume<F>(m: &Mesh, f: F) -> f64
where
    F: Fn(f64, f64) -> Complex64,
{
    let mut acc = 0.0;
    for t in &m.triangles {
        let area = m.signed_area(t);
        let p = [m.vertices[t.v[0]], m.vertices[t.v[1]], m.vertices[t.v[2]]];
        for &(bary, w) in &TRI_QUAD {
            let x = bary[0] * p[0].x + bary[1] * p[1].x + bary[2] * p[2].x;
            let y = bary[0] * p[0].y + bary[1] * p[1].y + bary[2] * p[2].y;
            acc += w * area * f(x, y).norm_sqr();
        }
    }
    acc.sqrt()
}

/// L2 norm of a boundary field over the domain boundary.
pub fn l2_norm_boundary<G>(m: &Mesh, g: G) -> f64
where
    G: Fn(f64, f64) -> Complex64,
{
    let mut acc = 0.0;
    for &(va, vb) in &m.boundary_edges {
        let pa = m.vertices[va];
        let pb = m.vertices[vb];
        let len = pa.dist(&pb);
        for &(s, w) in &EDGE_QUAD {
            let x = pa.x + s * (pb.x - pa.x);
            let y = pa.y + s * (pb.y - pa.y);
            acc += w * len * g(x, y).norm_sqr();
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_lshape_coarse, Mesh, Point2, Triangle};

    fn unit_right_triangle() -> Mesh {
        Mesh {
            vertices: vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
            triangles: vec![Triangle::new(0, 1, 2)],
            boundary_edges: vec![(0, 1), (1, 2), (2, 0)],
            level: 1,
        }
    }

    #[test]
    fn stiffness_element_matrix_unit_right_triangle() {
        let k = assemble_stiffness(&unit_right_triangle()).unwrap();
        let expected = [
            [1.0, -0.5, -0.5],
            [-0.5, 0.5, 0.0],
            [-0.5, 0.0, 0.5],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (k.get(i, j).re - expected[i][j]).abs() < 1e-15,
                    "K[{i}][{j}] = {}",
                    k.get(i, j)
                );
                assert_eq!(k.get(i, j).im, 0.0);
            }
        }
    }

    #[test]
    fn mass_element_matrix_unit_right_triangle() {
        let m = assemble_mass(&unit_right_triangle()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 2.0 / 24.0 } else { 1.0 / 24.0 };
                assert!((m.get(i, j).re - expected).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn boundary_mass_unit_edge() {
        // Two-triangle square, so every boundary edge has length 1.
        let mesh = Mesh {
            vertices: vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
            triangles: vec![Triangle::new(0, 1, 2), Triangle::new(0, 2, 3)],
            boundary_edges: vec![(0, 1), (1, 2), (2, 3), (3, 0)],
            level: 1,
        };
        let mb = assemble_boundary_mass(&mesh).unwrap();
        // Vertices 0 and 1 share exactly the bottom edge: off-diagonal len/6.
        assert!((mb.get(0, 1).re - 1.0 / 6.0).abs() < 1e-15);
        // Corner vertex 0 touches two unit edges: diagonal 2 * len/3.
        assert!((mb.get(0, 0).re - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn stiffness_rows_sum_to_zero_and_energy_of_linear() {
        let mesh = crate::mesh::refine_uniform(&make_lshape_coarse());
        let k = assemble_stiffness(&mesh).unwrap();
        let n = mesh.vertex_count();
        let ones = vec![Complex64::new(1.0, 0.0); n];
        let k_ones = k.matvec_alloc(&ones);
        for v in &k_ones {
            assert!(v.norm() < 1e-12, "row sum {v}");
        }
        // u(x, y) = x has gradient (1, 0): energy equals the domain area 3.
        let xs: Vec<Complex64> = mesh
            .vertices
            .iter()
            .map(|p| Complex64::new(p.x, 0.0))
            .collect();
        let kx = k.matvec_alloc(&xs);
        let energy: Complex64 = xs.iter().zip(&kx).map(|(a, b)| a.conj() * b).sum();
        assert!((energy.re - 3.0).abs() < 1e-10);
        assert!(energy.im.abs() < 1e-12);
    }

    #[test]
    fn mass_total_is_area_and_boundary_mass_total_is_perimeter() {
        let mesh = make_lshape_coarse();
        let m = assemble_mass(&mesh).unwrap();
        let mb = assemble_boundary_mass(&mesh).unwrap();
        let total_m: Complex64 = m.values().iter().sum();
        let total_mb: Complex64 = mb.values().iter().sum();
        assert!((total_m.re - 3.0).abs() < 1e-12);
        assert!((total_mb.re - 8.0).abs() < 1e-12);
        // Interior vertex rows of Mb are identically zero (no support there).
        let mask = mesh.boundary_vertex_mask();
        for i in 0..mesh.vertex_count() {
            if !mask[i] {
                let lo = mb.row_offsets()[i];
                let hi = mb.row_offsets()[i + 1];
                assert_eq!(lo, hi, "interior vertex {i} has boundary-mass entries");
            }
        }
    }

    #[test]
    fn assembled_matrices_bitwise_symmetric() {
        let mesh = crate::mesh::refine_uniform(&make_lshape_coarse());
        let fm = assemble_fem(&mesh).unwrap();
        assert!(fm.k.is_symmetric());
        assert!(fm.m.is_symmetric());
        assert!(fm.mb.is_symmetric());
        let p = HelmholtzParams::new(4.0 * std::f64::consts::PI, 0.0).unwrap();
        let a = assemble_helmholtz(&fm, &p).unwrap();
        assert!(a.is_symmetric());
        let p2 = HelmholtzParams::new(4.0 * std::f64::consts::PI, 2.0).unwrap();
        let b = assemble_shifted_laplace(&fm, &p2).unwrap();
        assert!(b.is_symmetric());
    }

    #[test]
    fn helmholtz_constant_vector_quadratic_form() {
        let mesh = make_lshape_coarse();
        let fm = assemble_fem(&mesh).unwrap();
        let kappa = 2.5;
        let p = HelmholtzParams::new(kappa, 0.0).unwrap();
        let a = assemble_helmholtz(&fm, &p).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); mesh.vertex_count()];
        let a_ones = a.matvec_alloc(&ones);
        let q: Complex64 = ones.iter().zip(&a_ones).map(|(x, y)| x.conj() * y).sum();
        let expected = Complex64::new(-kappa * kappa * 3.0, kappa * 8.0);
        assert!((q - expected).norm() < 1e-10 * expected.norm());
    }

    #[test]
    fn helmholtz_kappa_to_zero_limit_is_stiffness() {
        let mesh = make_lshape_coarse();
        let fm = assemble_fem(&mesh).unwrap();
        let p = HelmholtzParams::new(1e-12, 0.0).unwrap();
        let a = assemble_helmholtz(&fm, &p).unwrap();
        for i in 0..mesh.vertex_count() {
            for k in a.row_offsets()[i]..a.row_offsets()[i + 1] {
                let j = a.col_indices()[k];
                assert!((a.values()[k] - fm.k.get(i, j)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn shifted_laplace_sigma_zero_rejected_and_limit() {
        let mesh = make_lshape_coarse();
        let fm = assemble_fem(&mesh).unwrap();
        let p0 = HelmholtzParams::new(3.0, 0.0).unwrap();
        assert!(assemble_shifted_laplace(&fm, &p0).is_err());
        // sigma -> 0: B approaches A entrywise.
        let p = HelmholtzParams::new(3.0, 1e-14).unwrap();
        let a = assemble_helmholtz(&fm, &p).unwrap();
        let b = assemble_shifted_laplace(&fm, &p).unwrap();
        for (va, vb) in a.values().iter().zip(b.values()) {
            assert!((va - vb).norm() < 1e-12);
        }
    }

    #[test]
    fn imaginary_part_of_quadratic_forms() {
        use rand::Rng;
        use rand::SeedableRng;
        let mesh = make_lshape_coarse();
        let fm = assemble_fem(&mesh).unwrap();
        let kappa = 4.0 * std::f64::consts::PI;
        let sigma = 0.5 * kappa * kappa;
        let pa = HelmholtzParams::new(kappa, 0.0).unwrap();
        let pb = HelmholtzParams::new(kappa, sigma).unwrap();
        let a = assemble_helmholtz(&fm, &pa).unwrap();
        let b = assemble_shifted_laplace(&fm, &pb).unwrap();
        let n = mesh.vertex_count();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(20240501);
        for _ in 0..100 {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let ax = a.matvec_alloc(&x);
            let qa: Complex64 = x.iter().zip(&ax).map(|(u, v)| u.conj() * v).sum();
            assert!(qa.im >= -1e-12 * qa.norm(), "Im x*Ax = {} < 0", qa.im);
            let bx = b.matvec_alloc(&x);
            let qb: Complex64 = x.iter().zip(&bx).map(|(u, v)| u.conj() * v).sum();
            let mx = fm.m.matvec_alloc(&x);
            let qm: Complex64 = x.iter().zip(&mx).map(|(u, v)| u.conj() * v).sum();
            assert!(
                qb.im >= sigma * qm.re - 1e-10 * qb.norm(),
                "Im x*Bx = {} below sigma x*Mx = {}",
                qb.im,
                sigma * qm.re
            );
            assert!(qb.im > 0.0);
        }
    }

    #[test]
    fn poisson_dirichlet_dimension_and_symmetry() {
        let mesh = make_lshape_coarse();
        let (a, interior) = assemble_poisson_dirichlet(&mesh).unwrap();
        let mask = mesh.boundary_vertex_mask();
        let boundary_count = mask.iter().filter(|&&b| b).count();
        assert_eq!(a.dim(), mesh.vertex_count() - boundary_count);
        assert_eq!(interior.len(), a.dim());
        assert!(a.is_symmetric());
        for v in a.values() {
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn load_partition_of_unity() {
        let mesh = crate::mesh::refine_uniform(&make_lshape_coarse());
        let one = LoadSpec::volume(|_, _| Complex64::new(1.0, 0.0));
        let b = assemble_load(&mesh, &one).unwrap();
        let sum: Complex64 = b.iter().sum();
        assert!((sum.re - 3.0).abs() < 1e-10);

        let boundary_only =
            LoadSpec::with_boundary(|_, _| Complex64::ZERO, |_, _| Complex64::new(1.0, 0.0));
        let b2 = assemble_load(&mesh, &boundary_only).unwrap();
        let sum2: Complex64 = b2.iter().sum();
        assert!((sum2.re - 8.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let mesh = Mesh {
            vertices: vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(2.0, 0.0),
            ],
            triangles: vec![Triangle::new(0, 1, 2)],
            boundary_edges: vec![],
            level: 1,
        };
        assert!(matches!(
            assemble_stiffness(&mesh),
            Err(FemError::DegenerateTriangle { .. })
        ));
    }

    #[test]
    fn permutation_equivariance() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mesh = make_lshape_coarse();
        let fm = assemble_fem(&mesh).unwrap();
        let n = mesh.vertex_count();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        perm.shuffle(&mut rng);
        // Relabel the mesh vertices and reassemble.
        let mut vertices = vec![Point2::new(0.0, 0.0); n];
        for (i, &p) in perm.iter().enumerate() {
            vertices[p] = mesh.vertices[i];
        }
        let triangles = mesh
            .triangles
            .iter()
            .map(|t| Triangle::new(perm[t.v[0]], perm[t.v[1]], perm[t.v[2]]))
            .collect();
        let boundary_edges = mesh
            .boundary_edges
            .iter()
            .map(|&(a, b)| (perm[a], perm[b]))
            .collect();
        let relabeled = Mesh { vertices, triangles, boundary_edges, level: 1 };
        relabeled.validate().unwrap();
        let fm2 = assemble_fem(&relabeled).unwrap();
        let k_perm = fm.k.permuted(&perm);
        for i in 0..n {
            for k in k_perm.row_offsets()[i]..k_perm.row_offsets()[i + 1] {
                let j = k_perm.col_indices()[k];
                assert!((k_perm.values()[k] - fm2.k.get(i, j)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn gaussian_load_converges_to_reference_integral() {
        // Mass of exp(-1000 r^2) centered well inside the domain: pi / 1000.
        // The boundary truncation error is ~exp(-250), far below quadrature.
        let reference = std::f64::consts::PI / 1000.0;
        let load = LoadSpec::gaussian(0.5, -0.5, 1000.0);
        let mut mesh = crate::mesh::make_lshape_coarse();
        let mut errs = Vec::new();
        for _ in 0..4 {
            let b = assemble_load(&mesh, &load).unwrap();
            let sum: Complex64 = b.iter().sum();
            errs.push((sum.re - reference).abs());
            mesh = crate::mesh::refine_uniform(&mesh);
        }
        for w in errs.windows(2) {
            assert!(
                w[0] / w[1] >= 4.0,
                "quadrature errors {errs:?} do not shrink 4x per level"
            );
        }
    }
}
