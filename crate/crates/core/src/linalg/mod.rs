//! Complex linear-algebra kernels: banded LU, Lanczos extremes, resolvent
//! norms for plain and right-preconditioned operators, full GMRES, and the
//! field-of-values boundary.

use num_complex::Complex64;
use thiserror::Error;

use crate::sparse::SparseComplexMatrix;

pub mod band;
pub mod fov;
pub mod gmres;
pub mod lanczos;

pub use band::{rcm_ordering, BandLu};
pub use fov::{fov_boundary, fov_support_point, FovOpts, FovPolygon};
pub use gmres::{gmres, GmresRun};
pub use lanczos::{lanczos_largest, HermitianOp, LanczosResult};

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is singular at column {col}")]
    Singular { col: usize },
    #[error("iteration did not converge (best estimate {best}, {iterations} iterations)")]
    NotConverged { best: f64, iterations: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Sparse(#[from] crate::sparse::SparseError),
}

/// General complex linear operator with an adjoint.
pub trait LinearOp: Sync {
    fn dim(&self) -> usize;
    /// y = A x
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
    /// y = A^H x
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]);
}

impl LinearOp for SparseComplexMatrix {
    fn dim(&self) -> usize {
        SparseComplexMatrix::dim(self)
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.matvec(x, y);
    }
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.matvec_adjoint(x, y);
    }
}

/// Iteration controls for resolvent-norm evaluations.
#[derive(Debug, Clone, Copy)]
pub struct ResolventOpts {
    /// Relative accuracy target for sigma_min.
    pub rel_tol: f64,
    /// Lanczos iteration cap.
    pub max_iter: usize,
    /// Seed for the random start vector.
    pub seed: u64,
    /// sigma_min below sentinel * scale counts as singular.
    pub sentinel_factor: f64,
}

impl Default for ResolventOpts {
    fn default() -> Self {
        Self { rel_tol: 1e-8, max_iter: 300, seed: 20240501, sentinel_factor: 1e-14 }
    }
}

/// The operator whose resolvent is being probed.
#[derive(Clone, Copy)]
pub enum OperatorHandle<'a> {
    /// z I - A
    Plain(&'a SparseComplexMatrix),
    /// z I - A B^{-1}, evaluated through z B - A on B-weighted vectors.
    Preconditioned {
        a: &'a SparseComplexMatrix,
        b: &'a SparseComplexMatrix,
    },
}

impl OperatorHandle<'_> {
    pub fn dim(&self) -> usize {
        match self {
            OperatorHandle::Plain(a) => a.dim(),
            OperatorHandle::Preconditioned { a, .. } => a.dim(),
        }
    }

    /// Magnitude scale of the operator, for the singularity sentinel.
    fn scale(&self) -> f64 {
        match self {
            OperatorHandle::Plain(a) => a.frobenius_norm(),
            // Dimensional stand-in for |A B^{-1}|; only the sentinel uses it.
            OperatorHandle::Preconditioned { a, b } => {
                a.frobenius_norm() / b.frobenius_norm().max(1e-300)
            }
        }
    }
}

/// A point query of the resolvent norm.
pub struct ResolventQuery<'a> {
    pub z: Complex64,
    pub op: OperatorHandle<'a>,
}

impl<'a> ResolventQuery<'a> {
    pub fn plain(z: Complex64, a: &'a SparseComplexMatrix) -> Self {
        Self { z, op: OperatorHandle::Plain(a) }
    }

    pub fn preconditioned(
        z: Complex64,
        a: &'a SparseComplexMatrix,
        b: &'a SparseComplexMatrix,
    ) -> Self {
        Self { z, op: OperatorHandle::Preconditioned { a, b } }
    }
}

/// Resolvent norm with a distinguished infinity for singular shifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolventNorm {
    Finite(f64),
    Infinite,
}

impl ResolventNorm {
    pub fn as_f64(&self) -> f64 {
        match self {
            ResolventNorm::Finite(v) => *v,
            ResolventNorm::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ResolventNorm::Infinite)
    }
}

/// Gram operator R^H R of the resolvent, applied through LU solves.
struct ResolventGram<'a> {
    lu: &'a BandLu,
    /// For the preconditioned operator: the B weight.
    weight: Option<&'a SparseComplexMatrix>,
}

impl HermitianOp for ResolventGram<'_> {
    fn dim(&self) -> usize {
        self.lu.dim()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        match self.weight {
            None => {
                // (Z^{-1} Z^{-H}) x, Z = z I - A; its top eigenvalue is
                // sigma_max(Z^{-1})^2.
                let t = self.lu.adjoint_solve(x);
                let s = self.lu.solve(&t);
                y.copy_from_slice(&s);
            }
            Some(b) => {
                // (B^H Z^{-H} Z^{-1} B) x with Z = z B - A; top eigenvalue is
                // sigma_max(Z^{-1} B)^2 = |(z I - A B^{-1})^{-1}|^2.
                let t = b.matvec_alloc(x);
                let t = self.lu.solve(&t);
                let t = self.lu.adjoint_solve(&t);
                let mut out = vec![Complex64::ZERO; x.len()];
                b.matvec_adjoint(&t, &mut out);
                y.copy_from_slice(&out);
            }
        }
    }
}

fn shifted_matrix(q: &ResolventQuery) -> Result<SparseComplexMatrix, LinalgError> {
    match q.op {
        OperatorHandle::Plain(a) => Ok(a.shifted_from(q.z)),
        OperatorHandle::Preconditioned { a, b } => {
            Ok(SparseComplexMatrix::pencil_shift(a, b, q.z)?)
        }
    }
}

/// |(z I - A)^{-1}| (or of the preconditioned operator), with an infinity
/// sentinel when the shift is singular to working precision.
pub fn resolvent_norm(
    q: &ResolventQuery,
    opts: &ResolventOpts,
) -> Result<ResolventNorm, LinalgError> {
    let scale = q.op.scale();
    let shifted = shifted_matrix(q)?;
    let lu = match BandLu::factor(&shifted) {
        Ok(lu) => lu,
        Err(LinalgError::Singular { .. }) => return Ok(ResolventNorm::Infinite),
        Err(e) => return Err(e),
    };
    let weight = match q.op {
        OperatorHandle::Plain(_) => None,
        OperatorHandle::Preconditioned { b, .. } => Some(b),
    };
    let gram = ResolventGram { lu: &lu, weight };
    let res = lanczos_largest(&gram, opts.max_iter, opts.rel_tol, opts.seed)?;
    let norm = res.eigenvalue.max(0.0).sqrt();
    if !res.converged {
        return Err(LinalgError::NotConverged {
            best: norm,
            iterations: res.iterations,
        });
    }
    if !norm.is_finite() || norm * opts.sentinel_factor * scale >= 1.0 {
        return Ok(ResolventNorm::Infinite);
    }
    Ok(ResolventNorm::Finite(norm))
}

/// sigma_min(z I - A) (or of z I - A B^{-1}); 0 when singular to working
/// precision.
pub fn smallest_singular_value(
    q: &ResolventQuery,
    opts: &ResolventOpts,
) -> Result<f64, LinalgError> {
    match resolvent_norm(q, opts)? {
        ResolventNorm::Infinite => Ok(0.0),
        ResolventNorm::Finite(r) => Ok(1.0 / r),
    }
}

/// LU factorization behind the spec's `lu_factor` operation.
pub fn lu_factor(m: &SparseComplexMatrix) -> Result<BandLu, LinalgError> {
    BandLu::factor(m)
}

/// Solve with a factorization from [`lu_factor`].
pub fn lu_solve(lu: &BandLu, rhs: &[Complex64]) -> Vec<Complex64> {
    lu.solve(rhs)
}

/// Right-preconditioned operator x -> A (B^{-1} x) with a cached LU of B.
pub struct PreconditionedOperator {
    a: SparseComplexMatrix,
    b: SparseComplexMatrix,
    b_lu: BandLu,
}

impl PreconditionedOperator {
    pub fn new(
        a: SparseComplexMatrix,
        b: SparseComplexMatrix,
    ) -> Result<Self, LinalgError> {
        if a.dim() != b.dim() {
            return Err(LinalgError::DimensionMismatch(format!(
                "operator {} vs preconditioner {}",
                a.dim(),
                b.dim()
            )));
        }
        let b_lu = BandLu::factor(&b)?;
        Ok(Self { a, b, b_lu })
    }

    pub fn matrix(&self) -> &SparseComplexMatrix {
        &self.a
    }

    pub fn preconditioner(&self) -> &SparseComplexMatrix {
        &self.b
    }

    /// x = B^{-1} x_tilde, mapping the preconditioned solution back.
    pub fn recover_solution(&self, x_tilde: &[Complex64]) -> Vec<Complex64> {
        self.b_lu.solve(x_tilde)
    }
}

impl LinearOp for PreconditionedOperator {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let t = self.b_lu.solve(x);
        self.a.matvec(&t, y);
    }
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        let mut t = vec![Complex64::ZERO; x.len()];
        self.a.matvec_adjoint(x, &mut t);
        let s = self.b_lu.adjoint_solve(&t);
        y.copy_from_slice(&s);
    }
}

/// `preconditioned_operator` from the module contract.
pub fn preconditioned_operator(
    a: &SparseComplexMatrix,
    b: &SparseComplexMatrix,
) -> Result<PreconditionedOperator, LinalgError> {
    PreconditionedOperator::new(a.clone(), b.clone())
}

/// Norm-equivalence constants extracted from mass and stiffness extremes.
#[derive(Debug, Clone, Copy)]
pub struct NormEquivalence {
    /// sqrt(lambda_min(M)): alpha_W in |u|_0 >= alpha_W |x_u|.
    pub alpha_w: f64,
    /// sqrt(lambda_max(M)).
    pub alpha_w_upper: f64,
    /// sqrt(lambda_min(K + kappa^2 M)): the kappa-norm lower constant.
    pub alpha: f64,
    /// sqrt(lambda_max(K + kappa^2 M)).
    pub alpha_upper: f64,
    /// C_1 = sqrt(cond(M)) = alpha_w_upper / alpha_w.
    pub mass_condition_sqrt: f64,
}

struct PlainHermitian<'a>(&'a SparseComplexMatrix);

impl HermitianOp for PlainHermitian<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.0.matvec(x, y);
    }
}

struct InverseHermitian<'a>(&'a BandLu);

impl HermitianOp for InverseHermitian<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let s = self.0.solve(x);
        y.copy_from_slice(&s);
    }
}

/// Extreme eigenvalues of a Hermitian positive definite matrix.
pub fn hermitian_extremes(
    m: &SparseComplexMatrix,
    opts: &ResolventOpts,
) -> Result<(f64, f64), LinalgError> {
    let top = lanczos_largest(&PlainHermitian(m), opts.max_iter, opts.rel_tol, opts.seed)?;
    if !top.converged {
        return Err(LinalgError::NotConverged { best: top.eigenvalue, iterations: top.iterations });
    }
    let lu = BandLu::factor(m)?;
    let inv_top =
        lanczos_largest(&InverseHermitian(&lu), opts.max_iter, opts.rel_tol, opts.seed ^ 0x9e37)?;
    if !inv_top.converged {
        return Err(LinalgError::NotConverged {
            best: inv_top.eigenvalue,
            iterations: inv_top.iterations,
        });
    }
    Ok((1.0 / inv_top.eigenvalue, top.eigenvalue))
}

/// Largest eigenvalue of a Hermitian positive semidefinite matrix.
pub fn hermitian_largest(
    m: &SparseComplexMatrix,
    opts: &ResolventOpts,
) -> Result<f64, LinalgError> {
    let top = lanczos_largest(&PlainHermitian(m), opts.max_iter, opts.rel_tol, opts.seed)?;
    if !top.converged {
        return Err(LinalgError::NotConverged { best: top.eigenvalue, iterations: top.iterations });
    }
    Ok(top.eigenvalue)
}

/// alpha_W, alpha and C_1 from the mass matrix and the kappa-energy matrix
/// K + kappa^2 M.
pub fn norm_equivalence_constants(
    m: &SparseComplexMatrix,
    k: &SparseComplexMatrix,
    kappa: f64,
    opts: &ResolventOpts,
) -> Result<NormEquivalence, LinalgError> {
    if m.dim() != k.dim() {
        return Err(LinalgError::DimensionMismatch(format!("{} vs {}", m.dim(), k.dim())));
    }
    let (m_min, m_max) = hermitian_extremes(m, opts)?;
    let energy = SparseComplexMatrix::linear_combination(&[
        (Complex64::new(1.0, 0.0), k),
        (Complex64::new(kappa * kappa, 0.0), m),
    ])?;
    let (e_min, e_max) = hermitian_extremes(&energy, opts)?;
    Ok(NormEquivalence {
        alpha_w: m_min.max(0.0).sqrt(),
        alpha_w_upper: m_max.max(0.0).sqrt(),
        alpha: e_min.max(0.0).sqrt(),
        alpha_upper: e_max.max(0.0).sqrt(),
        mass_condition_sqrt: (m_max / m_min).sqrt(),
    })
}
