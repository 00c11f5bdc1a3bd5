//! Shared test oracles, independent of the library's solver paths.
//!
//! The eigensolver here is a cyclic complex Jacobi iteration on dense
//! Hermitian matrices; singular values come from it via the Gram matrix.
//! Both are used to cross-check the banded-LU + Lanczos kernels.

#![allow(dead_code)]

use helmpseudo::sparse::SparseComplexMatrix;
use helmpseudo::Complex64;

/// Eigenvalues of a dense Hermitian matrix by cyclic Jacobi sweeps,
/// ascending. Input is row-major and must be Hermitian.
pub fn jacobi_hermitian_eigenvalues(a: &[Vec<Complex64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let norm: f64 = m
        .iter()
        .flat_map(|r| r.iter())
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p][q].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-14 * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let app = m[p][p].re;
                let aqq = m[q][q].re;
                // Phase so the pivot becomes real, then a real rotation.
                let phase = apq / apq.norm();
                let b = apq.norm();
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column rotation: col_p' = c col_p - s conj(phase) col_q,
                // col_q' = s phase col_p + c col_q; then the same on rows
                // with conjugated coefficients.
                for i in 0..n {
                    let mip = m[i][p];
                    let miq = m[i][q];
                    m[i][p] = mip * c - miq * phase.conj() * s;
                    m[i][q] = mip * phase * s + miq * c;
                }
                for j in 0..n {
                    let mpj = m[p][j];
                    let mqj = m[q][j];
                    m[p][j] = mpj * c - mqj * phase * s;
                    m[q][j] = mpj * phase.conj() * s + mqj * c;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[i][i].re).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Singular values of a dense complex matrix, ascending, via the Hermitian
/// Jacobi eigensolver on Z^H Z.
pub fn jacobi_singular_values(z: &[Vec<Complex64>]) -> Vec<f64> {
    let n = z.len();
    let mut gram = vec![vec![Complex64::ZERO; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::ZERO;
            for k in 0..n {
                acc += z[k][i].conj() * z[k][j];
            }
            gram[i][j] = acc;
        }
    }
    jacobi_hermitian_eigenvalues(&gram)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect()
}

/// Dense eigenvalues of a sparse Hermitian matrix (test-sized only).
pub fn sparse_hermitian_eigenvalues(m: &SparseComplexMatrix) -> Vec<f64> {
    jacobi_hermitian_eigenvalues(&m.to_dense())
}

/// Distance from z to the closest of the given real eigenvalues.
pub fn dist_to_real_spectrum(z: Complex64, eigs: &[f64]) -> f64 {
    eigs.iter()
        .map(|&l| (z - Complex64::new(l, 0.0)).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Deterministic complex vector in [-0.5, 0.5]^2 entries.
pub fn random_complex_vec(n: usize, rng: &mut impl rand::Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

/// || A x - b || / || b ||
pub fn relative_residual(
    a: &SparseComplexMatrix,
    x: &[Complex64],
    b: &[Complex64],
) -> f64 {
    let ax = a.matvec_alloc(x);
    let num: f64 = ax
        .iter()
        .zip(b)
        .map(|(u, v)| (u - v).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

#[cfg(test)]
mod oracle_self_checks {
    use super::*;

    #[test]
    fn jacobi_reproduces_known_eigenvalues() {
        // Diagonal conjugated by a unitary built from a phase + rotation.
        let d = [3.0, -1.0, 0.5];
        let c = (0.6f64).cos();
        let s = (0.6f64).sin();
        // U: rotation in the (0,1) plane with a phase on column 1.
        let phase = Complex64::from_polar(1.0, 0.8);
        let u = [
            [
                Complex64::new(c, 0.0),
                -phase.conj() * s,
                Complex64::ZERO,
            ],
            [phase * s, Complex64::new(c, 0.0), Complex64::ZERO],
            [Complex64::ZERO, Complex64::ZERO, Complex64::new(1.0, 0.0)],
        ];
        let mut a = vec![vec![Complex64::ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Complex64::ZERO;
                for k in 0..3 {
                    acc += u[i][k] * d[k] * u[j][k].conj();
                }
                a[i][j] = acc;
            }
        }
        let eigs = jacobi_hermitian_eigenvalues(&a);
        let mut expected = d.to_vec();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in eigs.iter().zip(&expected) {
            assert!((e - x).abs() < 1e-12, "{e} vs {x}");
        }
    }

    #[test]
    fn singular_values_of_diagonal() {
        let z = vec![
            vec![Complex64::new(0.0, 2.0), Complex64::ZERO],
            vec![Complex64::ZERO, Complex64::new(-0.5, 0.0)],
        ];
        let s = jacobi_singular_values(&z);
        assert!((s[0] - 0.5).abs() < 1e-13);
        assert!((s[1] - 2.0).abs() < 1e-13);
    }
}
