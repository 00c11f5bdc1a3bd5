//! Full (unrestarted) GMRES with modified Gram-Schmidt Arnoldi and Givens
//! rotations. A second orthogonalization pass runs whenever MGS removes more
//! than half of the vector, which keeps the rotated-residual estimate in step
//! with the true residual.

use num_complex::Complex64;

use super::{LinalgError, LinearOp};

/// Outcome of a GMRES run with the full residual trajectory.
#[derive(Debug, Clone)]
pub struct GmresRun {
    /// ||r_0||, ||r_1||, ...; index i is the residual after i iterations.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub solution: Vec<Complex64>,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(u, v)| u.conj() * v).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves A x = b from a zero initial guess, stopping at
/// ||r_i|| / ||r_0|| <= tol or after `max_iter` iterations.
pub fn gmres(
    op: &dyn LinearOp,
    b: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<GmresRun, LinalgError> {
    let n = op.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "rhs length {} vs operator {}",
            b.len(),
            n
        )));
    }
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    if max_iter == 0 {
        return Err(LinalgError::InvalidArgument("max_iter must be >= 1".into()));
    }
    let beta = norm(b);
    if beta == 0.0 {
        return Ok(GmresRun {
            residual_history: vec![0.0],
            iterations: 0,
            converged: true,
            solution: vec![Complex64::ZERO; n],
        });
    }

    let mut basis: Vec<Vec<Complex64>> = vec![b.iter().map(|v| v / beta).collect()];
    // Column-compressed Hessenberg after Givens rotations (upper triangular).
    let mut r_cols: Vec<Vec<Complex64>> = Vec::new();
    let mut cos: Vec<f64> = Vec::new();
    let mut sin: Vec<Complex64> = Vec::new();
    let mut g: Vec<Complex64> = vec![Complex64::new(beta, 0.0)];
    let mut history = vec![beta];
    let mut converged = false;
    let mut w = vec![Complex64::ZERO; n];

    let mut k = 0;
    while k < max_iter {
        op.apply(&basis[k], &mut w);
        let w_scale = norm(&w);
        let mut h: Vec<Complex64> = Vec::with_capacity(k + 2);
        for v in basis.iter() {
            let hj = dot(v, &w);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= hj * vi;
            }
            h.push(hj);
        }
        // Second pass when cancellation removed most of the vector.
        if norm(&w) < 0.5 * w_scale {
            for (j, v) in basis.iter().enumerate() {
                let corr = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= corr * vi;
                }
                h[j] += corr;
            }
        }
        let h_next = norm(&w);
        let breakdown = h_next <= 1e-14 * w_scale.max(f64::MIN_POSITIVE);

        // Apply the accumulated rotations to the new column.
        for j in 0..k {
            let t1 = h[j];
            let t2 = h[j + 1];
            h[j] = Complex64::new(cos[j], 0.0) * t1 + sin[j] * t2;
            h[j + 1] = -sin[j].conj() * t1 + Complex64::new(cos[j], 0.0) * t2;
        }
        // New rotation zeroing h_next against h[k].
        let a = h[k];
        let hb = Complex64::new(h_next, 0.0);
        let (c_new, s_new, r_new) = if a.norm() == 0.0 {
            (0.0, Complex64::new(1.0, 0.0), hb)
        } else {
            let t = (a.norm_sqr() + h_next * h_next).sqrt();
            let c = a.norm() / t;
            let phase = a / a.norm();
            (c, phase * (h_next / t), phase * t)
        };
        h[k] = r_new;
        cos.push(c_new);
        sin.push(s_new);
        let gk = g[k];
        g[k] = Complex64::new(c_new, 0.0) * gk;
        g.push(-s_new.conj() * gk);
        r_cols.push(h);

        let res = g[k + 1].norm();
        history.push(res);
        k += 1;

        if res / beta <= tol || breakdown {
            converged = true;
            break;
        }
        if k < max_iter {
            basis.push(w.iter().map(|v| v / h_next).collect());
        }
    }

    // Back substitution: R y = g over the k columns actually built.
    let m = r_cols.len();
    let mut y = vec![Complex64::ZERO; m];
    for i in (0..m).rev() {
        let mut acc = g[i];
        for j in (i + 1)..m {
            acc -= r_cols[j][i] * y[j];
        }
        y[i] = acc / r_cols[i][i];
    }
    let mut x = vec![Complex64::ZERO; n];
    for (j, yj) in y.iter().enumerate() {
        for (xi, vi) in x.iter_mut().zip(&basis[j]) {
            *xi += yj * vi;
        }
    }

    Ok(GmresRun { residual_history: history, iterations: m, converged, solution: x })
}
