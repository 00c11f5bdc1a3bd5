//! Banded LU with partial pivoting behind a reverse Cuthill-McKee reordering.
//!
//! The finite-element matrices and their complex shifts have narrow bands
//! once RCM-renumbered, so one factorization per resolvent shift stays cheap.
//! Storage and pivoting follow the LAPACK gbtrf layout: kl subdiagonals, ku
//! superdiagonals, and kl extra rows for pivot fill.

use num_complex::Complex64;

use super::LinalgError;
use crate::sparse::SparseComplexMatrix;

/// Reverse Cuthill-McKee ordering of the symmetrized pattern.
/// Returns `order` with `order[new] = old`.
pub fn rcm_ordering(m: &SparseComplexMatrix) -> Vec<usize> {
    let n = m.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for k in m.row_offsets()[i]..m.row_offsets()[i + 1] {
            let j = m.col_indices()[k];
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for nb in &mut adj {
        nb.sort_unstable();
        nb.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        // Start each component from an unvisited vertex of minimum degree.
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i]);
        let Some(start) = start else { break };
        visited[start] = true;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_by_key(|&u| degree[u]);
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// LU factorization of a square complex matrix in band storage, with the
/// symmetric RCM permutation applied transparently on solve.
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<Complex64>,
    piv: Vec<usize>,
    /// order[new] = old
    order: Vec<usize>,
}

impl BandLu {
    pub fn factor(m: &SparseComplexMatrix) -> Result<Self, LinalgError> {
        let order = rcm_ordering(m);
        Self::factor_with_order(m, order)
    }

    fn factor_with_order(m: &SparseComplexMatrix, order: Vec<usize>) -> Result<Self, LinalgError> {
        let n = m.dim();
        if n == 0 {
            return Err(LinalgError::InvalidArgument("empty matrix".into()));
        }
        let mut inv = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            inv[old] = new;
        }
        let mut band: usize = 0;
        for i in 0..n {
            for k in m.row_offsets()[i]..m.row_offsets()[i + 1] {
                let j = m.col_indices()[k];
                band = band.max(inv[i].abs_diff(inv[j]));
            }
        }
        let kl = band;
        let ku = band;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![Complex64::ZERO; ldab * n];
        // A_perm[p, q] = A[order[p], order[q]] at ab[q * ldab + kl + ku + p - q].
        for i in 0..n {
            for k in m.row_offsets()[i]..m.row_offsets()[i + 1] {
                let j = m.col_indices()[k];
                let p = inv[i];
                let q = inv[j];
                ab[q * ldab + (kl + ku + p) - q] = m.values()[k];
            }
        }
        let mut piv = vec![0usize; n];
        for j in 0..n {
            let imax = (j + kl).min(n - 1);
            // Pivot search within the permitted rows of column j.
            let mut p = j;
            let mut best = ab[j * ldab + kl + ku].norm_sqr();
            for i in (j + 1)..=imax {
                let v = ab[j * ldab + (kl + ku + i) - j].norm_sqr();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[j] = p;
            if best == 0.0 {
                return Err(LinalgError::Singular { col: j });
            }
            let cmax = (j + kl + ku).min(n - 1);
            if p != j {
                for c in j..=cmax {
                    let rj = c * ldab + (kl + ku + j) - c;
                    let rp = c * ldab + (kl + ku + p) - c;
                    ab.swap(rj, rp);
                }
            }
            let pivot = ab[j * ldab + kl + ku];
            for i in (j + 1)..=imax {
                let idx = j * ldab + (kl + ku + i) - j;
                let mult = ab[idx] / pivot;
                ab[idx] = mult;
            }
            for c in (j + 1)..=cmax {
                let ajc = ab[c * ldab + (kl + ku + j) - c];
                if ajc == Complex64::ZERO {
                    continue;
                }
                let base = c * ldab + (kl + ku) - c;
                for i in (j + 1)..=imax {
                    let mult = ab[j * ldab + (kl + ku + i) - j];
                    ab[base + i] -= mult * ajc;
                }
            }
        }
        Ok(Self { n, kl, ku, ldab, ab, piv, order })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn a(&self, i: usize, j: usize) -> Complex64 {
        self.ab[j * self.ldab + (self.kl + self.ku + i) - j]
    }

    /// Solves A x = b.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let mut x: Vec<Complex64> = (0..self.n).map(|p| b[self.order[p]]).collect();
        self.banded_solve(&mut x);
        let mut out = vec![Complex64::ZERO; self.n];
        for p in 0..self.n {
            out[self.order[p]] = x[p];
        }
        out
    }

    /// Solves A^H x = b.
    pub fn adjoint_solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let mut x: Vec<Complex64> = (0..self.n).map(|p| b[self.order[p]]).collect();
        self.banded_adjoint_solve(&mut x);
        let mut out = vec![Complex64::ZERO; self.n];
        for p in 0..self.n {
            out[self.order[p]] = x[p];
        }
        out
    }

    fn banded_solve(&self, x: &mut [Complex64]) {
        let n = self.n;
        // Forward: apply the interleaved row swaps and L.
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            if xj != Complex64::ZERO {
                let imax = (j + self.kl).min(n - 1);
                for i in (j + 1)..=imax {
                    x[i] -= self.a(i, j) * xj;
                }
            }
        }
        // Back substitution with U (bandwidth kl + ku after pivoting).
        for i in (0..n).rev() {
            let cmax = (i + self.kl + self.ku).min(n - 1);
            let mut acc = x[i];
            for c in (i + 1)..=cmax {
                acc -= self.a(i, c) * x[c];
            }
            x[i] = acc / self.a(i, i);
        }
    }

    fn banded_adjoint_solve(&self, x: &mut [Complex64]) {
        let n = self.n;
        // Solve U^H y = b by forward substitution.
        for i in 0..n {
            let cmin = i.saturating_sub(self.kl + self.ku);
            let mut acc = x[i];
            for c in cmin..i {
                acc -= self.a(c, i).conj() * x[c];
            }
            x[i] = acc / self.a(i, i).conj();
        }
        // Solve L^H, reversing the interleaved swaps.
        for j in (0..n).rev() {
            let imax = (j + self.kl).min(n - 1);
            let mut acc = Complex64::ZERO;
            for i in (j + 1)..=imax {
                acc += self.a(i, j).conj() * x[i];
            }
            x[j] -= acc;
            let p = self.piv[j];
            if p != j {
                x.swap(j, p);
            }
        }
    }
}
