//! Complex sparse matrices in compressed row storage.
//!
//! All finite-element operators in this crate are stored complex even when
//! their entries are real, so downstream kernels have a single code path.

use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("triplet index ({row}, {col}) out of bounds for dimension {dim}")]
    IndexOutOfBounds { row: usize, col: usize, dim: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Square complex matrix in compressed row layout.
///
/// Column indices are sorted within each row. Entries that are symbolically
/// present stay stored even when a linear combination cancels them; the
/// pattern is part of the value.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseComplexMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseComplexMatrix {
    /// Builds a matrix from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(
        n: usize,
        triplets: &[(usize, usize, Complex64)],
    ) -> Result<Self, SparseError> {
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(SparseError::IndexOutOfBounds { row: i, col: j, dim: n });
            }
        }
        let mut per_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            per_row[i].push((j, v));
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for row in &mut per_row {
            // Stable sort keeps the accumulation order deterministic, so
            // symmetric inputs assemble to bitwise-symmetric matrices.
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = row[k].1;
                k += 1;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { n, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds from a dense row-major table; zeros are kept out of the pattern.
    pub fn from_dense(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != Complex64::ZERO {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &triplets).expect("indices in range by construction")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Entry accessor; absent pattern positions read as zero.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        match self.col_indices[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => Complex64::ZERO,
        }
    }

    /// y = A x
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = Complex64::ZERO;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            y[i] = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::ZERO; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// y = A^H x
    pub fn matvec_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(Complex64::ZERO);
        for i in 0..self.n {
            let xi = x[i];
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                y[self.col_indices[k]] += self.values[k].conj() * xi;
            }
        }
    }

    /// Linear combination over the merged pattern: sum of coeff * matrix.
    pub fn linear_combination(
        terms: &[(Complex64, &SparseComplexMatrix)],
    ) -> Result<Self, SparseError> {
        assert!(!terms.is_empty());
        let n = terms[0].1.n;
        for &(_, m) in terms {
            if m.n != n {
                return Err(SparseError::DimensionMismatch { expected: n, actual: m.n });
            }
        }
        let mut triplets = Vec::new();
        for &(c, m) in terms {
            for i in 0..n {
                for k in m.row_offsets[i]..m.row_offsets[i + 1] {
                    triplets.push((i, m.col_indices[k], c * m.values[k]));
                }
            }
        }
        Self::from_triplets(n, &triplets)
    }

    /// z I - A, with the full diagonal forced into the pattern.
    pub fn shifted_from(&self, z: Complex64) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz() + self.n);
        for i in 0..self.n {
            triplets.push((i, i, z));
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                triplets.push((i, self.col_indices[k], -self.values[k]));
            }
        }
        Self::from_triplets(self.n, &triplets).expect("indices in range")
    }

    /// z B - A over the merged pattern.
    pub fn pencil_shift(a: &Self, b: &Self, z: Complex64) -> Result<Self, SparseError> {
        Self::linear_combination(&[(z, b), (Complex64::new(-1.0, 0.0), a)])
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Exact (bitwise) transpose-symmetry test.
    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.n {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[k];
                let a = self.values[k];
                let b = self.get(j, i);
                if a.re != b.re || a.im != b.im {
                    return false;
                }
            }
        }
        true
    }

    /// Conjugates the matrix by a vertex permutation: out[p(i), p(j)] = self[i, j].
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                triplets.push((perm[i], perm[self.col_indices[k]], self.values[k]));
            }
        }
        Self::from_triplets(self.n, &triplets).expect("permutation in range")
    }

    /// Restriction to the rows/columns listed in `keep` (sorted, distinct).
    pub fn restricted(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            for k in self.row_offsets[old_i]..self.row_offsets[old_i + 1] {
                let j = map[self.col_indices[k]];
                if j != usize::MAX {
                    triplets.push((new_i, j, self.values[k]));
                }
            }
        }
        Self::from_triplets(keep.len(), &triplets).expect("restricted indices in range")
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut dense = vec![vec![Complex64::ZERO; self.n]; self.n];
        for i in 0..self.n {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                dense[i][self.col_indices[k]] = self.values[k];
            }
        }
        dense
    }

    /// Matrix Market coordinate output, complex general, 1-based indices.
    pub fn write_matrix_market<W: Write>(&self, w: &mut W) -> Result<(), SparseError> {
        writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        for i in 0..self.n {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                writeln!(
                    w,
                    "{} {} {:e} {:e}",
                    i + 1,
                    self.col_indices[k] + 1,
                    self.values[k].re,
                    self.values[k].im
                )?;
            }
        }
        Ok(())
    }

    pub fn matrix_market_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_matrix_market(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Two-column CSV (re, im) for complex vectors.
pub fn write_complex_vector_csv<W: Write>(
    w: &mut W,
    v: &[Complex64],
) -> Result<(), SparseError> {
    writeln!(w, "re,im")?;
    for x in v {
        writeln!(w, "{},{}", x.re, x.im)?;
    }
    Ok(())
}

pub fn complex_vector_csv_string(v: &[Complex64]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "re,im");
    for x in v {
        let _ = writeln!(s, "{},{}", x.re, x.im);
    }
    s
}
