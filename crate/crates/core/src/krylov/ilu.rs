use num_complex::Complex64;

use super::KrylovError;
use crate::fem::ComplexCsrMatrix;

/// Incomplete LU factorization with the sparsity pattern of the matrix:
/// unit lower factor below the diagonal, upper factor on and above it.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    factors: ComplexCsrMatrix,
    diagonal: Vec<usize>,
}

impl Ilu0 {
    pub fn new(matrix: &ComplexCsrMatrix) -> Result<Self, KrylovError> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(KrylovError::DimensionMismatch { expected: n, got: matrix.ncols() });
        }
        let offsets = matrix.row_offsets();
        let cols = matrix.col_indices();
        let mut values = matrix.values().to_vec();
        let mut diagonal = Vec::with_capacity(n);
        for i in 0..n {
            let (c, _) = matrix.row(i);
            match c.binary_search(&i) {
                Ok(k) => diagonal.push(offsets[i] + k),
                Err(_) => return Err(KrylovError::ZeroPivot { row: i }),
            }
        }
        // position of each column of the current row, or usize::MAX
        let mut position = vec![usize::MAX; n];
        for i in 0..n {
            let row = offsets[i]..offsets[i + 1];
            for p in row.clone() {
                position[cols[p]] = p;
            }
            for p in offsets[i]..diagonal[i] {
                let k = cols[p];
                let pivot = values[diagonal[k]];
                if pivot.norm() == 0.0 {
                    return Err(KrylovError::ZeroPivot { row: k });
                }
                let factor = values[p] / pivot;
                values[p] = factor;
                for q in diagonal[k] + 1..offsets[k + 1] {
                    let target = position[cols[q]];
                    if target != usize::MAX {
                        let above = values[q];
                        values[target] -= factor * above;
                    }
                }
            }
            if values[diagonal[i]].norm() == 0.0 {
                return Err(KrylovError::ZeroPivot { row: i });
            }
            for p in row {
                position[cols[p]] = usize::MAX;
            }
        }
        let triplets: Vec<(usize, usize, Complex64)> = (0..n)
            .flat_map(|i| (offsets[i]..offsets[i + 1]).map(move |p| (i, p)))
            .map(|(i, p)| (i, cols[p], values[p]))
            .collect();
        Ok(Self { factors: ComplexCsrMatrix::from_triplets(n, n, &triplets), diagonal })
    }

    /// Combined `L` and `U` factors; the pattern equals that of the input matrix.
    pub fn factors(&self) -> &ComplexCsrMatrix {
        &self.factors
    }

    pub fn solve(&self, r: &[Complex64], z: &mut [Complex64]) {
        let n = self.diagonal.len();
        let cols = self.factors.col_indices();
        let vals = self.factors.values();
        let offsets = self.factors.row_offsets();
        for i in 0..n {
            let mut acc = r[i];
            for p in offsets[i]..self.diagonal[i] {
                acc -= vals[p] * z[cols[p]];
            }
            z[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for p in self.diagonal[i] + 1..offsets[i + 1] {
                acc -= vals[p] * z[cols[p]];
            }
            z[i] = acc / vals[self.diagonal[i]];
        }
    }
}
