use num_complex::Complex64;

/// Square or rectangular sparse matrix in compressed sparse row form with
/// strictly increasing column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexCsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl ComplexCsrMatrix {
    /// Sums duplicate entries. The summation order for a given position is
    /// the order of the triplets, so the result is deterministic.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, Complex64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) outside {nrows} x {ncols}");
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut bucket = vec![(0usize, Complex64::new(0.0, 0.0)); triplets.len()];
        for &(i, j, v) in triplets {
            bucket[fill[i]] = (j, v);
            fill[i] += 1;
        }
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..nrows {
            let row = &mut bucket[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(j, _)| j);
            for &(j, v) in row.iter() {
                if col_indices.len() > row_offsets[i] && *col_indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self { nrows, ncols, row_offsets, col_indices, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
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

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[Complex64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> Option<Complex64> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|k| vals[k])
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.nrows)
            .flat_map(|i| self.row(i).0.iter().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let a = ComplexCsrMatrix::from_triplets(2, 3, &[(1, 2, c(1.0)), (0, 1, c(2.0)), (1, 0, c(3.0)), (1, 2, c(4.0))]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.row(1).0, &[0, 2]);
        assert_eq!(a.get(1, 2), Some(c(5.0)));
        assert_eq!(a.get(0, 0), None);
        let mut y = vec![c(0.0); 2];
        a.matvec(&[c(1.0), c(1.0), c(1.0)], &mut y);
        assert_eq!(y, vec![c(2.0), c(8.0)]);
        assert_eq!(a.bandwidth(), 1);
    }

    #[test]
    fn empty_rows() {
        let a = ComplexCsrMatrix::from_triplets(3, 3, &[(2, 2, c(1.0))]);
        assert_eq!(a.row_offsets(), &[0, 0, 0, 1]);
    }
}
