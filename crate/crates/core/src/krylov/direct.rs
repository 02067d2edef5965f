use std::collections::VecDeque;

use num_complex::Complex64;

use super::KrylovError;
use crate::fem::ComplexCsrMatrix;

pub const MAX_DIRECT_DOFS: usize = 30_000;
/// Off-diagonal entries stored in both triangles together (about 400 MB).
pub const MAX_PROFILE_ENTRIES: usize = 25_000_000;

/// Reverse Cuthill-McKee ordering of the symmetrized sparsity graph.
/// Returns `order` with `order[new] = old`.
pub fn reverse_cuthill_mckee(matrix: &ComplexCsrMatrix) -> Vec<usize> {
    let n = matrix.nrows();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in matrix.row(i).0 {
            if i != j {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    let degree = |v: usize| adjacency[v].len();

    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut level = vec![usize::MAX; n];
    while order.len() < n {
        // lowest-degree unvisited vertex seeds the next component
        let seed = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| (degree(v), v)).unwrap();
        let start = pseudo_peripheral(seed, &adjacency, &mut level);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree(w), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Breadth-first levels from `root` within its component; returns the vertices
/// of the last level and the eccentricity.
fn level_structure(root: usize, adjacency: &[Vec<usize>], level: &mut [usize]) -> (Vec<usize>, usize) {
    let mut touched = vec![root];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        depth = depth.max(level[v]);
        for &w in &adjacency[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                touched.push(w);
                queue.push_back(w);
            }
        }
    }
    let last: Vec<usize> = touched.iter().copied().filter(|&v| level[v] == depth).collect();
    for v in touched {
        level[v] = usize::MAX;
    }
    (last, depth)
}

fn pseudo_peripheral(seed: usize, adjacency: &[Vec<usize>], level: &mut [usize]) -> usize {
    let mut root = seed;
    let (mut last, mut depth) = level_structure(root, adjacency, level);
    loop {
        let candidate = *last.iter().min_by_key(|&&v| (adjacency[v].len(), v)).unwrap();
        let (next_last, next_depth) = level_structure(candidate, adjacency, level);
        if next_depth <= depth {
            return root;
        }
        root = candidate;
        last = next_last;
        depth = next_depth;
    }
}

/// LU factorization without pivoting in skyline storage, after a reverse
/// Cuthill-McKee reordering. The profile is taken symmetric: row `i` of `L`
/// and column `i` of `U` both start at the first nonzero column of row or
/// column `i` of the permuted matrix.
#[derive(Debug, Clone)]
pub struct SkylineLu {
    order: Vec<usize>,
    first: Vec<usize>,
    /// Start of row `i` of `L` / column `i` of `U` in `lower` / `upper`.
    start: Vec<usize>,
    lower: Vec<Complex64>,
    upper: Vec<Complex64>,
    diagonal: Vec<Complex64>,
    natural_bandwidth: usize,
}

impl SkylineLu {
    pub fn new(matrix: &ComplexCsrMatrix) -> Result<Self, KrylovError> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(KrylovError::DimensionMismatch { expected: n, got: matrix.ncols() });
        }
        if n > MAX_DIRECT_DOFS {
            return Err(KrylovError::TooLarge { what: "dofs", size: n, limit: MAX_DIRECT_DOFS });
        }
        let order = reverse_cuthill_mckee(matrix);
        let mut inverse = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for &j in matrix.row(i).0 {
                let (a, b) = (inverse[i], inverse[j]);
                let (lo, hi) = (a.min(b), a.max(b));
                first[hi] = first[hi].min(lo);
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i]));
        }
        let profile = start[n];
        if profile.saturating_mul(2) > MAX_PROFILE_ENTRIES {
            return Err(KrylovError::TooLarge { what: "profile entries", size: 2 * profile, limit: MAX_PROFILE_ENTRIES });
        }

        let zero = Complex64::new(0.0, 0.0);
        let mut lower = vec![zero; profile];
        let mut upper = vec![zero; profile];
        let mut diagonal = vec![zero; n];
        for i in 0..n {
            let (cols, vals) = matrix.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (r, c) = (inverse[i], inverse[j]);
                if r == c {
                    diagonal[r] += v;
                } else if r > c {
                    lower[start[r] + c - first[r]] += v;
                } else {
                    upper[start[c] + r - first[c]] += v;
                }
            }
        }

        // Crout order: for each j, column j of U, then row j of L, then the pivot.
        for j in 0..n {
            let fj = first[j];
            let uj = start[j];
            for i in fj..j {
                let fi = first[i];
                let k0 = fi.max(fj);
                let dot: Complex64 = (k0..i)
                    .map(|k| lower[start[i] + k - fi] * upper[uj + k - fj])
                    .sum();
                upper[uj + i - fj] -= dot;
            }
            for i in fj..j {
                let fi = first[i];
                let k0 = fi.max(fj);
                let dot: Complex64 = (k0..i)
                    .map(|k| lower[uj + k - fj] * upper[start[i] + k - fi])
                    .sum();
                let pivot = diagonal[i];
                lower[uj + i - fj] = (lower[uj + i - fj] - dot) / pivot;
            }
            let dot: Complex64 = (fj..j).map(|k| lower[uj + k - fj] * upper[uj + k - fj]).sum();
            diagonal[j] -= dot;
            if diagonal[j].norm() == 0.0 || !diagonal[j].is_finite() {
                return Err(KrylovError::ZeroPivot { row: order[j] });
            }
        }
        Ok(Self { order, first, start, lower, upper, diagonal, natural_bandwidth: matrix.bandwidth() })
    }

    pub fn dim(&self) -> usize {
        self.order.len()
    }

    /// Bandwidth after reordering.
    pub fn bandwidth(&self) -> usize {
        (0..self.dim()).map(|i| i - self.first[i]).max().unwrap_or(0)
    }

    /// Bandwidth of the matrix in its original numbering.
    pub fn natural_bandwidth(&self) -> usize {
        self.natural_bandwidth
    }

    /// Off-diagonal entries stored in `L` and `U` together.
    pub fn profile_entries(&self) -> usize {
        2 * self.lower.len()
    }

    pub fn solve(&self, r: &[Complex64], z: &mut [Complex64]) {
        let n = self.dim();
        let mut y: Vec<Complex64> = self.order.iter().map(|&old| r[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let s = self.start[i];
            let dot: Complex64 = (fi..i).map(|k| self.lower[s + k - fi] * y[k]).sum();
            y[i] -= dot;
        }
        // column-oriented back substitution matches the column storage of U
        for j in (0..n).rev() {
            y[j] /= self.diagonal[j];
            let fj = self.first[j];
            let s = self.start[j];
            let yj = y[j];
            for k in fj..j {
                y[k] -= self.upper[s + k - fj] * yj;
            }
        }
        for (new, &old) in self.order.iter().enumerate() {
            z[old] = y[new];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// 1D Laplacian plus a complex shift, numbered so that the natural bandwidth is large.
    fn shuffled_path(n: usize) -> ComplexCsrMatrix {
        let label = |i: usize| (i * 7) % n;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((label(i), label(i), c(2.5, 0.3)));
            if i + 1 < n {
                t.push((label(i), label(i + 1), c(-1.0, 0.1)));
                t.push((label(i + 1), label(i), c(-1.0, -0.2)));
            }
        }
        ComplexCsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn rcm_recovers_tridiagonal_band() {
        let a = shuffled_path(50);
        let lu = SkylineLu::new(&a).unwrap();
        assert!(a.bandwidth() > 10);
        assert_eq!(lu.bandwidth(), 1);
        let mut order = reverse_cuthill_mckee(&a);
        order.sort_unstable();
        assert_eq!(order, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn solve_inverts_nonsymmetric_values() {
        let a = shuffled_path(40);
        let lu = SkylineLu::new(&a).unwrap();
        let x: Vec<Complex64> = (0..40).map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut b = vec![c(0.0, 0.0); 40];
        a.matvec(&x, &mut b);
        let mut z = vec![c(0.0, 0.0); 40];
        lu.solve(&b, &mut z);
        for (u, v) in z.iter().zip(&x) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn disconnected_components_and_singular_pivot() {
        let a = ComplexCsrMatrix::from_triplets(3, 3, &[(0, 0, c(1.0, 0.0)), (1, 1, c(2.0, 0.0)), (2, 2, c(3.0, 0.0))]);
        let lu = SkylineLu::new(&a).unwrap();
        let mut z = vec![c(0.0, 0.0); 3];
        lu.solve(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)], &mut z);
        assert!((z[2] - c(1.0 / 3.0, 0.0)).norm() < 1e-16);
        let singular = ComplexCsrMatrix::from_triplets(2, 2, &[(0, 0, c(1.0, 0.0)), (0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0)), (1, 1, c(1.0, 0.0))]);
        assert!(matches!(SkylineLu::new(&singular), Err(KrylovError::ZeroPivot { .. })));
    }
}
