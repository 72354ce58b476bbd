//! Sparse assembly and direct LU solves, backed by `faer`.

use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::prelude::Solve;
use faer::{Mat, Par};

use crate::error::{Error, Result};

/// Row-wise triplet accumulator for a square sparse matrix.
#[derive(Debug, Clone)]
pub struct SparseBuilder {
    n: usize,
    triplets: Vec<Triplet<usize, usize, f64>>,
}

impl SparseBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            triplets: Vec::with_capacity(n * 9),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Duplicate entries are summed.
    pub fn add(&mut self, row: usize, col: usize, val: f64) {
        if val != 0.0 {
            self.triplets.push(Triplet::new(row, col, val));
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.triplets.iter().map(|t| (t.row, t.col, t.val))
    }

    /// Dense product with the assembled matrix, used for residual checks.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for t in &self.triplets {
            y[t.row] += t.val * x[t.col];
        }
        y
    }

    pub fn factor(&self) -> Result<SparseLu> {
        // Sequential kernels keep the factorization deterministic.
        faer::set_global_parallelism(Par::Seq);
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(self.n, self.n, &self.triplets)
            .map_err(|e| Error::LinearSolveFailed(format!("assembly: {e:?}")))?;
        let lu = mat
            .sp_lu()
            .map_err(|e| Error::LinearSolveFailed(format!("factorization: {e:?}")))?;
        Ok(SparseLu { lu, n: self.n })
    }
}

/// A factored sparse matrix. Read-only after construction, so it can be
/// shared between concurrent runs.
pub struct SparseLu {
    lu: Lu<usize, f64>,
    n: usize,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.n).finish()
    }
}

impl SparseLu {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::Mismatch(format!(
                "rhs has {} entries, system has {}",
                rhs.len(),
                self.n
            )));
        }
        let mut b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(b.as_mut());
        let x: Vec<f64> = (0..self.n).map(|i| b[(i, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolveFailed("non-finite solution".into()));
        }
        Ok(x)
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_nonsymmetric_system() {
        let mut b = SparseBuilder::new(3);
        b.add(0, 0, 4.0);
        b.add(0, 1, 1.0);
        b.add(1, 0, 2.0);
        b.add(1, 1, 5.0);
        b.add(1, 2, -1.0);
        b.add(2, 1, 1.0);
        b.add(2, 2, 3.0);
        let x_true = [1.0, -2.0, 0.5];
        let rhs = b.matvec(&x_true);
        let x = b.factor().unwrap().solve(&rhs).unwrap();
        for (a, e) in x.iter().zip(x_true) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut b = SparseBuilder::new(2);
        b.add(0, 0, 1.0);
        b.add(1, 0, 1.0);
        let r = b.factor().and_then(|lu| lu.solve(&[1.0, 1.0]));
        assert!(r.is_err());
    }
}
