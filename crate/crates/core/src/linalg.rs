//! Dense Gaussian elimination with partial pivoting.

use crate::error::{Error, Result};

/// Relative pivot tolerance: pivots below `PIVOT_RTOL * max|M|` are
/// treated as zero.
pub const PIVOT_RTOL: f64 = 1e-12;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = f(r, c);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(m, v)| m * v).sum())
            .collect()
    }

    /// Solves `M x = rhs`, consuming a copy of the matrix.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        assert_eq!(rhs.len(), n, "right-hand side length must match the matrix dimension");
        let tolerance = PIVOT_RTOL * self.max_abs();
        let mut m = self.data.clone();
        let mut b = rhs.to_vec();

        for col in 0..n {
            let (pivot_row, pivot) = (col..n)
                .map(|r| (r, m[r * n + col]))
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("non-empty pivot search");
            if !(pivot.abs() > tolerance) {
                return Err(Error::SingularSystem {
                    column: col,
                    pivot: pivot.abs(),
                    tolerance,
                });
            }
            if pivot_row != col {
                for c in 0..n {
                    m.swap(col * n + c, pivot_row * n + c);
                }
                b.swap(col, pivot_row);
            }
            for r in col + 1..n {
                let factor = m[r * n + col] / pivot;
                if factor == 0.0 {
                    continue;
                }
                m[r * n + col] = 0.0;
                for c in col + 1..n {
                    m[r * n + c] -= factor * m[col * n + c];
                }
                b[r] -= factor * b[col];
            }
        }

        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let tail: f64 = (r + 1..n).map(|c| m[r * n + c] * x[c]).sum();
            x[r] = (b[r] - tail) / m[r * n + r];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system_needing_pivot() {
        // first pivot is zero without row exchange
        let m = DenseMatrix::from_fn(3, |r, c| [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]][r][c]);
        let x = m.solve(&[5.0, 3.0, 6.0]).unwrap();
        let back = m.mul_vec(&x);
        for (got, want) in back.iter().zip([5.0, 3.0, 6.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((x[0] - 1.4).abs() < 1e-12 && (x[1] - 1.6).abs() < 1e-12 && (x[2] - 1.8).abs() < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let m = DenseMatrix::from_fn(2, |_, _| 1.0);
        match m.solve(&[1.0, 2.0]) {
            Err(Error::SingularSystem { column, .. }) => assert_eq!(column, 1),
            other => panic!("expected singular, got {other:?}"),
        }
    }
}
