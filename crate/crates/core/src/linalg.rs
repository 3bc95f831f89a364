//! Small dense symmetric solvers for the normal equations of the regression
//! routines. Matrices are row-major `Vec<f64>` of side `dim`; the systems in
//! this crate never exceed a handful of unknowns.

use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Returns `None` when the matrix is not numerically positive definite.
    pub fn factor(matrix: &[f64], dim: usize) -> Option<Self> {
        debug_assert_eq!(matrix.len(), dim * dim);
        let mut lower = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut s = matrix[i * dim + j];
                for k in 0..j {
                    s -= lower[i * dim + k] * lower[j * dim + k];
                }
                if i == j {
                    // relative pivot guard
                    if s <= matrix[i * dim + i].abs() * 1e-13 || s <= 0.0 {
                        return None;
                    }
                    lower[i * dim + i] = sqrt(s);
                } else {
                    lower[i * dim + j] = s / lower[j * dim + j];
                }
            }
        }
        Some(Self { dim, lower })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let l = &self.lower;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        x
    }

    pub fn inverse(&self) -> Vec<f64> {
        let n = self.dim;
        let mut inv = vec![0.0; n * n];
        let mut unit = vec![0.0; n];
        for j in 0..n {
            unit.iter_mut().for_each(|u| *u = 0.0);
            unit[j] = 1.0;
            let col = self.solve(&unit);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }
}

/// Finds the first column that is (numerically) a linear combination of the
/// columns before it. Returns its index and the indices of the earlier
/// columns that carry weight in that combination.
pub fn first_dependent_column(columns: &[&[f64]], tolerance: f64) -> Option<(usize, Vec<usize>)> {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    // coefficients expressing each orthonormal basis vector through the original columns
    let mut basis_origin: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for (j, column) in columns.iter().enumerate() {
        let norm0 = sqrt(column.iter().map(|v| v * v).sum::<f64>());
        let mut residual: Vec<f64> = column.to_vec();
        let mut origin = vec![0.0; columns.len()];
        origin[j] = 1.0;
        for (q, q_origin) in basis.iter().zip(basis_origin.iter()) {
            let proj: f64 = (0..rows).map(|r| q[r] * residual[r]).sum();
            for r in 0..rows {
                residual[r] -= proj * q[r];
            }
            for (o, qo) in origin.iter_mut().zip(q_origin.iter()) {
                *o -= proj * qo;
            }
        }
        let norm = sqrt(residual.iter().map(|v| v * v).sum::<f64>());
        if norm0 == 0.0 || norm <= tolerance * norm0 {
            let partners = (0..j).filter(|&k| origin[k].abs() > 1e-8).collect();
            return Some((j, partners));
        }
        residual.iter_mut().for_each(|v| *v /= norm);
        origin.iter_mut().for_each(|v| *v /= norm);
        basis.push(residual);
        basis_origin.push(origin);
    }
    None
}
