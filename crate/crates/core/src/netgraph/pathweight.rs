//! Attenuated path counting: `W = sum_l (aA)^l = (I - aA)^-1`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use super::GraphError;
use crate::math::{abs, ln};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GraphError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(GraphError::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|x| abs(*x)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| abs(a - b))
            .fold(0.0, f64::max)
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self, GraphError> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.norm_inf().max(1.0);
        for col in 0..n {
            let (pivot_row, pivot) = (col..n)
                .map(|r| (r, abs(a[(r, col)])))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= 1e-13 * scale {
                return Err(GraphError::Singular { column: col, pivot });
            }
            if pivot_row != col {
                for j in 0..n {
                    a.data.swap(col * n + j, pivot_row * n + j);
                    inv.data.swap(col * n + j, pivot_row * n + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..n {
                a.data[col * n + j] /= p;
                inv.data[col * n + j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a.data[r * n + j] -= f * a.data[col * n + j];
                    inv.data[r * n + j] -= f * inv.data[col * n + j];
                }
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Number of repeated squarings; the estimate is `||A^(2^k)||^(2^-k)`.
const SQUARINGS: u32 = 48;

/// Spectral radius via Gelfand's formula `lim ||A^m||^(1/m)`, evaluated
/// by repeated squaring with the scale tracked in log space. Exact zero
/// for nilpotent 0/1 matrices.
pub fn spectral_radius(a: &DenseMatrix) -> f64 {
    let mut b = a.clone();
    let s = b.norm_inf();
    if s == 0.0 {
        return 0.0;
    }
    b = b.scaled(1.0 / s);
    let mut log_norm = ln(s);
    let mut power = 1.0f64;
    for _ in 0..SQUARINGS {
        b = b.matmul(&b);
        log_norm *= 2.0;
        power *= 2.0;
        let s = b.norm_inf();
        if s == 0.0 {
            return 0.0;
        }
        b = b.scaled(1.0 / s);
        log_norm += ln(s);
    }
    libm::exp(log_norm / power)
}

/// `(I - aA)^-1`, the attenuated sum over paths of every length.
///
/// Fails when `a * rho(A) >= 1`, where the series does not converge.
pub fn path_weight_matrix(a: &DenseMatrix, attenuation: f64) -> Result<DenseMatrix, GraphError> {
    if !(attenuation > 0.0 && attenuation.is_finite()) {
        return Err(GraphError::InvalidAttenuation { attenuation });
    }
    let radius = spectral_radius(a);
    let product = attenuation * radius;
    if product >= 1.0 {
        return Err(GraphError::Divergent {
            attenuation,
            radius,
            product,
            limit: 1.0 / radius,
        });
    }
    DenseMatrix::identity(a.size())
        .sub(&a.scaled(attenuation))
        .inverse()
}
