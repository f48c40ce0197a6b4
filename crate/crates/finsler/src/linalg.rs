//! Dense rank-3/4 tensor containers and jet-valued linear algebra.
//!
//! Dimensions here are tiny (2–4), so everything is a flat `Vec` with inline
//! index arithmetic; clarity beats cleverness at this size.

use crate::error::{Error, Result};
use crate::jets::Jet;

/// Dense rank-3 tensor, indexed `[(i, j, k)]`.
#[derive(Clone, Debug)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Tensor3 {
        Tensor3 { dim, data: vec![0.0; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl std::ops::Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.data[(i * self.dim + j) * self.dim + k]
    }
}

impl std::ops::IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.data[(i * self.dim + j) * self.dim + k]
    }
}

/// Dense rank-4 tensor, indexed `[(i, j, k, l)]`.
#[derive(Clone, Debug)]
pub struct Tensor4 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Tensor4 {
        Tensor4 { dim, data: vec![0.0; dim * dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl std::ops::Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        &self.data[((i * self.dim + j) * self.dim + k) * self.dim + l]
    }
}

impl std::ops::IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    fn index_mut(&mut self, (i, j, k, l): (usize, usize, usize, usize)) -> &mut f64 {
        &mut self.data[((i * self.dim + j) * self.dim + k) * self.dim + l]
    }
}

// ─── Plain-float helpers ──────────────────────────────────────────────────

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

// ─── Jet-valued helpers ───────────────────────────────────────────────────

pub(crate) fn jet_dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = &a[0] * &b[0];
    for (x, y) in a.iter().zip(b).skip(1) {
        acc = &acc + &(x * y);
    }
    acc
}

pub(crate) fn jet_sq_norm(a: &[Jet]) -> Jet {
    jet_dot(a, a)
}

/// Invert a square matrix of jets by Gauss–Jordan elimination, pivoting on
/// constant terms. Exact in the truncated algebra: the result is the Taylor
/// expansion of the pointwise matrix inverse.
pub(crate) fn jet_matrix_inverse(m: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let n = m.len();
    let (nv, ord) = (m[0][0].num_vars(), m[0][0].order());
    let mut a: Vec<Vec<Jet>> = m.to_vec();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet::constant(nv, ord, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                a[r][col]
                    .value()
                    .abs()
                    .total_cmp(&a[s][col].value().abs())
            })
            .expect("non-empty range");
        let pivot = a[pivot_row][col].value().abs();
        if pivot < 1e-13 {
            return Err(Error::SingularMatrix { pivot });
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);

        let scale = a[col][col].recip()?;
        for j in 0..n {
            a[col][j] = &a[col][j] * &scale;
            inv[col][j] = &inv[col][j] * &scale;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            if factor.value() == 0.0 && factor.coeffs().iter().all(|&c| c == 0.0) {
                continue;
            }
            for j in 0..n {
                a[row][j] = &a[row][j] - &(&factor * &a[col][j]);
                inv[row][j] = &inv[row][j] - &(&factor * &inv[col][j]);
            }
        }
    }
    Ok(inv)
}
