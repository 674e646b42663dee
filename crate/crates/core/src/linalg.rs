//! Banded symmetric positive definite storage and Cholesky factorization.
//!
//! The Crank-Nicolson interior matrix `I - dt/2 L` is SPD and strictly
//! diagonally dominant, so an unpivoted factorization is stable. Bandwidth
//! equals the stencil half-width clipped to the matrix size; when the horizon
//! couples every pair of unknowns this degenerates to a dense lower triangle,
//! which the same storage handles.

use crate::error::{Error, Result};

/// Lower-triangle banded storage: row `i` holds entries `M[i][j]` for
/// `j in [i-bw, i]` at `data[i*(bw+1) + (j - i + bw)]`, so entries within a
/// row are contiguous in `j`.
#[derive(Debug, Clone)]
pub struct BandedSym {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSym {
    pub fn zeros(n: usize, bw: usize) -> Self {
        assert!(bw < n.max(1), "bandwidth must be below the matrix size");
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            return self.get(j, i);
        }
        if i - j > self.bw {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// In-place Cholesky `M = L L^T`. Fails on a non-positive pivot, which
    /// the M-matrix construction rules out but remains guarded.
    pub fn cholesky(mut self) -> Result<BandedCholesky> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let k0 = i.saturating_sub(bw).max(j.saturating_sub(bw));
                // sum_{k=k0}^{j-1} L[i][k] * L[j][k]; both runs are contiguous.
                let s: f64 = if j > k0 {
                    let ri = &self.data[i * w + (k0 + bw - i)..i * w + (j + bw - i)];
                    let rj = &self.data[j * w + (k0 + bw - j)..j * w + bw];
                    dot(ri, rj)
                } else {
                    0.0
                };
                let idx = i * w + (j + bw - i);
                let v = self.data[idx] - s;
                if j < i {
                    let djj = self.data[j * w + bw];
                    self.data[idx] = v / djj;
                } else {
                    if v <= 0.0 || !v.is_finite() {
                        return Err(Error::Factorization { row: i, pivot: v });
                    }
                    self.data[idx] = v.sqrt();
                }
            }
        }
        Ok(BandedCholesky {
            n,
            bw,
            data: self.data,
        })
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedCholesky {
    /// Solve `M x = rhs` in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        assert_eq!(rhs.len(), self.n);
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        // Forward: L y = rhs.
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * w + (lo + bw - i)..i * w + bw];
            let s = dot(row, &rhs[lo..i]);
            rhs[i] = (rhs[i] - s) / self.data[i * w + bw];
        }
        // Backward: L^T x = y, sweeping columns so row storage stays contiguous.
        for i in (0..n).rev() {
            let xi = rhs[i] / self.data[i * w + bw];
            rhs[i] = xi;
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * w + (lo + bw - i)..i * w + bw];
            for (j, lij) in (lo..i).zip(row) {
                rhs[j] -= lij * xi;
            }
        }
    }
}
