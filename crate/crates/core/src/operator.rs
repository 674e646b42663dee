//! Discrete nonlocal operators on uniform grids.
//!
//! The symmetrized second-difference form
//!
//! ```text
//! (L u)(x) = int_0^delta (u(x+z) + u(x-z) - 2 u(x)) phi(z) dz
//! ```
//!
//! is discretized cell by cell with the solution interpolated piecewise
//! linearly between nodes and the kernel integrated exactly per cell via
//! analytic moments. The first cell `[0, h]` instead pairs the exact k = 2
//! moment with the second-difference quotient `(u(x+h) + u(x-h) - 2u(x))/h^2`,
//! which is finite for every s in (0, 1) and removes the principal value
//! analytically. Translation invariance makes the result a Toeplitz stencil:
//! one weight per offset, shared by every row.

use crate::domain::{Field, Grid};
use crate::error::{Error, Result};
use crate::kernel::{cell_moments, Horizon, KernelSpec};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

/// Minimum admitted singularity truncation, as a fraction of the spacing.
pub const MIN_EPS_FRACTION: f64 = 1e-6;

/// Row work below which the apply loops stay sequential.
const PAR_THRESHOLD: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureVariant {
    /// Piecewise-linear interpolation with exact kernel cell moments;
    /// first cell by the k = 2 moment against the second-difference quotient.
    PwlExactMoments,
    /// Classical 3-point Laplacian (1, -2, 1)/h^2.
    ClassicalLaplacian,
}

impl QuadratureVariant {
    pub fn tag(self) -> &'static str {
        match self {
            QuadratureVariant::PwlExactMoments => "pwl-exact-moments",
            QuadratureVariant::ClassicalLaplacian => "classical-laplacian",
        }
    }
}

/// Toeplitz-structured discrete operator: weights `w_k` for offsets
/// `k = 1..=m`, with the diagonal defined as `-2 sum_k w_k` so that row sums
/// over the full extended stencil vanish exactly.
#[derive(Debug, Clone)]
pub struct NonlocalOperator {
    grid: Arc<Grid>,
    spec: Option<KernelSpec>,
    weights: Vec<f64>,
    weight_sum: f64,
    variant: QuadratureVariant,
}

impl NonlocalOperator {
    #[inline]
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    #[inline]
    pub fn spec(&self) -> Option<&KernelSpec> {
        self.spec.as_ref()
    }

    /// Off-diagonal weights, `weights()[k-1]` belonging to offset `+-k`.
    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    #[inline]
    pub fn diagonal(&self) -> f64 {
        -2.0 * self.weight_sum
    }

    #[inline]
    pub fn variant(&self) -> QuadratureVariant {
        self.variant
    }

    /// Apply in the second-difference form, reading the full node array
    /// (constraint bands included) and writing interior rows of `out`.
    /// Band rows of `out` are zeroed.
    pub fn apply_full(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.grid.n_total());
        assert_eq!(out.len(), self.grid.n_total());
        out.fill(0.0);
        let interior = self.grid.interior();
        let weights = &self.weights;
        let row = |i: usize| -> f64 {
            let vi = v[i];
            let mut acc = 0.0;
            for (k, w) in weights.iter().enumerate() {
                let k = k + 1;
                acc += w * (v[i + k] + v[i - k] - 2.0 * vi);
            }
            acc
        };
        let n_rows = interior.len();
        if n_rows * weights.len() >= PAR_THRESHOLD {
            let start = interior.start;
            out[interior.clone()]
                .par_iter_mut()
                .enumerate()
                .for_each(|(r, o)| *o = row(start + r));
        } else {
            for i in interior {
                out[i] = row(i);
            }
        }
    }

    /// Fast path for homogeneous constraints: bands are identically zero, so
    /// the correlation clips to the interior window and the diagonal carries
    /// the full weight sum.
    pub fn apply_interior_homogeneous(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.grid.n_total());
        assert_eq!(out.len(), self.grid.n_total());
        out.fill(0.0);
        let interior = self.grid.interior();
        let (lo, hi) = (interior.start, interior.end - 1);
        let m = self.weights.len();
        let weights = &self.weights;
        let diag = self.diagonal();
        let row = |i: usize| -> f64 {
            let mut acc = diag * v[i];
            let k_left = m.min(i - lo);
            let k_right = m.min(hi - i);
            // v[i-k] pairs with w[k-1]; descending v run, ascending weights.
            for k in 1..=k_left {
                acc += weights[k - 1] * v[i - k];
            }
            for k in 1..=k_right {
                acc += weights[k - 1] * v[i + k];
            }
            acc
        };
        let n_rows = interior.len();
        let work = n_rows * m.min(n_rows);
        if work >= PAR_THRESHOLD {
            let start = interior.start;
            out[interior.clone()]
                .par_iter_mut()
                .enumerate()
                .for_each(|(r, o)| *o = row(start + r));
        } else {
            for i in interior {
                out[i] = row(i);
            }
        }
    }

    /// Stencil dump: one row per offset `j = -m..=m` with the physical offset
    /// and weight (diagonal at j = 0).
    pub fn write_stencil_csv(&self, path: &Path) -> Result<()> {
        let h = self.grid.spacing();
        let m = self.weights.len() as i64;
        let mut out = String::new();
        let _ = writeln!(out, "# variant = {}, m = {}, h = {}", self.variant.tag(), m, h);
        let _ = writeln!(out, "offset,physical_offset,weight");
        for j in -m..=m {
            let w = if j == 0 {
                self.diagonal()
            } else {
                self.weights[(j.unsigned_abs() as usize) - 1]
            };
            let _ = writeln!(out, "{j},{:.9e},{w:.12e}", j as f64 * h);
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Assemble the discrete operator for the given kernel on the given grid.
pub fn assemble(spec: &KernelSpec, grid: &Arc<Grid>) -> Result<NonlocalOperator> {
    let h = grid.spacing();
    let m = grid.horizon_cells();
    let delta = match spec.horizon() {
        Horizon::Finite(d) => d,
        Horizon::Infinite => {
            return Err(Error::InvalidKernel(
                "assembly needs a finite horizon; truncate the kernel first".into(),
            ))
        }
    };
    if (delta - grid.horizon()).abs() > 1e-9 * delta {
        return Err(Error::NonCommensurate {
            name: "delta",
            value: delta,
            spacing: h,
            ratio: delta / h,
        });
    }
    let eps = spec.eps();
    if eps > 0.0 && eps < MIN_EPS_FRACTION * h {
        return Err(Error::EpsilonTooSmall {
            eps,
            min: MIN_EPS_FRACTION * h,
            h,
        });
    }

    let mut weights = vec![0.0; m];
    // First cell: k = 2 moment against the second-difference quotient.
    weights[0] = cell_moments(spec, 0.0, h, 2)? / (h * h);
    // Remaining cells: hat-function weights from the 0th and 1st moments.
    for j in 1..m {
        let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
        let m0 = cell_moments(spec, a, b, 0)?;
        let m1 = cell_moments(spec, a, b, 1)?;
        // (1-theta) part credits offset j, theta part credits offset j+1.
        weights[j - 1] += (b * m0 - m1) / h;
        weights[j] += (m1 - a * m0) / h;
    }
    let weight_sum = weights.iter().sum();
    Ok(NonlocalOperator {
        grid: Arc::clone(grid),
        spec: Some(*spec),
        weights,
        weight_sum,
        variant: QuadratureVariant::PwlExactMoments,
    })
}

/// The classical 3-point Laplacian in operator clothing. Expects a grid with
/// single-node constraint bands (`delta = h`), which then act as Dirichlet
/// boundary values.
pub fn pde_stencil(grid: &Arc<Grid>) -> Result<NonlocalOperator> {
    if grid.horizon_cells() != 1 {
        return Err(Error::Invalid {
            what: "pde grid",
            detail: format!(
                "classical stencil wants one-node boundary bands, grid has m = {}",
                grid.horizon_cells()
            ),
        });
    }
    let h = grid.spacing();
    let w = 1.0 / (h * h);
    Ok(NonlocalOperator {
        grid: Arc::clone(grid),
        spec: None,
        weights: vec![w],
        weight_sum: w,
        variant: QuadratureVariant::ClassicalLaplacian,
    })
}

/// Apply the operator to a field: `L u` at interior nodes, zeros in the bands.
pub fn apply(op: &NonlocalOperator, u: &Field) -> Result<Field> {
    if !op.grid().same_layout(u.grid()) {
        return Err(Error::GridMismatch);
    }
    let mut out = vec![0.0; u.values().len()];
    op.apply_full(u.values(), &mut out);
    Field::new(Arc::clone(u.grid()), out, u.time())
}
