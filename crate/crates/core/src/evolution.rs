//! Crank-Nicolson time stepping under volume constraints.
//!
//! Interior unknowns advance by
//!
//! ```text
//! (I - dt/2 L) u^{n+1} = (I + dt/2 L) u^n + dt/2 (b^n + b^{n+1})
//! ```
//!
//! where `b` collects stencil contributions from constraint-band values at
//! the two time levels. The operator is time-independent, so the interior
//! matrix is factorized once per run and reused every step. The matrix is
//! symmetric, strictly diagonally dominant with positive diagonal, hence SPD;
//! a banded Cholesky covers both the banded regime (small horizon) and the
//! dense one (horizon couples all unknowns).

use crate::analysis::weighted_l2;
use crate::domain::{ConstraintData, Field, Grid};
use crate::error::{Error, Result};
use crate::linalg::BandedSym;
use crate::operator::{pde_stencil, NonlocalOperator};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Recorded snapshot times; snapped to the nearest step, snap errors kept
    /// in the history metadata.
    pub snapshot_times: Vec<f64>,
    /// Stride, in steps, between scalar trace records.
    pub trace_every: usize,
}

impl EvolveConfig {
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_final,
            snapshot_times: Vec::new(),
            trace_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_snapshots(mut self, times: &[f64]) -> Result<Self> {
        self.snapshot_times = times.to_vec();
        self.validate()?;
        Ok(self)
    }

    pub fn with_trace_every(mut self, stride: usize) -> Self {
        self.trace_every = stride.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Invalid {
                what: "evolve config",
                detail: format!("dt must be positive, got {}", self.dt),
            });
        }
        if self.t_final < self.dt || self.t_final.is_nan() {
            return Err(Error::Invalid {
                what: "evolve config",
                detail: format!("T = {} must be at least dt = {}", self.t_final, self.dt),
            });
        }
        for &t in &self.snapshot_times {
            if !(t >= 0.0 && t <= self.t_final + 1e-12) {
                return Err(Error::Invalid {
                    what: "evolve config",
                    detail: format!("snapshot time {t} outside [0, T]"),
                });
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceSample {
    pub t: f64,
    pub peak: f64,
    pub l2: f64,
}

/// Solution snapshots plus scalar traces over one run.
#[derive(Debug, Clone)]
pub struct TimeHistory {
    snapshots: Vec<Field>,
    snapshot_snap_errors: Vec<f64>,
    trace: Vec<TraceSample>,
    config: EvolveConfig,
    final_field: Field,
}

impl TimeHistory {
    pub fn snapshots(&self) -> &[Field] {
        &self.snapshots
    }

    pub fn snapshot_snap_errors(&self) -> &[f64] {
        &self.snapshot_snap_errors
    }

    pub fn trace(&self) -> &[TraceSample] {
        &self.trace
    }

    pub fn config(&self) -> &EvolveConfig {
        &self.config
    }

    pub fn final_field(&self) -> &Field {
        &self.final_field
    }

    /// (t, peak) pairs for decay-slope fits.
    pub fn peak_trace(&self) -> Vec<(f64, f64)> {
        self.trace.iter().map(|s| (s.t, s.peak)).collect()
    }

    pub fn l2_trace(&self) -> Vec<(f64, f64)> {
        self.trace.iter().map(|s| (s.t, s.l2)).collect()
    }

    /// Peak value at the trace sample nearest to `t`.
    pub fn peak_at(&self, t: f64) -> f64 {
        self.trace
            .iter()
            .min_by(|a, b| {
                (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap()
            })
            .map(|s| s.peak)
            .unwrap_or(f64::NAN)
    }

    /// trace.csv: columns (t, peak, l2norm).
    pub fn write_trace_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("t,peak,l2norm\n");
        for s in &self.trace {
            let _ = writeln!(out, "{:.9e},{:.9e},{:.9e}", s.t, s.peak, s.l2);
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// snapshots.csv: columns (t, x, u).
    pub fn write_snapshots_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("t,x,u\n");
        for f in &self.snapshots {
            for (x, v) in f.grid().nodes().iter().zip(f.values()) {
                let _ = writeln!(out, "{:.9e},{x:.9e},{v:.9e}", f.time());
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

fn record(trace: &mut Vec<TraceSample>, grid: &Grid, v: &[f64], t: f64) {
    let peak = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let l2 = weighted_l2(&v[grid.interior()], grid.spacing());
    trace.push(TraceSample { t, peak, l2 });
}

/// Band-only stencil contribution at one time level: for interior row `i`,
/// `sum_k w_k (g(x_{i-k}) + g(x_{i+k}))` over offsets landing in the bands.
fn band_contribution(op: &NonlocalOperator, band_vals: &[f64], out: &mut [f64]) {
    let grid = op.grid();
    let w = op.weights();
    let m = w.len();
    let interior = grid.interior();
    let (lo, hi) = (interior.start, interior.end - 1);
    for i in interior {
        let mut acc = 0.0;
        // Left band: offsets k >= i - lo + 1 reach indices <= lo - 1... the
        // band starts right below `lo`, so k runs from (i - lo + 1) to m.
        let k0 = i - lo + 1;
        for k in k0..=m {
            acc += w[k - 1] * band_vals[i - k];
        }
        let k0 = hi - i + 1;
        for k in k0..=m {
            acc += w[k - 1] * band_vals[i + k];
        }
        out[i] = acc;
    }
}

/// Crank-Nicolson evolution of `u_t = L u` with volume constraints.
pub fn evolve(
    op: &NonlocalOperator,
    u0: &Field,
    constraints: &ConstraintData,
    cfg: &EvolveConfig,
) -> Result<TimeHistory> {
    cfg.validate()?;
    if !op.grid().same_layout(u0.grid()) {
        return Err(Error::GridMismatch);
    }
    let grid = Arc::clone(op.grid());
    let interior = grid.interior();
    let n = interior.len();
    let m = op.weights().len();
    let dt = cfg.dt;
    let n_steps = cfg.n_steps();
    let homogeneous = constraints.is_homogeneous();

    // Interior matrix I - dt/2 L: diagonal 1 + dt * S, off-diagonal -dt/2 w_k.
    let bw = m.min(n - 1);
    let mut matrix = BandedSym::zeros(n, bw);
    let s_full = op.weight_sum();
    let w = op.weights();
    for r in 0..n {
        matrix.set(r, r, 1.0 + dt * s_full);
        for k in 1..=bw.min(r) {
            matrix.set(r, r - k, -0.5 * dt * w[k - 1]);
        }
    }
    let chol = matrix.cholesky()?;

    // Snapshot bookkeeping: requested times snapped to the nearest step.
    let mut snap_steps: Vec<(usize, f64, f64)> = cfg
        .snapshot_times
        .iter()
        .map(|&t| {
            let step = (t / dt).round().min(n_steps as f64).max(0.0) as usize;
            (step, t, t - step as f64 * dt)
        })
        .collect();
    snap_steps.sort_by_key(|&(step, _, _)| step);

    let mut v = u0.values().to_vec();
    let mut applied = vec![0.0; grid.n_total()];
    let mut band_now = vec![0.0; grid.n_total()];
    let mut band_next = vec![0.0; grid.n_total()];
    let mut rhs = vec![0.0; n];

    let mut trace = Vec::with_capacity(n_steps / cfg.trace_every + 2);
    let mut snapshots = Vec::new();
    let mut snap_errors = Vec::new();
    record(&mut trace, &grid, &v, 0.0);
    for &(_, _, err) in snap_steps.iter().filter(|&&(s, _, _)| s == 0) {
        snapshots.push(Field::new(Arc::clone(&grid), v.clone(), 0.0)?);
        snap_errors.push(err);
    }

    for step in 0..n_steps {
        let t_next = (step + 1) as f64 * dt;

        if homogeneous {
            op.apply_interior_homogeneous(&v, &mut applied);
            for (r, i) in interior.clone().enumerate() {
                rhs[r] = v[i] + 0.5 * dt * applied[i];
            }
        } else {
            op.apply_full(&v, &mut applied);
            // Bands at t_{n+1} enter the right-hand side directly.
            fill_bands(&grid, constraints, t_next, &mut band_next)?;
            band_contribution(op, &band_next, &mut band_now);
            for (r, i) in interior.clone().enumerate() {
                rhs[r] = v[i] + 0.5 * dt * (applied[i] + band_now[i]);
            }
        }

        chol.solve(&mut rhs);

        if rhs.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                step: step + 1,
                t: t_next,
            });
        }
        for (r, i) in interior.clone().enumerate() {
            v[i] = rhs[r];
        }
        if !homogeneous {
            for i in grid.left_band().chain(grid.right_band()) {
                v[i] = band_next[i];
            }
        }

        if (step + 1) % cfg.trace_every == 0 || step + 1 == n_steps {
            record(&mut trace, &grid, &v, t_next);
        }
        for &(_, _, err) in snap_steps.iter().filter(|&&(s, _, _)| s == step + 1) {
            snapshots.push(Field::new(Arc::clone(&grid), v.clone(), t_next)?);
            snap_errors.push(err);
        }
    }

    let t_end = n_steps as f64 * dt;
    let final_field = Field::new(Arc::clone(&grid), v, t_end)?;
    Ok(TimeHistory {
        snapshots,
        snapshot_snap_errors: snap_errors,
        trace,
        config: cfg.clone(),
        final_field,
    })
}

fn fill_bands(
    grid: &Grid,
    constraints: &ConstraintData,
    t: f64,
    out: &mut [f64],
) -> Result<()> {
    out.fill(0.0);
    for i in grid.left_band() {
        let g = constraints.eval_left(grid.node(i), t);
        if !g.is_finite() {
            return Err(Error::Invalid {
                what: "constraint data",
                detail: format!("non-finite left-band value at t = {t}"),
            });
        }
        out[i] = g;
    }
    for i in grid.right_band() {
        let g = constraints.eval_right(grid.node(i), t);
        if !g.is_finite() {
            return Err(Error::Invalid {
                what: "constraint data",
                detail: format!("non-finite right-band value at t = {t}"),
            });
        }
        out[i] = g;
    }
    Ok(())
}

/// Crank-Nicolson trajectory of the classical heat system on the same grid
/// machinery (one-node Dirichlet bands).
pub fn evolve_pde(
    grid: &Arc<Grid>,
    u0: &Field,
    boundary: &ConstraintData,
    cfg: &EvolveConfig,
) -> Result<TimeHistory> {
    let op = pde_stencil(grid)?;
    evolve(&op, u0, boundary, cfg)
}
