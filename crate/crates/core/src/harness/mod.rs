//! End-to-end experiment configuration and orchestration for Systems A-D and
//! the classical PDE baseline.
//!
//! Taxonomy: A and B keep the singular kernel (eps = 0), C and D truncate it
//! (eps > 0); A and C use a large horizon (delta >= 2L, every point in the
//! solution domain interacts with every other), B and D a small one
//! (delta <= L). The classical system runs on the same grid machinery with
//! one-node Dirichlet bands.

mod config;
mod sweep;
mod tables;

pub use config::{load_config, parse_config};
pub use sweep::{sweep, SweepParam, SweepReference};
pub use tables::{
    emit_table, pde_comparison, peak_table, read_rate_table, PeakRow, PeakTable,
};

use crate::domain::{build_grid, sample_initial, ConstraintData, Field, Grid, DEFAULT_MOLLIFY_TIME};
use crate::error::{Error, Result};
use crate::evolution::{evolve, evolve_pde, EvolveConfig, TimeHistory};
use crate::kernel::{FractionalOrder, Horizon, KernelSpec};
use crate::operator::assemble;
use std::str::FromStr;
use std::sync::Arc;

/// Desk-scale resolution defaults: minutes, not hours.
pub const DESK_SPACING: f64 = 0.005;
pub const DESK_TIME_STEP: f64 = 0.001;
/// Published-resolution values, restored by `--paper-scale`.
pub const PAPER_SPACING: f64 = 0.0025;
pub const PAPER_TIME_STEP: f64 = 0.0001;

/// Horizon multiple used for the "delta = infinity" surrogate reference.
pub const REFERENCE_HORIZON_FACTOR: f64 = 64.0;
/// Errors in sweeps are always evaluated at this time.
pub const REFERENCE_EVAL_TIME: f64 = 1.0;
/// Node-count guard for reference grids.
pub const NODE_CAP: usize = 1 << 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemLabel {
    Pde,
    A,
    B,
    C,
    D,
}

impl SystemLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemLabel::Pde => "pde",
            SystemLabel::A => "A",
            SystemLabel::B => "B",
            SystemLabel::C => "C",
            SystemLabel::D => "D",
        }
    }

    /// A and C want delta >= 2L; B and D want delta <= L.
    pub fn wants_large_horizon(self) -> Option<bool> {
        match self {
            SystemLabel::Pde => None,
            SystemLabel::A | SystemLabel::C => Some(true),
            SystemLabel::B | SystemLabel::D => Some(false),
        }
    }

    /// C and D truncate the kernel singularity.
    pub fn wants_truncated_kernel(self) -> Option<bool> {
        match self {
            SystemLabel::Pde => None,
            SystemLabel::A | SystemLabel::B => Some(false),
            SystemLabel::C | SystemLabel::D => Some(true),
        }
    }
}

impl FromStr for SystemLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(SystemLabel::A),
            "B" | "b" => Ok(SystemLabel::B),
            "C" | "c" => Ok(SystemLabel::C),
            "D" | "d" => Ok(SystemLabel::D),
            "PDE" | "pde" | "Pde" => Ok(SystemLabel::Pde),
            other => Err(Error::Invalid {
                what: "system label",
                detail: format!("expected one of A, B, C, D, PDE; got {other:?}"),
            }),
        }
    }
}

impl std::fmt::Display for SystemLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One fully resolved experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub system: SystemLabel,
    pub order: Option<FractionalOrder>,
    pub half_width: f64,
    pub spacing: f64,
    pub horizon: f64,
    pub eps: f64,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_times: Vec<f64>,
    pub trace_every: usize,
    pub mollify_time: f64,
    pub constraints: ConstraintData,
}

impl ExperimentConfig {
    pub fn fractional(system: SystemLabel, s: f64, half_width: f64, horizon: f64) -> Result<Self> {
        if system == SystemLabel::Pde {
            return Err(Error::Invalid {
                what: "experiment config",
                detail: "use ExperimentConfig::pde for the classical system".into(),
            });
        }
        Ok(Self {
            system,
            order: Some(FractionalOrder::new(s)?),
            half_width,
            spacing: DESK_SPACING,
            horizon,
            eps: 0.0,
            dt: DESK_TIME_STEP,
            t_final: 1.0,
            snapshot_times: Vec::new(),
            trace_every: 1,
            mollify_time: DEFAULT_MOLLIFY_TIME,
            constraints: ConstraintData::Homogeneous,
        })
    }

    pub fn pde(half_width: f64) -> Self {
        Self {
            system: SystemLabel::Pde,
            order: None,
            half_width,
            spacing: DESK_SPACING,
            horizon: 0.0,
            eps: 0.0,
            dt: DESK_TIME_STEP,
            t_final: 1.0,
            snapshot_times: Vec::new(),
            trace_every: 1,
            mollify_time: DEFAULT_MOLLIFY_TIME,
            constraints: ConstraintData::Homogeneous,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_resolution(mut self, spacing: f64, dt: f64) -> Self {
        self.spacing = spacing;
        self.dt = dt;
        self
    }

    pub fn with_t_final(mut self, t_final: f64) -> Self {
        self.t_final = t_final;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    /// Restore the published resolution (h = 0.0025, dt = 0.0001).
    pub fn paper_scale(mut self) -> Self {
        self.spacing = PAPER_SPACING;
        self.dt = PAPER_TIME_STEP;
        self
    }

    /// Reject configurations whose parameters contradict the system label
    /// before any compute happens.
    pub fn validate(&self) -> Result<()> {
        if self.system != SystemLabel::Pde && self.order.is_none() {
            return Err(Error::Invalid {
                what: "experiment config",
                detail: format!("system {} needs a fractional order", self.system),
            });
        }
        if let Some(large) = self.system.wants_large_horizon() {
            let (l, d) = (self.half_width, self.horizon);
            if large && d < 2.0 * l - 1e-12 {
                return Err(Error::RegimeMismatch {
                    label: self.system.as_str(),
                    requirement: "delta >= 2L",
                    detail: format!("delta = {d}, L = {l}"),
                });
            }
            if !large && d > l + 1e-12 {
                return Err(Error::RegimeMismatch {
                    label: self.system.as_str(),
                    requirement: "delta <= L",
                    detail: format!("delta = {d}, L = {l}"),
                });
            }
        }
        if let Some(truncated) = self.system.wants_truncated_kernel() {
            if truncated && self.eps <= 0.0 {
                return Err(Error::RegimeMismatch {
                    label: self.system.as_str(),
                    requirement: "eps > 0",
                    detail: format!("eps = {}", self.eps),
                });
            }
            if !truncated && self.eps != 0.0 {
                return Err(Error::RegimeMismatch {
                    label: self.system.as_str(),
                    requirement: "eps = 0",
                    detail: format!("eps = {}", self.eps),
                });
            }
        }
        Ok(())
    }
}

/// The artifacts of one run.
#[derive(Debug)]
pub struct RunResult {
    pub grid: Arc<Grid>,
    pub history: TimeHistory,
    /// Kernel actually assembled (None for the PDE system).
    pub spec: Option<KernelSpec>,
}

/// Assemble the matching operator, evolve, return the history.
pub fn run_system(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let grid_delta = if cfg.system == SystemLabel::Pde {
        cfg.spacing
    } else {
        cfg.horizon
    };
    let grid = build_grid(cfg.half_width, cfg.spacing, grid_delta)?;
    let u0 = sample_initial(&grid, cfg.mollify_time);
    let ecfg = EvolveConfig::new(cfg.dt, cfg.t_final)?
        .with_snapshots(&cfg.snapshot_times)?
        .with_trace_every(cfg.trace_every);

    if cfg.system == SystemLabel::Pde {
        let history = evolve_pde(&grid, &u0, &cfg.constraints, &ecfg)?;
        return Ok(RunResult {
            grid,
            history,
            spec: None,
        });
    }

    let order = cfg.order.expect("validated above");
    // Use the grid-realized horizon (exactly m*h) for the kernel.
    let spec = KernelSpec::new(order, Horizon::Finite(grid.horizon()), cfg.eps)?;
    let op = assemble(&spec, &grid)?;
    let history = evolve(&op, &u0, &cfg.constraints, &ecfg)?;
    Ok(RunResult {
        grid,
        history,
        spec: Some(spec),
    })
}

/// The surrogate "delta = infinity" solution at t = 1 used as the error
/// reference in horizon and singularity sweeps: System A at delta = 64 L,
/// rescaled by `exp(-c_tail t)` with `c_tail = (C_s/s) delta_ref^{-2s}`.
///
/// For homogeneous constraints and delta >= 2L the truncated operator equals
/// the whole-support one plus exactly `c_tail` times the identity, so the
/// rescaling removes the reference's own truncation bias analytically rather
/// than leaving it to pollute measured convergence rates.
pub fn reference_solution(cfg: &ExperimentConfig) -> Result<Field> {
    let order = cfg.order.ok_or_else(|| Error::Invalid {
        what: "reference",
        detail: "reference solution needs a fractional order".into(),
    })?;
    let l = cfg.half_width;
    let h = cfg.spacing;
    let delta_ref = REFERENCE_HORIZON_FACTOR * l;
    let nodes = (2.0 * (l + delta_ref) / h).round() as usize + 1;
    if nodes > NODE_CAP {
        return Err(Error::ResourceCap {
            nodes,
            cap: NODE_CAP,
            suggested_h: 2.0 * (l + delta_ref) / (NODE_CAP - 1) as f64,
        });
    }
    let mut ref_cfg = ExperimentConfig::fractional(SystemLabel::A, order.value(), l, delta_ref)?;
    ref_cfg.spacing = h;
    ref_cfg.dt = cfg.dt;
    ref_cfg.t_final = REFERENCE_EVAL_TIME;
    ref_cfg.mollify_time = cfg.mollify_time;
    ref_cfg.trace_every = usize::MAX;
    let run = run_system(&ref_cfg)?;
    let tail = run
        .spec
        .expect("fractional run")
        .tail_mass()
        .expect("finite horizon");
    let mut field = run.history.final_field().clone();
    field.scale((-tail * REFERENCE_EVAL_TIME).exp());
    Ok(field)
}
