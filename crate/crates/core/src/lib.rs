//! Solvers and experiment harness for 1-D nonlocal and fractional diffusion
//! on bounded domains, with truncated interaction horizon and truncated
//! kernel singularity.
//!
//! The model hierarchy runs from the classical heat equation through the
//! whole-space fractional equation to bounded-domain nonlocal systems whose
//! power-law kernel is cut off at a horizon `delta` and, optionally, held
//! flat inside a radius `eps` around its singularity. The crate provides:
//!
//! - [`kernel`]: the power-law kernel, its truncations, normalization
//!   constant, and analytic cell moments;
//! - [`domain`]: uniform grids with volume-constraint bands, initial and
//!   constraint data;
//! - [`operator`]: Toeplitz-stencil assembly of the discrete nonlocal
//!   operator and the classical 3-point Laplacian;
//! - [`evolution`]: Crank-Nicolson stepping with one factorization per run;
//! - [`oracle`]: spectral and closed-form whole-space references;
//! - [`analysis`]: norms, convergence rates, decay slopes, tolerance-driven
//!   parameter bounds;
//! - [`harness`]: Systems A-D end to end, parameter sweeps, table emission.

pub mod analysis;
pub mod domain;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod kernel;
pub mod linalg;
pub mod operator;
pub mod oracle;

pub use analysis::RateReport;
pub use domain::{build_grid, sample_initial, ConstraintData, Field, Grid, NodeClass};
pub use error::{Error, Result};
pub use evolution::{evolve, evolve_pde, EvolveConfig, TimeHistory};
pub use harness::{
    run_system, sweep, ExperimentConfig, RunResult, SweepParam, SweepReference, SystemLabel,
};
pub use kernel::{FractionalOrder, Horizon, KernelSpec, KernelValue};
pub use operator::{apply, assemble, pde_stencil, NonlocalOperator};
pub use oracle::SpectralBox;
