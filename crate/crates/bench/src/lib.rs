//! Shared setup helpers for the solver benchmarks.

use nlheat::domain::{build_grid, sample_initial, Field, Grid, DEFAULT_MOLLIFY_TIME};
use nlheat::kernel::{FractionalOrder, KernelSpec};
use nlheat::operator::{assemble, NonlocalOperator};
use std::sync::Arc;

/// A System-A style operator and initial field at the given resolution.
pub fn setup_operator(s: f64, l: f64, h: f64, delta: f64) -> (Arc<Grid>, NonlocalOperator, Field) {
    let grid = build_grid(l, h, delta).expect("bench grid");
    let spec = KernelSpec::singular(FractionalOrder::new(s).expect("order"), delta)
        .expect("bench kernel");
    let op = assemble(&spec, &grid).expect("bench assembly");
    let u0 = sample_initial(&grid, DEFAULT_MOLLIFY_TIME);
    (grid, op, u0)
}
