//! Uniform grids over `[-L-delta, L+delta]`, node classification, and
//! initial / volume-constraint data.
//!
//! Unknowns live at nodes strictly inside `(-L, L)`. The endpoints and the
//! two bands of width `delta` outside them are constraint nodes: the
//! constraint intervals are closed at `+-L`, so those endpoints carry
//! prescribed values, not unknowns.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

/// Default mollification time of the smoothed-Dirac initial condition.
pub const DEFAULT_MOLLIFY_TIME: f64 = 1e-4;

/// Smoothed Dirac delta `(4 pi t)^{-1/2} exp(-x^2 / 4t)` used as initial data.
#[inline]
pub fn mollified_dirac(x: f64, mollify_time: f64) -> f64 {
    (4.0 * std::f64::consts::PI * mollify_time).sqrt().recip()
        * (-x * x / (4.0 * mollify_time)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    LeftBand,
    Interior,
    RightBand,
}

/// Uniform grid with `x_i = (i - (m + l)) * h` for `i = 0 .. 2(l+m)+1`,
/// where `l = L/h` and `m = delta/h` are exact integers.
#[derive(Debug)]
pub struct Grid {
    half_width: f64,
    spacing: f64,
    horizon_cells: usize,
    half_cells: usize,
    nodes: Vec<f64>,
}

fn commensurate(name: &'static str, value: f64, spacing: f64) -> Result<usize> {
    let ratio = value / spacing;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) || rounded < 1.0 {
        return Err(Error::NonCommensurate {
            name,
            value,
            spacing,
            ratio,
        });
    }
    Ok(rounded as usize)
}

/// Snap an arbitrary horizon down to the nearest grid multiple. Returns the
/// snapped value and the snap error `delta - snapped`.
pub fn snap_horizon(delta: f64, spacing: f64) -> (f64, f64) {
    let cells = (delta / spacing + 1e-9).floor().max(1.0);
    let snapped = cells * spacing;
    (snapped, delta - snapped)
}

pub fn build_grid(half_width: f64, spacing: f64, delta: f64) -> Result<Arc<Grid>> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::Invalid {
            what: "grid half-width",
            detail: format!("L must be positive, got {half_width}"),
        });
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Invalid {
            what: "grid spacing",
            detail: format!("h must be positive, got {spacing}"),
        });
    }
    let half_cells = commensurate("L", half_width, spacing)?;
    let horizon_cells = commensurate("delta", delta, spacing)?;
    let center = (half_cells + horizon_cells) as f64;
    let n_total = 2 * (half_cells + horizon_cells) + 1;
    let nodes = (0..n_total)
        .map(|i| (i as f64 - center) * spacing)
        .collect();
    Ok(Arc::new(Grid {
        half_width,
        spacing,
        horizon_cells,
        half_cells,
        nodes,
    }))
}

impl Grid {
    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn horizon_cells(&self) -> usize {
        self.horizon_cells
    }

    /// The horizon realized on this grid, exactly `m * h`.
    #[inline]
    pub fn horizon(&self) -> f64 {
        self.horizon_cells as f64 * self.spacing
    }

    #[inline]
    pub fn n_total(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Index of the node at x = 0.
    #[inline]
    pub fn center_index(&self) -> usize {
        self.horizon_cells + self.half_cells
    }

    /// Indices of the unknowns: nodes strictly inside (-L, L).
    #[inline]
    pub fn interior(&self) -> Range<usize> {
        (self.horizon_cells + 1)..(self.horizon_cells + 2 * self.half_cells)
    }

    pub fn n_interior(&self) -> usize {
        self.interior().len()
    }

    pub fn classify(&self, i: usize) -> NodeClass {
        if i <= self.horizon_cells {
            NodeClass::LeftBand
        } else if i >= self.horizon_cells + 2 * self.half_cells {
            NodeClass::RightBand
        } else {
            NodeClass::Interior
        }
    }

    /// Node index ranges of the two constraint bands (closed at -L and L).
    pub fn left_band(&self) -> Range<usize> {
        0..(self.horizon_cells + 1)
    }

    pub fn right_band(&self) -> Range<usize> {
        (self.horizon_cells + 2 * self.half_cells)..self.n_total()
    }

    pub fn same_layout(&self, other: &Grid) -> bool {
        self.half_cells == other.half_cells
            && self.horizon_cells == other.horizon_cells
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
    }

    /// Same solution domain and spacing; horizons may differ. Interior nodes
    /// of two such grids coincide.
    pub fn same_interior(&self, other: &Grid) -> bool {
        self.half_cells == other.half_cells
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
    }
}

/// Scalar field sampled on a grid, stamped with its time.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.n_total() {
            return Err(Error::Invalid {
                what: "field",
                detail: format!(
                    "value count {} does not match node count {}",
                    values.len(),
                    grid.n_total()
                ),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Invalid {
                what: "field",
                detail: format!("non-finite value {bad}"),
            });
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.n_total();
        Self {
            grid,
            values: vec![0.0; n],
            time: 0.0,
        }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let n = grid.n_total();
        Self {
            grid,
            values: vec![c; n],
            time: 0.0,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn interior_values(&self) -> &[f64] {
        &self.values[self.grid.interior()]
    }

    /// Value at x = 0.
    pub fn center_value(&self) -> f64 {
        self.values[self.grid.center_index()]
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    /// CSV with columns (x, value); grid metadata goes into a `#` header.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let g = &self.grid;
        let _ = writeln!(
            out,
            "# L = {}, h = {}, delta = {}, nodes = {}, interior = {}, t = {}",
            g.half_width(),
            g.spacing(),
            g.horizon(),
            g.n_total(),
            g.n_interior(),
            self.time
        );
        let _ = writeln!(out, "x,value");
        for (x, v) in g.nodes().iter().zip(&self.values) {
            let _ = writeln!(out, "{x:.9e},{v:.9e}");
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Sample the smoothed-Dirac initial condition. Constraint-band nodes
/// (including the closed endpoints at +-L) take the homogeneous value 0;
/// for prescribed constraints the evolution overwrites them at t = 0+.
pub fn sample_initial(grid: &Arc<Grid>, mollify_time: f64) -> Field {
    let mut values = vec![0.0; grid.n_total()];
    for i in grid.interior() {
        values[i] = mollified_dirac(grid.node(i), mollify_time);
    }
    Field {
        grid: Arc::clone(grid),
        values,
        time: 0.0,
    }
}

type ConstraintFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Volume-constraint data on the two bands.
#[derive(Clone)]
pub enum ConstraintData {
    Homogeneous,
    Prescribed {
        g_minus: ConstraintFn,
        g_plus: ConstraintFn,
    },
}

impl std::fmt::Debug for ConstraintData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintData::Homogeneous => f.write_str("Homogeneous"),
            ConstraintData::Prescribed { .. } => f.write_str("Prescribed"),
        }
    }
}

impl ConstraintData {
    pub fn homogeneous() -> Self {
        ConstraintData::Homogeneous
    }

    pub fn prescribed(
        g_minus: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        g_plus: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ConstraintData::Prescribed {
            g_minus: Arc::new(g_minus),
            g_plus: Arc::new(g_plus),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::prescribed(move |_, _| c, move |_, _| c)
    }

    #[inline]
    pub fn is_homogeneous(&self) -> bool {
        matches!(self, ConstraintData::Homogeneous)
    }

    pub fn eval_left(&self, x: f64, t: f64) -> f64 {
        match self {
            ConstraintData::Homogeneous => 0.0,
            ConstraintData::Prescribed { g_minus, .. } => g_minus(x, t),
        }
    }

    pub fn eval_right(&self, x: f64, t: f64) -> f64 {
        match self {
            ConstraintData::Homogeneous => 0.0,
            ConstraintData::Prescribed { g_plus, .. } => g_plus(x, t),
        }
    }
}

/// Band values at one time level.
#[derive(Debug, Clone)]
pub struct BandValues {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

pub fn sample_constraints(grid: &Grid, data: &ConstraintData, t: f64) -> Result<BandValues> {
    let left: Vec<f64> = grid
        .left_band()
        .map(|i| data.eval_left(grid.node(i), t))
        .collect();
    let right: Vec<f64> = grid
        .right_band()
        .map(|i| data.eval_right(grid.node(i), t))
        .collect();
    if let Some(bad) = left.iter().chain(&right).find(|v| !v.is_finite()) {
        return Err(Error::Invalid {
            what: "constraint data",
            detail: format!("non-finite band value {bad} at t = {t}"),
        });
    }
    Ok(BandValues { left, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_counts_match_hand_enumeration() {
        // L = 5, h = 0.0025, delta = 0.625: 4001 nodes on [-5, 5] plus 250
        // constraint nodes per side.
        let g = build_grid(5.0, 0.0025, 0.625).unwrap();
        assert_eq!(g.n_total(), 4501);
        assert_eq!(g.n_interior(), 3999);
        assert_eq!(g.left_band().len(), 251);
        assert_eq!(g.right_band().len(), 251);
        assert_eq!(g.node(g.center_index()), 0.0);
    }

    #[test]
    fn tiny_grid_nodes_enumerated() {
        let g = build_grid(1.0, 0.5, 0.5).unwrap();
        let expect = [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5];
        assert_eq!(g.n_total(), 7);
        for (a, b) in g.nodes().iter().zip(expect.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        // +-L are constraint nodes (closed bands); unknowns strictly inside.
        assert_eq!(g.classify(0), NodeClass::LeftBand);
        assert_eq!(g.classify(1), NodeClass::LeftBand);
        assert_eq!(g.classify(2), NodeClass::Interior);
        assert_eq!(g.classify(4), NodeClass::Interior);
        assert_eq!(g.classify(5), NodeClass::RightBand);
    }

    #[test]
    fn non_commensurate_rejected() {
        let err = build_grid(5.0, 0.0025, 0.624).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("delta"), "message names the offending ratio: {msg}");
        assert!(build_grid(5.1234, 0.0025, 0.625).is_err());
    }

    #[test]
    fn every_node_in_exactly_one_class() {
        let g = build_grid(2.0, 0.25, 0.5).unwrap();
        let mut counts = [0usize; 3];
        for i in 0..g.n_total() {
            match g.classify(i) {
                NodeClass::LeftBand => counts[0] += 1,
                NodeClass::Interior => counts[1] += 1,
                NodeClass::RightBand => counts[2] += 1,
            }
        }
        assert_eq!(counts.iter().sum::<usize>(), g.n_total());
        assert_eq!(counts[0], counts[2]);
        assert_eq!(counts[1], g.n_interior());
        // Band width per side is m*h.
        assert_relative_eq!(g.horizon(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn snap_rounds_down_and_reports_error() {
        let (snapped, err) = snap_horizon(0.624, 0.0025);
        assert_relative_eq!(snapped, 0.6225, epsilon = 1e-12);
        assert_relative_eq!(err, 0.0015, epsilon = 1e-9);
        let (snapped, err) = snap_horizon(0.625, 0.0025);
        assert_relative_eq!(snapped, 0.625, epsilon = 1e-12);
        assert!(err.abs() < 1e-12);
    }

    #[test]
    fn initial_condition_table_values() {
        let g = build_grid(5.0, 0.0025, 0.625).unwrap();
        let u0 = sample_initial(&g, DEFAULT_MOLLIFY_TIME);
        let c = g.center_index();
        let at = |x: f64| u0.values()[c + (x / 0.0025).round() as usize];
        assert_relative_eq!(at(0.0), 28.2095, max_relative = 1e-5);
        assert_relative_eq!(at(0.0025), 27.7721, max_relative = 1e-5);
        assert_relative_eq!(at(0.01), 21.9696, max_relative = 1e-5);
        assert_relative_eq!(at(0.05), 5.4457e-2, max_relative = 1e-4);
        assert_relative_eq!(at(0.1), 3.9177e-10, max_relative = 1e-4);
    }

    #[test]
    fn initial_condition_symmetry_and_bands() {
        let g = build_grid(1.0, 0.01, 0.1).unwrap();
        let u0 = sample_initial(&g, DEFAULT_MOLLIFY_TIME);
        let v = u0.values();
        let n = v.len();
        for i in 0..n {
            assert_eq!(v[i], v[n - 1 - i], "even initial data, exactly");
        }
        for i in g.left_band().chain(g.right_band()) {
            assert_eq!(v[i], 0.0);
        }
    }

    #[test]
    fn constraint_sampling() {
        let g = build_grid(1.0, 0.25, 0.5).unwrap();
        let hom = sample_constraints(&g, &ConstraintData::homogeneous(), 0.7).unwrap();
        assert!(hom.left.iter().chain(&hom.right).all(|&v| v == 0.0));

        let ones = sample_constraints(&g, &ConstraintData::constant(1.0), 0.7).unwrap();
        assert!(ones.right.iter().all(|&v| v == 1.0));

        // Linear ramp over the left band at t = pi/2.
        let l = 1.0;
        let d = 0.5;
        let data = ConstraintData::prescribed(
            move |x, t| t.sin() * (x + l + d),
            |_, _| 0.0,
        );
        let bv = sample_constraints(&g, &data, std::f64::consts::FRAC_PI_2).unwrap();
        for (i, v) in bv.left.iter().enumerate() {
            assert_relative_eq!(*v, 0.25 * i as f64, epsilon = 1e-12);
        }

        let bad = ConstraintData::prescribed(|_, _| f64::NAN, |_, _| 0.0);
        assert!(sample_constraints(&g, &bad, 1.0).is_err());
    }

    #[test]
    fn field_csv_roundtrip_header() {
        let g = build_grid(1.0, 0.5, 0.5).unwrap();
        let f = sample_initial(&g, DEFAULT_MOLLIFY_TIME);
        let dir = std::env::temp_dir().join("nlheat_field_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.csv");
        f.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# L = 1"));
        assert_eq!(text.lines().count(), 2 + g.n_total());
    }
}
