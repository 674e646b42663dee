//! Table-shaped artifacts: peak-value grids, system-vs-PDE error columns,
//! and CSV emission with deterministic 4-significant-digit formatting.

use super::{run_system, ExperimentConfig, SystemLabel, REFERENCE_EVAL_TIME};
use crate::analysis::{error_l2, RateReport};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// One labelled row of peak values over the shared time axis.
#[derive(Debug, Clone)]
pub struct PeakRow {
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PeakTable {
    pub times: Vec<f64>,
    pub rows: Vec<PeakRow>,
}

impl PeakTable {
    pub fn write_csv(&self, path: &Path, footer_lines: &[String]) -> Result<()> {
        let mut out = String::from("system");
        for t in &self.times {
            let _ = write!(out, ",t={t}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}", row.label);
            for v in &row.values {
                let _ = write!(out, ",{v:.3e}");
            }
            out.push('\n');
        }
        for line in footer_lines {
            let _ = writeln!(out, "# {line}");
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Peak values `u(0, t)` of the bounded-domain fractional solution for each
/// requested order, approximated by System A at `horizon_factor * L` with the
/// analytically known horizon-tail factor `exp(-c_tail t)` applied, plus the
/// classical-PDE row.
pub fn peak_table(
    s_values: &[f64],
    times: &[f64],
    half_width: f64,
    spacing: f64,
    dt: f64,
    horizon_factor: f64,
) -> Result<PeakTable> {
    let t_max = times.iter().cloned().fold(0.0f64, f64::max).max(dt);
    let mut rows = Vec::new();
    for &s in s_values {
        let cfg = ExperimentConfig::fractional(
            SystemLabel::A,
            s,
            half_width,
            horizon_factor * half_width,
        )?
        .with_resolution(spacing, dt)
        .with_t_final(t_max);
        let run = run_system(&cfg)?;
        let tail = run.spec.expect("fractional").tail_mass().expect("finite");
        let values = times
            .iter()
            .map(|&t| run.history.peak_at(t) * (-tail * t).exp())
            .collect();
        rows.push(PeakRow {
            label: format!("s={s}"),
            values,
        });
    }
    let cfg = ExperimentConfig::pde(half_width)
        .with_resolution(spacing, dt)
        .with_t_final(t_max);
    let run = run_system(&cfg)?;
    rows.push(PeakRow {
        label: "pde".into(),
        values: times.iter().map(|&t| run.history.peak_at(t)).collect(),
    });
    Ok(PeakTable {
        times: times.to_vec(),
        rows,
    })
}

/// `|| u^sys(., 1) - u^pde(., 1) ||` for a list of orders at fixed horizon.
/// `eps` selects System B (None) or System D (Some). Used for the
/// s -> 1- convergence columns.
pub fn pde_comparison(
    s_values: &[f64],
    half_width: f64,
    horizon: f64,
    spacing: f64,
    dt: f64,
    eps: Option<f64>,
) -> Result<Vec<(f64, f64)>> {
    let pde = run_system(
        &ExperimentConfig::pde(half_width)
            .with_resolution(spacing, dt)
            .with_t_final(REFERENCE_EVAL_TIME),
    )?;
    let pde_final = pde.history.final_field();
    let system = if eps.is_some() {
        SystemLabel::D
    } else {
        SystemLabel::B
    };
    let mut out = Vec::new();
    for &s in s_values {
        let mut cfg = ExperimentConfig::fractional(system, s, half_width, horizon)?
            .with_resolution(spacing, dt)
            .with_t_final(REFERENCE_EVAL_TIME);
        if let Some(e) = eps {
            cfg = cfg.with_eps(e);
        }
        let run = run_system(&cfg)?;
        out.push((s, error_l2(run.history.final_field(), pde_final)?));
    }
    Ok(out)
}

/// Write a rate report as CSV with a metadata header and optional footers.
/// Deterministic formatting; re-emission is byte-identical.
pub fn emit_table(
    report: &RateReport,
    header_lines: &[String],
    footer_lines: &[String],
    path: &Path,
) -> Result<()> {
    std::fs::write(path, report.to_csv_string(header_lines, footer_lines))?;
    Ok(())
}

/// (param, error) rows, pairwise rates, fitted rate.
pub type RateTableContents = (Vec<(f64, f64)>, Vec<f64>, f64);

/// Read back a rate-report CSV.
pub fn read_rate_table(path: &Path) -> Result<RateTableContents> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    let mut pairwise = Vec::new();
    let mut fitted = None;
    for line in text.lines() {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells[0] == "fitted" {
            fitted = cells[1].parse::<f64>().ok();
            continue;
        }
        if cells.len() < 2 || cells[1] == "error" {
            continue;
        }
        let p: f64 = cells[0].parse().map_err(|_| Error::Invalid {
            what: "rate table",
            detail: format!("bad row {line:?}"),
        })?;
        let e: f64 = cells[1].parse().map_err(|_| Error::Invalid {
            what: "rate table",
            detail: format!("bad row {line:?}"),
        })?;
        rows.push((p, e));
        if cells.len() > 2 && !cells[2].is_empty() {
            if let Ok(r) = cells[2].parse::<f64>() {
                pairwise.push(r);
            }
        }
    }
    let fitted = fitted.ok_or(Error::Invalid {
        what: "rate table",
        detail: "missing fitted-rate summary row".into(),
    })?;
    Ok((rows, pairwise, fitted))
}
