//! Norms, error metrics, convergence-rate and decay-slope estimation, and
//! tolerance-driven parameter selection.

use crate::domain::Field;
use crate::error::{Error, Result};
use crate::kernel::FractionalOrder;
use std::fmt::Write as _;
use std::path::Path;

/// Default log-log fit window for temporal decay slopes.
pub const DECAY_WINDOW: (f64, f64) = (2.0, 20.0);

/// Grid-weighted discrete L2 norm, `sqrt(h * sum v_i^2)`.
#[inline]
pub fn weighted_l2(values: &[f64], spacing: f64) -> f64 {
    (spacing * values.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// `sqrt(h * sum u_i^2)` over interior nodes.
pub fn l2_norm(u: &Field) -> f64 {
    weighted_l2(u.interior_values(), u.grid().spacing())
}

/// `|| a - b ||` in the weighted discrete L2 norm over interior nodes.
/// Grids must share the solution domain and spacing (horizons may differ;
/// interior nodes then coincide). No interpolation is performed.
pub fn error_l2(a: &Field, b: &Field) -> Result<f64> {
    if !a.grid().same_interior(b.grid()) {
        return Err(Error::GridMismatch);
    }
    let av = a.interior_values();
    let bv = b.interior_values();
    let h = a.grid().spacing();
    let sum: f64 = av
        .iter()
        .zip(bv)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((h * sum).sqrt())
}

/// Nearest-node restriction of `(xs_from, values)` onto `xs_to`. Panics if
/// the source is empty; callers compare oracle output against solver nodes.
pub fn restrict_nearest(xs_from: &[f64], values: &[f64], xs_to: &[f64]) -> Vec<f64> {
    assert_eq!(xs_from.len(), values.len());
    assert!(!xs_from.is_empty());
    xs_to
        .iter()
        .map(|&x| {
            // xs_from is sorted; binary search for the neighbor.
            let idx = match xs_from.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
                Ok(i) => i,
                Err(i) => {
                    if i == 0 {
                        0
                    } else if i >= xs_from.len() {
                        xs_from.len() - 1
                    } else if (x - xs_from[i - 1]).abs() <= (xs_from[i] - x).abs() {
                        i - 1
                    } else {
                        i
                    }
                }
            };
            values[idx]
        })
        .collect()
}

/// The two-point convergence rate `log(e1/e2) / log(p1/p2)`.
pub fn pairwise_rate(e1: f64, e2: f64, p1: f64, p2: f64) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0 && p1 > 0.0 && p2 > 0.0) {
        return Err(Error::Invalid {
            what: "pairwise rate",
            detail: format!("inputs must be positive: e1={e1}, e2={e2}, p1={p1}, p2={p2}"),
        });
    }
    if p1 == p2 {
        return Err(Error::Invalid {
            what: "pairwise rate",
            detail: "parameter values must differ".into(),
        });
    }
    Ok((e1 / e2).ln() / (p1 / p2).ln())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fitted_rate(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Invalid {
            what: "rate fit",
            detail: format!("need at least 2 points, got {}", points.len()),
        });
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::Invalid {
            what: "rate fit",
            detail: "points must be positive for a log-log fit".into(),
        });
    }
    let n = points.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(x, y) in points {
        sx += x.ln();
        sy += y.ln();
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x.ln() - mx;
        num += dx * (y.ln() - my);
        den += dx * dx;
    }
    if den == 0.0 {
        return Err(Error::Invalid {
            what: "rate fit",
            detail: "degenerate fit: all parameter values equal".into(),
        });
    }
    Ok(num / den)
}

/// Least-squares slope of `log(value)` vs `log(t)` over `[t_lo, t_hi]`.
/// Requires at least 5 points in the window, all values positive.
pub fn decay_slope(trace: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = trace
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    if pts.len() < 5 {
        return Err(Error::Invalid {
            what: "decay window",
            detail: format!(
                "need at least 5 points in [{}, {}], got {}",
                window.0,
                window.1,
                pts.len()
            ),
        });
    }
    if pts.iter().any(|&(_, v)| v <= 0.0) {
        return Err(Error::Invalid {
            what: "decay window",
            detail: "values must be positive for a log-log fit".into(),
        });
    }
    fitted_rate(&pts)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Invalid {
            what: "tolerance",
            detail: format!("tol must lie in (0, 1), got {tol}"),
        });
    }
    Ok(())
}

/// Horizon bound `delta_tol = c1 * tol^(-1/(2s))` for a prescribed tolerance.
pub fn delta_tol(s: FractionalOrder, tol: f64, c1: f64) -> Result<f64> {
    check_tol(tol)?;
    Ok(c1 * tol.powf(-0.5 / s.value()))
}

/// Singularity-truncation bound `eps_tol = c2 * tol^(1/(2(1-s)))`. Note this
/// underflows to 0 as s -> 1- (the exponent blows up); callers clamp to the
/// assembler's admissible minimum when they need a usable radius.
pub fn eps_tol(s: FractionalOrder, tol: f64, c2: f64) -> Result<f64> {
    check_tol(tol)?;
    Ok(c2 * tol.powf(0.5 / (1.0 - s.value())))
}

/// Fit the horizon-bound constant from one probe run: with
/// `error = K delta^(-2s)`, the delta achieving a target tolerance is
/// `delta_tol(s, tol, c1)` with `c1 = probe_delta * probe_error^(1/(2s))`.
pub fn calibrate_delta_constant(
    s: FractionalOrder,
    probe_delta: f64,
    probe_error: f64,
) -> Result<f64> {
    if !(probe_delta > 0.0 && probe_error > 0.0) {
        return Err(Error::Invalid {
            what: "calibration probe",
            detail: format!("need positive probe values, got ({probe_delta}, {probe_error})"),
        });
    }
    Ok(probe_delta * probe_error.powf(0.5 / s.value()))
}

/// Fit the singularity-bound constant from one probe run: with
/// `error = K eps^(2(1-s))`, `c2 = probe_eps * probe_error^(-1/(2(1-s)))`.
pub fn calibrate_eps_constant(
    s: FractionalOrder,
    probe_eps: f64,
    probe_error: f64,
) -> Result<f64> {
    if !(probe_eps > 0.0 && probe_error > 0.0) {
        return Err(Error::Invalid {
            what: "calibration probe",
            detail: format!("need positive probe values, got ({probe_eps}, {probe_error})"),
        });
    }
    Ok(probe_eps * probe_error.powf(-0.5 / (1.0 - s.value())))
}

/// Node of maximum value; ties broken by smallest |x|, then smallest x.
pub fn peak(u: &Field) -> (f64, f64) {
    let grid = u.grid();
    let mut best = (f64::NEG_INFINITY, f64::INFINITY, f64::INFINITY);
    for (i, &v) in u.values().iter().enumerate() {
        let x = grid.node(i);
        let cand = (v, x.abs(), x);
        let better = cand.0 > best.0
            || (cand.0 == best.0 && cand.1 < best.1)
            || (cand.0 == best.0 && cand.1 == best.1 && cand.2 < best.2);
        if better {
            best = cand;
        }
    }
    (best.2, best.0)
}

/// (parameter, error) rows with pairwise and fitted convergence rates.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub parameter: String,
    pub rows: Vec<(f64, f64)>,
    pub pairwise: Vec<f64>,
    pub fitted: f64,
    /// The theoretical exponent the fitted rate is compared against, when one
    /// applies (-2s for horizon sweeps, 2(1-s) for singularity sweeps).
    pub reference_exponent: Option<f64>,
}

impl RateReport {
    pub fn from_errors(
        parameter: impl Into<String>,
        rows: Vec<(f64, f64)>,
        reference_exponent: Option<f64>,
    ) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Invalid {
                what: "rate report",
                detail: format!("need at least 2 rows, got {}", rows.len()),
            });
        }
        let increasing = rows.windows(2).all(|w| w[1].0 > w[0].0);
        let decreasing = rows.windows(2).all(|w| w[1].0 < w[0].0);
        if !(increasing || decreasing) {
            return Err(Error::Invalid {
                what: "rate report",
                detail: "parameter values must be sorted and distinct".into(),
            });
        }
        if rows.iter().any(|&(_, e)| e <= 0.0 || e.is_nan()) {
            return Err(Error::Invalid {
                what: "rate report",
                detail: "errors must be positive".into(),
            });
        }
        let pairwise = rows
            .windows(2)
            .map(|w| pairwise_rate(w[0].1, w[1].1, w[0].0, w[1].0))
            .collect::<Result<Vec<_>>>()?;
        let fitted = fitted_rate(&rows)?;
        Ok(Self {
            parameter: parameter.into(),
            rows,
            pairwise,
            fitted,
            reference_exponent,
        })
    }

    /// CSV mirroring the published table layout: (param, error, pairwise_rate)
    /// rows plus a trailing fitted-rate summary row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string(&[], &[]))?;
        Ok(())
    }

    pub fn to_csv_string(&self, header_lines: &[String], footer_lines: &[String]) -> String {
        let mut out = String::new();
        for line in header_lines {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "{},error,pairwise_rate", self.parameter);
        for (i, &(p, e)) in self.rows.iter().enumerate() {
            if i == 0 {
                let _ = writeln!(out, "{p:.3e},{e:.3e},");
            } else {
                let _ = writeln!(out, "{p:.3e},{e:.3e},{:.3}", self.pairwise[i - 1]);
            }
        }
        match self.reference_exponent {
            Some(r) => {
                let _ = writeln!(out, "fitted,{:.3},reference {r:.3}", self.fitted);
            }
            None => {
                let _ = writeln!(out, "fitted,{:.3},", self.fitted);
            }
        }
        for line in footer_lines {
            let _ = writeln!(out, "# {line}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, sample_initial, Field, DEFAULT_MOLLIFY_TIME};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn order(s: f64) -> FractionalOrder {
        FractionalOrder::new(s).unwrap()
    }

    #[test]
    fn l2_of_constant_and_zero() {
        let g = build_grid(2.0, 0.01, 0.1).unwrap();
        let c = Field::constant(Arc::clone(&g), 3.0);
        // c * sqrt(2L) up to one-cell quantization (interior excludes +-L).
        assert_relative_eq!(l2_norm(&c), 3.0 * (4.0f64 - 0.01).sqrt(), max_relative = 1e-12);
        let z = Field::zeros(g);
        assert_eq!(l2_norm(&z), 0.0);
    }

    #[test]
    fn l2_of_mollified_dirac_matches_gaussian_integral() {
        // || u0 ||_{L2} = (8 pi ttilde)^{-1/4} = 4.46622...
        let g = build_grid(5.0, 0.0025, 0.625).unwrap();
        let u0 = sample_initial(&g, DEFAULT_MOLLIFY_TIME);
        assert_relative_eq!(l2_norm(&u0), 4.466219208690012, max_relative = 1e-6);
    }

    #[test]
    fn error_l2_basics() {
        let g = build_grid(1.0, 0.1, 0.2).unwrap();
        let a = Field::constant(Arc::clone(&g), 1.5);
        let b = Field::constant(Arc::clone(&g), 1.5);
        assert_eq!(error_l2(&a, &b).unwrap(), 0.0);
        let c = Field::constant(Arc::clone(&g), 2.5);
        assert_relative_eq!(
            error_l2(&a, &c).unwrap(),
            (2.0f64 - 0.1).sqrt(),
            max_relative = 1e-12
        );
        assert_eq!(
            error_l2(&a, &c).unwrap(),
            error_l2(&c, &a).unwrap()
        );
        // Different horizons, same interior: comparable.
        let g2 = build_grid(1.0, 0.1, 0.5).unwrap();
        let d = Field::constant(g2, 1.5);
        assert_eq!(error_l2(&a, &d).unwrap(), 0.0);
        // Different spacing: rejected.
        let g3 = build_grid(1.0, 0.05, 0.2).unwrap();
        let e = Field::constant(g3, 1.5);
        assert!(error_l2(&a, &e).is_err());
    }

    #[test]
    fn pairwise_rate_reproduces_published_columns() {
        // Horizon sweep, s = 0.50 column.
        let r = pairwise_rate(6.372e-3, 5.090e-3, 8.0, 10.0).unwrap();
        assert!((r - (-1.007)).abs() <= 1e-3, "got {r}");
        // Singularity sweep, s = 0.75 column.
        let r = pairwise_rate(4.781e-3, 3.360e-3, 1.0 / 800.0, 1.0 / 1600.0).unwrap();
        assert!((r - 0.509).abs() <= 1e-3, "got {r}");
        // Equal errors: rate 0.
        assert_eq!(pairwise_rate(2.0, 2.0, 1.0, 2.0).unwrap(), 0.0);
        assert!(pairwise_rate(1.0, 1.0, 2.0, 2.0).is_err());
        assert!(pairwise_rate(-1.0, 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn decay_slope_exact_on_power_laws() {
        let trace: Vec<(f64, f64)> = (1..40)
            .map(|i| {
                let t = 0.5 * i as f64;
                (t, 3.7 * t.powf(-0.5))
            })
            .collect();
        let s = decay_slope(&trace, DECAY_WINDOW).unwrap();
        assert_relative_eq!(s, -0.5, epsilon = 1e-12);
        // Window with too few points.
        assert!(decay_slope(&trace[..3], (0.0, 100.0)).is_err());
        // Non-positive values rejected.
        let bad = vec![(2.0, 1.0), (3.0, -1.0), (4.0, 1.0), (5.0, 1.0), (6.0, 1.0)];
        assert!(decay_slope(&bad, (0.0, 100.0)).is_err());
    }

    #[test]
    fn tolerance_bounds() {
        assert_relative_eq!(delta_tol(order(0.5), 1e-2, 1.0).unwrap(), 100.0, max_relative = 1e-12);
        assert_relative_eq!(delta_tol(order(0.25), 1e-2, 1.0).unwrap(), 1e4, max_relative = 1e-12);
        assert_relative_eq!(eps_tol(order(0.5), 1e-2, 1.0).unwrap(), 1e-2, max_relative = 1e-12);
        assert_relative_eq!(eps_tol(order(0.9), 1e-2, 1.0).unwrap(), 1e-10, max_relative = 1e-9);
        assert_relative_eq!(
            eps_tol(order(0.25), 1e-2, 1.0).unwrap(),
            10f64.powf(-4.0 / 3.0),
            max_relative = 1e-12
        );
        // tol -> 1- approaches the bare constant.
        assert_relative_eq!(delta_tol(order(0.5), 1.0 - 1e-12, 2.5).unwrap(), 2.5, max_relative = 1e-9);
        assert!(delta_tol(order(0.5), 1.0, 1.0).is_err());
        assert!(eps_tol(order(0.5), 1.5, 1.0).is_err());
    }

    #[test]
    fn calibration_round_trips_through_the_bounds() {
        // A probe on an exact power law must make the bound reproduce the
        // probe itself when the target tolerance equals the probe error.
        let s = order(0.4);
        let (probe_delta, k) = (24.0f64, 3.7);
        let probe_error = k * probe_delta.powf(-0.8);
        let c1 = calibrate_delta_constant(s, probe_delta, probe_error).unwrap();
        assert_relative_eq!(
            delta_tol(s, probe_error, c1).unwrap(),
            probe_delta,
            max_relative = 1e-12
        );
        // Halving the tolerance demands a larger horizon by 2^(1/(2s)).
        let tighter = delta_tol(s, probe_error / 2.0, c1).unwrap();
        assert_relative_eq!(
            tighter / probe_delta,
            2f64.powf(1.25),
            max_relative = 1e-12
        );

        let (probe_eps, k) = (1.0f64 / 1600.0, 0.9);
        let probe_error = k * probe_eps.powf(1.2);
        let c2 = calibrate_eps_constant(s, probe_eps, probe_error).unwrap();
        assert_relative_eq!(
            eps_tol(s, probe_error, c2).unwrap(),
            probe_eps,
            max_relative = 1e-12
        );
        assert!(calibrate_delta_constant(s, 1.0, -0.5).is_err());
    }

    #[test]
    fn peak_location_and_tie_breaks() {
        let g = build_grid(1.0, 0.5, 0.5).unwrap();
        let u0 = sample_initial(&g, DEFAULT_MOLLIFY_TIME);
        let (x, v) = peak(&u0);
        assert_eq!(x, 0.0);
        assert_relative_eq!(v, 28.2095, max_relative = 1e-5);
        // Constant field: tie-break lands on the node nearest 0.
        let c = Field::constant(Arc::clone(&g), 2.0);
        assert_eq!(peak(&c), (0.0, 2.0));
        // Max, not max-abs: negated bump peaks at the zero plateau, not at 0.
        let mut neg = Field::zeros(Arc::clone(&g));
        for i in g.interior() {
            neg.values_mut()[i] = -(-g.node(i).powi(2) * 8.0).exp();
        }
        let (x, v) = peak(&neg);
        assert_eq!(v, 0.0);
        assert!(x.abs() > 0.9, "peak pushed to the constraint region, got x = {x}");
    }

    #[test]
    fn rate_report_layout_and_validation() {
        let rows = vec![(8.0, 6.372e-3), (10.0, 5.090e-3), (12.0, 4.237e-3)];
        let rep = RateReport::from_errors("delta", rows, Some(-1.0)).unwrap();
        assert_eq!(rep.pairwise.len(), 2);
        let csv = rep.to_csv_string(&[], &[]);
        assert!(csv.starts_with("delta,error,pairwise_rate\n"));
        assert!(csv.trim_end().ends_with("reference -1.000"));
        // Unsorted or duplicate parameters rejected.
        assert!(RateReport::from_errors("delta", vec![(1.0, 1.0), (1.0, 0.5)], None).is_err());
        assert!(
            RateReport::from_errors("delta", vec![(1.0, 1.0), (3.0, 0.5), (2.0, 0.2)], None)
                .is_err()
        );
    }

    #[test]
    fn restrict_nearest_picks_closest() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let vs = [10.0, 11.0, 12.0, 13.0];
        let out = restrict_nearest(&xs, &vs, &[-5.0, 0.4, 0.6, 2.0, 9.0]);
        assert_eq!(out, vec![10.0, 10.0, 11.0, 12.0, 13.0]);
    }

    proptest! {
        #[test]
        fn rate_scale_invariance(c in 0.1f64..10.0, k in 0.1f64..10.0,
                                 e1 in 1e-6f64..1.0, e2 in 1e-6f64..1.0,
                                 p1 in 0.1f64..10.0, q in 1.1f64..4.0) {
            let p2 = p1 * q;
            let r = pairwise_rate(e1, e2, p1, p2).unwrap();
            let r_scaled = pairwise_rate(c * e1, c * e2, k * p1, k * p2).unwrap();
            prop_assert!((r - r_scaled).abs() <= 1e-9 * r.abs().max(1.0));
        }

        #[test]
        fn norm_homogeneity(c in -10.0f64..10.0, n in 2usize..40) {
            let vals: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
            let scaled: Vec<f64> = vals.iter().map(|v| c * v).collect();
            let a = weighted_l2(&vals, 0.1);
            let b = weighted_l2(&scaled, 0.1);
            prop_assert!((b - c.abs() * a).abs() <= 1e-12 * a.max(1e-12));
        }
    }
}
