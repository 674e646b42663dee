//! Parameter sweeps: one run per value at fixed everything-else, errors at
//! t = 1 against a resolvable reference, pairwise and fitted rates attached.

use super::{reference_solution, run_system, ExperimentConfig, SystemLabel, REFERENCE_EVAL_TIME};
use crate::analysis::{error_l2, RateReport};
use crate::domain::Field;
use crate::error::{Error, Result};
use crate::kernel::FractionalOrder;
use rayon::prelude::*;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Delta,
    Eps,
    Order,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Delta => "delta",
            SweepParam::Eps => "eps",
            SweepParam::Order => "s",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "delta" => Ok(SweepParam::Delta),
            "eps" => Ok(SweepParam::Eps),
            "s" => Ok(SweepParam::Order),
            other => Err(Error::Invalid {
                what: "sweep parameter",
                detail: format!("expected delta, eps or s; got {other:?}"),
            }),
        }
    }
}

/// What each sweep entry is compared against at t = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepReference {
    /// Tail-compensated System A at delta = 64 L (the bounded-domain
    /// fractional solution surrogate). For horizon sweeps of A/C.
    Surrogate,
    /// The eps = 0 sibling run at the same horizon. For singularity sweeps.
    EpsilonZero,
    /// The classical solution at the same resolution. For B/D and s-sweeps.
    PdeBaseline,
}

fn entry_error(param: SweepParam, value: f64, e: Error) -> Error {
    Error::SweepEntry {
        param: param.name(),
        value,
        source: Box::new(e),
    }
}

pub fn sweep(
    base: &ExperimentConfig,
    param: SweepParam,
    values: &[f64],
    reference: SweepReference,
) -> Result<RateReport> {
    base.validate()?;
    if values.len() < 3 {
        return Err(Error::Invalid {
            what: "sweep",
            detail: format!("need at least 3 values, got {}", values.len()),
        });
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::Invalid {
            what: "sweep",
            detail: "values must be sorted and distinct".into(),
        });
    }

    let reference_field = resolve_reference(base, reference)?;

    let rows: Vec<(f64, f64)> = values
        .par_iter()
        .map(|&v| -> Result<(f64, f64)> {
            let mut cfg = base.clone();
            cfg.t_final = REFERENCE_EVAL_TIME;
            cfg.snapshot_times.clear();
            match param {
                SweepParam::Delta => cfg.horizon = v,
                SweepParam::Eps => cfg.eps = v,
                SweepParam::Order => {
                    cfg.order =
                        Some(FractionalOrder::new(v).map_err(|e| entry_error(param, v, e))?)
                }
            }
            let run = run_system(&cfg).map_err(|e| entry_error(param, v, e))?;
            let err = error_l2(run.history.final_field(), &reference_field)
                .map_err(|e| entry_error(param, v, e))?;
            Ok((v, err))
        })
        .collect::<Result<Vec<_>>>()?;

    let reference_exponent = match (param, base.order) {
        (SweepParam::Delta, Some(o))
            if matches!(base.system, SystemLabel::A | SystemLabel::C) =>
        {
            Some(-2.0 * o.value())
        }
        (SweepParam::Eps, Some(o)) => Some(2.0 * (1.0 - o.value())),
        _ => None,
    };
    RateReport::from_errors(param.name(), rows, reference_exponent)
}

fn resolve_reference(base: &ExperimentConfig, reference: SweepReference) -> Result<Field> {
    match reference {
        SweepReference::Surrogate => reference_solution(base),
        SweepReference::EpsilonZero => {
            let mut cfg = base.clone();
            cfg.eps = 0.0;
            cfg.system = match base.system {
                SystemLabel::C => SystemLabel::A,
                SystemLabel::D => SystemLabel::B,
                other => other,
            };
            cfg.t_final = REFERENCE_EVAL_TIME;
            cfg.snapshot_times.clear();
            Ok(run_system(&cfg)?.history.final_field().clone())
        }
        SweepReference::PdeBaseline => {
            let mut cfg = ExperimentConfig::pde(base.half_width)
                .with_resolution(base.spacing, base.dt)
                .with_t_final(REFERENCE_EVAL_TIME);
            cfg.mollify_time = base.mollify_time;
            Ok(run_system(&cfg)?.history.final_field().clone())
        }
    }
}
