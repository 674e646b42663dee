//! Flat `key = value` config files, one entry per line, `#` comments.

use super::{ExperimentConfig, SystemLabel};
use crate::domain::{ConstraintData, DEFAULT_MOLLIFY_TIME};
use crate::error::{Error, Result};
use crate::kernel::FractionalOrder;
use std::path::Path;

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut system: Option<SystemLabel> = None;
    let mut s: Option<f64> = None;
    let mut half_width: Option<f64> = None;
    let mut spacing = super::DESK_SPACING;
    let mut horizon: Option<f64> = None;
    let mut eps = 0.0;
    let mut dt = super::DESK_TIME_STEP;
    let mut t_final = 1.0;
    let mut snapshots: Vec<f64> = Vec::new();
    let mut trace_every = 1usize;
    let mut mollify_time = DEFAULT_MOLLIFY_TIME;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or(Error::ConfigParse {
            line,
            msg: format!("expected `key = value`, got {stripped:?}"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let num = |what: &str| -> Result<f64> {
            value.parse::<f64>().map_err(|_| Error::ConfigParse {
                line,
                msg: format!("{what} must be a number, got {value:?}"),
            })
        };
        match key {
            "system" => {
                system = Some(value.parse().map_err(|e: Error| Error::ConfigParse {
                    line,
                    msg: e.to_string(),
                })?)
            }
            "s" => s = Some(num("s")?),
            "L" => half_width = Some(num("L")?),
            "h" => spacing = num("h")?,
            "delta" => horizon = Some(num("delta")?),
            "eps" => eps = num("eps")?,
            "dt" => dt = num("dt")?,
            "T" => t_final = num("T")?,
            "ttilde" => mollify_time = num("ttilde")?,
            "trace_every" => {
                trace_every = value.parse().map_err(|_| Error::ConfigParse {
                    line,
                    msg: format!("trace_every must be a positive integer, got {value:?}"),
                })?
            }
            "snapshots" => {
                snapshots = value
                    .split(',')
                    .map(|v| {
                        v.trim().parse::<f64>().map_err(|_| Error::ConfigParse {
                            line,
                            msg: format!("bad snapshot time {v:?}"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            "constraints" => {
                if value != "homogeneous" {
                    return Err(Error::ConfigParse {
                        line,
                        msg: format!(
                            "only homogeneous constraints are expressible in config files, got {value:?}"
                        ),
                    });
                }
            }
            other => {
                return Err(Error::ConfigParse {
                    line,
                    msg: format!("unknown key {other:?}"),
                })
            }
        }
    }

    let system = system.ok_or(Error::ConfigParse {
        line: 0,
        msg: "missing required key `system`".into(),
    })?;
    let half_width = half_width.ok_or(Error::ConfigParse {
        line: 0,
        msg: "missing required key `L`".into(),
    })?;

    let order = match (system, s) {
        (SystemLabel::Pde, _) => None,
        (_, Some(v)) => Some(FractionalOrder::new(v)?),
        (_, None) => {
            return Err(Error::ConfigParse {
                line: 0,
                msg: format!("system {system} needs the key `s`"),
            })
        }
    };
    let horizon = match (system, horizon) {
        (SystemLabel::Pde, _) => 0.0,
        (_, Some(d)) => d,
        (_, None) => {
            return Err(Error::ConfigParse {
                line: 0,
                msg: format!("system {system} needs the key `delta`"),
            })
        }
    };

    let cfg = ExperimentConfig {
        system,
        order,
        half_width,
        spacing,
        horizon,
        eps,
        dt,
        t_final,
        snapshot_times: snapshots,
        trace_every: trace_every.max(1),
        mollify_time,
        constraints: ConstraintData::Homogeneous,
    };
    cfg.validate()?;
    Ok(cfg)
}
