//! Parameter grids over scenario files.
//!
//! A grid maps dotted config paths to lists of values, e.g.
//!
//! ```toml
//! [grid]
//! "equalizer.compensation" = [true, false]
//! "cells.r0" = [0.04, 0.06, 0.08]
//! "profile.1.current" = [-0.5, -1.3]    # array elements by 0-based index
//! ```
//!
//! Every combination becomes one run; each point is the base file with those
//! values substituted, then validated like any other scenario.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use cellbal_core::sim::run;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, ConfigError, RunConfig};
use crate::output::{self, fmt_g, SummaryFile};

/// Upper bound on grid size.
pub const MAX_POINTS: u64 = 10_000;

pub const COMPENSATION_KEY: &str = "equalizer.compensation";

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone)]
pub struct GridPoint {
    pub index: usize,
    pub assignments: Vec<(String, toml::Value)>,
    pub config: RunConfig,
}

fn bad(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.into(),
        reason: reason.into(),
    }
}

pub fn parse_grid(table: &toml::Table) -> Result<Vec<Axis>, ConfigError> {
    table
        .iter()
        .map(|(key, value)| {
            let key_name = format!("[grid].\"{key}\"");
            match value {
                toml::Value::Array(values) if !values.is_empty() => Ok(Axis {
                    key: key.clone(),
                    values: values.clone(),
                }),
                toml::Value::Array(_) => Err(bad(key_name, "needs at least one value")),
                _ => Err(bad(key_name, "must be a list of values")),
            }
        })
        .collect()
}

pub fn point_count(axes: &[Axis]) -> Result<u64, ConfigError> {
    let mut total: u64 = 1;
    for a in axes {
        total = total.saturating_mul(a.values.len() as u64);
    }
    if total > MAX_POINTS {
        return Err(bad(
            "[grid]",
            format!("{total} points exceeds the limit of {MAX_POINTS}"),
        ));
    }
    Ok(total)
}

fn set_path(root: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), ConfigError> {
    let key = || format!("[grid].\"{path}\"");
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(bad(key(), "malformed path"));
    }
    let (last, init) = parts.split_last().expect("non-empty path");
    let mut slot: &mut toml::Value = root
        .entry(init.first().copied().unwrap_or(last).to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    if init.is_empty() {
        *slot = value;
        return Ok(());
    }
    for part in init[1..].iter().chain(std::iter::once(last)) {
        slot = match slot {
            toml::Value::Table(t) => t
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new())),
            toml::Value::Array(a) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| bad(key(), format!("`{part}` is not an index")))?;
                a.get_mut(i)
                    .ok_or_else(|| bad(key(), format!("index {i} is out of range")))?
            }
            _ => return Err(bad(key(), format!("cannot descend into `{part}`"))),
        };
    }
    *slot = value;
    Ok(())
}

/// Cartesian product of the axes, first axis varying slowest.
pub fn expand(base: &toml::Table, axes: &[Axis]) -> Result<Vec<GridPoint>, ConfigError> {
    let total = point_count(axes)? as usize;
    let mut points = Vec::with_capacity(total);
    for index in 0..total {
        let mut rest = index;
        let mut assignments = vec![];
        for axis in axes.iter().rev() {
            let len = axis.values.len();
            assignments.push((axis.key.clone(), axis.values[rest % len].clone()));
            rest /= len;
        }
        assignments.reverse();
        let mut table = base.clone();
        table.remove("grid");
        for (k, v) in &assignments {
            set_path(&mut table, k, v.clone())?;
        }
        let config = config::from_table(table)
            .and_then(|f| f.resolve())
            .map_err(|e| bad(e.key, format!("grid point {index}: {}", e.reason)))?;
        points.push(GridPoint {
            index,
            assignments,
            config,
        });
    }
    Ok(points)
}

/// Grid table from a standalone file: either a `[grid]` table or bare keys.
pub fn grid_from_file(path: &Path) -> Result<toml::Table, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad("", format!("cannot read {}: {e}", path.display())))?;
    let mut table = config::parse_value(&text, config::is_json(path))?;
    match table.remove("grid") {
        Some(toml::Value::Table(t)) if table.is_empty() => Ok(t),
        Some(_) => Err(bad("[grid]", "a grid file holds only the [grid] table")),
        None => Ok(table),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointResult {
    pub index: usize,
    pub params: BTreeMap<String, toml::Value>,
    pub summary: SummaryFile,
}

/// Compensation on/off pair sharing every other grid value.
#[derive(Debug, Clone, Serialize)]
pub struct CompensationRatio {
    pub params: BTreeMap<String, toml::Value>,
    pub max_transitions_on: u64,
    pub max_transitions_off: u64,
    pub transition_ratio: f64,
    pub convergence_on: Option<f64>,
    pub convergence_off: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub axes: Vec<String>,
    pub points: Vec<PointResult>,
    pub compensation_ratios: Vec<CompensationRatio>,
}

fn compensation_ratios(points: &[PointResult]) -> Vec<CompensationRatio> {
    let mut groups: BTreeMap<String, [Option<&PointResult>; 2]> = BTreeMap::new();
    for p in points {
        let Some(toml::Value::Boolean(on)) = p.params.get(COMPENSATION_KEY) else {
            continue;
        };
        let mut others = p.params.clone();
        others.remove(COMPENSATION_KEY);
        let key = serde_json::to_string(&others).expect("serializable params");
        groups.entry(key).or_default()[usize::from(*on)] = Some(p);
    }
    groups
        .into_values()
        .filter_map(|[off, on]| {
            let (off, on) = (off?, on?);
            let mut params = on.params.clone();
            params.remove(COMPENSATION_KEY);
            let (a, b) = (
                on.summary.summary.max_switch_transitions,
                off.summary.summary.max_switch_transitions,
            );
            Some(CompensationRatio {
                params,
                max_transitions_on: a,
                max_transitions_off: b,
                transition_ratio: b as f64 / a.max(1) as f64,
                convergence_on: on.summary.summary.convergence_time,
                convergence_off: off.summary.summary.convergence_time,
            })
        })
        .collect()
}

fn value_text(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Float(x) => fmt_g(*x),
        other => other.to_string(),
    }
}

/// Runs every point in parallel and writes `point_NNNN/summary.json`,
/// `aggregate.csv` and `aggregate.json` into `out_dir`.
pub fn run_sweep(axes: &[Axis], points: &[GridPoint], out_dir: &Path) -> Result<SweepReport> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let results: Vec<PointResult> = points
        .par_iter()
        .map(|p| -> Result<PointResult> {
            let cfg = &p.config;
            let out = run(&cfg.scenario, &cfg.equalizer, &cfg.converter)
                .with_context(|| format!("grid point {}", p.index))?;
            let summary = SummaryFile::new(&out, &cfg.equalizer);
            let dir = out_dir.join(format!("point_{:04}", p.index));
            std::fs::create_dir_all(&dir)?;
            output::write_json(&summary, &dir.join("summary.json"))?;
            Ok(PointResult {
                index: p.index,
                params: p.assignments.iter().cloned().collect(),
                summary,
            })
        })
        .collect::<Result<_>>()?;

    let mut w = csv::Writer::from_path(out_dir.join("aggregate.csv"))?;
    let mut header = vec!["point".to_string()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    header.extend(
        [
            "convergence_time_s",
            "max_transitions",
            "total_transitions",
            "rounds",
            "final_spread_V",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for r in &results {
        let s = &r.summary.summary;
        let mut rec = vec![r.index.to_string()];
        rec.extend(axes.iter().map(|a| value_text(&r.params[&a.key])));
        rec.push(s.convergence_time.map(fmt_g).unwrap_or_default());
        rec.push(s.max_switch_transitions.to_string());
        rec.push(s.total_transitions.to_string());
        rec.push(s.rounds.to_string());
        rec.push(fmt_g(s.final_spread_v));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let report = SweepReport {
        axes: axes.iter().map(|a| a.key.clone()).collect(),
        compensation_ratios: compensation_ratios(&results),
        points: results,
    };
    output::write_json(&report, &out_dir.join("aggregate.json"))?;
    Ok(report)
}
