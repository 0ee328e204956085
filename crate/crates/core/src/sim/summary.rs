//! Run metrics derived from telemetry.

use alloc::vec::Vec;

use crate::controller::{check_band, EqualizerConfig};
use crate::sim::telemetry::Telemetry;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    /// First settled in-band sample after which no settled sample leaves the
    /// band; `None` if that never happens.
    pub convergence_time: Option<f64>,
    pub max_switch_transitions: u64,
    pub total_transitions: u64,
    pub per_switch_transitions: Vec<u64>,
    /// Energy drawn from source cells by the converter, joules.
    pub energy_out_j: f64,
    /// Energy delivered into sink cells, joules.
    pub energy_in_j: f64,
    pub energy_lost_j: f64,
    /// max - min of the last recorded voltages.
    pub final_spread_v: f64,
    pub rounds: u64,
    pub simulated_time: f64,
    pub exhausted: bool,
}

/// Bookkeeping for one stretch of settled out-of-band samples.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Excursion {
    pub t_start: f64,
    /// Time of the next settled in-band sample, `None` if the run ended first.
    pub t_resolved: Option<f64>,
    /// Largest distance outside the band, volts.
    pub peak_overshoot: f64,
    pub settled_samples: usize,
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

fn overshoot(v: &[f64], v_tol: f64) -> f64 {
    let avg = v.iter().sum::<f64>() / v.len() as f64;
    v.iter()
        .map(|x| (x - avg).abs() - v_tol)
        .fold(0.0, f64::max)
}

pub fn summarize(telemetry: &Telemetry, config: &EqualizerConfig) -> Summary {
    let rows = &telemetry.rows;
    let settled = telemetry.settled_flags(config.time_gap);

    let mut convergence_time = None;
    let mut candidate: Option<f64> = None;
    for (row, &s) in rows.iter().zip(&settled) {
        if !s {
            continue;
        }
        if check_band(&row.voltages, config.v_tol).1.is_empty() {
            candidate.get_or_insert(row.t);
        } else {
            candidate = None;
        }
    }
    if let Some(t) = candidate {
        convergence_time = Some(t);
    }

    let per_switch = rows
        .last()
        .map(|r| r.transitions.clone())
        .unwrap_or_default();
    let mut energy_out = 0.0;
    let mut energy_in = 0.0;
    let mut energy_lost = 0.0;
    let mut rounds = 0;
    let mut prev_active = false;
    for row in rows {
        if row.converter_on {
            let (src, sink) = (row.source.expect("source"), row.sink.expect("sink"));
            energy_out += row.voltages[src - 1] * row.i_src * telemetry.dt;
            energy_in += row.voltages[sink - 1] * row.i_sink * telemetry.dt;
            energy_lost += row.p_loss * telemetry.dt;
        }
        let active = row.source.is_some();
        if active && !prev_active {
            rounds += 1;
        }
        prev_active = active;
    }

    Summary {
        convergence_time,
        max_switch_transitions: per_switch.iter().copied().max().unwrap_or(0),
        total_transitions: per_switch.iter().sum(),
        per_switch_transitions: per_switch,
        energy_out_j: energy_out,
        energy_in_j: energy_in,
        energy_lost_j: energy_lost,
        final_spread_v: rows.last().map(|r| spread(&r.voltages)).unwrap_or(0.0),
        rounds,
        simulated_time: rows.last().map(|r| r.t + telemetry.dt).unwrap_or(0.0),
        exhausted: telemetry.exhausted.is_some(),
    }
}

/// Settled out-of-band stretches after the first settled in-band sample.
pub fn band_excursions(telemetry: &Telemetry, config: &EqualizerConfig) -> Vec<Excursion> {
    let settled = telemetry.settled_flags(config.time_gap);
    let mut out = Vec::new();
    let mut seen_in_band = false;
    let mut open: Option<Excursion> = None;
    for (row, &s) in telemetry.rows.iter().zip(&settled) {
        if !s {
            continue;
        }
        let in_band = check_band(&row.voltages, config.v_tol).1.is_empty();
        if in_band {
            seen_in_band = true;
            if let Some(mut e) = open.take() {
                e.t_resolved = Some(row.t);
                out.push(e);
            }
        } else if seen_in_band {
            let o = overshoot(&row.voltages, config.v_tol);
            let e = open.get_or_insert(Excursion {
                t_start: row.t,
                t_resolved: None,
                peak_overshoot: 0.0,
                settled_samples: 0,
            });
            e.peak_overshoot = e.peak_overshoot.max(o);
            e.settled_samples += 1;
        }
    }
    out.extend(open);
    out
}

/// Share of settled samples inside the band, counted from the first settled
/// in-band sample on. `None` if the band is never reached.
pub fn settled_band_fraction(telemetry: &Telemetry, config: &EqualizerConfig) -> Option<f64> {
    let settled = telemetry.settled_flags(config.time_gap);
    let mut started = false;
    let (mut inside, mut total) = (0usize, 0usize);
    for (row, &s) in telemetry.rows.iter().zip(&settled) {
        if !s {
            continue;
        }
        let in_band = check_band(&row.voltages, config.v_tol).1.is_empty();
        started |= in_band;
        if started {
            total += 1;
            inside += in_band as usize;
        }
    }
    started.then(|| inside as f64 / total as f64)
}
