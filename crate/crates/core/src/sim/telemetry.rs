//! Per-step simulation records.

use alloc::vec::Vec;

use crate::cell::ClampEvent;
use crate::controller::Phase;

/// One simulation step starting at `t`. Voltages are the terminal voltages
/// the controller saw at `t`; currents are the ones applied over `[t, t+dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRow {
    pub t: f64,
    pub voltages: Vec<f64>,
    pub i_stack: f64,
    /// Active profile segment, `None` once the profile has ended.
    pub segment: Option<usize>,
    /// 1-based source and sink cells while a round is active.
    pub source: Option<usize>,
    pub sink: Option<usize>,
    pub converter_on: bool,
    pub i_src: f64,
    pub i_sink: f64,
    pub p_loss: f64,
    /// Controller phase after this step's decision.
    pub phase: Phase,
    pub v_c1: Option<f64>,
    pub v_c2: Option<f64>,
    /// Cumulative transitions per control bit, in `switch_names` order.
    pub transitions: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampRecord {
    pub t: f64,
    /// 1-based cell index.
    pub cell: usize,
    pub event: ClampEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Telemetry {
    pub n: usize,
    pub dt: f64,
    pub rows: Vec<TelemetryRow>,
    pub clamps: Vec<ClampRecord>,
    /// Set when a cell ran empty and the run stopped early.
    pub exhausted: Option<ClampRecord>,
}

impl Telemetry {
    /// Whether the sample in `rows[index]` was taken with the converter off
    /// for at least `time_gap` beforehand. The stack is assumed rested
    /// before the first step.
    pub fn settled_flags(&self, time_gap: f64) -> Vec<bool> {
        let mut off_since = f64::NEG_INFINITY;
        let mut flags = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            flags.push(row.t - off_since + 1e-9 >= time_gap);
            if row.converter_on {
                off_since = row.t + self.dt;
            }
        }
        flags
    }
}
