//! Stack load profiles. Current is positive when charging the stack.

use alloc::vec::Vec;

use crate::Error;

/// Default proportional gain of the constant-voltage loop, A/V.
pub const DEFAULT_CV_GAIN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum LoadSegment {
    Rest {
        duration: f64,
    },
    /// Ends after `duration` or once any cell crosses `cell_voltage_limit`
    /// (upward when charging, downward when discharging).
    ConstantCurrent {
        current: f64,
        duration: Option<f64>,
        cell_voltage_limit: Option<f64>,
    },
    /// Proportional loop on the stack voltage towards `n * cell_setpoint`,
    /// ending when the commanded current drops below `cutoff_current`.
    ConstantVoltage {
        cell_setpoint: f64,
        current_limit: f64,
        cutoff_current: f64,
        gain: f64,
        duration: Option<f64>,
    },
    /// Piecewise-constant current; each `(start, current)` holds until the
    /// next start. Times are relative to the segment start.
    StepSchedule {
        steps: Vec<(f64, f64)>,
        duration: f64,
    },
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl LoadSegment {
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            LoadSegment::Rest { duration } => {
                if !positive(*duration) {
                    return Err(Error::invalid("rest duration", "must be > 0"));
                }
            }
            LoadSegment::ConstantCurrent {
                current,
                duration,
                cell_voltage_limit,
            } => {
                if !current.is_finite() {
                    return Err(Error::invalid("constant-current current", "must be finite"));
                }
                if duration.is_none() && cell_voltage_limit.is_none() {
                    return Err(Error::invalid(
                        "constant-current segment",
                        "needs a duration or a cell voltage limit",
                    ));
                }
                if duration.is_some_and(|d| !positive(d)) {
                    return Err(Error::invalid("constant-current duration", "must be > 0"));
                }
                if cell_voltage_limit.is_some_and(|v| !positive(v)) {
                    return Err(Error::invalid(
                        "constant-current voltage limit",
                        "must be > 0",
                    ));
                }
            }
            LoadSegment::ConstantVoltage {
                cell_setpoint,
                current_limit,
                cutoff_current,
                gain,
                duration,
            } => {
                if !positive(*cell_setpoint) {
                    return Err(Error::invalid("constant-voltage setpoint", "must be > 0"));
                }
                if !positive(*current_limit) {
                    return Err(Error::invalid(
                        "constant-voltage current limit",
                        "must be > 0",
                    ));
                }
                if !(*cutoff_current >= 0.0 && *cutoff_current < *current_limit) {
                    return Err(Error::invalid(
                        "constant-voltage cutoff current",
                        "must lie in [0, current_limit)",
                    ));
                }
                if !positive(*gain) {
                    return Err(Error::invalid("constant-voltage gain", "must be > 0"));
                }
                if duration.is_some_and(|d| !positive(d)) {
                    return Err(Error::invalid("constant-voltage duration", "must be > 0"));
                }
            }
            LoadSegment::StepSchedule { steps, duration } => {
                if !positive(*duration) {
                    return Err(Error::invalid("step schedule duration", "must be > 0"));
                }
                if steps.is_empty() {
                    return Err(Error::invalid("step schedule", "needs at least one step"));
                }
                if steps[0].0 != 0.0 {
                    return Err(Error::invalid(
                        "step schedule",
                        "first step must start at 0",
                    ));
                }
                if steps.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::invalid("step schedule", "start times must increase"));
                }
                if steps.iter().any(|&(t, i)| !i.is_finite() || t >= *duration) {
                    return Err(Error::invalid(
                        "step schedule",
                        "currents must be finite and steps must start before the duration",
                    ));
                }
            }
        }
        Ok(())
    }

    fn max_duration(&self) -> Option<f64> {
        match self {
            LoadSegment::Rest { duration } => Some(*duration),
            LoadSegment::ConstantCurrent { duration, .. } => *duration,
            LoadSegment::ConstantVoltage { duration, .. } => *duration,
            LoadSegment::StepSchedule { duration, .. } => Some(*duration),
        }
    }
}

/// Proportional CV charger: `gain * (setpoint * n - sum(V))` clamped to
/// `[0, current_limit]`.
pub fn cv_charge_current(
    cell_setpoint: f64,
    cell_voltages: &[f64],
    current_limit: f64,
    gain: f64,
) -> f64 {
    let target = cell_setpoint * cell_voltages.len() as f64;
    let stack: f64 = cell_voltages.iter().sum();
    (gain * (target - stack)).clamp(0.0, current_limit)
}

/// Walks a profile segment by segment; once it is exhausted the stack rests.
#[derive(Debug, Clone)]
pub(crate) struct ProfileCursor<'a> {
    segments: &'a [LoadSegment],
    index: usize,
    elapsed: f64,
}

// absorbs accumulated rounding in segment timers
const TIME_EPS: f64 = 1e-9;

impl<'a> ProfileCursor<'a> {
    pub(crate) fn new(segments: &'a [LoadSegment]) -> Self {
        ProfileCursor {
            segments,
            index: 0,
            elapsed: 0.0,
        }
    }

    /// Index of the active segment, `None` once the profile is done.
    pub(crate) fn segment_index(&self) -> Option<usize> {
        (self.index < self.segments.len()).then_some(self.index)
    }

    /// Stack current for the next `dt`, given the latest measured voltages.
    pub(crate) fn current(&mut self, voltages: &[f64], dt: f64) -> f64 {
        while let Some(seg) = self.segments.get(self.index) {
            if let Some(i) = self.evaluate(seg, voltages) {
                self.elapsed += dt;
                return i;
            }
            self.index += 1;
            self.elapsed = 0.0;
        }
        0.0
    }

    /// `None` when `seg` is finished.
    fn evaluate(&self, seg: &LoadSegment, voltages: &[f64]) -> Option<f64> {
        if seg
            .max_duration()
            .is_some_and(|d| self.elapsed + TIME_EPS >= d)
        {
            return None;
        }
        match seg {
            LoadSegment::Rest { .. } => Some(0.0),
            LoadSegment::ConstantCurrent {
                current,
                cell_voltage_limit,
                ..
            } => {
                if let Some(limit) = cell_voltage_limit {
                    let hit = if *current >= 0.0 {
                        voltages.iter().any(|v| v >= limit)
                    } else {
                        voltages.iter().any(|v| v <= limit)
                    };
                    if hit {
                        return None;
                    }
                }
                Some(*current)
            }
            LoadSegment::ConstantVoltage {
                cell_setpoint,
                current_limit,
                cutoff_current,
                gain,
                ..
            } => {
                let i = cv_charge_current(*cell_setpoint, voltages, *current_limit, *gain);
                (i >= *cutoff_current && i > 0.0).then_some(i)
            }
            LoadSegment::StepSchedule { steps, .. } => {
                let at = steps.partition_point(|&(t, _)| t <= self.elapsed + TIME_EPS);
                Some(steps[at.max(1) - 1].1)
            }
        }
    }
}
