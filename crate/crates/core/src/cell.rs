//! Thevenin cell: open-circuit voltage from a piecewise-linear OCV(SOC)
//! curve, an ohmic resistance and one RC recovery branch. Charging current is
//! positive.

use alloc::vec;
use alloc::vec::Vec;

use crate::curve::PiecewiseLinear;
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellParams {
    /// Ampere-hours.
    pub capacity_ah: f64,
    /// Series (ohmic) resistance, ohms.
    pub r0: f64,
    /// Recovery-branch resistance, ohms.
    pub r1: f64,
    /// Recovery-branch capacitance, farads.
    pub c1: f64,
    ocv: PiecewiseLinear,
}

impl CellParams {
    pub fn new(
        capacity_ah: f64,
        r0: f64,
        r1: f64,
        c1: f64,
        ocv_curve: Vec<(f64, f64)>,
    ) -> Result<Self, Error> {
        if !(capacity_ah > 0.0 && capacity_ah.is_finite()) {
            return Err(Error::invalid("cell capacity", "must be > 0"));
        }
        if !(r0 >= 0.0 && r0.is_finite()) {
            return Err(Error::invalid("cell r0", "must be >= 0"));
        }
        if !(r1 > 0.0 && r1.is_finite()) {
            return Err(Error::invalid("cell r1", "must be > 0"));
        }
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(Error::invalid("cell c1", "must be > 0"));
        }
        if ocv_curve.iter().any(|&(s, _)| !(0.0..=1.0).contains(&s)) {
            return Err(Error::invalid("ocv curve", "soc values must lie in [0, 1]"));
        }
        if ocv_curve.windows(2).any(|w| w[1].1 < w[0].1) {
            return Err(Error::invalid(
                "ocv curve",
                "voltages must be non-decreasing",
            ));
        }
        let ocv = PiecewiseLinear::new(ocv_curve)?;
        Ok(CellParams {
            capacity_ah,
            r0,
            r1,
            c1,
            ocv,
        })
    }

    /// 3.6 V / 2.6 Ah reference cell. The impedance values and the OCV shape
    /// are calibration choices: r0 = 60 mOhm, r1 = 30 mOhm, r1*c1 = 15 s,
    /// OCV linear 3.4 V -> 3.8 V between 20 % and 90 % SOC, with steeper
    /// knees out to 3.0 V (empty) and 4.1 V (full).
    pub fn reference() -> Self {
        CellParams::new(
            2.6,
            0.060,
            0.030,
            15.0 / 0.030,
            vec![(0.0, 3.0), (0.2, 3.4), (0.9, 3.8), (1.0, 4.1)],
        )
        .expect("reference parameters are valid")
    }

    pub fn ocv_curve(&self) -> &PiecewiseLinear {
        &self.ocv
    }

    /// Recovery-branch time constant r1*c1 in seconds.
    pub fn tau(&self) -> f64 {
        self.r1 * self.c1
    }

    /// Open-circuit voltage at `soc`.
    pub fn ocv(&self, soc: f64) -> f64 {
        self.ocv.eval(soc)
    }

    /// SOC at which the OCV first reaches `volts` (clamped to the curve).
    pub fn soc_for_ocv(&self, volts: f64) -> f64 {
        self.ocv.inverse(volts)
    }

    /// Coulombs per unit SOC.
    pub fn charge_per_soc(&self) -> f64 {
        3600.0 * self.capacity_ah
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellState {
    pub soc: f64,
    /// Voltage across the recovery branch, volts.
    pub v_rc: f64,
}

/// SOC left [0, 1] during a step and was clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClampEvent {
    Empty { unclamped: f64 },
    Full { unclamped: f64 },
}

impl CellState {
    pub fn rested(soc: f64) -> Self {
        CellState {
            soc: soc.clamp(0.0, 1.0),
            v_rc: 0.0,
        }
    }

    /// Rested cell whose OCV equals `volts`.
    pub fn at_voltage(params: &CellParams, volts: f64) -> Self {
        CellState::rested(params.soc_for_ocv(volts))
    }

    /// Terminal voltage while `current` flows (charging positive).
    pub fn terminal_voltage(&self, params: &CellParams, current: f64) -> f64 {
        params.ocv(self.soc) + current * params.r0 + self.v_rc
    }

    /// Advance by `dt` seconds at constant `current`. The RC branch uses the
    /// exact zero-order-hold discretization, so splitting a step changes
    /// nothing.
    pub fn step(
        &self,
        params: &CellParams,
        current: f64,
        dt: f64,
    ) -> (CellState, Option<ClampEvent>) {
        debug_assert!(dt > 0.0);
        let raw = self.soc + current * dt / params.charge_per_soc();
        let (soc, event) = if raw < 0.0 {
            (0.0, Some(ClampEvent::Empty { unclamped: raw }))
        } else if raw > 1.0 {
            (1.0, Some(ClampEvent::Full { unclamped: raw }))
        } else {
            (raw, None)
        };
        let decay = libm::exp(-dt / params.tau());
        let v_rc = self.v_rc * decay + current * params.r1 * (1.0 - decay);
        (CellState { soc, v_rc }, event)
    }
}
