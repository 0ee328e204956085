//! Models for a low-frequency selection-switch cell-to-cell battery
//! equalizer: a Thevenin cell with one recovery branch, the bipolar-rail
//! relay selection network (plus the classic `2n` DPDT network), an averaged
//! model of the level-shifted Cuk converter, the recovery-compensating
//! equalization controller and a fixed-step simulator tying them together.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parameter sweeps live in the `cellbal` crate.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cell;
pub mod controller;
pub mod converter;
pub mod curve;
mod error;
pub mod network;
pub mod sim;

pub use cell::{CellParams, CellState, ClampEvent};
pub use controller::{
    check_band, choose_pair, measure_vimp, stop_threshold, Commands, Controller, ControllerState,
    EqualizerConfig, Phase, Role,
};
pub use converter::{capacitor_voltages, converter_enabled, ConverterParams, TransferResult};
pub use curve::PiecewiseLinear;
pub use error::Error;
pub use network::{
    component_counts, select_pair, transition_count, verify_netlist, verify_network, Netlist,
    PortConnection, SwitchState,
};
pub use sim::{run, summarize, LoadSegment, RunOutput, Scenario, Summary, Telemetry};
