//! File formats, parameter sweeps and command implementations behind the
//! `cellbal` binary.

pub mod commands;
pub mod compare;
pub mod config;
pub mod netlist_text;
pub mod output;
pub mod sweep;
