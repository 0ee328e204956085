//! Relay selection networks.
//!
//! The proposed network uses one DPDT per stack node `S1..Sn`, two polarity
//! reversal DPDTs and a ganged pair of SPSTs that tie the shared node of two
//! adjacent cells to both converter ports. The classic network uses two
//! fixed-polarity DPDTs per cell. [`netlist`] holds the electrical wiring of
//! both and [`connectivity`] resolves any switch state into port-to-cell
//! connections, which is what [`verify`] checks `select_pair` against.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::Error;

pub mod connectivity;
pub mod counts;
pub mod netlist;
pub mod verify;

pub use connectivity::{
    resolve_connectivity, Fault, Polarity, Port, PortConnection, PortLink, Terminal,
};
pub use counts::{component_counts, ComponentCounts, Count, Realization, Topology};
pub use netlist::Netlist;
pub use verify::{verify_baseline, verify_netlist, verify_network, VerifyReport, Violation};

/// Commanded state of the proposed network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwitchState {
    /// `cells[j - 1]` drives S_j.
    pub cells: Vec<bool>,
    pub pol1: bool,
    pub pol2: bool,
    pub short_a: bool,
    pub short_b: bool,
}

impl SwitchState {
    pub fn all_off(n: usize) -> Self {
        SwitchState {
            cells: vec![false; n],
            pol1: false,
            pol2: false,
            short_a: false,
            short_b: false,
        }
    }

    pub fn n(&self) -> usize {
        self.cells.len()
    }

    /// Control bits in netlist order: S1..Sn, POL1, POL2, SHORT_A, SHORT_B.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut bits = self.cells.clone();
        bits.extend([self.pol1, self.pol2, self.short_a, self.short_b]);
        bits
    }

    pub fn is_all_off(&self) -> bool {
        self.to_bits().iter().all(|b| !b)
    }

    /// Names of the switches on, in control order.
    pub fn on_names(&self) -> Vec<String> {
        let names = switch_names(self.n());
        self.to_bits()
            .into_iter()
            .zip(names)
            .filter_map(|(b, name)| b.then_some(name))
            .collect()
    }
}

/// Control names of the proposed network for `n` cells, matching
/// [`SwitchState::to_bits`].
pub fn switch_names(n: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=n).map(|j| format!("S{j}")).collect();
    for s in ["POL1", "POL2", "SHORT_A", "SHORT_B"] {
        names.push(String::from(s));
    }
    names
}

pub(crate) fn check_pair(k: usize, l: usize, n: usize) -> Result<(), Error> {
    if n < 2 {
        return Err(Error::TooFewCells(n));
    }
    if !(1 <= l && l < k && k <= n) {
        return Err(Error::BadPair { k, l, n });
    }
    Ok(())
}

/// Switch state that connects cell `k` to port 1 and cell `l` to port 2
/// (`k > l`, 1-based). S_0 does not exist: node N0 is hard-wired.
pub fn select_pair(k: usize, l: usize, n: usize) -> Result<SwitchState, Error> {
    check_pair(k, l, n)?;
    let mut state = SwitchState::all_off(n);
    state.pol1 = k.is_multiple_of(2);
    state.pol2 = l.is_multiple_of(2);
    let adjacent = k == l + 1;
    state.short_a = adjacent;
    state.short_b = adjacent;
    for j in [k, k - 1, l, l - 1] {
        if j >= 1 {
            state.cells[j - 1] = true;
        }
    }
    Ok(state)
}

/// State of the classic network: one DPDT per cell onto the port-1 rails
/// (a, b) and one onto the port-2 rails (c, d).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineState {
    pub port1: Vec<bool>,
    pub port2: Vec<bool>,
}

impl BaselineState {
    pub fn all_off(n: usize) -> Self {
        BaselineState {
            port1: vec![false; n],
            port2: vec![false; n],
        }
    }

    /// Control bits: A1..An (port 1), C1..Cn (port 2).
    pub fn to_bits(&self) -> Vec<bool> {
        let mut bits = self.port1.clone();
        bits.extend_from_slice(&self.port2);
        bits
    }

    pub fn dpdt_count(&self) -> usize {
        self.port1.len() + self.port2.len()
    }

    pub fn on_count(&self) -> usize {
        self.to_bits().iter().filter(|b| **b).count()
    }
}

pub fn baseline_select_pair(k: usize, l: usize, n: usize) -> Result<BaselineState, Error> {
    check_pair(k, l, n)?;
    let mut state = BaselineState::all_off(n);
    state.port1[k - 1] = true;
    state.port2[l - 1] = true;
    Ok(state)
}

/// Per-switch flips between two states of the same network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transitions {
    pub per_switch: Vec<u32>,
}

impl Transitions {
    pub fn max(&self) -> u32 {
        self.per_switch.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.per_switch.iter().sum()
    }
}

pub fn transition_count(prev: &SwitchState, next: &SwitchState) -> Transitions {
    debug_assert_eq!(prev.n(), next.n());
    Transitions {
        per_switch: prev
            .to_bits()
            .iter()
            .zip(next.to_bits())
            .map(|(a, b)| u32::from(*a != b))
            .collect(),
    }
}

/// Running per-switch transition totals over a sequence of states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionCounter {
    counts: Vec<u64>,
}

impl TransitionCounter {
    pub fn new(n: usize) -> Self {
        TransitionCounter {
            counts: vec![0; n + 4],
        }
    }

    pub fn record(&mut self, prev: &SwitchState, next: &SwitchState) {
        for (c, d) in self
            .counts
            .iter_mut()
            .zip(transition_count(prev, next).per_switch)
        {
            *c += u64::from(d);
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}
