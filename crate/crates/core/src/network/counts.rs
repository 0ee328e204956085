//! Closed-form component counts of cell-to-cell and related equalizers, as a
//! function of the number of series cells.

use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use crate::Error;

/// `(per_cell_num / per_cell_den) * n + constant`, rounded up to a whole part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Count {
    pub per_cell_num: u32,
    pub per_cell_den: u32,
    pub constant: i32,
}

impl Count {
    pub const fn fixed(c: i32) -> Self {
        Count {
            per_cell_num: 0,
            per_cell_den: 1,
            constant: c,
        }
    }

    pub const fn linear(per_cell: u32, constant: i32) -> Self {
        Count {
            per_cell_num: per_cell,
            per_cell_den: 1,
            constant,
        }
    }

    pub const fn per_cells(num: u32, den: u32) -> Self {
        Count {
            per_cell_num: num,
            per_cell_den: den,
            constant: 0,
        }
    }

    pub fn eval(&self, n: usize) -> u64 {
        let scaled = (self.per_cell_num as u64 * n as u64).div_ceil(self.per_cell_den as u64);
        (scaled as i64 + self.constant as i64).max(0) as u64
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.per_cell_num == 0 {
            return write!(f, "{}", self.constant);
        }
        match (self.per_cell_num, self.per_cell_den) {
            (1, 1) => write!(f, "n")?,
            (a, 1) => write!(f, "{a}n")?,
            (1, d) => write!(f, "n/{d}")?,
            (a, d) => write!(f, "{a}n/{d}")?,
        }
        match self.constant {
            0 => Ok(()),
            c if c > 0 => write!(f, "+{c}"),
            c => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    /// Transformer-based flyback cell-to-cell equalizer with a `2n` DPDT network.
    Xiong,
    /// Forward-converter cell-to-cell equalizer with a `2n` DPDT network.
    Pham,
    /// Multi-switch cell-to-cell equalizer with a `2n` DPDT network.
    Shang,
    /// Adjacent-cell resonant-tank equalizer.
    YeZero,
    /// Multi-cell-to-stack multi-winding transformer equalizer.
    Li,
    /// Multi-cell-to-multi-cell switched-capacitor equalizer.
    YeStar,
    /// Multi-cell-to-multi-cell dual-active-bridge equalizer.
    Wang,
    /// Cell-to-stack equalizer with MOSFET cell selection.
    Hannan,
    /// Cell-to-stack equalizer with relay cell selection.
    Lin,
    /// Bipolar-rail selection network with a level-shifted Cuk converter.
    Proposed,
}

impl Topology {
    pub const ALL: [Topology; 10] = [
        Topology::Xiong,
        Topology::Pham,
        Topology::Shang,
        Topology::Proposed,
        Topology::YeZero,
        Topology::Li,
        Topology::YeStar,
        Topology::Wang,
        Topology::Hannan,
        Topology::Lin,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Topology::Xiong => "xiong",
            Topology::Pham => "pham",
            Topology::Shang => "shang",
            Topology::YeZero => "ye_zero",
            Topology::Li => "li",
            Topology::YeStar => "ye_star",
            Topology::Wang => "wang",
            Topology::Hannan => "hannan",
            Topology::Lin => "lin",
            Topology::Proposed => "proposed",
        }
    }

    /// Topologies whose selection switches can be MOSFETs or relays.
    pub fn has_realization_choice(&self) -> bool {
        matches!(
            self,
            Topology::Xiong | Topology::Pham | Topology::Shang | Topology::Proposed
        )
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Topology::ALL
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| Error::UnknownTopology(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Realization {
    Mosfet,
    Relay,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ComponentCounts {
    pub topology: &'static str,
    pub realization: Option<Realization>,
    pub selection_mosfets: Count,
    pub dpdt_relays: Count,
    pub spst_relays: Count,
    pub converter_mosfets: Count,
    pub diodes: Count,
    pub capacitors: Count,
    pub inductors: Count,
    pub transformers: Count,
    pub transformer_note: Option<&'static str>,
    /// `(high-frequency, low-frequency)` gate/relay drivers, where reported.
    pub drivers: Option<(Count, Count)>,
    /// Reported efficiency range in percent.
    pub efficiency_pct: Option<(f64, f64)>,
    pub speed: Option<&'static str>,
    pub voltage_difference_dependent: Option<bool>,
}

impl ComponentCounts {
    pub fn selection_switches(&self, n: usize) -> u64 {
        self.selection_mosfets.eval(n) + self.dpdt_relays.eval(n) + self.spst_relays.eval(n)
    }

    pub fn total_mosfets(&self, n: usize) -> u64 {
        self.selection_mosfets.eval(n) + self.converter_mosfets.eval(n)
    }

    pub fn name(&self) -> String {
        match self.realization {
            Some(Realization::Mosfet) => alloc::format!("{} (mosfet)", self.topology),
            Some(Realization::Relay) => alloc::format!("{} (relay)", self.topology),
            None => self.topology.to_string(),
        }
    }
}

const ZERO: Count = Count::fixed(0);

fn blank(topology: Topology) -> ComponentCounts {
    ComponentCounts {
        topology: topology.id(),
        realization: None,
        selection_mosfets: ZERO,
        dpdt_relays: ZERO,
        spst_relays: ZERO,
        converter_mosfets: ZERO,
        diodes: ZERO,
        capacitors: ZERO,
        inductors: ZERO,
        transformers: ZERO,
        transformer_note: None,
        drivers: None,
        efficiency_pct: None,
        speed: None,
        voltage_difference_dependent: None,
    }
}

/// Component counts of `topology`. `realization` selects MOSFET or relay
/// selection switches where the topology offers both; single-realization
/// topologies ignore it. `n` is only checked here; evaluate the returned
/// [`Count`]s at the cell count of interest.
pub fn component_counts(
    topology: Topology,
    realization: Realization,
    n: usize,
) -> Result<ComponentCounts, Error> {
    if n < 2 {
        return Err(Error::TooFewCells(n));
    }
    let mut c = blank(topology);
    let two_n_network = |c: &mut ComponentCounts| {
        c.realization = Some(realization);
        match realization {
            Realization::Mosfet => c.selection_mosfets = Count::linear(8, 0),
            Realization::Relay => c.dpdt_relays = Count::linear(2, 0),
        }
    };
    match topology {
        Topology::Xiong => {
            two_n_network(&mut c);
            c.converter_mosfets = Count::fixed(1);
            c.capacitors = Count::fixed(2);
            c.transformers = Count::fixed(1);
            c.diodes = Count::fixed(1);
            c.efficiency_pct = Some((59.4, 59.4));
        }
        Topology::Pham => {
            two_n_network(&mut c);
            c.converter_mosfets = Count::fixed(2);
            c.capacitors = Count::fixed(2);
            c.transformers = Count::fixed(1);
            c.diodes = Count::fixed(2);
            c.efficiency_pct = Some((85.3, 89.5));
        }
        Topology::Shang => {
            two_n_network(&mut c);
            c.converter_mosfets = Count::fixed(5);
            c.capacitors = Count::fixed(2);
            c.inductors = Count::fixed(2);
            c.diodes = Count::fixed(5);
            c.efficiency_pct = Some((98.6, 99.5));
        }
        Topology::Proposed => {
            c.realization = Some(realization);
            c.converter_mosfets = Count::fixed(2);
            c.capacitors = Count::fixed(2);
            c.inductors = Count::fixed(2);
            c.efficiency_pct = Some((90.1, 92.9));
            c.speed = Some("good");
            c.voltage_difference_dependent = Some(false);
            match realization {
                Realization::Mosfet => {
                    c.selection_mosfets = Count::linear(4, 10);
                    c.drivers = Some((Count::fixed(2), Count::linear(4, 10)));
                }
                Realization::Relay => {
                    c.dpdt_relays = Count::linear(1, 2);
                    c.spst_relays = Count::fixed(2);
                    c.drivers = Some((Count::fixed(2), Count::linear(1, 2)));
                }
            }
        }
        Topology::YeZero => {
            c.converter_mosfets = Count::linear(2, 0);
            c.capacitors = Count::linear(2, -1);
            c.inductors = Count::linear(1, -1);
            c.drivers = Some((Count::linear(2, 0), ZERO));
            c.efficiency_pct = Some((98.2, 98.2));
            c.speed = Some("low");
            c.voltage_difference_dependent = Some(true);
        }
        Topology::Li => {
            c.converter_mosfets = Count::linear(1, 1);
            c.capacitors = Count::linear(1, 0);
            c.transformers = Count::fixed(1);
            c.transformer_note = Some("n+1 windings");
            c.drivers = Some((Count::linear(1, 1), ZERO));
            c.efficiency_pct = Some((84.8, 84.8));
            c.speed = Some("moderate");
            c.voltage_difference_dependent = Some(true);
        }
        Topology::YeStar => {
            c.converter_mosfets = Count::linear(2, 0);
            c.capacitors = Count::linear(2, 0);
            c.drivers = Some((Count::linear(2, 0), ZERO));
            c.speed = Some("good");
            c.voltage_difference_dependent = Some(true);
        }
        Topology::Wang => {
            c.converter_mosfets = Count::linear(3, 0);
            c.capacitors = Count::linear(1, 0);
            c.transformers = Count::per_cells(1, 2);
            c.drivers = Some((Count::linear(3, 0), ZERO));
            c.efficiency_pct = Some((84.5, 84.5));
            c.speed = Some("excellent");
            c.voltage_difference_dependent = Some(false);
        }
        Topology::Hannan => {
            c.realization = Some(Realization::Mosfet);
            c.selection_mosfets = Count::linear(4, 0);
            c.converter_mosfets = Count::fixed(2);
            c.diodes = Count::fixed(2);
            c.capacitors = Count::fixed(2);
            c.transformers = Count::fixed(2);
            c.drivers = Some((Count::fixed(2), Count::linear(4, 0)));
            c.efficiency_pct = Some((92.0, 92.0));
            c.speed = Some("moderate");
            c.voltage_difference_dependent = Some(false);
        }
        Topology::Lin => {
            c.realization = Some(Realization::Relay);
            c.spst_relays = Count::linear(2, 0);
            c.converter_mosfets = Count::fixed(1);
            c.diodes = Count::fixed(1);
            c.capacitors = Count::fixed(2);
            c.inductors = Count::fixed(2);
            c.drivers = Some((Count::fixed(1), Count::linear(2, 0)));
            c.speed = Some("moderate");
            c.voltage_difference_dependent = Some(false);
        }
    }
    Ok(c)
}
