//! Electrical wiring of a selection network as switch poles between named
//! nodes.
//!
//! Proposed-network wiring, per parity class of stack nodes (odd nodes feed
//! one rail of each port pair, even nodes the other):
//!
//! * a *carrier* chain runs down the parity class from the port-1 rail
//!   (`R1o`/`R1e`). Pole B of `S_j` either passes the carrier through
//!   (off) or terminates it on `N_j` (on), so the port-1 rail always lands on
//!   the highest selected node of that parity;
//! * a *second-rail* chain runs down from the port-2 rail (`R2o`/`R2e`).
//!   Pole A of `S_j` either passes it down (off) or diverts it onto the
//!   carrier segment just below `N_j` (on), which holds the next selected
//!   node of the same parity;
//! * N0 has no switch. Pole A of `S1` (node 1 never needs the second-rail
//!   chain) picks the port-2 negative feed `R2e_alt` from either `R2e` (off)
//!   or N0 (on). `R2e_alt` reaches the port only while `POL2` is off, i.e.
//!   when the port-2 cell is odd, and among those selections S1 is on exactly
//!   when the port-2 cell is cell 1;
//! * `POL1`/`POL2` cross the rail pair onto the port terminals when the
//!   corresponding cell is even;
//! * `SHORT_A`/`SHORT_B` tie the star node `X` to `P1-` and `P2+`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::connectivity::{Port, Terminal};
use super::switch_names;
use crate::Error;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Stack junction N_j; N0 is the stack negative terminal.
    Stack(usize),
    PortTerminal(Port, Terminal),
    Wire,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

/// One pole of a changeover switch. A missing throw is unconnected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pole {
    pub common: NodeId,
    pub off: Option<NodeId>,
    pub on: Option<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Dpdt([Pole; 2]),
    Spst(NodeId, NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Element {
    /// Index into the control bit vector.
    pub control: usize,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    n: usize,
    controls: Vec<String>,
    nodes: Vec<Node>,
    elements: Vec<Element>,
}

/// Name-interning builder used by the default wirings and by text parsers.
#[derive(Debug, Clone)]
pub struct NetlistBuilder {
    n: usize,
    controls: Vec<String>,
    nodes: Vec<Node>,
    index: BTreeMap<String, NodeId>,
    elements: Vec<Element>,
}

/// Classify a node by its reserved name: `N<j>` is a stack node,
/// `P1+`, `P1-`, `P2+`, `P2-` are converter port terminals.
pub fn classify(name: &str) -> NodeKind {
    match name {
        "P1+" => return NodeKind::PortTerminal(Port::One, Terminal::Plus),
        "P1-" => return NodeKind::PortTerminal(Port::One, Terminal::Minus),
        "P2+" => return NodeKind::PortTerminal(Port::Two, Terminal::Plus),
        "P2-" => return NodeKind::PortTerminal(Port::Two, Terminal::Minus),
        _ => {}
    }
    if let Some(rest) = name.strip_prefix('N') {
        if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(j) = rest.parse() {
                return NodeKind::Stack(j);
            }
        }
    }
    NodeKind::Wire
}

impl NetlistBuilder {
    pub fn new(n: usize, controls: Vec<String>) -> Self {
        let mut b = NetlistBuilder {
            n,
            controls,
            nodes: Vec::new(),
            index: BTreeMap::new(),
            elements: Vec::new(),
        };
        for j in 0..=n {
            b.node(&format!("N{j}"));
        }
        for t in ["P1+", "P1-", "P2+", "P2-"] {
            b.node(t);
        }
        b
    }

    pub fn node(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            name: name.to_string(),
            kind: classify(name),
        });
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn control(&self, name: &str) -> Result<usize, Error> {
        self.controls
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Netlist(format!("unknown switch `{name}`")))
    }

    fn throw(&mut self, name: Option<&str>) -> Option<NodeId> {
        name.map(|n| self.node(n))
    }

    pub fn pole(&mut self, common: &str, off: Option<&str>, on: Option<&str>) -> Pole {
        Pole {
            common: self.node(common),
            off: self.throw(off),
            on: self.throw(on),
        }
    }

    pub fn dpdt(&mut self, control: &str, a: Pole, b: Pole) -> Result<(), Error> {
        let control = self.control(control)?;
        self.elements.push(Element {
            control,
            kind: ElementKind::Dpdt([a, b]),
        });
        Ok(())
    }

    pub fn spst(&mut self, control: &str, a: &str, b: &str) -> Result<(), Error> {
        let control = self.control(control)?;
        let (a, b) = (self.node(a), self.node(b));
        self.elements.push(Element {
            control,
            kind: ElementKind::Spst(a, b),
        });
        Ok(())
    }

    pub fn finish(self) -> Result<Netlist, Error> {
        let net = Netlist {
            n: self.n,
            controls: self.controls,
            nodes: self.nodes,
            elements: self.elements,
        };
        net.validate()?;
        Ok(net)
    }
}

impl Netlist {
    /// Default wiring of the proposed `(n+2)` DPDT + 2 SPST network.
    pub fn proposed(n: usize) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::TooFewCells(n));
        }
        let mut b = NetlistBuilder::new(n, switch_names(n));
        for parity in [1usize, 0] {
            let tag = if parity == 1 { 'o' } else { 'e' };
            let members: Vec<usize> = (1..=n).rev().filter(|j| j % 2 == parity).collect();
            let mut carrier_above = format!("R1{tag}");
            let mut second_above = format!("R2{tag}");
            for &j in &members {
                let carrier_below = format!("C{j}");
                let node = format!("N{j}");
                let carrier = b.pole(&carrier_above, Some(&carrier_below), Some(&node));
                let second = if j == 1 {
                    b.pole("R2e_alt", Some("R2e"), Some("N0"))
                } else {
                    let second_below = format!("Q{j}");
                    let p = b.pole(&second_above, Some(&second_below), Some(&carrier_below));
                    second_above = second_below;
                    p
                };
                b.dpdt(&format!("S{j}"), second, carrier)?;
                carrier_above = carrier_below;
            }
        }
        // N1 is the only odd node without a second-rail pole; make sure the
        // alternate feed exists even when the odd chain is short.
        b.node("R2e_alt");

        let x = b.pole("P1+", Some("R1o"), Some("R1e"));
        let y = b.pole("P1-", Some("R1e"), Some("R1o"));
        b.dpdt("POL1", x, y)?;
        let x = b.pole("P2+", Some("R2o"), Some("R2e"));
        let y = b.pole("P2-", Some("R2e_alt"), Some("R2o"));
        b.dpdt("POL2", x, y)?;
        b.spst("SHORT_A", "X", "P1-")?;
        b.spst("SHORT_B", "X", "P2+")?;
        b.finish()
    }

    /// Classic network: per cell j, DPDT `A_j` ties (N_j, N_{j-1}) to the
    /// port-1 rails and `C_j` ties them to the port-2 rails.
    pub fn baseline(n: usize) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::TooFewCells(n));
        }
        let mut controls: Vec<String> = (1..=n).map(|j| format!("A{j}")).collect();
        controls.extend((1..=n).map(|j| format!("C{j}")));
        let mut b = NetlistBuilder::new(n, controls);
        for j in 1..=n {
            let (top, bottom) = (format!("N{j}"), format!("N{}", j - 1));
            for (sw, plus, minus) in [("A", "P1+", "P1-"), ("C", "P2+", "P2-")] {
                let p = b.pole(&top, None, Some(plus));
                let q = b.pole(&bottom, None, Some(minus));
                b.dpdt(&format!("{sw}{j}"), p, q)?;
            }
        }
        b.finish()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn controls(&self) -> &[String] {
        &self.controls
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn elements_mut(&mut self) -> &mut [Element] {
        &mut self.elements
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn stack_node(&self, j: usize) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.kind == NodeKind::Stack(j))
    }

    pub fn port_terminal(&self, port: Port, terminal: Terminal) -> Option<NodeId> {
        self.nodes
            .iter()
            .position(|n| n.kind == NodeKind::PortTerminal(port, terminal))
    }

    pub fn dpdt_count(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e.kind, ElementKind::Dpdt(_)))
            .count()
    }

    pub fn spst_count(&self) -> usize {
        self.elements.len() - self.dpdt_count()
    }

    /// Structural checks: every control drives exactly one element, stack
    /// nodes N0..Nn and all four port terminals exist exactly once.
    pub fn validate(&self) -> Result<(), Error> {
        let mut uses = alloc::vec![0usize; self.controls.len()];
        for e in &self.elements {
            let slot = uses.get_mut(e.control).ok_or_else(|| {
                Error::Netlist(format!("control index {} out of range", e.control))
            })?;
            *slot += 1;
            let ids: Vec<NodeId> = match e.kind {
                ElementKind::Dpdt(poles) => poles
                    .iter()
                    .flat_map(|p| [Some(p.common), p.off, p.on])
                    .flatten()
                    .collect(),
                ElementKind::Spst(a, b) => alloc::vec![a, b],
            };
            if ids.iter().any(|&id| id >= self.nodes.len()) {
                return Err(Error::Netlist(format!(
                    "element for `{}` references a missing node",
                    self.controls[e.control]
                )));
            }
        }
        for (name, count) in self.controls.iter().zip(&uses) {
            if *count != 1 {
                return Err(Error::Netlist(format!(
                    "switch `{name}` is used by {count} elements, expected exactly 1"
                )));
            }
        }
        for j in 0..=self.n {
            let count = self
                .nodes
                .iter()
                .filter(|n| n.kind == NodeKind::Stack(j))
                .count();
            if count != 1 {
                return Err(Error::Netlist(format!(
                    "stack node N{j} must appear exactly once"
                )));
            }
        }
        if let Some(extra) = self.nodes.iter().find_map(|n| match n.kind {
            NodeKind::Stack(j) if j > self.n => Some(j),
            _ => None,
        }) {
            return Err(Error::Netlist(format!(
                "stack node N{extra} exceeds n={}",
                self.n
            )));
        }
        for port in [Port::One, Port::Two] {
            for t in [Terminal::Plus, Terminal::Minus] {
                if self.port_terminal(port, t).is_none() {
                    return Err(Error::Netlist(format!(
                        "missing port terminal {port:?} {t:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}
