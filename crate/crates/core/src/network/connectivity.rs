//! Resolves a control-bit vector on a [`Netlist`] into converter-port to cell
//! connections by unioning every closed conductor.

use alloc::vec;
use alloc::vec::Vec;

use super::netlist::{ElementKind, Netlist, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Port {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Terminal {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Polarity {
    Correct,
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PortLink {
    pub cell: usize,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Fault {
    /// Both terminals of this cell sit in one conducting component.
    ShortedCell(usize),
    /// One component joins stack nodes `low` and `high` (`high > low + 1`),
    /// shorting every cell between them.
    MultiCellPath { low: usize, high: usize },
    /// A port terminal reaches no stack node.
    FloatingPort(Port, Terminal),
    /// Both terminals of a port are in one component.
    ShortedPort(Port),
    /// The port spans two stack nodes that are not the ends of one cell.
    NotACell {
        port: Port,
        plus: usize,
        minus: usize,
    },
}

/// Stack nodes reached by each terminal of one port, when exactly one is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PortSpan {
    pub plus: Option<usize>,
    pub minus: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortConnection {
    pub port1: Option<PortLink>,
    pub port2: Option<PortLink>,
    pub spans: [PortSpan; 2],
    pub faults: Vec<Fault>,
}

impl PortConnection {
    pub fn is_clean(&self) -> bool {
        self.faults.is_empty()
    }

    pub fn link(&self, port: Port) -> Option<PortLink> {
        match port {
            Port::One => self.port1,
            Port::Two => self.port2,
        }
    }

    pub fn span(&self, port: Port) -> PortSpan {
        self.spans[port as usize]
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(len: usize) -> Self {
        DisjointSet {
            parent: (0..len).collect(),
            rank: vec![0; len],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            core::cmp::Ordering::Less => self.parent[ra] = rb,
            core::cmp::Ordering::Greater => self.parent[rb] = ra,
            core::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Union all conductors closed under `bits` and report what each converter
/// port is connected to. Faults are data, never errors.
///
/// `bits` must have one entry per netlist control.
pub fn resolve_connectivity(netlist: &Netlist, bits: &[bool]) -> PortConnection {
    assert_eq!(bits.len(), netlist.controls().len(), "one bit per control");
    let nodes = netlist.nodes();
    let mut dsu = DisjointSet::new(nodes.len());
    for e in netlist.elements() {
        let on = bits[e.control];
        match e.kind {
            ElementKind::Dpdt(poles) => {
                for p in poles {
                    if let Some(t) = if on { p.on } else { p.off } {
                        dsu.union(p.common, t);
                    }
                }
            }
            ElementKind::Spst(a, b) => {
                if on {
                    dsu.union(a, b);
                }
            }
        }
    }

    // stack nodes per component root
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (id, node) in nodes.iter().enumerate() {
        if let NodeKind::Stack(j) = node.kind {
            let root = dsu.find(id);
            members[root].push(j);
        }
    }

    let mut faults = Vec::new();
    for m in members.iter_mut().filter(|m| m.len() >= 2) {
        m.sort_unstable();
        let (low, high) = (m[0], m[m.len() - 1]);
        if m.len() == 2 && high == low + 1 {
            faults.push(Fault::ShortedCell(high));
        } else {
            faults.push(Fault::MultiCellPath { low, high });
        }
    }

    let mut spans = [PortSpan::default(); 2];
    let mut links = [None, None];
    for port in [Port::One, Port::Two] {
        let terminal_root = |dsu: &mut DisjointSet, t| {
            let id: NodeId = netlist.port_terminal(port, t).expect("validated netlist");
            dsu.find(id)
        };
        let plus_root = terminal_root(&mut dsu, Terminal::Plus);
        let minus_root = terminal_root(&mut dsu, Terminal::Minus);
        if plus_root == minus_root {
            faults.push(Fault::ShortedPort(port));
        }
        let single = |root: usize| match members[root].as_slice() {
            [j] => Some(*j),
            _ => None,
        };
        for (t, root) in [(Terminal::Plus, plus_root), (Terminal::Minus, minus_root)] {
            if members[root].is_empty() {
                faults.push(Fault::FloatingPort(port, t));
            }
        }
        let span = PortSpan {
            plus: single(plus_root),
            minus: single(minus_root),
        };
        spans[port as usize] = span;
        if plus_root != minus_root {
            if let (Some(p), Some(m)) = (span.plus, span.minus) {
                if p == m + 1 {
                    links[port as usize] = Some(PortLink {
                        cell: p,
                        polarity: Polarity::Correct,
                    });
                } else if m == p + 1 {
                    links[port as usize] = Some(PortLink {
                        cell: m,
                        polarity: Polarity::Reversed,
                    });
                } else {
                    faults.push(Fault::NotACell {
                        port,
                        plus: p,
                        minus: m,
                    });
                }
            }
        }
    }
    faults.sort_unstable();
    faults.dedup();

    PortConnection {
        port1: links[0],
        port2: links[1],
        spans,
        faults,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{select_pair, SwitchState};

    fn link(cell: usize) -> Option<PortLink> {
        Some(PortLink {
            cell,
            polarity: Polarity::Correct,
        })
    }

    #[test]
    fn two_and_seven() {
        let net = Netlist::proposed(8).unwrap();
        let c = resolve_connectivity(&net, &select_pair(7, 2, 8).unwrap().to_bits());
        assert_eq!(c.port1, link(7));
        assert_eq!(c.port2, link(2));
        assert!(c.is_clean(), "{:?}", c.faults);
    }

    #[test]
    fn all_off_floats_both_ports() {
        let net = Netlist::proposed(8).unwrap();
        let c = resolve_connectivity(&net, &SwitchState::all_off(8).to_bits());
        assert_eq!(c.port1, None);
        assert_eq!(c.port2, None);
        assert_eq!(
            c.faults,
            [
                Fault::FloatingPort(Port::One, Terminal::Plus),
                Fault::FloatingPort(Port::One, Terminal::Minus),
                Fault::FloatingPort(Port::Two, Terminal::Plus),
                Fault::FloatingPort(Port::Two, Terminal::Minus),
            ]
        );
        assert!(!c
            .faults
            .iter()
            .any(|f| matches!(f, Fault::ShortedCell(_) | Fault::MultiCellPath { .. })));
    }

    #[test]
    fn four_and_one_spans() {
        let net = Netlist::proposed(8).unwrap();
        let c = resolve_connectivity(&net, &select_pair(4, 1, 8).unwrap().to_bits());
        assert_eq!(
            c.span(Port::One),
            PortSpan {
                plus: Some(4),
                minus: Some(3)
            }
        );
        assert_eq!(
            c.span(Port::Two),
            PortSpan {
                plus: Some(1),
                minus: Some(0)
            }
        );
        assert!(c.is_clean());
    }

    #[test]
    fn adjacent_pair_shares_the_common_node() {
        let net = Netlist::proposed(8).unwrap();
        let c = resolve_connectivity(&net, &select_pair(5, 4, 8).unwrap().to_bits());
        assert_eq!(c.port1, link(5));
        assert_eq!(c.port2, link(4));
        assert!(c.is_clean(), "{:?}", c.faults);
    }

    #[test]
    fn closing_everything_is_caught() {
        let net = Netlist::proposed(6).unwrap();
        let bits = alloc::vec![true; net.controls().len()];
        let c = resolve_connectivity(&net, &bits);
        assert!(!c.is_clean());
    }
}
