//! Plain-text netlists for the proposed network.
//!
//! ```text
//! # comment
//! cells 4
//! dpdt S1 R2e_alt R2e N0  R1o C1 N1
//! spst SHORT_A X P1-
//! ```
//!
//! `cells <n>` comes first. A `dpdt` line names its switch and gives two
//! poles as `common off on`; `-` leaves a throw unconnected. An `spst` line
//! names its switch and the two nodes it joins. Switch names are
//! `S1..Sn`, `POL1`, `POL2`, `SHORT_A`, `SHORT_B`, each used exactly once.
//! `N0..Nn` are the stack nodes (N0 the stack minus), `P1+ P1- P2+ P2-` the
//! converter port terminals; any other token is an internal wire.

use std::fmt::Write as _;

use cellbal_core::network::netlist::{ElementKind, NetlistBuilder, Pole};
use cellbal_core::network::switch_names;
use cellbal_core::Netlist;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn throw(token: &str) -> Option<&str> {
    (token != "-").then_some(token)
}

pub fn parse_netlist(text: &str) -> Result<Netlist, ParseError> {
    let mut builder: Option<NetlistBuilder> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((&keyword, args)) = tokens.split_first() else {
            continue;
        };
        match (keyword, builder.as_mut()) {
            ("cells", None) => {
                let [n] = args else {
                    return Err(err(line, "expected `cells <n>`"));
                };
                let n: usize = n
                    .parse()
                    .map_err(|_| err(line, format!("bad cell count `{n}`")))?;
                if n < 2 {
                    return Err(err(line, "at least two cells are required"));
                }
                builder = Some(NetlistBuilder::new(n, switch_names(n)));
            }
            ("cells", Some(_)) => return Err(err(line, "`cells` given twice")),
            (_, None) => return Err(err(line, "the first statement must be `cells <n>`")),
            ("dpdt", Some(b)) => {
                let [name, c1, off1, on1, c2, off2, on2] = args else {
                    return Err(err(
                        line,
                        "expected `dpdt <switch> <common> <off> <on> <common> <off> <on>`",
                    ));
                };
                let a = b.pole(c1, throw(off1), throw(on1));
                let z = b.pole(c2, throw(off2), throw(on2));
                b.dpdt(name, a, z).map_err(|e| err(line, e.to_string()))?;
            }
            ("spst", Some(b)) => {
                let [name, x, y] = args else {
                    return Err(err(line, "expected `spst <switch> <node> <node>`"));
                };
                b.spst(name, x, y).map_err(|e| err(line, e.to_string()))?;
            }
            (other, Some(_)) => return Err(err(line, format!("unknown statement `{other}`"))),
        }
    }
    builder
        .ok_or_else(|| err(last_line.max(1), "empty netlist"))?
        .finish()
        .map_err(|e| err(last_line, e.to_string()))
}

pub fn format_netlist(net: &Netlist) -> String {
    let name = |id: usize| net.nodes()[id].name.as_str();
    let opt = |id: Option<usize>| id.map_or("-", name);
    let pole = |p: &Pole| format!("{} {} {}", name(p.common), opt(p.off), opt(p.on));
    let mut s = format!("cells {}\n", net.n());
    for e in net.elements() {
        let control = &net.controls()[e.control];
        match &e.kind {
            ElementKind::Dpdt([a, b]) => {
                writeln!(s, "dpdt {control} {}  {}", pole(a), pole(b)).unwrap();
            }
            ElementKind::Spst(a, b) => {
                writeln!(s, "spst {control} {} {}", name(*a), name(*b)).unwrap();
            }
        }
    }
    s
}
