use alloc::vec::Vec;

use super::connectivity::{resolve_connectivity, Polarity, PortConnection, PortLink};
use super::netlist::Netlist;
use super::{baseline_select_pair, select_pair, switch_names};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Cell commanded onto port 1.
    pub k: usize,
    /// Cell commanded onto port 2.
    pub l: usize,
    pub connection: PortConnection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub n: usize,
    pub pairs: usize,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn expected(cell: usize) -> Option<PortLink> {
    Some(PortLink {
        cell,
        polarity: Polarity::Correct,
    })
}

fn check_all_pairs(
    n: usize,
    mut connect: impl FnMut(usize, usize) -> Result<PortConnection, Error>,
) -> Result<VerifyReport, Error> {
    let mut violations = Vec::new();
    let mut pairs = 0;
    for k in 2..=n {
        for l in 1..k {
            pairs += 1;
            let connection = connect(k, l)?;
            let ok = connection.is_clean()
                && connection.port1 == expected(k)
                && connection.port2 == expected(l);
            if !ok {
                violations.push(Violation { k, l, connection });
            }
        }
    }
    Ok(VerifyReport {
        n,
        pairs,
        violations,
    })
}

/// Exhaustively checks `select_pair` against the given wiring of the
/// proposed network: every pair must land cell k on port 1 and cell l on
/// port 2 with correct polarity and no fault.
pub fn verify_netlist(netlist: &Netlist) -> Result<VerifyReport, Error> {
    let n = netlist.n();
    if n < 2 {
        return Err(Error::TooFewCells(n));
    }
    if netlist.controls() != switch_names(n).as_slice() {
        return Err(Error::Netlist(
            "controls must be S1..Sn, POL1, POL2, SHORT_A, SHORT_B".into(),
        ));
    }
    check_all_pairs(n, |k, l| {
        let bits = select_pair(k, l, n)?.to_bits();
        Ok(resolve_connectivity(netlist, &bits))
    })
}

/// [`verify_netlist`] on the default wiring.
pub fn verify_network(n: usize) -> Result<VerifyReport, Error> {
    verify_netlist(&Netlist::proposed(n)?)
}

/// Same exhaustive check for the classic `2n` DPDT network.
pub fn verify_baseline(n: usize) -> Result<VerifyReport, Error> {
    let netlist = Netlist::baseline(n)?;
    check_all_pairs(n, |k, l| {
        let bits = baseline_select_pair(k, l, n)?.to_bits();
        Ok(resolve_connectivity(&netlist, &bits))
    })
}
