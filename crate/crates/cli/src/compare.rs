//! Component-count comparison table.

use std::fmt::Write as _;

use cellbal_core::network::{component_counts, ComponentCounts, Count, Realization, Topology};
use cellbal_core::Error;

/// Every modelled topology; the ones with a switch choice appear twice.
pub fn all_rows(n: usize) -> Result<Vec<ComponentCounts>, Error> {
    let mut rows = Vec::new();
    for t in Topology::ALL {
        if t.has_realization_choice() {
            rows.push(component_counts(t, Realization::Relay, n)?);
            rows.push(component_counts(t, Realization::Mosfet, n)?);
        } else {
            rows.push(component_counts(t, Realization::Mosfet, n)?);
        }
    }
    Ok(rows)
}

fn selection(c: &ComponentCounts, n: usize) -> (String, String) {
    let mut formula = Vec::new();
    let mut value = Vec::new();
    let parts = [
        (c.dpdt_relays, "DPDT"),
        (c.spst_relays, "SPST"),
        (c.selection_mosfets, "MOSFET"),
    ];
    for (count, what) in parts {
        if count.eval(n) > 0 {
            formula.push(format!("{count} {what}"));
            value.push(format!("{} {what}", count.eval(n)));
        }
    }
    if value.is_empty() {
        return ("-".into(), "-".into());
    }
    (formula.join(" + "), value.join(" + "))
}

fn show(count: Count, n: usize) -> String {
    count.eval(n).to_string()
}

pub fn dpdt_ratio(n: usize) -> Result<f64, Error> {
    let proposed = component_counts(Topology::Proposed, Realization::Relay, n)?;
    let baseline = component_counts(Topology::Xiong, Realization::Relay, n)?;
    Ok(proposed.dpdt_relays.eval(n) as f64 / baseline.dpdt_relays.eval(n) as f64)
}

pub fn render(n: usize) -> Result<String, Error> {
    let header = [
        "topology",
        "selection (formula)",
        "selection",
        "conv MOSFET",
        "total MOSFET",
        "diodes",
        "caps",
        "inductors",
        "transformers",
        "drivers hf/lf",
        "efficiency %",
        "speed",
        "dV dependent",
    ];
    let mut table: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for c in all_rows(n)? {
        let (formula, value) = selection(&c, n);
        let transformers = match c.transformer_note {
            Some(note) => format!("{} ({note})", show(c.transformers, n)),
            None => show(c.transformers, n),
        };
        table.push(vec![
            c.name(),
            formula,
            value,
            show(c.converter_mosfets, n),
            c.total_mosfets(n).to_string(),
            show(c.diodes, n),
            show(c.capacitors, n),
            show(c.inductors, n),
            transformers,
            c.drivers.map_or("-".into(), |(hf, lf)| {
                format!("{}/{}", hf.eval(n), lf.eval(n))
            }),
            c.efficiency_pct.map_or("-".into(), |(lo, hi)| {
                if lo == hi {
                    format!("{lo}")
                } else {
                    format!("{lo}-{hi}")
                }
            }),
            c.speed.unwrap_or("-").to_string(),
            c.voltage_difference_dependent
                .map_or("-".into(), |b| if b { "yes" } else { "no" }.to_string()),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            table
                .iter()
                .map(|r| r[i].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = format!("n={n}\n");
    for row in &table {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:<w$}"))
            .collect();
        writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
    }
    writeln!(out, "proposed/2n-DPDT relay ratio: {:.2}", dpdt_ratio(n)?).unwrap();
    Ok(out)
}
