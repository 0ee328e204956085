//! Subcommand bodies. Each writes its report to `out` and returns the
//! process exit code; `Err` means a validation or I/O problem (exit 1).

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use cellbal_core::network::{
    resolve_connectivity, verify_baseline, Polarity, PortConnection, PortLink,
};
use cellbal_core::sim::run;
use cellbal_core::{select_pair, verify_netlist, Netlist};

use crate::output::{fmt_g, write_run, SummaryFile};
use crate::sweep::{expand, grid_from_file, parse_grid, point_count, run_sweep};
use crate::{compare, config, netlist_text};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_VERIFY_FAILED: u8 = 2;

fn print_summary(out: &mut dyn Write, s: &SummaryFile) -> Result<()> {
    let sm = &s.summary;
    let conv = sm.convergence_time.map_or("none".into(), fmt_g);
    writeln!(
        out,
        "convergence_time_s={conv} rounds={} max_transitions={} total_transitions={} final_spread_V={}",
        sm.rounds,
        sm.max_switch_transitions,
        sm.total_transitions,
        fmt_g(sm.final_spread_v)
    )?;
    if let Some(t) = s.exhausted_at {
        writeln!(
            out,
            "warning: a cell ran empty at t={} s; run stopped early",
            fmt_g(t)
        )?;
    }
    Ok(())
}

pub fn simulate(
    config_path: &Path,
    out_dir: &Path,
    verbose: bool,
    out: &mut dyn Write,
) -> Result<u8> {
    let cfg = config::load(config_path)?;
    let result = run(&cfg.scenario, &cfg.equalizer, &cfg.converter)?;
    let summary = write_run(&result, &cfg.equalizer, out_dir)?;
    if verbose {
        writeln!(
            out,
            "n={} steps={} dt={} compensation={}",
            cfg.scenario.n(),
            result.telemetry.rows.len(),
            fmt_g(cfg.scenario.dt),
            cfg.equalizer.compensation
        )?;
        writeln!(
            out,
            "energy_out_J={} energy_in_J={} energy_lost_J={}",
            fmt_g(summary.summary.energy_out_j),
            fmt_g(summary.summary.energy_in_j),
            fmt_g(summary.summary.energy_lost_j)
        )?;
    }
    print_summary(out, &summary)?;
    writeln!(out, "wrote {}", out_dir.display())?;
    Ok(EXIT_OK)
}

fn describe(link: Option<PortLink>) -> String {
    match link {
        None => "-".into(),
        Some(PortLink {
            cell,
            polarity: Polarity::Correct,
        }) => format!("cell {cell}"),
        Some(PortLink {
            cell,
            polarity: Polarity::Reversed,
        }) => format!("cell {cell} reversed"),
    }
}

fn pair_line(k: usize, l: usize, c: &PortConnection, ok: bool) -> String {
    let mut line = format!(
        "k={k:<3} l={l:<3} port1={:<16} port2={:<16} {}",
        describe(c.port1),
        describe(c.port2),
        if ok { "ok" } else { "VIOLATION" }
    );
    if !c.faults.is_empty() {
        line.push_str(&format!(" faults={:?}", c.faults));
    }
    line
}

pub fn verify_network(
    n: Option<usize>,
    netlist_path: Option<&Path>,
    baseline: bool,
    verbose: bool,
    out: &mut dyn Write,
) -> Result<u8> {
    if baseline {
        if netlist_path.is_some() {
            bail!("--baseline checks the built-in classic network; drop --netlist");
        }
        let n = n.context("--n is required")?;
        let report = verify_baseline(n)?;
        for v in &report.violations {
            writeln!(out, "{}", pair_line(v.k, v.l, &v.connection, false))?;
        }
        writeln!(
            out,
            "n={} pairs={} violations={}",
            report.n,
            report.pairs,
            report.violations.len()
        )?;
        return Ok(if report.passed() {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        });
    }

    let netlist = match netlist_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let net = netlist_text::parse_netlist(&text)
                .with_context(|| format!("netlist {}", path.display()))?;
            if let Some(n) = n {
                if n != net.n() {
                    bail!(
                        "--n {n} disagrees with `cells {}` in {}",
                        net.n(),
                        path.display()
                    );
                }
            }
            net
        }
        None => Netlist::proposed(n.context("--n or --netlist is required")?)?,
    };
    let report = verify_netlist(&netlist)?;
    if verbose {
        let n = netlist.n();
        for k in 2..=n {
            for l in 1..k {
                let c = resolve_connectivity(&netlist, &select_pair(k, l, n)?.to_bits());
                let ok = !report.violations.iter().any(|v| v.k == k && v.l == l);
                writeln!(out, "{}", pair_line(k, l, &c, ok))?;
            }
        }
    } else {
        for v in &report.violations {
            writeln!(out, "{}", pair_line(v.k, v.l, &v.connection, false))?;
        }
    }
    writeln!(
        out,
        "n={} pairs={} violations={}",
        report.n,
        report.pairs,
        report.violations.len()
    )?;
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

pub fn compare(n: usize, out: &mut dyn Write) -> Result<u8> {
    write!(out, "{}", compare::render(n)?)?;
    Ok(EXIT_OK)
}

pub fn export_netlist(n: usize, out: &mut dyn Write) -> Result<u8> {
    write!(
        out,
        "{}",
        netlist_text::format_netlist(&Netlist::proposed(n)?)
    )?;
    Ok(EXIT_OK)
}

pub fn sweep(
    config_path: &Path,
    grid_path: Option<&Path>,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<u8> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let json = config::is_json(config_path);
    // full parse first so typos in the base file get a precise diagnostic
    let file = config::parse_file_text(&text, json)?;
    let base = config::parse_value(&text, json)?;
    let grid = match grid_path {
        Some(p) => grid_from_file(p)?,
        None => file.grid.clone().unwrap_or_default(),
    };
    let axes = parse_grid(&grid)?;
    if axes.is_empty() {
        return simulate(config_path, out_dir, false, out);
    }
    let count = point_count(&axes)?;
    let points = expand(&base, &axes)?;
    writeln!(out, "running {count} grid points")?;
    let report = run_sweep(&axes, &points, out_dir)?;
    for p in &report.points {
        let params: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let s = &p.summary.summary;
        writeln!(
            out,
            "point {:04} {} convergence_time_s={} max_transitions={}",
            p.index,
            params.join(" "),
            s.convergence_time.map_or("none".into(), fmt_g),
            s.max_switch_transitions
        )?;
    }
    for r in &report.compensation_ratios {
        writeln!(
            out,
            "transition ratio off/on = {} ({} vs {})",
            fmt_g(r.transition_ratio),
            r.max_transitions_off,
            r.max_transitions_on
        )?;
    }
    writeln!(out, "wrote {}", out_dir.display())?;
    Ok(EXIT_OK)
}
