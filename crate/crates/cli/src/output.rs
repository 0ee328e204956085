//! Telemetry CSV and summary JSON.
//!
//! CSV columns, in order: `t_s`, `vb_1..vb_n`, `i_stack_A`, `src_idx`,
//! `sink_idx`, `i_src_A`, `i_sink_A`, `phase`, `vc1_V`, `vc2_V`, then one
//! cumulative transition count per switch (`trans_S1..trans_Sn`,
//! `trans_POL1`, `trans_POL2`, `trans_SHORT_A`, `trans_SHORT_B`). Cell
//! indices are 1-based with 0 meaning no active pair; capacitor voltages are
//! empty when no pair is selected. Floats use 6 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use cellbal_core::network::switch_names;
use cellbal_core::sim::{band_excursions, settled_band_fraction, Excursion, RunOutput, Summary};
use cellbal_core::EqualizerConfig;
use serde::Serialize;

/// `%g`-style rendering with 6 significant digits: fixed notation for
/// decimal exponents in [-4, 6), scientific otherwise, trailing zeros cut.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["t_s".to_string()];
    h.extend((1..=n).map(|j| format!("vb_{j}")));
    h.extend(
        [
            "i_stack_A",
            "src_idx",
            "sink_idx",
            "i_src_A",
            "i_sink_A",
            "phase",
            "vc1_V",
            "vc2_V",
        ]
        .map(String::from),
    );
    h.extend(switch_names(n).into_iter().map(|s| format!("trans_{s}")));
    h
}

pub fn write_csv<W: Write>(out: &RunOutput, sink: W) -> Result<()> {
    let tel = &out.telemetry;
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(csv_header(tel.n))?;
    let mut rec: Vec<String> = Vec::new();
    for row in &tel.rows {
        rec.clear();
        rec.push(fmt_g(row.t));
        rec.extend(row.voltages.iter().map(|&v| fmt_g(v)));
        rec.push(fmt_g(row.i_stack));
        rec.push(row.source.unwrap_or(0).to_string());
        rec.push(row.sink.unwrap_or(0).to_string());
        rec.push(fmt_g(row.i_src));
        rec.push(fmt_g(row.i_sink));
        rec.push(row.phase.as_str().to_string());
        rec.push(row.v_c1.map(fmt_g).unwrap_or_default());
        rec.push(row.v_c2.map(fmt_g).unwrap_or_default());
        rec.extend(row.transitions.iter().map(|c| c.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryFile {
    pub n: usize,
    pub dt: f64,
    pub compensation: bool,
    #[serde(flatten)]
    pub summary: Summary,
    /// Share of settled samples in band after the band is first reached.
    pub settled_band_fraction: Option<f64>,
    pub excursions: Vec<Excursion>,
    pub clamp_events: usize,
    /// Time at which a cell ran empty and the run stopped.
    pub exhausted_at: Option<f64>,
}

impl SummaryFile {
    pub fn new(out: &RunOutput, eq: &EqualizerConfig) -> Self {
        SummaryFile {
            n: out.telemetry.n,
            dt: out.telemetry.dt,
            compensation: eq.compensation,
            summary: out.summary.clone(),
            settled_band_fraction: settled_band_fraction(&out.telemetry, eq),
            excursions: band_excursions(&out.telemetry, eq),
            clamp_events: out.telemetry.clamps.len(),
            exhausted_at: out.telemetry.exhausted.map(|c| c.t),
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Writes `telemetry.csv` and `summary.json` into `dir`.
pub fn write_run(out: &RunOutput, eq: &EqualizerConfig, dir: &Path) -> Result<SummaryFile> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join("telemetry.csv");
    let file =
        fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    write_csv(out, std::io::BufWriter::new(file))?;
    let summary = SummaryFile::new(out, eq);
    write_json(&summary, &dir.join("summary.json"))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(3.6), "3.6");
        assert_eq!(fmt_g(3.61234567), "3.61235");
        assert_eq!(fmt_g(-0.5), "-0.5");
        assert_eq!(fmt_g(14400.0), "14400");
        assert_eq!(fmt_g(123456.7), "123457");
        assert_eq!(fmt_g(1234567.0), "1.23457e+06");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(0.00001234), "1.234e-05");
        assert_eq!(fmt_g(9.9999996), "10");
        assert_eq!(fmt_g(999999.6), "1e+06");
    }

    #[test]
    fn header_layout() {
        let h = csv_header(2);
        assert_eq!(h[0], "t_s");
        assert_eq!(&h[1..3], ["vb_1", "vb_2"]);
        assert_eq!(h[3], "i_stack_A");
        assert_eq!(h.last().unwrap(), "trans_SHORT_B");
        assert_eq!(h.len(), 1 + 2 + 8 + 6);
    }
}
