//! Scenario files.
//!
//! TOML, or JSON with the same structure when the file ends in `.json`.
//! Units: volts, amperes, ohms, farads, ampere-hours, watts, seconds.
//! Unknown keys are rejected.
//!
//! ```toml
//! [stack]
//! n = 8
//!
//! [cells]                       # scalar, or one value per cell
//! capacity = 2.6                # Ah
//! r0 = 0.06                     # ohm
//! r1 = 0.03                     # ohm
//! c1 = 500.0                    # F
//! ocv = [[0.0, 3.0], [0.2, 3.4], [0.9, 3.8], [1.0, 4.1]]
//! initial_voltages = [3.55, 3.62, 3.50, 3.60, 3.58, 3.65, 3.70, 3.57]
//! # or: initial_soc = [...], or: initial_spread = { center = 3.6, spread = 0.2 }
//!
//! [equalizer]
//! v_tol = 0.01                  # V, half-width of the band
//! delta_t = 20.0                # s
//! time_gap = 20.0               # s
//! compensation = true
//! max_round_duration = 600.0    # s
//!
//! [converter]
//! i_eq = 0.5                    # A, also accepted under [equalizer]
//! rated_power = 2.0             # W
//! eff_curve = [[0.2, 0.905], [0.9, 0.929], [2.0, 0.901]]   # (W out, efficiency)
//!
//! [[profile]]
//! kind = "rest"                 # rest | cc | cv | steps
//! duration = 3600.0
//!
//! [sim]
//! dt = 0.5
//! duration = 14400.0
//! seed = 1
//! ```

use std::fmt;
use std::path::Path;

use cellbal_core::sim::{InitialCondition, LoadSegment, Scenario, DEFAULT_CV_GAIN, DEFAULT_DT};
use cellbal_core::{CellParams, ConverterParams, EqualizerConfig};
use serde::{Deserialize, Serialize};

/// A problem with the file, tied to the key that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.reason)
        } else {
            write!(f, "{}: {}", self.key, self.reason)
        }
    }
}

impl std::error::Error for ConfigError {}

fn bad(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerCell {
    All(f64),
    Each(Vec<f64>),
}

impl PerCell {
    fn resolve(&self, n: usize, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self {
            PerCell::All(x) => Ok(vec![*x; n]),
            PerCell::Each(v) if v.len() == n => Ok(v.clone()),
            PerCell::Each(v) => Err(bad(
                key,
                format!("expected 1 or {n} values, got {}", v.len()),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSection {
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadSection {
    pub center: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellsSection {
    pub capacity: Option<PerCell>,
    pub r0: Option<PerCell>,
    pub r1: Option<PerCell>,
    pub c1: Option<PerCell>,
    pub ocv: Option<Vec<[f64; 2]>>,
    pub initial_voltages: Option<Vec<f64>>,
    pub initial_soc: Option<Vec<f64>>,
    pub initial_spread: Option<SpreadSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EqualizerSection {
    pub v_tol: Option<f64>,
    pub delta_t: Option<f64>,
    pub time_gap: Option<f64>,
    pub compensation: Option<bool>,
    pub max_round_duration: Option<f64>,
    pub i_eq: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverterSection {
    pub i_eq: Option<f64>,
    pub rated_power: Option<f64>,
    pub eff_curve: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileEntry {
    Rest {
        duration: f64,
    },
    /// Positive current charges the stack.
    Cc {
        current: f64,
        duration: Option<f64>,
        cell_voltage_limit: Option<f64>,
    },
    Cv {
        cell_setpoint: f64,
        current_limit: f64,
        cutoff_current: f64,
        gain: Option<f64>,
        duration: Option<f64>,
    },
    /// `steps = [[start_s, current_A], ...]`, starts relative to the segment.
    Steps {
        steps: Vec<[f64; 2]>,
        duration: f64,
    },
}

impl ProfileEntry {
    fn to_segment(&self) -> LoadSegment {
        match self {
            ProfileEntry::Rest { duration } => LoadSegment::Rest {
                duration: *duration,
            },
            ProfileEntry::Cc {
                current,
                duration,
                cell_voltage_limit,
            } => LoadSegment::ConstantCurrent {
                current: *current,
                duration: *duration,
                cell_voltage_limit: *cell_voltage_limit,
            },
            ProfileEntry::Cv {
                cell_setpoint,
                current_limit,
                cutoff_current,
                gain,
                duration,
            } => LoadSegment::ConstantVoltage {
                cell_setpoint: *cell_setpoint,
                current_limit: *current_limit,
                cutoff_current: *cutoff_current,
                gain: gain.unwrap_or(DEFAULT_CV_GAIN),
                duration: *duration,
            },
            ProfileEntry::Steps { steps, duration } => LoadSegment::StepSchedule {
                steps: steps.iter().map(|&[t, i]| (t, i)).collect(),
                duration: *duration,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: Option<f64>,
    pub duration: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub stack: StackSection,
    #[serde(default)]
    pub cells: CellsSection,
    #[serde(default)]
    pub equalizer: EqualizerSection,
    #[serde(default)]
    pub converter: ConverterSection,
    #[serde(default)]
    pub profile: Vec<ProfileEntry>,
    pub sim: SimSection,
    /// Parameter grid, only read by `sweep`.
    pub grid: Option<toml::Table>,
}

/// Everything a run needs, validated.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub equalizer: EqualizerConfig,
    pub converter: ConverterParams,
}

pub fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Parse a file's text into a generic value tree (used for grid expansion).
pub fn parse_value(text: &str, json: bool) -> Result<toml::Table, ConfigError> {
    if json {
        serde_json::from_str(text).map_err(|e| bad("", format!("JSON parse error: {e}")))
    } else {
        toml::from_str(text).map_err(|e| bad("", format!("TOML parse error: {e}")))
    }
}

pub fn parse_file_text(text: &str, json: bool) -> Result<RunConfigFile, ConfigError> {
    if json {
        serde_json::from_str(text).map_err(|e| bad("", format!("JSON parse error: {e}")))
    } else {
        toml::from_str(text).map_err(|e| bad("", format!("TOML parse error: {e}")))
    }
}

pub fn from_table(table: toml::Table) -> Result<RunConfigFile, ConfigError> {
    RunConfigFile::deserialize(toml::Value::Table(table)).map_err(|e| bad("", format!("{e}")))
}

pub fn load_file(path: &Path) -> Result<RunConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad("", format!("cannot read {}: {e}", path.display())))?;
    parse_file_text(&text, is_json(path))
}

fn positive(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, format!("must be > 0, got {x}")))
    }
}

impl RunConfigFile {
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let n = self.stack.n;
        if n < 2 {
            return Err(bad("[stack].n", "at least two cells are required"));
        }

        let reference = CellParams::reference();
        let c = &self.cells;
        let per_cell =
            |v: &Option<PerCell>, default: f64, key: &str| -> Result<Vec<f64>, ConfigError> {
                v.as_ref()
                    .map_or(Ok(vec![default; n]), |p| p.resolve(n, key))
            };
        let caps = per_cell(&c.capacity, reference.capacity_ah, "[cells].capacity")?;
        let r0s = per_cell(&c.r0, reference.r0, "[cells].r0")?;
        let r1s = per_cell(&c.r1, reference.r1, "[cells].r1")?;
        let c1s = per_cell(&c.c1, reference.c1, "[cells].c1")?;
        let ocv: Vec<(f64, f64)> = match &c.ocv {
            Some(points) => points.iter().map(|&[s, v]| (s, v)).collect(),
            None => reference.ocv_curve().points().to_vec(),
        };
        let mut cells = Vec::with_capacity(n);
        for j in 0..n {
            positive("[cells].capacity", caps[j])?;
            if !(r0s[j] >= 0.0 && r0s[j].is_finite()) {
                return Err(bad("[cells].r0", format!("must be >= 0, got {}", r0s[j])));
            }
            positive("[cells].r1", r1s[j])?;
            positive("[cells].c1", c1s[j])?;
            let p = CellParams::new(caps[j], r0s[j], r1s[j], c1s[j], ocv.clone())
                .map_err(|e| bad("[cells].ocv", e.to_string()))?;
            cells.push(p);
        }

        let initial = match (&c.initial_voltages, &c.initial_soc, &c.initial_spread) {
            (Some(v), None, None) => {
                if v.len() != n {
                    return Err(bad(
                        "[cells].initial_voltages",
                        format!("expected {n} values, got {}", v.len()),
                    ));
                }
                for &x in v {
                    positive("[cells].initial_voltages", x)?;
                }
                InitialCondition::Voltages(v.clone())
            }
            (None, Some(s), None) => {
                if s.len() != n {
                    return Err(bad(
                        "[cells].initial_soc",
                        format!("expected {n} values, got {}", s.len()),
                    ));
                }
                if s.iter().any(|x| !(0.0..=1.0).contains(x)) {
                    return Err(bad("[cells].initial_soc", "values must lie in [0, 1]"));
                }
                InitialCondition::Soc(s.clone())
            }
            (None, None, Some(sp)) => {
                positive("[cells].initial_spread.center", sp.center)?;
                if !(sp.spread >= 0.0 && sp.spread.is_finite()) {
                    return Err(bad("[cells].initial_spread.spread", "must be >= 0"));
                }
                InitialCondition::RandomSpread {
                    center: sp.center,
                    spread: sp.spread,
                }
            }
            _ => {
                return Err(bad(
                    "[cells]",
                    "give exactly one of initial_voltages, initial_soc, initial_spread",
                ))
            }
        };

        let e = &self.equalizer;
        let defaults = EqualizerConfig::reference();
        let equalizer = EqualizerConfig {
            v_tol: positive("[equalizer].v_tol", e.v_tol.unwrap_or(defaults.v_tol))?,
            delta_t: positive("[equalizer].delta_t", e.delta_t.unwrap_or(defaults.delta_t))?,
            time_gap: positive(
                "[equalizer].time_gap",
                e.time_gap.unwrap_or(defaults.time_gap),
            )?,
            compensation: e.compensation.unwrap_or(defaults.compensation),
            max_round_duration: positive(
                "[equalizer].max_round_duration",
                e.max_round_duration.unwrap_or(defaults.max_round_duration),
            )?,
        };
        if equalizer.max_round_duration < equalizer.delta_t {
            return Err(bad("[equalizer].max_round_duration", "must be >= delta_t"));
        }

        let conv_ref = ConverterParams::reference();
        let i_eq = match (self.converter.i_eq, e.i_eq) {
            (Some(a), Some(b)) if a != b => {
                return Err(bad(
                    "[equalizer].i_eq",
                    format!("disagrees with [converter].i_eq ({b} vs {a})"),
                ))
            }
            (Some(a), _) => positive("[converter].i_eq", a)?,
            (None, Some(b)) => positive("[equalizer].i_eq", b)?,
            (None, None) => conv_ref.i_eq,
        };
        let rated_power = positive(
            "[converter].rated_power",
            self.converter.rated_power.unwrap_or(conv_ref.rated_power),
        )?;
        let eff: Vec<(f64, f64)> = match &self.converter.eff_curve {
            Some(points) => points.iter().map(|&[p, e]| (p, e)).collect(),
            None => conv_ref.eff_curve().points().to_vec(),
        };
        let converter = ConverterParams::new(i_eq, rated_power, eff)
            .map_err(|e| bad("[converter].eff_curve", e.to_string()))?;

        let mut profile = Vec::with_capacity(self.profile.len());
        for (i, entry) in self.profile.iter().enumerate() {
            let seg = entry.to_segment();
            seg.validate()
                .map_err(|e| bad(format!("[[profile]] #{}", i + 1), e.to_string()))?;
            profile.push(seg);
        }

        let dt = self.sim.dt.unwrap_or(DEFAULT_DT);
        positive("[sim].dt", dt)?;
        let limit = equalizer.time_gap.min(equalizer.delta_t) / 10.0;
        if dt > limit + 1e-12 {
            return Err(bad(
                "[sim].dt",
                format!("must be <= min(time_gap, delta_t)/10 = {limit}, got {dt}"),
            ));
        }
        let duration = positive("[sim].duration", self.sim.duration)?;

        let scenario = Scenario {
            cells,
            initial,
            profile,
            dt,
            duration,
            seed: self.sim.seed.unwrap_or(0),
        };
        scenario
            .validate(&equalizer)
            .map_err(|e| bad("", e.to_string()))?;
        Ok(RunConfig {
            scenario,
            equalizer,
            converter,
        })
    }
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    load_file(path)?.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[stack]
n = 3
[cells]
initial_voltages = [3.6, 3.65, 3.5]
[sim]
duration = 100.0
"#;

    fn key_of(text: &str) -> String {
        parse_file_text(text, false)
            .unwrap()
            .resolve()
            .unwrap_err()
            .key
    }

    #[test]
    fn minimal_file_uses_reference_values() {
        let cfg = parse_file_text(MINIMAL, false).unwrap().resolve().unwrap();
        assert_eq!(cfg.scenario.dt, 0.5);
        assert_eq!(cfg.scenario.cells[0], CellParams::reference());
        assert_eq!(cfg.equalizer, EqualizerConfig::reference());
        assert_eq!(cfg.converter, ConverterParams::reference());
    }

    #[test]
    fn bad_values_name_their_key() {
        assert_eq!(
            key_of(&MINIMAL.replace("duration = 100.0", "duration = 100.0\ndt = 0")),
            "[sim].dt"
        );
        assert_eq!(
            key_of(&MINIMAL.replace("duration = 100.0", "duration = 100.0\ndt = 5.0")),
            "[sim].dt"
        );
        assert_eq!(
            key_of(&MINIMAL.replace("duration = 100.0", "duration = -1.0")),
            "[sim].duration"
        );
        assert_eq!(
            key_of(&MINIMAL.replace("[sim]", "r0 = [0.1, 0.1]\n[sim]")),
            "[cells].r0"
        );
        assert_eq!(
            key_of(&format!("{MINIMAL}[equalizer]\nv_tol = 0.0\n")),
            "[equalizer].v_tol"
        );
        assert_eq!(
            key_of(&format!(
                "{MINIMAL}[equalizer]\ni_eq = 0.4\n[converter]\ni_eq = 0.5\n"
            )),
            "[equalizer].i_eq"
        );
        assert_eq!(
            key_of(&format!(
                "{MINIMAL}[[profile]]\nkind = \"rest\"\nduration = 0.0\n"
            )),
            "[[profile]] #1"
        );
        assert_eq!(key_of(&MINIMAL.replace("n = 3", "n = 1")), "[stack].n");
        assert_eq!(
            key_of(&MINIMAL.replace("initial_voltages = [3.6, 3.65, 3.5]", "")),
            "[cells]"
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse_file_text(
            &MINIMAL.replace("duration = 100.0", "duration = 100.0\nbogus = 1"),
            false,
        )
        .unwrap_err();
        assert!(e.reason.contains("bogus"), "{e}");
        let e = parse_file_text(
            &format!("{MINIMAL}[[profile]]\nkind = \"rest\"\nduration = 1.0\nextra = 2\n"),
            false,
        )
        .unwrap_err();
        assert!(e.reason.contains("extra"), "{e}");
    }

    #[test]
    fn equalizer_alias_for_i_eq() {
        let cfg = parse_file_text(&format!("{MINIMAL}[equalizer]\ni_eq = 0.4\n"), false)
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(cfg.converter.i_eq, 0.4);
    }

    #[test]
    fn json_encoding_matches_toml() {
        let json = r#"{"stack": {"n": 3}, "cells": {"initial_voltages": [3.6, 3.65, 3.5]}, "sim": {"duration": 100.0}}"#;
        let a = parse_file_text(json, true).unwrap().resolve().unwrap();
        let b = parse_file_text(MINIMAL, false).unwrap().resolve().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn per_cell_lists_and_profiles() {
        let text = r#"
[stack]
n = 2
[cells]
capacity = [2.5, 2.7]
initial_spread = { center = 3.6, spread = 0.1 }
[[profile]]
kind = "cc"
current = -1.3
cell_voltage_limit = 3.0
[[profile]]
kind = "cv"
cell_setpoint = 4.0
current_limit = 1.3
cutoff_current = 0.13
[[profile]]
kind = "steps"
steps = [[0.0, -0.5], [60.0, -1.0]]
duration = 120.0
[sim]
duration = 10.0
seed = 4
"#;
        let cfg = parse_file_text(text, false).unwrap().resolve().unwrap();
        assert_eq!(cfg.scenario.cells[1].capacity_ah, 2.7);
        assert_eq!(cfg.scenario.profile.len(), 3);
        assert!(
            matches!(cfg.scenario.profile[1], LoadSegment::ConstantVoltage { gain, .. } if gain == DEFAULT_CV_GAIN)
        );
        assert_eq!(cfg.scenario.seed, 4);
    }
}
