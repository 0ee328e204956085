//! Fixed-step simulation of a series stack with one selection-switch
//! equalizer. Per step: stack load current, controller decision on the
//! measured voltages, converter current superimposed on the selected pair,
//! cell update, telemetry.

mod load;
mod summary;
mod telemetry;

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::cell::{CellParams, CellState, ClampEvent};
use crate::controller::{Controller, EqualizerConfig};
use crate::converter::{capacitor_voltages, ConverterParams};
use crate::network::{SwitchState, TransitionCounter};
use crate::Error;

pub use load::{cv_charge_current, LoadSegment, DEFAULT_CV_GAIN};
pub use summary::{band_excursions, settled_band_fraction, summarize, Excursion, Summary};
pub use telemetry::{ClampRecord, Telemetry, TelemetryRow};

/// Default step, seconds.
pub const DEFAULT_DT: f64 = 0.5;

/// How the cells start. All cells start with a discharged RC branch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum InitialCondition {
    Soc(Vec<f64>),
    /// Rested terminal voltages, inverted through each cell's OCV curve.
    Voltages(Vec<f64>),
    /// Uniform voltages in `center ± spread/2` drawn from the scenario seed;
    /// the extreme cells are then pinned to the interval ends so the
    /// initial spread is exactly `spread`.
    RandomSpread {
        center: f64,
        spread: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub cells: Vec<CellParams>,
    pub initial: InitialCondition,
    pub profile: Vec<LoadSegment>,
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl Scenario {
    pub fn n(&self) -> usize {
        self.cells.len()
    }

    pub fn validate(&self, eq: &EqualizerConfig) -> Result<(), Error> {
        let n = self.n();
        if n < 2 {
            return Err(Error::TooFewCells(n));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if self.dt > eq.time_gap.min(eq.delta_t) / 10.0 + 1e-12 {
            return Err(Error::invalid(
                "dt",
                "must be <= min(time_gap, delta_t) / 10",
            ));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid("duration", "must be > 0"));
        }
        match &self.initial {
            InitialCondition::Soc(v) | InitialCondition::Voltages(v) if v.len() != n => {
                return Err(Error::invalid(
                    "initial condition",
                    "one value per cell is required",
                ));
            }
            InitialCondition::Soc(v) if v.iter().any(|s| !(0.0..=1.0).contains(s)) => {
                return Err(Error::invalid("initial soc", "must lie in [0, 1]"));
            }
            InitialCondition::Voltages(v) if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) => {
                return Err(Error::invalid("initial voltages", "must be > 0"));
            }
            InitialCondition::RandomSpread { center, spread }
                if !(*center > 0.0
                    && *spread >= 0.0
                    && center.is_finite()
                    && spread.is_finite()) =>
            {
                return Err(Error::invalid(
                    "initial spread",
                    "center must be > 0 and spread >= 0",
                ));
            }
            _ => {}
        }
        for seg in &self.profile {
            seg.validate()?;
        }
        Ok(())
    }

    /// Initial rested terminal voltages, before OCV inversion.
    pub fn initial_voltages(&self) -> Option<Vec<f64>> {
        match &self.initial {
            InitialCondition::Soc(_) => None,
            InitialCondition::Voltages(v) => Some(v.clone()),
            InitialCondition::RandomSpread { center, spread } => {
                let n = self.n();
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let lo = center - spread / 2.0;
                let mut v: Vec<f64> = (0..n).map(|_| lo + spread * unit_f64(&mut rng)).collect();
                let imax = (0..n).fold(0, |a, i| if v[i] > v[a] { i } else { a });
                let imin = (0..n).fold(if imax == 0 { 1 } else { 0 }, |a, i| {
                    if i != imax && v[i] < v[a] {
                        i
                    } else {
                        a
                    }
                });
                v[imax] = lo + spread;
                v[imin] = lo;
                Some(v)
            }
        }
    }

    pub fn initial_states(&self) -> Vec<CellState> {
        match (&self.initial, self.initial_voltages()) {
            (InitialCondition::Soc(s), _) => s.iter().map(|&s| CellState::rested(s)).collect(),
            (_, Some(v)) => self
                .cells
                .iter()
                .zip(v)
                .map(|(p, v)| CellState::at_voltage(p, v))
                .collect(),
            (_, None) => unreachable!("non-soc initial conditions yield voltages"),
        }
    }

    /// Number of steps a full run records.
    pub fn steps(&self) -> usize {
        libm::ceil(self.duration / self.dt - 1e-9) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub telemetry: Telemetry,
    pub summary: Summary,
    pub final_states: Vec<CellState>,
}

pub fn run(
    scenario: &Scenario,
    equalizer: &EqualizerConfig,
    converter: &ConverterParams,
) -> Result<RunOutput, Error> {
    scenario.validate(equalizer)?;
    let n = scenario.n();
    let dt = scenario.dt;
    let cells = &scenario.cells;
    let mut states = scenario.initial_states();
    let mut controller = Controller::new(n, equalizer.clone())?;
    let mut profile = load::ProfileCursor::new(&scenario.profile);
    let mut counter = TransitionCounter::new(n);
    let mut switches = SwitchState::all_off(n);
    let mut currents = vec![0.0; n];
    let steps = scenario.steps();
    let mut telemetry = Telemetry {
        n,
        dt,
        rows: Vec::with_capacity(steps),
        clamps: Vec::new(),
        exhausted: None,
    };

    for step in 0..steps {
        let t = step as f64 * dt;
        let voltages: Vec<f64> = states
            .iter()
            .zip(cells)
            .zip(&currents)
            .map(|((s, p), &i)| s.terminal_voltage(p, i))
            .collect();

        let i_stack = profile.current(&voltages, dt);
        let cmd = controller.step(&voltages, dt)?;
        debug_assert!(cmd.switches == switches || !cmd.converter_on);
        counter.record(&switches, &cmd.switches);
        switches = cmd.switches;

        currents.iter_mut().for_each(|c| *c = i_stack);
        let mut row = TelemetryRow {
            t,
            voltages,
            i_stack,
            segment: profile.segment_index(),
            source: cmd.pair.map(|p| p.source),
            sink: cmd.pair.map(|p| p.sink),
            converter_on: cmd.converter_on,
            i_src: 0.0,
            i_sink: 0.0,
            p_loss: 0.0,
            phase: controller.state().phase,
            v_c1: None,
            v_c2: None,
            transitions: Vec::new(),
        };
        if let Some(pair) = cmd.pair {
            let (k, l) = (pair.source.max(pair.sink), pair.source.min(pair.sink));
            let (c1, c2) = capacitor_voltages(k, l, &row.voltages)?;
            row.v_c1 = Some(c1);
            row.v_c2 = Some(c2);
            if cmd.converter_on {
                let tr = converter
                    .transfer(row.voltages[pair.source - 1], row.voltages[pair.sink - 1])?;
                currents[pair.source - 1] -= tr.i_src;
                currents[pair.sink - 1] += tr.i_sink;
                row.i_src = tr.i_src;
                row.i_sink = tr.i_sink;
                row.p_loss = tr.p_loss;
            }
        }
        row.transitions = counter.counts().to_vec();
        telemetry.rows.push(row);

        for (j, (state, p)) in states.iter_mut().zip(cells).enumerate() {
            let (next, event) = state.step(p, currents[j], dt);
            *state = next;
            if let Some(event) = event {
                let rec = ClampRecord {
                    t: t + dt,
                    cell: j + 1,
                    event,
                };
                telemetry.clamps.push(rec);
                if matches!(event, ClampEvent::Empty { .. }) && telemetry.exhausted.is_none() {
                    telemetry.exhausted = Some(rec);
                }
            }
        }
        if telemetry.exhausted.is_some() {
            break;
        }
    }

    let summary = summarize(&telemetry, equalizer);
    Ok(RunOutput {
        telemetry,
        summary,
        final_states: states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rest_scenario(initial: InitialCondition, duration: f64) -> Scenario {
        Scenario {
            cells: vec![CellParams::reference(); 8],
            initial,
            profile: vec![LoadSegment::Rest { duration }],
            dt: DEFAULT_DT,
            duration,
            seed: 7,
        }
    }

    #[test]
    fn equal_cells_do_nothing() {
        let sc = rest_scenario(InitialCondition::Voltages(vec![3.6; 8]), 600.0);
        let out = run(
            &sc,
            &EqualizerConfig::reference(),
            &ConverterParams::reference(),
        )
        .unwrap();
        assert_eq!(out.summary.rounds, 0);
        assert_eq!(out.summary.total_transitions, 0);
        assert_eq!(out.summary.convergence_time, Some(0.0));
        assert!(out.summary.final_spread_v < 1e-12);
        assert_eq!(out.telemetry.rows.len(), 1200);
    }

    #[test]
    fn rejects_coarse_dt() {
        let mut sc = rest_scenario(InitialCondition::Voltages(vec![3.6; 8]), 600.0);
        sc.dt = 5.0;
        assert!(run(
            &sc,
            &EqualizerConfig::reference(),
            &ConverterParams::reference()
        )
        .is_err());
        sc.dt = 0.0;
        assert!(run(
            &sc,
            &EqualizerConfig::reference(),
            &ConverterParams::reference()
        )
        .is_err());
    }

    #[test]
    fn random_spread_is_exact_and_seeded() {
        let sc = rest_scenario(
            InitialCondition::RandomSpread {
                center: 3.6,
                spread: 0.2,
            },
            10.0,
        );
        let v = sc.initial_voltages().unwrap();
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - min - 0.2).abs() < 1e-12);
        assert_eq!(v, sc.initial_voltages().unwrap());
        let mut other = sc.clone();
        other.seed = 8;
        assert_ne!(v, other.initial_voltages().unwrap());
    }

    #[test]
    fn step_count_rounds_up() {
        let sc = rest_scenario(InitialCondition::Voltages(vec![3.6; 8]), 10.2);
        assert_eq!(sc.steps(), 21);
    }
}
