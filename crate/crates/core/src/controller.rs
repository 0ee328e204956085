//! Voltage-band equalization controller with recovery compensation.
//!
//! A round: pick the highest and lowest cell, close the selection switches
//! with the converter off, run the converter for `delta_t` and store the
//! voltage step of each selected cell as `v_imp`, keep transferring until a
//! cell crosses `v_avg ∓ v_imp`, open everything and wait `time_gap` before
//! looking again.

use alloc::vec::Vec;

use crate::network::{select_pair, SwitchState};
use crate::Error;

// absorbs accumulated rounding in phase timers
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EqualizerConfig {
    /// Half-width of the acceptance band around the mean, volts.
    pub v_tol: f64,
    /// Wait after current start before sampling `v_imp`, seconds.
    pub delta_t: f64,
    /// Converter-off settling time between rounds, seconds.
    pub time_gap: f64,
    pub compensation: bool,
    /// Hard cap on converter-on time per round, seconds.
    pub max_round_duration: f64,
}

impl EqualizerConfig {
    pub fn new(
        v_tol: f64,
        delta_t: f64,
        time_gap: f64,
        compensation: bool,
        max_round_duration: f64,
    ) -> Result<Self, Error> {
        let cfg = EqualizerConfig {
            v_tol,
            delta_t,
            time_gap,
            compensation,
            max_round_duration,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.v_tol) {
            return Err(Error::invalid("v_tol", "must be > 0"));
        }
        if !positive(self.delta_t) {
            return Err(Error::invalid("delta_t", "must be > 0"));
        }
        if !positive(self.time_gap) {
            return Err(Error::invalid("time_gap", "must be > 0"));
        }
        if !(self.max_round_duration >= self.delta_t && self.max_round_duration.is_finite()) {
            return Err(Error::invalid(
                "max_round_duration",
                "must be finite and >= delta_t",
            ));
        }
        Ok(())
    }

    /// ±10 mV band (20 mV wide), 20 s `v_imp` wait, 20 s settling gap,
    /// compensation on, 600 s round cap.
    pub fn reference() -> Self {
        EqualizerConfig {
            v_tol: 0.010,
            delta_t: 20.0,
            time_gap: 20.0,
            compensation: true,
            max_round_duration: 600.0,
        }
    }
}

/// Mean voltage and the 1-based indices of cells outside `mean ± v_tol`.
pub fn check_band(voltages: &[f64], v_tol: f64) -> (f64, Vec<usize>) {
    let v_avg = voltages.iter().sum::<f64>() / voltages.len() as f64;
    let out = voltages
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < v_avg - v_tol || v > v_avg + v_tol)
        .map(|(i, _)| i + 1)
        .collect();
    (v_avg, out)
}

/// `(argmax, argmin)` as 1-based cell indices; ties go to the lower index.
pub fn choose_pair(voltages: &[f64]) -> Result<(usize, usize), Error> {
    if voltages.len() < 2 {
        return Err(Error::TooFewCells(voltages.len()));
    }
    let mut hi = 0;
    let mut lo = 0;
    for (i, &v) in voltages.iter().enumerate() {
        if v > voltages[hi] {
            hi = i;
        }
        if v < voltages[lo] {
            lo = i;
        }
    }
    if voltages[hi] == voltages[lo] {
        return Err(Error::NoPair);
    }
    Ok((hi + 1, lo + 1))
}

/// Magnitude of the voltage step over the `v_imp` window.
pub fn measure_vimp(v_start: f64, v_after_delta_t: f64) -> f64 {
    (v_after_delta_t - v_start).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Over-charged cell being discharged.
    Source,
    /// Under-charged cell being charged.
    Sink,
}

/// Voltage at which a round stops for a cell in `role`. Without
/// compensation the estimate is ignored and the target is `v_avg` itself.
pub fn stop_threshold(role: Role, v_avg: f64, v_imp: f64, compensation: bool) -> f64 {
    let v_imp = if compensation { v_imp } else { 0.0 };
    match role {
        Role::Sink => v_avg + v_imp,
        Role::Source => v_avg - v_imp,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Phase {
    Idle,
    Settling,
    MeasuringVimp,
    Equalizing,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Idle => "idle",
            Phase::Settling => "settling",
            Phase::MeasuringVimp => "measuring_vimp",
            Phase::Equalizing => "equalizing",
        }
    }
}

/// Source and sink cells of the running round (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActivePair {
    pub source: usize,
    pub sink: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub phase: Phase,
    pub active_pair: Option<ActivePair>,
    /// Band centre captured when the round was started.
    pub v_avg: f64,
    /// `[source, sink]` voltages at current start.
    pub v_start: [f64; 2],
    /// `[source, sink]` last measured recovery estimates.
    pub v_imp: Option<[f64; 2]>,
    /// Time spent in the current phase.
    pub phase_time: f64,
    /// Converter-on time of the current round.
    pub round_time: f64,
    /// Time since the switch state last changed.
    pub since_switch: f64,
    pub switches: SwitchState,
    pub rounds: u64,
}

impl ControllerState {
    pub fn new(n: usize) -> Self {
        ControllerState {
            phase: Phase::Idle,
            active_pair: None,
            v_avg: 0.0,
            v_start: [0.0; 2],
            v_imp: None,
            phase_time: 0.0,
            round_time: 0.0,
            since_switch: f64::INFINITY,
            switches: SwitchState::all_off(n),
            rounds: 0,
        }
    }
}

/// What the controller asks of the hardware for the coming step.
#[derive(Debug, Clone, PartialEq)]
pub struct Commands {
    pub switches: SwitchState,
    pub converter_on: bool,
    pub pair: Option<ActivePair>,
    /// `[source, sink]` stop thresholds while equalizing.
    pub thresholds: Option<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct Controller {
    config: EqualizerConfig,
    state: ControllerState,
}

impl Controller {
    pub fn new(n: usize, config: EqualizerConfig) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::TooFewCells(n));
        }
        config.validate()?;
        Ok(Controller {
            config,
            state: ControllerState::new(n),
        })
    }

    pub fn config(&self) -> &EqualizerConfig {
        &self.config
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    fn thresholds(&self) -> Option<[f64; 2]> {
        let v_imp = self.state.v_imp?;
        let c = self.config.compensation;
        Some([
            stop_threshold(Role::Source, self.state.v_avg, v_imp[0], c),
            stop_threshold(Role::Sink, self.state.v_avg, v_imp[1], c),
        ])
    }

    fn enter(&mut self, phase: Phase) {
        self.state.phase = phase;
        self.state.phase_time = 0.0;
    }

    fn set_switches(&mut self, next: SwitchState) {
        if next != self.state.switches {
            self.state.switches = next;
            self.state.since_switch = 0.0;
        }
    }

    /// One control period of `dt` seconds on the latest voltage sample.
    pub fn step(&mut self, voltages: &[f64], dt: f64) -> Result<Commands, Error> {
        let n = self.state.switches.n();
        if voltages.len() != n {
            return Err(Error::invalid(
                "measurement",
                "one voltage per cell is required",
            ));
        }
        if voltages.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("measurement", "voltages must be finite"));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }

        if self.state.phase == Phase::Settling
            && self.state.phase_time + TIME_EPS >= self.config.time_gap
        {
            self.enter(Phase::Idle);
        }

        let mut converter_on = false;
        match self.state.phase {
            Phase::Idle => {
                let (v_avg, out) = check_band(voltages, self.config.v_tol);
                if !out.is_empty() {
                    let (source, sink) = choose_pair(voltages)?;
                    let (k, l) = if source > sink {
                        (source, sink)
                    } else {
                        (sink, source)
                    };
                    self.set_switches(select_pair(k, l, n)?);
                    self.state.active_pair = Some(ActivePair { source, sink });
                    self.state.v_avg = v_avg;
                    self.state.v_start = [voltages[source - 1], voltages[sink - 1]];
                    self.state.round_time = 0.0;
                    self.state.rounds += 1;
                    self.enter(Phase::MeasuringVimp);
                }
            }
            Phase::MeasuringVimp => {
                let pair = self.state.active_pair.expect("pair set while measuring");
                if self.state.round_time + TIME_EPS >= self.config.delta_t {
                    self.state.v_imp = Some([
                        measure_vimp(self.state.v_start[0], voltages[pair.source - 1]),
                        measure_vimp(self.state.v_start[1], voltages[pair.sink - 1]),
                    ]);
                    self.enter(Phase::Equalizing);
                    converter_on = self.equalize(voltages, pair);
                } else {
                    converter_on = true;
                }
            }
            Phase::Equalizing => {
                let pair = self.state.active_pair.expect("pair set while equalizing");
                converter_on = self.equalize(voltages, pair);
            }
            Phase::Settling => {}
        }

        let commands = Commands {
            switches: self.state.switches.clone(),
            converter_on,
            pair: self.state.active_pair,
            thresholds: if self.state.phase == Phase::Equalizing {
                self.thresholds()
            } else {
                None
            },
        };

        self.state.phase_time += dt;
        self.state.since_switch += dt;
        if converter_on {
            self.state.round_time += dt;
        }
        Ok(commands)
    }

    /// Decide whether the round keeps going; on stop, open every switch and
    /// start settling.
    fn equalize(&mut self, voltages: &[f64], pair: ActivePair) -> bool {
        let [src_stop, sink_stop] = self.thresholds().expect("v_imp measured");
        let reached = voltages[pair.source - 1] <= src_stop || voltages[pair.sink - 1] >= sink_stop;
        let timed_out = self.state.round_time + TIME_EPS >= self.config.max_round_duration;
        let dwell_ok = self.state.since_switch + TIME_EPS >= self.config.time_gap;
        if (reached || timed_out) && dwell_ok {
            self.set_switches(SwitchState::all_off(voltages.len()));
            self.state.active_pair = None;
            self.enter(Phase::Settling);
            false
        } else {
            true
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn band_examples() {
        assert!(check_band(&[3.6, 3.6, 3.6], 0.01).1.is_empty());
        let spread: Vec<f64> = (0..8).map(|i| 3.5 + 0.2 * i as f64 / 7.0).collect();
        assert!(!check_band(&spread, 0.01).1.is_empty());
        let (avg, out) = check_band(&[3.59, 3.61], 0.02);
        assert_abs_diff_eq!(avg, 3.60, epsilon = 1e-12);
        assert!(out.is_empty());
        let (_, out) = check_band(&[3.6, 3.6, 3.8], 0.01);
        assert_eq!(out, vec![1, 2, 3]);
    }

    #[test]
    fn pair_examples() {
        assert_eq!(choose_pair(&[3.5, 3.7, 3.6]).unwrap(), (2, 1));
        assert_eq!(choose_pair(&[3.7, 3.7, 3.5]).unwrap(), (1, 3));
        let v = [3.60, 3.50, 3.62, 3.58, 3.61, 3.59, 3.70, 3.6];
        assert_eq!(choose_pair(&v).unwrap(), (7, 2));
        assert!(matches!(choose_pair(&[3.6, 3.6]), Err(Error::NoPair)));
    }

    #[test]
    fn vimp_examples() {
        assert_abs_diff_eq!(measure_vimp(3.600, 3.628), 0.028, epsilon = 1e-12);
        assert_eq!(measure_vimp(3.6, 3.6), 0.0);
        assert_abs_diff_eq!(measure_vimp(3.700, 3.670), 0.030, epsilon = 1e-12);
    }

    #[test]
    fn threshold_examples() {
        assert_abs_diff_eq!(
            stop_threshold(Role::Sink, 3.65, 0.028, true),
            3.678,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            stop_threshold(Role::Source, 3.65, 0.030, true),
            3.620,
            epsilon = 1e-12
        );
        assert_eq!(stop_threshold(Role::Sink, 3.65, 0.028, false), 3.65);
        assert_eq!(stop_threshold(Role::Source, 3.65, 0.030, false), 3.65);
    }

    #[test]
    fn idle_in_band_does_nothing() {
        let mut c = Controller::new(3, EqualizerConfig::reference()).unwrap();
        for _ in 0..100 {
            let cmd = c.step(&[3.6, 3.605, 3.598], 0.5).unwrap();
            assert!(!cmd.converter_on);
            assert!(cmd.switches.is_all_off());
        }
        assert_eq!(c.state().rounds, 0);
        assert_eq!(c.state().phase, Phase::Idle);
    }

    #[test]
    fn first_round_selects_extremes_with_converter_off() {
        let v: Vec<f64> = [3.55, 3.62, 3.50, 3.60, 3.58, 3.65, 3.70, 3.57].to_vec();
        let mut c = Controller::new(8, EqualizerConfig::reference()).unwrap();
        let cmd = c.step(&v, 0.5).unwrap();
        assert!(!cmd.converter_on);
        assert_eq!(cmd.pair, Some(ActivePair { source: 7, sink: 3 }));
        assert_eq!(cmd.switches, select_pair(7, 3, 8).unwrap());
        let cmd = c.step(&v, 0.5).unwrap();
        assert!(cmd.converter_on);
        assert_eq!(c.state().phase, Phase::MeasuringVimp);
    }

    #[test]
    fn rejects_bad_measurements() {
        let mut c = Controller::new(3, EqualizerConfig::reference()).unwrap();
        assert!(c.step(&[3.6, 3.6], 0.5).is_err());
        assert!(c.step(&[3.6, f64::NAN, 3.6], 0.5).is_err());
    }

    #[test]
    fn round_sequence_with_scripted_voltages() {
        let cfg = EqualizerConfig::reference();
        let mut c = Controller::new(2, cfg.clone()).unwrap();
        let dt = 0.5;
        // select
        let cmd = c.step(&[3.70, 3.50], dt).unwrap();
        assert!(!cmd.converter_on && !cmd.switches.is_all_off());
        // loaded: source sags 40 mV, sink rises 40 mV
        let loaded = [3.66, 3.54];
        let mut t = 0.0;
        while c.state().phase == Phase::MeasuringVimp {
            assert!(c.step(&loaded, dt).unwrap().converter_on);
            t += dt;
            assert!(t < 100.0);
        }
        let v_imp = c.state().v_imp.unwrap();
        assert_abs_diff_eq!(v_imp[0], 0.04, epsilon = 1e-12);
        assert_abs_diff_eq!(v_imp[1], 0.04, epsilon = 1e-12);
        // delta_t of current, then the measuring step itself keeps it on
        assert_abs_diff_eq!(t, cfg.delta_t + dt, epsilon = 1e-9);
        // still far: keeps going
        assert!(c.step(&[3.64, 3.56], dt).unwrap().converter_on);
        // source reaches 3.60 - 0.04
        let cmd = c.step(&[3.559, 3.60], dt).unwrap();
        assert!(!cmd.converter_on);
        assert!(cmd.switches.is_all_off());
        assert_eq!(c.state().phase, Phase::Settling);
        let steps = (cfg.time_gap / dt) as usize;
        for _ in 0..steps {
            let cmd = c.step(&[3.605, 3.598], dt).unwrap();
            assert!(!cmd.converter_on);
        }
        assert_eq!(c.state().phase, Phase::Idle);
    }

    #[test]
    fn round_cap_stops_a_slow_round() {
        let cfg = EqualizerConfig::new(0.01, 20.0, 20.0, true, 60.0).unwrap();
        let mut c = Controller::new(2, cfg).unwrap();
        c.step(&[3.7, 3.5], 1.0).unwrap();
        let mut on = 0;
        for _ in 0..200 {
            if c.step(&[3.69, 3.51], 1.0).unwrap().converter_on {
                on += 1;
            }
            if c.state().phase == Phase::Settling {
                break;
            }
        }
        assert_eq!(on, 60);
    }

    #[test]
    fn config_validation() {
        assert!(EqualizerConfig::new(0.0, 20.0, 20.0, true, 600.0).is_err());
        assert!(EqualizerConfig::new(0.01, 0.0, 20.0, true, 600.0).is_err());
        assert!(EqualizerConfig::new(0.01, 20.0, 0.0, true, 600.0).is_err());
        assert!(EqualizerConfig::new(0.01, 20.0, 20.0, true, 10.0).is_err());
    }
}
