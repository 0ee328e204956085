#![allow(dead_code)]

use cellbal_core::sim::{InitialCondition, LoadSegment, Scenario};
use cellbal_core::CellParams;

/// 200 mV spread over 8 reference cells, highest cell 7, lowest cell 3.
pub const SPREAD_200MV: [f64; 8] = [3.55, 3.62, 3.50, 3.60, 3.58, 3.65, 3.70, 3.57];

pub fn resting_stack(voltages: &[f64], duration: f64, dt: f64) -> Scenario {
    Scenario {
        cells: vec![CellParams::reference(); voltages.len()],
        initial: InitialCondition::Voltages(voltages.to_vec()),
        profile: vec![],
        dt,
        duration,
        seed: 1,
    }
}

/// Stack with a few percent spread in capacity and ohmic resistance.
pub fn mismatched_cells() -> Vec<CellParams> {
    let caps = [2.6, 2.5, 2.7, 2.55, 2.65, 2.6, 2.45, 2.75];
    let r0s = [0.060, 0.066, 0.056, 0.063, 0.058, 0.060, 0.068, 0.055];
    let base = CellParams::reference();
    caps.iter()
        .zip(r0s)
        .map(|(&c, r0)| {
            CellParams::new(c, r0, base.r1, base.c1, base.ocv_curve().points().to_vec()).unwrap()
        })
        .collect()
}

pub fn step_load_stack(duration: f64) -> Scenario {
    Scenario {
        cells: mismatched_cells(),
        initial: InitialCondition::Voltages(SPREAD_200MV.to_vec()),
        profile: vec![
            LoadSegment::Rest { duration: 7200.0 },
            LoadSegment::StepSchedule {
                steps: vec![
                    (0.0, -0.3),
                    (600.0, -1.0),
                    (1200.0, -0.5),
                    (1800.0, -1.5),
                    (2400.0, -0.2),
                    (3000.0, -0.8),
                ],
                duration: 3600.0,
            },
        ],
        dt: 0.5,
        duration,
        seed: 1,
    }
}
