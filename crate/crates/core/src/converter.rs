//! Averaged model of the capacitively level-shifted Cuk converter: the
//! port-1 (source) current is regulated and the sink receives whatever power
//! survives the efficiency curve. Switching ripple is not modelled.

use alloc::vec;
use alloc::vec::Vec;

use crate::curve::PiecewiseLinear;
use crate::network::check_pair;
use crate::Error;

const FIXED_POINT_MAX_ITER: usize = 50;
const FIXED_POINT_TOL_W: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConverterParams {
    /// Regulated source-port current magnitude, amperes.
    pub i_eq: f64,
    pub rated_power: f64,
    /// Efficiency versus output power in watts.
    eff: PiecewiseLinear,
}

impl ConverterParams {
    pub fn new(i_eq: f64, rated_power: f64, eff_curve: Vec<(f64, f64)>) -> Result<Self, Error> {
        if !(i_eq > 0.0 && i_eq.is_finite()) {
            return Err(Error::invalid("converter i_eq", "must be > 0"));
        }
        if !(rated_power > 0.0 && rated_power.is_finite()) {
            return Err(Error::invalid("converter rated power", "must be > 0"));
        }
        if eff_curve.iter().any(|&(_, e)| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::invalid(
                "efficiency curve",
                "efficiencies must lie in (0, 1]",
            ));
        }
        if eff_curve.iter().any(|&(p, _)| p < 0.0) {
            return Err(Error::invalid("efficiency curve", "powers must be >= 0"));
        }
        Ok(ConverterParams {
            i_eq,
            rated_power,
            eff: PiecewiseLinear::new(eff_curve)?,
        })
    }

    /// 0.5 A regulated, 2 W rated. 90.1 % at rated power and a 92.9 % peak;
    /// the peak location (0.9 W) and the light-load point are approximate.
    pub fn reference() -> Self {
        ConverterParams::new(0.5, 2.0, vec![(0.2, 0.905), (0.9, 0.929), (2.0, 0.901)])
            .expect("reference converter is valid")
    }

    pub fn eff_curve(&self) -> &PiecewiseLinear {
        &self.eff
    }

    /// Efficiency at output power `p_out` watts.
    pub fn efficiency(&self, p_out: f64) -> f64 {
        self.eff.eval(p_out)
    }

    /// Charge transfer with `v_src` on the regulated port and `v_sink` on the
    /// other. Solves `eta = efficiency(eta * p_in)` by fixed-point iteration.
    pub fn transfer(&self, v_src: f64, v_sink: f64) -> Result<TransferResult, Error> {
        if !(v_src > 0.0 && v_sink > 0.0) {
            return Err(Error::invalid("transfer voltages", "must be > 0"));
        }
        let p_in = v_src * self.i_eq;
        let mut p_out = self.efficiency(p_in) * p_in;
        let mut converged = false;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let next = self.efficiency(p_out) * p_in;
            let step = (next - p_out).abs();
            p_out = next;
            if step < FIXED_POINT_TOL_W {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                iterations: FIXED_POINT_MAX_ITER,
            });
        }
        let eta = p_out / p_in;
        Ok(TransferResult {
            i_src: self.i_eq,
            i_sink: p_out / v_sink,
            p_loss: (1.0 - eta) * p_in,
            efficiency: eta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferResult {
    /// Current drawn from the source cell, amperes (>= 0).
    pub i_src: f64,
    /// Current pushed into the sink cell, amperes (>= 0).
    pub i_sink: f64,
    pub p_loss: f64,
    pub efficiency: f64,
}

/// Blocking-capacitor voltages for cells `k > l` (1-based) in a small-ripple
/// steady state: C1 holds cells l..=k, C2 holds the cells strictly between.
pub fn capacitor_voltages(k: usize, l: usize, cell_voltages: &[f64]) -> Result<(f64, f64), Error> {
    check_pair(k, l, cell_voltages.len())?;
    let v_c1 = cell_voltages[l - 1..k].iter().sum();
    let v_c2 = cell_voltages[l..k - 1].iter().sum();
    Ok((v_c1, v_c2))
}

/// True when some cell sits outside `mean ± v_tol`.
pub fn converter_enabled(voltages: &[f64], v_tol: f64) -> bool {
    !crate::controller::check_band(voltages, v_tol).1.is_empty()
}
