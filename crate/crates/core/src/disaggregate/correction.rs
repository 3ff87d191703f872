//! Iterative correction that removes TP energy errors introduced by the
//! high-resolution shaping methods.
//!
//! Starting from the scheduled energies `w`, each iteration shapes the
//! working series `a`, measures the per-TP residual `h = w - energy(shaped)`
//! and the error `e = ½ Σ h²`, then moves the working series by `h`. The loop
//! stops once `e <= e_min` or the iteration budget is exhausted.

use serde::{Deserialize, Serialize};

use super::ramp::{ControllableTrajectory, RampSpec, RampWindow};
use super::spline::hr_varying;
use crate::error::{Error, Result};
use crate::series::{tp_energy_of, HrSeries, Resolution, TpSeries};

/// Shaping method applied to a component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Linear ramps around TP shifts.
    Controllable(RampSpec),
    /// Cubic spline through TP midpoints.
    Varying,
}

/// Per-TP RMS residual targeted by the default stopping threshold (MWh).
pub const DEFAULT_RMS_RESIDUAL: f64 = 1e-4;
pub const DEFAULT_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionSettings {
    /// Accepted total error, MWh².
    pub e_min: f64,
    pub max_iterations: usize,
}

impl CorrectionSettings {
    /// Defaults for a horizon of `tps` periods.
    pub fn defaults(tps: usize) -> Self {
        CorrectionSettings {
            e_min: default_e_min(tps),
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_min.is_finite() && self.e_min > 0.0) {
            return Err(Error::Parameter(format!("e_min must be > 0, got {}", self.e_min)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn default_e_min(tps: usize) -> f64 {
    tps as f64 * DEFAULT_RMS_RESIDUAL * DEFAULT_RMS_RESIDUAL / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub final_error: f64,
    /// Residual `h` per TP (MWh) at exit.
    pub per_tp_residual: Vec<f64>,
    pub converged: bool,
    /// Ramp windows of the final iteration; empty for varying components.
    pub ramp_windows: Vec<RampWindow>,
}

impl ConvergenceReport {
    pub fn max_abs_residual(&self) -> f64 {
        self.per_tp_residual.iter().fold(0.0, |m, h| m.max(h.abs()))
    }

    pub fn clipped_shifts(&self) -> usize {
        self.ramp_windows.iter().filter(|w| w.clipped).count()
    }
}

fn shape(a: &[f64], method: &Method, res: Resolution) -> Result<(HrSeries, Vec<RampWindow>)> {
    let tp = TpSeries::new(a.to_vec()).map_err(|_| Error::NonFinite("TP energy correction (working series)".into()))?;
    Ok(match method {
        Method::Controllable(spec) => {
            let traj = ControllableTrajectory::new(&tp, spec, res);
            let hr = traj.sample();
            (hr, traj.into_windows())
        }
        Method::Varying => (hr_varying(&tp, res), Vec::new()),
    })
}

fn residual(w: &[f64], hr: &HrSeries, res: Resolution) -> Result<(Vec<f64>, f64)> {
    let energy = tp_energy_of(hr, res)?;
    let h: Vec<f64> = w.iter().zip(energy.values()).map(|(w, e)| w - e).collect();
    let e = 0.5 * h.iter().map(|x| x * x).sum::<f64>();
    if !e.is_finite() {
        return Err(Error::NonFinite("TP energy correction (residual)".into()));
    }
    Ok((h, e))
}

/// Shapes `tp` with `method` and iterates until its TP energies match `tp`.
///
/// Non-convergence is reported through `ConvergenceReport::converged`, not as
/// an error.
pub fn enforce_tp_energy(
    tp: &TpSeries,
    method: &Method,
    res: Resolution,
    settings: &CorrectionSettings,
) -> Result<(HrSeries, ConvergenceReport)> {
    settings.validate()?;
    if let Method::Controllable(spec) = method {
        spec.validate()?;
    }
    let w = tp.values();
    let mut a = w.to_vec();
    let (mut hr, mut windows) = shape(&a, method, res)?;
    let (mut h, mut e) = residual(w, &hr, res)?;
    let mut iterations = 1;

    while e > settings.e_min && iterations < settings.max_iterations {
        for (a_t, h_t) in a.iter_mut().zip(&h) {
            *a_t += h_t;
        }
        (hr, windows) = shape(&a, method, res)?;
        (h, e) = residual(w, &hr, res)?;
        iterations += 1;
    }

    let report = ConvergenceReport {
        iterations,
        final_error: e,
        per_tp_residual: h,
        converged: e <= settings.e_min,
        ramp_windows: windows,
    };
    Ok((hr, report))
}

/// A step whose power lies outside the given bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityViolation {
    pub step: usize,
    /// Positive above `upper`, negative below `lower`.
    pub excess: f64,
}

/// Lists steps outside `[lower, upper]` without altering the series.
pub fn capacity_violation_scan(hr: &HrSeries, lower: f64, upper: f64) -> Result<Vec<CapacityViolation>> {
    if lower > upper {
        return Err(Error::Parameter(format!(
            "lower bound {lower} exceeds upper bound {upper}"
        )));
    }
    Ok(hr
        .values()
        .iter()
        .enumerate()
        .filter_map(|(step, &v)| {
            if v > upper {
                Some(CapacityViolation {
                    step,
                    excess: v - upper,
                })
            } else if v < lower {
                Some(CapacityViolation {
                    step,
                    excess: v - lower,
                })
            } else {
                None
            }
        })
        .collect())
}
