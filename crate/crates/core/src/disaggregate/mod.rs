//! High-resolution shaping of TP energy series.
//!
//! Controllable components (hydro, flexibility, thermal, nuclear, HVDC) ramp
//! linearly around each TP shift. Varying components (demand, vRES) follow a
//! natural cubic spline through the TP midpoints. Both are then corrected so
//! every TP delivers exactly its scheduled energy.

mod correction;
mod ramp;
mod spline;

pub use correction::{
    capacity_violation_scan, default_e_min, enforce_tp_energy, CapacityViolation, ConvergenceReport,
    CorrectionSettings, Method, DEFAULT_MAX_ITERATIONS, DEFAULT_RMS_RESIDUAL,
};
pub use ramp::{hr_controllable, ramp_window, w_max_of, ControllableTrajectory, RampSpec, RampWindow, MIN_W_MAX_MW};
pub use spline::{hr_varying, varying_spline, NaturalCubicSpline};
