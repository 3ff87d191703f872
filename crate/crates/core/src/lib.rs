//! High-resolution intra-trading-period simulation of power systems.
//!
//! Turns TP energy simulation output (MWh per trading period) into minutely
//! power trajectories, nets nodal imbalances over AC interconnections with a
//! linear program, and summarises the remaining need of balancing power.

pub mod component;
pub mod disaggregate;
pub mod error;
pub mod io;
pub mod metrics;
pub mod netting;
pub mod pipeline;
pub mod series;
pub mod synth;

pub use component::{Category, PerCategory};
pub use disaggregate::{
    capacity_violation_scan, enforce_tp_energy, hr_controllable, hr_varying, ramp_window, ConvergenceReport,
    CorrectionSettings, Method, RampSpec, RampWindow,
};
pub use error::{ConstraintClass, Error, Result};
pub use io::{load_scenario, save_scenario, write_results, Scenario, ScenarioManifest};
pub use metrics::{classify_cause, density_histogram, ramp_adequacy_report, summary_stats, BalancingStats, CauseLabel};
pub use netting::{
    balancing_need_fixed_transmission, build_netting_problem, net_system_need, solve_netting, AcLine, HvdcLine,
    NettingConfig, NettingResult, Network, ScenarioHr, Window,
};
pub use pipeline::{RunConfig, RunOptions, Setup};
pub use series::{
    basic_power_expand, power_imbalance, tp_energy_imbalance, tp_energy_of, HrSeries, Resolution, TpSeries,
};
pub use synth::{synth_figure_case, synth_random, FigureCase, RandomParams};
