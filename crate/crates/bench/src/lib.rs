//! Shared fixtures for the criterion benches.

use intratp_core::pipeline::{self, RunOptions};
use intratp_core::{synth_random, RandomParams, RunConfig, Scenario, ScenarioHr, Setup};

/// Seeded random scenario on hourly TPs with minutely steps.
pub fn scenario(nodes: usize, tps: usize) -> Scenario {
    synth_random(&RandomParams::new(17, nodes, tps)).expect("valid parameters")
}

pub fn config(s: &Scenario) -> RunConfig {
    let opts = RunOptions {
        setup: Some(Setup::S1),
        ..Default::default()
    };
    RunConfig::resolve(s, &opts).expect("valid options")
}

/// Shaped trajectories of `s`, ready for netting.
pub fn shaped(s: &Scenario, cfg: &RunConfig) -> ScenarioHr {
    pipeline::disaggregate(s, cfg).expect("disaggregation succeeds").hr
}
