//! End-to-end run: shape every component, net over AC lines, analyse.
//!
//! Each stage is available on its own and through files, and the file-based
//! stages compose to the same bytes as [`run`].

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::component::PerCategory;
use crate::disaggregate::{
    capacity_violation_scan, enforce_tp_energy, CorrectionSettings, Method, RampSpec, RampWindow,
};
use crate::error::{Error, Result};
use crate::io::{
    read_hr_stage, read_netting_stage, write_hr_stage, write_netting_stage, write_results, AdequacyRow, Analysis,
    ComponentId, ComponentRun, NodeAnalysis, RampTable, RunMetadata, Scenario, ViolationRow,
};
use crate::metrics::{
    classify_cause, density_histogram, ramp_adequacy_report, summary_stats, DEFAULT_BIN_WIDTH, DEFAULT_ZERO_THRESHOLD,
};
use crate::netting::{build_netting_problem, solve_netting, NettingConfig, NettingResult, ScenarioHr, Window};
use crate::series::{HrSeries, TpSeries};

/// HVDC ramp rate assumed by every setup, MW/min.
pub const SETUP_HVDC_RAMP_MW_PER_MIN: f64 = 30.0;

/// Predefined combinations of ramp rates and AC bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Setup {
    /// Normal ramping, NTC.
    S1,
    /// Normal ramping, NTC + TRM.
    S2,
    /// Fast ramping, NTC.
    S3,
    /// Fast ramping, NTC + TRM.
    S4,
}

impl Setup {
    pub const ALL: [Setup; 4] = [Setup::S1, Setup::S2, Setup::S3, Setup::S4];

    pub fn fast_ramping(self) -> bool {
        matches!(self, Setup::S3 | Setup::S4)
    }

    pub fn use_trm(self) -> bool {
        matches!(self, Setup::S2 | Setup::S4)
    }

    pub fn ramp_table(self) -> RampTable {
        if self.fast_ramping() {
            RampTable::FAST
        } else {
            RampTable::NORMAL
        }
    }
}

impl std::fmt::Display for Setup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for Setup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Setup::S1),
            "S2" => Ok(Setup::S2),
            "S3" => Ok(Setup::S3),
            "S4" => Ok(Setup::S4),
            _ => Err(format!("unknown setup {s:?}, expected S1, S2, S3 or S4")),
        }
    }
}

/// Overrides on top of a scenario's own settings; explicit values win over
/// the setup, which wins over the manifest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub setup: Option<Setup>,
    pub alpha: Option<f64>,
    pub use_trm: Option<bool>,
    pub window: Option<Window>,
    pub e_min: Option<f64>,
    pub max_iterations: Option<usize>,
    pub zero_threshold: Option<f64>,
    pub bin_width: Option<f64>,
}

/// Effective settings of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub setup: Option<Setup>,
    pub ramp: RampTable,
    /// Replaces the per-line HVDC ramp rates of the network when set.
    pub hvdc_ramp_mw_per_min: Option<f64>,
    pub netting: NettingConfig,
    pub correction: CorrectionSettings,
    pub zero_threshold: f64,
    pub bin_width: f64,
}

impl RunConfig {
    pub fn resolve(scenario: &Scenario, opts: &RunOptions) -> Result<Self> {
        let mut ramp = scenario.ramp;
        let mut netting = scenario.netting;
        let mut hvdc_ramp = None;
        if let Some(setup) = opts.setup {
            ramp = setup.ramp_table();
            netting.use_trm = setup.use_trm();
            hvdc_ramp = Some(SETUP_HVDC_RAMP_MW_PER_MIN);
        }
        if let Some(a) = opts.alpha {
            netting.alpha = a;
        }
        if let Some(t) = opts.use_trm {
            netting.use_trm = t;
        }
        if let Some(w) = opts.window {
            netting.window = w;
        }
        let mut correction = scenario.correction.resolve(scenario.tps());
        if let Some(e) = opts.e_min {
            correction.e_min = e;
        }
        if let Some(i) = opts.max_iterations {
            correction.max_iterations = i;
        }
        let cfg = RunConfig {
            setup: opts.setup,
            ramp,
            hvdc_ramp_mw_per_min: hvdc_ramp,
            netting,
            correction,
            zero_threshold: opts.zero_threshold.unwrap_or(DEFAULT_ZERO_THRESHOLD),
            bin_width: opts.bin_width.unwrap_or(DEFAULT_BIN_WIDTH),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.ramp.validate()?;
        self.netting.validate()?;
        self.correction.validate()?;
        if !(self.zero_threshold.is_finite() && self.zero_threshold >= 0.0) {
            return Err(Error::Parameter(format!(
                "zero threshold must be >= 0, got {}",
                self.zero_threshold
            )));
        }
        if !(self.bin_width.is_finite() && self.bin_width > 0.0) {
            return Err(Error::Parameter(format!(
                "bin width must be > 0, got {}",
                self.bin_width
            )));
        }
        Ok(())
    }
}

/// Shaped trajectories and per-component convergence.
#[derive(Debug, Clone)]
pub struct Disaggregation {
    pub hr: ScenarioHr,
    /// Node components in node and category order, then HVDC lines.
    pub components: Vec<ComponentRun>,
}

struct Job<'a> {
    id: ComponentId,
    series: &'a TpSeries,
    method: Method,
}

fn jobs<'a>(scenario: &'a Scenario, cfg: &RunConfig) -> Result<Vec<Job<'a>>> {
    let net = &scenario.network;
    let mut out = Vec::new();
    for (n, per) in scenario.nodes.iter().enumerate() {
        for (c, series) in per.iter() {
            let method = match cfg.ramp.get(c) {
                Some(rate) => Method::Controllable(rate.spec(scenario.g_max(n, c))?),
                None => Method::Varying,
            };
            out.push(Job {
                id: ComponentId::Node {
                    node: net.nodes()[n].clone(),
                    category: c,
                },
                series,
                method,
            });
        }
    }
    for (line, series) in net.hvdc_lines().iter().zip(&scenario.hvdc) {
        let rate = cfg.hvdc_ramp_mw_per_min.unwrap_or(line.ramp_mw_per_min);
        let spec =
            RampSpec::absolute(rate).map_err(|e| Error::Parameter(format!("HVDC line {}: {e}", line.label())))?;
        out.push(Job {
            id: ComponentId::Hvdc {
                from: line.from.clone(),
                to: line.to.clone(),
            },
            series,
            method: Method::Controllable(spec),
        });
    }
    Ok(out)
}

/// Shapes every component in parallel and corrects its TP energies.
pub fn disaggregate(scenario: &Scenario, cfg: &RunConfig) -> Result<Disaggregation> {
    scenario.validate()?;
    let jobs = jobs(scenario, cfg)?;
    let shaped: Vec<(HrSeries, ComponentRun)> = jobs
        .par_iter()
        .map(|job| {
            let (hr, report) = enforce_tp_energy(job.series, &job.method, scenario.res, &cfg.correction)?;
            let ramp = match job.method {
                Method::Controllable(spec) => Some(spec),
                Method::Varying => None,
            };
            Ok((
                hr,
                ComponentRun {
                    id: job.id.clone(),
                    ramp,
                    report,
                },
            ))
        })
        .collect::<Result<_>>()?;

    let (series, components): (Vec<HrSeries>, Vec<ComponentRun>) = shaped.into_iter().unzip();
    let mut it = series.into_iter();
    let nodes: Vec<PerCategory<HrSeries>> = scenario
        .nodes
        .iter()
        .map(|_| PerCategory::from_fn(|_| it.next().expect("node component")))
        .collect();
    let hvdc: Vec<HrSeries> = it.collect();
    let hr = ScenarioHr::new(&scenario.network, scenario.res, nodes, hvdc, scenario.ac.clone())?;
    Ok(Disaggregation { hr, components })
}

/// Solves the netting LP on shaped trajectories.
pub fn net(scenario: &Scenario, hr: &ScenarioHr, cfg: &RunConfig) -> Result<NettingResult> {
    let problem = build_netting_problem(hr, &scenario.network, &cfg.netting)?;
    solve_netting(&problem, &cfg.netting)
}

/// Ramp windows attached to node `n`: its controllable components and the
/// HVDC lines ending there.
fn node_windows<'a>(scenario: &Scenario, components: &'a [ComponentRun], n: usize) -> Vec<&'a [RampWindow]> {
    let name = &scenario.network.nodes()[n];
    components
        .iter()
        .filter(|c| match &c.id {
            ComponentId::Node { node, category } => node == name && category.is_controllable(),
            ComponentId::Hvdc { from, to } => from == name || to == name,
        })
        .map(|c| c.report.ramp_windows.as_slice())
        .collect()
}

/// Statistics, labels and diagnostics of a netted run.
pub fn analyze(
    scenario: &Scenario,
    hr: &ScenarioHr,
    components: &[ComponentRun],
    netting: &NettingResult,
    cfg: &RunConfig,
) -> Result<Analysis> {
    let res = scenario.res;
    let net = &scenario.network;
    let mut nodes = Vec::with_capacity(net.nodes().len());
    for (n, need) in netting.balancing_need.iter().enumerate() {
        let windows = node_windows(scenario, components, n);
        nodes.push(NodeAnalysis {
            node: net.nodes()[n].clone(),
            labels: classify_cause(need, &windows, res, cfg.zero_threshold),
            stats: summary_stats(need, cfg.zero_threshold)?,
            histogram: density_histogram(need, cfg.bin_width)?,
            need: need.values().to_vec(),
        });
    }

    let ramped: Vec<&ComponentRun> = components.iter().filter(|c| c.ramp.is_some()).collect();
    let reports: Vec<_> = ramped.iter().map(|c| &c.report).collect();
    let adequacy = ramp_adequacy_report(&reports)?
        .into_iter()
        .zip(&ramped)
        .map(|(a, c)| AdequacyRow {
            component: c.id.to_string(),
            shifts: a.shifts,
            clipped_shifts: a.clipped_shifts,
            clipped_share: a.clipped_share,
        })
        .collect();

    let mut violations = Vec::new();
    for (line, flow) in net.hvdc_lines().iter().zip(hr.hvdc()) {
        for v in capacity_violation_scan(flow, -line.cap_rev, line.cap_fwd)? {
            violations.push(ViolationRow {
                line: line.label(),
                step_index: v.step + 1,
                excess_mw: v.excess,
            });
        }
    }

    let nonconverged: Vec<String> = components
        .iter()
        .filter(|c| !c.report.converged)
        .map(|c| c.id.to_string())
        .collect();
    let metadata = RunMetadata {
        software: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: scenario.name.clone(),
        setup: cfg.setup.map(|s| s.to_string()),
        tp_minutes: res.tp_minutes(),
        step_minutes: res.step_minutes(),
        tps: hr.tps(),
        alpha: cfg.netting.alpha,
        use_trm: cfg.netting.use_trm,
        window_tps: cfg.netting.window.to_string(),
        solver_tolerance: cfg.netting.solver_tolerance,
        e_min: cfg.correction.e_min,
        max_iterations: cfg.correction.max_iterations,
        zero_threshold: cfg.zero_threshold,
        bin_width: cfg.bin_width,
        ramp: cfg.ramp,
        hvdc_ramp_mw_per_min: cfg.hvdc_ramp_mw_per_min,
        objective: netting.objective,
        converged: nonconverged.is_empty(),
        nonconverged_components: nonconverged,
        negative_hr_steps: hr.negative_steps().iter().map(|n| n.count).sum(),
    };
    Ok(Analysis {
        nodes,
        adequacy,
        violations,
        components: components.to_vec(),
        metadata,
    })
}

/// Shapes the scenario and writes the `hr/` stage files.
pub fn disaggregate_stage(scenario: &Scenario, cfg: &RunConfig, out: &Path) -> Result<Disaggregation> {
    let d = disaggregate(scenario, cfg)?;
    write_hr_stage(out, &scenario.network, &d.hr, &d.components)?;
    Ok(d)
}

/// Reads the `hr/` stage, nets, and writes the `netting/` stage files.
pub fn net_stage(scenario: &Scenario, cfg: &RunConfig, out: &Path) -> Result<NettingResult> {
    let (hr, _) = read_hr_stage(
        out,
        &scenario.network,
        scenario.res,
        scenario.tps(),
        scenario.ac.clone(),
    )?;
    let result = net(scenario, &hr, cfg)?;
    write_netting_stage(out, &scenario.network, &result)?;
    Ok(result)
}

/// Reads the `hr/` and `netting/` stages and writes the analysis files.
pub fn analyze_stage(scenario: &Scenario, cfg: &RunConfig, out: &Path) -> Result<Analysis> {
    let (hr, components) = read_hr_stage(
        out,
        &scenario.network,
        scenario.res,
        scenario.tps(),
        scenario.ac.clone(),
    )?;
    let netting = read_netting_stage(out, &scenario.network, hr.steps())?;
    let analysis = analyze(scenario, &hr, &components, &netting, cfg)?;
    write_results(out, &analysis)?;
    Ok(analysis)
}

/// Full run, writing every stage into `out`.
pub fn run(scenario: &Scenario, cfg: &RunConfig, out: &Path) -> Result<Analysis> {
    let d = disaggregate_stage(scenario, cfg, out)?;
    let netting = net(scenario, &d.hr, cfg)?;
    write_netting_stage(out, &scenario.network, &netting)?;
    let analysis = analyze(scenario, &d.hr, &d.components, &netting, cfg)?;
    write_results(out, &analysis)?;
    Ok(analysis)
}
