//! Stage outputs of a run.
//!
//! ```text
//! hr/nodes/<node>.csv          step_index,hydro,flexible,thermal,nuclear,vres,demand
//! hr/hvdc/<from>__<to>.csv     step_index,flow_mw
//! hr/components.json           ramp specs and convergence of every component
//! netting/need/<node>.csv      step_index,need_mw
//! netting/flows/<from>__<to>.csv  step_index,flow_mw
//! netting/diagnostics.json     objective and solver diagnostics
//! need/<node>.csv              step_index,need_mw,label
//! stats.csv, histogram.csv, ramp_adequacy.csv, capacity_violations.csv,
//! convergence.csv, metadata.json
//! ```
//!
//! Step indices are 1-based.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{line_file_stem, write_file, RampTable};
use crate::component::{Category, PerCategory};
use crate::disaggregate::{ConvergenceReport, RampSpec};
use crate::error::{Error, Result};
use crate::metrics::{BalancingStats, CauseLabel, HistogramBin};
use crate::netting::{NettingResult, Network, ScenarioHr, SolverDiagnostics};
use crate::series::{HrSeries, Resolution, TpSeries};

/// A shaped component: a node's category series or an HVDC line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentId {
    Node { node: String, category: Category },
    Hvdc { from: String, to: String },
}

impl std::fmt::Display for ComponentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ComponentId::Node { node, category } => write!(f, "{node}/{category}"),
            ComponentId::Hvdc { from, to } => write!(f, "hvdc/{from}->{to}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRun {
    pub id: ComponentId,
    /// Ramp spec for controllable components and HVDC lines.
    pub ramp: Option<RampSpec>,
    pub report: ConvergenceReport,
}

fn invalid(path: &Path, row: Option<usize>, message: impl Into<String>) -> Error {
    Error::Validation {
        file: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

fn render_columns(header: &[&str], columns: &[&[f64]]) -> String {
    let steps = columns.first().map_or(0, |c| c.len());
    let mut out = String::with_capacity(steps * 16 * (columns.len() + 1));
    out.push_str("step_index");
    for h in header {
        out.push(',');
        out.push_str(h);
    }
    out.push('\n');
    for s in 0..steps {
        write!(out, "{}", s + 1).expect("write to string");
        for c in columns {
            write!(out, ",{}", c[s]).expect("write to string");
        }
        out.push('\n');
    }
    out
}

/// Reads a `step_index,<header...>` table into columns.
fn read_columns(path: &Path, header: &[&str], steps: usize) -> Result<Vec<Vec<f64>>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let found = reader
        .headers()
        .map_err(|e| invalid(path, Some(1), e.to_string()))?
        .clone();
    let expected: Vec<&str> = std::iter::once("step_index").chain(header.iter().copied()).collect();
    if found.iter().ne(expected.iter().copied()) {
        return Err(invalid(
            path,
            Some(1),
            format!("expected header {}", expected.join(",")),
        ));
    }
    let mut columns = vec![Vec::with_capacity(steps); header.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| invalid(path, e.position().map(|p| p.line() as usize), e.to_string()))?;
        let row = record.position().map(|p| p.line() as usize);
        if record.get(0) != Some((i + 1).to_string().as_str()) {
            return Err(invalid(path, row, format!("expected step_index {}", i + 1)));
        }
        for (c, col) in columns.iter_mut().enumerate() {
            let v: f64 = record
                .get(c + 1)
                .and_then(|f| f.parse().ok())
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| invalid(path, row, format!("{} is not a finite number", header[c])))?;
            col.push(v);
        }
    }
    if columns.iter().any(|c| c.len() != steps) {
        return Err(invalid(path, None, format!("expected {steps} steps")));
    }
    Ok(columns)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable");
    text.push('\n');
    write_file(path, &text)
}

const CATEGORY_COLUMNS: [&str; 6] = ["hydro", "flexible", "thermal", "nuclear", "vres", "demand"];

/// Writes the high-resolution trajectories and component reports.
pub fn write_hr_stage(dir: &Path, network: &Network, hr: &ScenarioHr, components: &[ComponentRun]) -> Result<()> {
    for (n, name) in network.nodes().iter().enumerate() {
        let per = hr.node(n);
        let cols: Vec<&[f64]> = Category::ALL.iter().map(|&c| per.get(c).values()).collect();
        write_file(
            &dir.join("hr/nodes").join(format!("{name}.csv")),
            &render_columns(&CATEGORY_COLUMNS, &cols),
        )?;
    }
    for (line, series) in network.hvdc_lines().iter().zip(hr.hvdc()) {
        let path = dir
            .join("hr/hvdc")
            .join(format!("{}.csv", line_file_stem(&line.from, &line.to)));
        write_file(&path, &render_columns(&["flow_mw"], &[series.values()]))?;
    }
    write_json(&dir.join("hr/components.json"), &components)
}

/// Reads what `write_hr_stage` wrote; AC energies come from the scenario.
pub fn read_hr_stage(
    dir: &Path,
    network: &Network,
    res: Resolution,
    tps: usize,
    ac_energy: Vec<TpSeries>,
) -> Result<(ScenarioHr, Vec<ComponentRun>)> {
    let steps = tps * res.steps_per_tp();
    let mut nodes = Vec::with_capacity(network.nodes().len());
    for name in network.nodes() {
        let path = dir.join("hr/nodes").join(format!("{name}.csv"));
        let mut cols = read_columns(&path, &CATEGORY_COLUMNS, steps)?.into_iter();
        nodes.push(PerCategory::from_fn(|_| {
            HrSeries::from_trusted(cols.next().expect("column"))
        }));
    }
    let mut hvdc = Vec::with_capacity(network.hvdc_lines().len());
    for line in network.hvdc_lines() {
        let path = dir
            .join("hr/hvdc")
            .join(format!("{}.csv", line_file_stem(&line.from, &line.to)));
        let col = read_columns(&path, &["flow_mw"], steps)?.remove(0);
        hvdc.push(HrSeries::from_trusted(col));
    }
    let components: Vec<ComponentRun> = read_json(&dir.join("hr/components.json"))?;
    Ok((ScenarioHr::new(network, res, nodes, hvdc, ac_energy)?, components))
}

#[derive(Serialize, Deserialize)]
struct NettingRecord {
    objective: f64,
    diagnostics: SolverDiagnostics,
}

pub fn write_netting_stage(dir: &Path, network: &Network, result: &NettingResult) -> Result<()> {
    for (name, need) in network.nodes().iter().zip(&result.balancing_need) {
        let path = dir.join("netting/need").join(format!("{name}.csv"));
        write_file(&path, &render_columns(&["need_mw"], &[need.values()]))?;
    }
    for (line, flow) in network.ac_lines().iter().zip(&result.ac_flows) {
        let path = dir
            .join("netting/flows")
            .join(format!("{}.csv", line_file_stem(&line.from, &line.to)));
        write_file(&path, &render_columns(&["flow_mw"], &[flow.values()]))?;
    }
    write_json(
        &dir.join("netting/diagnostics.json"),
        &NettingRecord {
            objective: result.objective,
            diagnostics: result.diagnostics.clone(),
        },
    )
}

pub fn read_netting_stage(dir: &Path, network: &Network, steps: usize) -> Result<NettingResult> {
    let mut balancing_need = Vec::new();
    for name in network.nodes() {
        let path = dir.join("netting/need").join(format!("{name}.csv"));
        balancing_need.push(HrSeries::from_trusted(
            read_columns(&path, &["need_mw"], steps)?.remove(0),
        ));
    }
    let mut ac_flows = Vec::new();
    for line in network.ac_lines() {
        let path = dir
            .join("netting/flows")
            .join(format!("{}.csv", line_file_stem(&line.from, &line.to)));
        ac_flows.push(HrSeries::from_trusted(
            read_columns(&path, &["flow_mw"], steps)?.remove(0),
        ));
    }
    let record: NettingRecord = read_json(&dir.join("netting/diagnostics.json"))?;
    Ok(NettingResult {
        balancing_need,
        ac_flows,
        objective: record.objective,
        diagnostics: record.diagnostics,
    })
}

/// Reads a labelled balancing-need file written by `write_results`.
pub fn read_need_csv(path: &Path, res: Resolution) -> Result<(HrSeries, Vec<CauseLabel>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let found = reader
        .headers()
        .map_err(|e| invalid(path, Some(1), e.to_string()))?
        .clone();
    if found.iter().ne(["step_index", "need_mw", "label"]) {
        return Err(invalid(path, Some(1), "expected header step_index,need_mw,label"));
    }
    let mut need = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| invalid(path, e.position().map(|p| p.line() as usize), e.to_string()))?;
        let row = record.position().map(|p| p.line() as usize);
        let v: f64 = record[1]
            .parse()
            .map_err(|_| invalid(path, row, format!("need_mw {:?} is not a number", &record[1])))?;
        let l: CauseLabel = record[2].parse().map_err(|m: String| invalid(path, row, m))?;
        need.push(v);
        labels.push(l);
    }
    let need = HrSeries::new(need, res).map_err(|e| invalid(path, None, e.to_string()))?;
    Ok((need, labels))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeAnalysis {
    pub node: String,
    pub need: Vec<f64>,
    pub labels: Vec<CauseLabel>,
    pub stats: BalancingStats,
    pub histogram: Vec<HistogramBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdequacyRow {
    pub component: String,
    pub shifts: usize,
    pub clipped_shifts: usize,
    pub clipped_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRow {
    pub line: String,
    pub step_index: usize,
    pub excess_mw: f64,
}

/// Settings and outcome of a run, written as `metadata.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub software: String,
    pub version: String,
    pub scenario: String,
    pub setup: Option<String>,
    pub tp_minutes: u32,
    pub step_minutes: u32,
    pub tps: usize,
    pub alpha: f64,
    pub use_trm: bool,
    pub window_tps: String,
    pub solver_tolerance: f64,
    pub e_min: f64,
    pub max_iterations: usize,
    pub zero_threshold: f64,
    pub bin_width: f64,
    pub ramp: RampTable,
    pub hvdc_ramp_mw_per_min: Option<f64>,
    pub objective: f64,
    pub converged: bool,
    pub nonconverged_components: Vec<String>,
    /// Shaped steps below zero in categories that are nonnegative at TP level.
    pub negative_hr_steps: usize,
}

/// Everything the analysis stage writes.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub nodes: Vec<NodeAnalysis>,
    pub adequacy: Vec<AdequacyRow>,
    pub violations: Vec<ViolationRow>,
    pub components: Vec<ComponentRun>,
    pub metadata: RunMetadata,
}

/// Writes the analysis files into `dir`.
pub fn write_results(dir: &Path, analysis: &Analysis) -> Result<()> {
    let mut stats = String::from("node,max_need_mw,min_need_mw,mean_abs_need_mw,zero_share\n");
    let mut histogram = String::from("node,bin_center_mw,density\n");
    for node in &analysis.nodes {
        let mut need = String::from("step_index,need_mw,label\n");
        for (s, (v, l)) in node.need.iter().zip(&node.labels).enumerate() {
            writeln!(need, "{},{v},{}", s + 1, l.name()).expect("write to string");
        }
        write_file(&dir.join("need").join(format!("{}.csv", node.node)), &need)?;
        let st = &node.stats;
        writeln!(
            stats,
            "{},{},{},{},{}",
            node.node, st.max_need, st.min_need, st.mean_abs_need, st.zero_share
        )
        .expect("write to string");
        for bin in &node.histogram {
            writeln!(histogram, "{},{},{}", node.node, bin.center, bin.density).expect("write to string");
        }
    }
    write_file(&dir.join("stats.csv"), &stats)?;
    write_file(&dir.join("histogram.csv"), &histogram)?;

    let mut adequacy = String::from("component,shifts,clipped_shifts,clipped_share\n");
    for r in &analysis.adequacy {
        writeln!(
            adequacy,
            "{},{},{},{}",
            r.component, r.shifts, r.clipped_shifts, r.clipped_share
        )
        .expect("write to string");
    }
    write_file(&dir.join("ramp_adequacy.csv"), &adequacy)?;

    let mut violations = String::from("line,step_index,excess_mw\n");
    for v in &analysis.violations {
        writeln!(violations, "{},{},{}", v.line, v.step_index, v.excess_mw).expect("write to string");
    }
    write_file(&dir.join("capacity_violations.csv"), &violations)?;

    let mut convergence = String::from("component,iterations,final_error,max_abs_residual_mwh,converged\n");
    for c in &analysis.components {
        let r = &c.report;
        writeln!(
            convergence,
            "{},{},{},{},{}",
            c.id,
            r.iterations,
            r.final_error,
            r.max_abs_residual(),
            r.converged
        )
        .expect("write to string");
    }
    write_file(&dir.join("convergence.csv"), &convergence)?;
    write_json(&dir.join("metadata.json"), &analysis.metadata)
}

/// Reads `metadata.json` from a results directory.
pub fn read_metadata(dir: &Path) -> Result<RunMetadata> {
    read_json(&dir.join("metadata.json"))
}
