//! The netting LP: choose high-resolution AC flows that minimise the total
//! absolute balancing need, while every line still delivers its scheduled
//! TP energy.
//!
//! ```text
//! minimise   Σ_t Σ_n |need[t,n]|  +  α Σ_t Σ_a |z[t+1,a] - z[t,a]|
//! s.t.       lower_a ≤ z[t,a] ≤ upper_a
//!            mean of z[·,a] over TP k  =  scheduled energy / TP length
//!            need[t,n] = base[t,n] + Σ_{a from n} z[t,a] - Σ_{a to n} z[t,a]
//! ```
//!
//! Absolute values use nonnegative splits: `need = p - m`, `Δz = u - v`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::lp::{solve_lp, LpFailure, LpProblem};
use super::network::Network;
use super::scenario::ScenarioHr;
use crate::error::{ConstraintClass, Error, Result};
use crate::series::{HrSeries, Resolution};

pub const DEFAULT_ALPHA: f64 = 1e-3;
pub const DEFAULT_SOLVER_TOLERANCE: f64 = 1e-6;

/// Horizon decomposition of the netting LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Full,
    /// Consecutive windows of this many TPs.
    Tps(usize),
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Window::Full => f.write_str("full"),
            Window::Tps(n) => write!(f, "{n}"),
        }
    }
}

impl std::str::FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "full" {
            return Ok(Window::Full);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Window::Tps(n)),
            _ => Err(format!("window must be \"full\" or a positive integer, got {s:?}")),
        }
    }
}

impl Serialize for Window {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Window::Full => s.serialize_str("full"),
            Window::Tps(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Window {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Count(u64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Count(0) => Err(serde::de::Error::custom("window_tps must be positive")),
            Raw::Count(n) => Ok(Window::Tps(n as usize)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NettingConfig {
    /// Cost per MW of AC flow change between consecutive steps.
    pub alpha: f64,
    /// Widen AC bounds by the TRM.
    pub use_trm: bool,
    #[serde(rename = "window_tps")]
    pub window: Window,
    /// Accepted constraint violation, MW (MWh for TP energy).
    pub solver_tolerance: f64,
}

impl Default for NettingConfig {
    fn default() -> Self {
        NettingConfig {
            alpha: DEFAULT_ALPHA,
            use_trm: false,
            window: Window::Full,
            solver_tolerance: DEFAULT_SOLVER_TOLERANCE,
        }
    }
}

impl NettingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.1) {
            return Err(Error::Parameter(format!(
                "alpha must lie in (0, 0.1), got {}",
                self.alpha
            )));
        }
        if !(self.solver_tolerance.is_finite() && self.solver_tolerance > 0.0) {
            return Err(Error::Parameter(format!(
                "solver_tolerance must be > 0, got {}",
                self.solver_tolerance
            )));
        }
        Ok(())
    }
}

/// Netting LP data for the whole horizon; windows are assembled on demand.
#[derive(Debug, Clone)]
pub struct NettingProblem {
    res: Resolution,
    tps: usize,
    n_nodes: usize,
    ac_ends: Vec<(usize, usize)>,
    /// Need per node before AC exchange, MW per step.
    base: Vec<Vec<f64>>,
    bounds: Vec<(f64, f64)>,
    /// Scheduled mean AC flow per line and TP, MW.
    target: Vec<Vec<f64>>,
    alpha: f64,
}

/// Column layout of one window LP.
#[derive(Debug, Clone, Copy)]
pub struct WindowLayout {
    pub steps: usize,
    pub lines: usize,
    pub nodes: usize,
    /// Whether the first step carries a smoothing term against a fixed
    /// predecessor flow.
    pub coupled: bool,
}

impl WindowLayout {
    fn smooth_terms(&self) -> usize {
        if self.coupled {
            self.steps
        } else {
            self.steps.saturating_sub(1)
        }
    }

    pub fn z(&self, line: usize, step: usize) -> usize {
        line * self.steps + step
    }

    pub fn need_pos(&self, node: usize, step: usize) -> usize {
        self.lines * self.steps + node * self.steps + step
    }

    pub fn need_neg(&self, node: usize, step: usize) -> usize {
        self.need_pos(node, step) + self.nodes * self.steps
    }

    pub fn smooth_pos(&self, line: usize, term: usize) -> usize {
        self.lines * self.steps + 2 * self.nodes * self.steps + line * self.smooth_terms() + term
    }

    pub fn smooth_neg(&self, line: usize, term: usize) -> usize {
        self.smooth_pos(line, term) + self.lines * self.smooth_terms()
    }

    pub fn num_vars(&self) -> usize {
        self.steps * (self.lines + 2 * self.nodes) + 2 * self.lines * self.smooth_terms()
    }
}

/// Slack allowed when checking scheduled energy against line bounds, MW.
const BOUND_SLACK: f64 = 1e-9;

/// Assembles the netting problem; fails when a scheduled AC energy cannot be
/// delivered within the line's own bounds.
pub fn build_netting_problem(scenario: &ScenarioHr, network: &Network, cfg: &NettingConfig) -> Result<NettingProblem> {
    cfg.validate()?;
    let res = scenario.resolution();
    let bounds: Vec<(f64, f64)> = network.ac_lines().iter().map(|l| l.bounds(cfg.use_trm)).collect();
    let mut target = Vec::with_capacity(bounds.len());
    for (a, energy) in scenario.ac_energy().iter().enumerate() {
        let (lo, hi) = bounds[a];
        let means: Vec<f64> = energy.values().iter().map(|&e| res.energy_to_power(e)).collect();
        for (k, &mean) in means.iter().enumerate() {
            let slack = BOUND_SLACK * mean.abs().max(1.0);
            if mean > hi + slack || mean < lo - slack {
                return Err(Error::Infeasible {
                    window: None,
                    class: ConstraintClass::TpEnergy,
                    detail: format!(
                        "line {} TP {}: scheduled {} MWh needs a mean flow of {mean} MW outside [{lo}, {hi}] MW",
                        network.ac_lines()[a].label(),
                        k + 1,
                        energy.values()[k]
                    ),
                });
            }
        }
        target.push(means);
    }
    let base = (0..network.nodes().len())
        .map(|n| scenario.need_before_ac(network, n))
        .collect();
    Ok(NettingProblem {
        res,
        tps: scenario.tps(),
        n_nodes: network.nodes().len(),
        ac_ends: network.ac_ends().to_vec(),
        base,
        bounds,
        target,
        alpha: cfg.alpha,
    })
}

impl NettingProblem {
    pub fn resolution(&self) -> Resolution {
        self.res
    }

    pub fn tps(&self) -> usize {
        self.tps
    }

    pub fn steps(&self) -> usize {
        self.tps * self.res.steps_per_tp()
    }

    pub fn num_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn num_lines(&self) -> usize {
        self.ac_ends.len()
    }

    pub fn line_bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Whole-horizon LP.
    pub fn lp(&self) -> (LpProblem, WindowLayout) {
        self.window_lp(0..self.tps, None)
    }

    /// LP over TPs `tps`; `predecessor` holds the AC flow of the step just
    /// before the window, which then enters the first smoothing term.
    pub fn window_lp(&self, tps: Range<usize>, predecessor: Option<&[f64]>) -> (LpProblem, WindowLayout) {
        let spt = self.res.steps_per_tp();
        let first = tps.start * spt;
        let layout = WindowLayout {
            steps: tps.len() * spt,
            lines: self.num_lines(),
            nodes: self.n_nodes,
            coupled: predecessor.is_some(),
        };
        let s_len = layout.steps;
        let mut lp = LpProblem::new();

        // z, with TPs whose schedule sits on a bound pinned to that bound.
        let mut pinned = vec![vec![false; tps.len()]; layout.lines];
        for (a, row) in pinned.iter_mut().enumerate() {
            let (lo, hi) = self.bounds[a];
            for (kk, k) in tps.clone().enumerate() {
                let mean = self.target[a][k];
                let pin = if hi - lo <= BOUND_SLACK || mean >= hi - BOUND_SLACK * mean.abs().max(1.0) {
                    Some(mean.min(hi))
                } else if mean <= lo + BOUND_SLACK * mean.abs().max(1.0) {
                    Some(mean.max(lo))
                } else {
                    None
                };
                for _ in 0..spt {
                    match pin {
                        Some(v) => lp.add_var(0.0, v, v),
                        None => lp.add_var(0.0, lo, hi),
                    };
                }
                row[kk] = pin.is_some();
            }
        }
        for _ in 0..2 * layout.nodes * s_len {
            lp.add_var(1.0, 0.0, f64::INFINITY);
        }
        for _ in 0..2 * layout.lines * layout.smooth_terms() {
            lp.add_var(self.alpha, 0.0, f64::INFINITY);
        }
        debug_assert_eq!(lp.num_vars(), layout.num_vars());

        // Nodal balance: Σ_out z - Σ_in z - p + m = -base
        for n in 0..layout.nodes {
            for s in 0..s_len {
                let mut coeffs = Vec::with_capacity(4);
                for (a, &(from, to)) in self.ac_ends.iter().enumerate() {
                    if from == n {
                        coeffs.push((layout.z(a, s), 1.0));
                    }
                    if to == n {
                        coeffs.push((layout.z(a, s), -1.0));
                    }
                }
                coeffs.push((layout.need_pos(n, s), -1.0));
                coeffs.push((layout.need_neg(n, s), 1.0));
                lp.add_eq(coeffs, -self.base[n][first + s], ConstraintClass::PowerBalance);
            }
        }

        // TP energy, as a mean flow per TP.
        let w = 1.0 / spt as f64;
        for (a, row) in pinned.iter().enumerate() {
            for (kk, k) in tps.clone().enumerate() {
                if row[kk] {
                    continue;
                }
                let coeffs = (0..spt).map(|j| (layout.z(a, kk * spt + j), w)).collect();
                lp.add_eq(coeffs, self.target[a][k], ConstraintClass::TpEnergy);
            }
        }

        // Smoothing: z[s] - z[s-1] - u + v = 0 (first step against predecessor).
        for a in 0..layout.lines {
            let offset = usize::from(!layout.coupled);
            for term in 0..layout.smooth_terms() {
                let s = term + offset;
                let mut coeffs = vec![
                    (layout.z(a, s), 1.0),
                    (layout.smooth_pos(a, term), -1.0),
                    (layout.smooth_neg(a, term), 1.0),
                ];
                let rhs = if s == 0 {
                    predecessor.map_or(0.0, |p| p[a])
                } else {
                    coeffs.push((layout.z(a, s - 1), -1.0));
                    0.0
                };
                lp.add_eq(coeffs, rhs, ConstraintClass::Smoothing);
            }
        }
        (lp, layout)
    }

    fn window_ranges(&self, window: Window) -> Vec<Range<usize>> {
        let size = match window {
            Window::Full => self.tps,
            Window::Tps(n) => n.min(self.tps),
        };
        (0..self.tps)
            .step_by(size)
            .map(|start| start..(start + size).min(self.tps))
            .collect()
    }

    /// Need per node for given flows, straight from the balance equation.
    pub fn need_for_flows(&self, flows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..self.n_nodes)
            .map(|n| {
                let mut need = self.base[n].clone();
                for (a, &(from, to)) in self.ac_ends.iter().enumerate() {
                    if from == n {
                        need.iter_mut().zip(&flows[a]).for_each(|(o, z)| *o += z);
                    }
                    if to == n {
                        need.iter_mut().zip(&flows[a]).for_each(|(o, z)| *o -= z);
                    }
                }
                need
            })
            .collect()
    }

    /// Objective value of a complete set of flows.
    pub fn objective_of(&self, flows: &[Vec<f64>]) -> f64 {
        let need = self.need_for_flows(flows);
        let balancing: f64 = need.iter().flatten().map(|v| v.abs()).sum();
        balancing + self.alpha * smoothing_of(flows)
    }

    /// Flows held at their scheduled mean in every TP.
    pub fn basic_flows(&self) -> Vec<Vec<f64>> {
        let spt = self.res.steps_per_tp();
        self.target
            .iter()
            .map(|means| means.iter().flat_map(|&m| std::iter::repeat_n(m, spt)).collect())
            .collect()
    }
}

fn smoothing_of(flows: &[Vec<f64>]) -> f64 {
    flows
        .iter()
        .map(|z| z.windows(2).map(|p| (p[1] - p[0]).abs()).sum::<f64>())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDiagnostics {
    /// First TP of the window (0-based, inclusive).
    pub start_tp: usize,
    /// One past the last TP of the window.
    pub end_tp: usize,
    pub status: String,
    pub iterations: u32,
    pub lp_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub windows: Vec<WindowDiagnostics>,
    pub alpha: f64,
    /// Σ|need| over all nodes and steps, MW·steps.
    pub balancing_cost: f64,
    /// Σ|Δz| over all lines, MW.
    pub smoothing_cost: f64,
    pub max_bound_violation: f64,
    /// MWh.
    pub max_energy_residual: f64,
    pub max_balance_residual: f64,
}

#[derive(Debug, Clone)]
pub struct NettingResult {
    pub balancing_need: Vec<HrSeries>,
    pub ac_flows: Vec<HrSeries>,
    pub objective: f64,
    pub diagnostics: SolverDiagnostics,
}

/// Solves the netting LP over the configured windows.
pub fn solve_netting(problem: &NettingProblem, cfg: &NettingConfig) -> Result<NettingResult> {
    cfg.validate()?;
    let spt = problem.res.steps_per_tp();
    let lines = problem.num_lines();
    let mut flows: Vec<Vec<f64>> = vec![Vec::with_capacity(problem.steps()); lines];
    let mut windows = Vec::new();

    for (w, range) in problem.window_ranges(cfg.window).into_iter().enumerate() {
        let predecessor: Option<Vec<f64>> =
            (w > 0 && lines > 0).then(|| flows.iter().map(|z| *z.last().expect("previous window")).collect());
        let (lp, layout) = problem.window_lp(range.clone(), predecessor.as_deref());
        let sol = solve_lp(&lp, cfg.solver_tolerance).map_err(|f| match f {
            LpFailure::Infeasible(status) => Error::Infeasible {
                window: Some(w),
                class: ConstraintClass::TpEnergy,
                detail: format!("solver status {status}"),
            },
            LpFailure::Numerical(detail) => Error::Solver { window: w, detail },
        })?;
        for (a, z) in flows.iter_mut().enumerate() {
            let mut window_z: Vec<f64> = (0..layout.steps).map(|s| sol.x[layout.z(a, s)]).collect();
            repair_flows(&mut window_z, problem.bounds[a], &problem.target[a][range.clone()], spt);
            z.extend(window_z);
        }
        windows.push(WindowDiagnostics {
            start_tp: range.start,
            end_tp: range.end,
            status: sol.status,
            iterations: sol.iterations,
            lp_objective: sol.objective,
        });
    }

    let need = problem.need_for_flows(&flows);
    let balancing_cost: f64 = need.iter().flatten().map(|v| v.abs()).sum();
    let smoothing_cost = smoothing_of(&flows);

    let mut max_bound_violation: f64 = 0.0;
    let mut max_energy_residual: f64 = 0.0;
    for (a, z) in flows.iter().enumerate() {
        let (lo, hi) = problem.bounds[a];
        for &v in z {
            max_bound_violation = max_bound_violation.max(v - hi).max(lo - v);
        }
        for (k, tp) in z.chunks_exact(spt).enumerate() {
            let mean = tp.iter().sum::<f64>() / spt as f64;
            let r = problem.res.power_to_energy(mean - problem.target[a][k]).abs();
            max_energy_residual = max_energy_residual.max(r);
        }
    }
    let max_balance_residual = balance_residual(problem, &flows, &need);

    let tol = cfg.solver_tolerance;
    for (class, value) in [
        (ConstraintClass::TransmissionLimit, max_bound_violation),
        (ConstraintClass::TpEnergy, max_energy_residual),
        (ConstraintClass::PowerBalance, max_balance_residual),
    ] {
        if value > tol {
            return Err(Error::Solver {
                window: 0,
                detail: format!("{class} residual {value:e} exceeds tolerance {tol:e}"),
            });
        }
    }

    Ok(NettingResult {
        balancing_need: need.into_iter().map(HrSeries::from_trusted).collect(),
        ac_flows: flows.into_iter().map(HrSeries::from_trusted).collect(),
        objective: balancing_cost + problem.alpha * smoothing_cost,
        diagnostics: SolverDiagnostics {
            windows,
            alpha: problem.alpha,
            balancing_cost,
            smoothing_cost,
            max_bound_violation,
            max_energy_residual,
            max_balance_residual,
        },
    })
}

/// Re-evaluates the balance equation in a different summation order than
/// `need_for_flows`, so the residual reflects rounding in the reported need.
fn balance_residual(problem: &NettingProblem, flows: &[Vec<f64>], need: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (n, need_n) in need.iter().enumerate() {
        for (s, &v) in need_n.iter().enumerate() {
            let mut lhs = problem.base[n][s];
            for (a, &(from, to)) in problem.ac_ends.iter().enumerate().rev() {
                if from == n {
                    lhs += flows[a][s];
                }
                if to == n {
                    lhs -= flows[a][s];
                }
            }
            worst = worst.max((lhs - v).abs());
        }
    }
    worst
}

/// Clips interior-point flows into their bounds and restores each TP's mean
/// exactly by shifting steps in proportion to their remaining headroom.
fn repair_flows(z: &mut [f64], (lo, hi): (f64, f64), targets: &[f64], spt: usize) {
    for v in z.iter_mut() {
        *v = v.clamp(lo, hi);
    }
    for (tp, &mean) in z.chunks_exact_mut(spt).zip(targets) {
        let deficit = mean * spt as f64 - tp.iter().sum::<f64>();
        if deficit == 0.0 {
            continue;
        }
        let room: Vec<f64> = if deficit > 0.0 {
            tp.iter().map(|v| hi - v).collect()
        } else {
            tp.iter().map(|v| v - lo).collect()
        };
        let total: f64 = room.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let share = (deficit.abs() / total).min(1.0) * deficit.signum();
        for (v, r) in tp.iter_mut().zip(room) {
            *v = (*v + share * r).clamp(lo, hi);
        }
    }
}

/// Signed system-wide balancing need per step.
pub fn net_system_need(result: &NettingResult) -> HrSeries {
    let steps = result.balancing_need.first().map_or(0, |s| s.len());
    let mut total = vec![0.0; steps];
    for s in &result.balancing_need {
        total.iter_mut().zip(s.values()).for_each(|(t, v)| *t += v);
    }
    HrSeries::from_trusted(total)
}
