//! Netting of imbalances over AC interconnections.

mod lp;
mod network;
mod problem;
mod scenario;

pub use lp::{solve_lp, LpFailure, LpProblem, LpRow, LpSolution};
pub use network::{AcLine, HvdcLine, Network};
pub use problem::{
    build_netting_problem, net_system_need, solve_netting, NettingConfig, NettingProblem, NettingResult,
    SolverDiagnostics, Window, WindowDiagnostics, WindowLayout, DEFAULT_ALPHA, DEFAULT_SOLVER_TOLERANCE,
};
pub use scenario::{balancing_need_fixed_transmission, NegativeSteps, ScenarioHr};
