//! Summary statistics, density histograms, cause classification and ramp
//! adequacy of balancing-need series.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::disaggregate::{ConvergenceReport, RampWindow};
use crate::error::{Error, Result};
use crate::series::{HrSeries, Resolution};

pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_BIN_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalancingStats {
    pub max_need: f64,
    pub min_need: f64,
    pub mean_abs_need: f64,
    /// Fraction of steps with |need| ≤ the zero threshold.
    pub zero_share: f64,
}

fn is_zero(v: f64, threshold: f64) -> bool {
    v.abs() <= threshold
}

pub fn summary_stats(need: &HrSeries, zero_threshold: f64) -> Result<BalancingStats> {
    let v = need.values();
    if v.is_empty() {
        return Err(Error::Series("cannot summarise an empty series".into()));
    }
    let n = v.len() as f64;
    Ok(BalancingStats {
        max_need: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_need: v.iter().copied().fold(f64::INFINITY, f64::min),
        mean_abs_need: v.iter().map(|x| x.abs()).sum::<f64>() / n,
        zero_share: v.iter().filter(|x| is_zero(**x, zero_threshold)).count() as f64 / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub center: f64,
    pub density: f64,
}

/// Normalised histogram with bins `[(i - ½)·w, (i + ½)·w)` centred on
/// multiples of the bin width; only occupied bins are returned.
pub fn density_histogram(need: &HrSeries, bin_width: f64) -> Result<Vec<HistogramBin>> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::Parameter(format!("bin width must be > 0, got {bin_width}")));
    }
    let v = need.values();
    if v.is_empty() {
        return Err(Error::Series("cannot bin an empty series".into()));
    }
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &x in v {
        let bin = (x / bin_width + 0.5).floor() as i64;
        *counts.entry(bin).or_default() += 1;
    }
    let total = v.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(bin, c)| HistogramBin {
            center: bin as f64 * bin_width,
            density: c as f64 / (total * bin_width),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CauseLabel {
    Zero,
    Ramping,
    Variability,
}

impl CauseLabel {
    pub fn name(self) -> &'static str {
        match self {
            CauseLabel::Zero => "zero",
            CauseLabel::Ramping => "ramping",
            CauseLabel::Variability => "variability",
        }
    }
}

impl std::str::FromStr for CauseLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero" => Ok(CauseLabel::Zero),
            "ramping" => Ok(CauseLabel::Ramping),
            "variability" => Ok(CauseLabel::Variability),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Labels each step of a node's need as zero, ramping- or variability-caused.
///
/// `ramp_windows` holds the final ramp windows of every controllable
/// component and HVDC line attached to the node.
pub fn classify_cause(
    need: &HrSeries,
    ramp_windows: &[&[RampWindow]],
    res: Resolution,
    zero_threshold: f64,
) -> Vec<CauseLabel> {
    let mut ramping = vec![false; need.len()];
    for windows in ramp_windows {
        for w in windows.iter() {
            let steps = w.steps(res);
            let end = steps.end.min(ramping.len());
            for flag in &mut ramping[steps.start.min(end)..end] {
                *flag = true;
            }
        }
    }
    need.values()
        .iter()
        .zip(ramping)
        .map(|(&v, r)| {
            if is_zero(v, zero_threshold) {
                CauseLabel::Zero
            } else if r {
                CauseLabel::Ramping
            } else {
                CauseLabel::Variability
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampAdequacy {
    pub shifts: usize,
    pub clipped_shifts: usize,
    pub clipped_share: f64,
}

/// Share of TP shifts at which each component needed more than the allowed
/// ramp window.
pub fn ramp_adequacy_report(reports: &[&ConvergenceReport]) -> Result<Vec<RampAdequacy>> {
    let Some(first) = reports.first() else {
        return Ok(Vec::new());
    };
    let shifts = first.ramp_windows.len();
    let mut out = Vec::with_capacity(reports.len());
    for (i, r) in reports.iter().enumerate() {
        if r.ramp_windows.len() != shifts {
            return Err(Error::Series(format!(
                "report {i} covers {} shifts, expected {shifts}",
                r.ramp_windows.len()
            )));
        }
        let clipped = r.clipped_shifts();
        out.push(RampAdequacy {
            shifts,
            clipped_shifts: clipped,
            clipped_share: if shifts == 0 {
                0.0
            } else {
                clipped as f64 / shifts as f64
            },
        });
    }
    Ok(out)
}
