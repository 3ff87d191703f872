//! Linear ramps of controllable components around TP shifts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{HrSeries, Resolution, TpSeries};

/// Floor applied to a component's maximum output when rates are relative.
pub const MIN_W_MAX_MW: f64 = 1.0;

/// Ramp capability of a controllable component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RampSpec {
    /// `rate` percent of `w_max` per minute.
    PercentOfMax { rate: f64, w_max: f64 },
    /// `rate` MW per minute.
    Absolute { rate: f64 },
}

impl RampSpec {
    pub fn percent_of_max(rate: f64, w_max: f64) -> Result<Self> {
        let spec = RampSpec::PercentOfMax { rate, w_max };
        spec.validate()?;
        Ok(spec)
    }

    pub fn absolute(rate: f64) -> Result<Self> {
        let spec = RampSpec::Absolute { rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RampSpec::PercentOfMax { rate, w_max } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(Error::Parameter(format!("ramp rate must be > 0, got {rate}")));
                }
                if !(w_max.is_finite() && w_max >= MIN_W_MAX_MW) {
                    return Err(Error::Parameter(format!(
                        "w_max must be at least {MIN_W_MAX_MW} MW, got {w_max}"
                    )));
                }
            }
            RampSpec::Absolute { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(Error::Parameter(format!("ramp rate must be > 0, got {rate}")));
                }
            }
        }
        Ok(())
    }

    /// Ramp speed in MW per minute.
    pub fn mw_per_minute(&self) -> f64 {
        match *self {
            RampSpec::PercentOfMax { rate, w_max } => rate / 100.0 * w_max,
            RampSpec::Absolute { rate } => rate,
        }
    }

    /// Same spec with absolute rates multiplied by `k`; relative rates keep
    /// their percentage and scale `w_max` instead.
    pub fn scaled(&self, k: f64) -> Self {
        match *self {
            RampSpec::PercentOfMax { rate, w_max } => RampSpec::PercentOfMax { rate, w_max: w_max * k },
            RampSpec::Absolute { rate } => RampSpec::Absolute { rate: rate * k },
        }
    }
}

/// Horizon maximum of a component's basic power, floored at 1 MW.
pub fn w_max_of(tp: &TpSeries, res: Resolution) -> f64 {
    res.energy_to_power(tp.max_abs()).max(MIN_W_MAX_MW)
}

/// Half-width of the ramp across the shift from TP `shift_index` to the next.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampWindow {
    pub shift_index: usize,
    pub c_minutes: f64,
    pub clipped: bool,
}

impl RampWindow {
    /// Continuous time of the shift, in minutes from horizon start.
    pub fn shift_minutes(&self, res: Resolution) -> f64 {
        (self.shift_index as f64 + 1.0) * f64::from(res.tp_minutes())
    }

    /// High-resolution steps whose centre lies strictly inside the ramp.
    pub fn steps(&self, res: Resolution) -> std::ops::Range<usize> {
        if self.c_minutes <= 0.0 {
            return 0..0;
        }
        let step = f64::from(res.step_minutes());
        let shift = self.shift_minutes(res);
        // centre (j + 0.5)·step in (shift - c, shift + c)
        let lo = ((shift - self.c_minutes) / step - 0.5).floor() + 1.0;
        let hi = ((shift + self.c_minutes) / step - 0.5).ceil();
        let lo = lo.max(0.0) as usize;
        let hi = hi.max(0.0) as usize;
        lo..hi.max(lo)
    }
}

/// Ramp half-width for a level change between adjacent TPs (MW levels).
pub fn ramp_window(shift_index: usize, level_from: f64, level_to: f64, spec: &RampSpec, res: Resolution) -> RampWindow {
    let cap = f64::from(res.tp_minutes()) / 2.0;
    let delta = (level_to - level_from).abs();
    let unclipped = delta / spec.mw_per_minute() / 2.0;
    if unclipped > cap {
        RampWindow {
            shift_index,
            c_minutes: cap,
            clipped: true,
        }
    } else {
        RampWindow {
            shift_index,
            c_minutes: unclipped,
            clipped: false,
        }
    }
}

/// Continuous piecewise-linear trajectory of a controllable component.
#[derive(Debug, Clone)]
pub struct ControllableTrajectory {
    levels: Vec<f64>,
    windows: Vec<RampWindow>,
    res: Resolution,
}

impl ControllableTrajectory {
    pub fn new(tp: &TpSeries, spec: &RampSpec, res: Resolution) -> Self {
        Self::from_levels(tp.values().iter().map(|&e| res.energy_to_power(e)).collect(), spec, res)
    }

    pub(crate) fn from_levels(levels: Vec<f64>, spec: &RampSpec, res: Resolution) -> Self {
        let windows = levels
            .windows(2)
            .enumerate()
            .map(|(k, pair)| ramp_window(k, pair[0], pair[1], spec, res))
            .collect();
        ControllableTrajectory { levels, windows, res }
    }

    pub fn windows(&self) -> &[RampWindow] {
        &self.windows
    }

    pub fn into_windows(self) -> Vec<RampWindow> {
        self.windows
    }

    /// Power at continuous time `minute` from the start of the horizon.
    pub fn value_at(&self, minute: f64) -> f64 {
        let tp_len = f64::from(self.res.tp_minutes());
        let last = self.levels.len() - 1;
        let k = ((minute / tp_len).floor().max(0.0) as usize).min(last);
        // Ramp into TP k from k-1.
        if k > 0 {
            let w = &self.windows[k - 1];
            let shift = k as f64 * tp_len;
            if w.c_minutes > 0.0 && minute < shift + w.c_minutes {
                return lerp_ramp(self.levels[k - 1], self.levels[k], shift, w.c_minutes, minute);
            }
        }
        // Ramp out of TP k into k+1.
        if k < last {
            let w = &self.windows[k];
            let shift = (k + 1) as f64 * tp_len;
            if w.c_minutes > 0.0 && minute > shift - w.c_minutes {
                return lerp_ramp(self.levels[k], self.levels[k + 1], shift, w.c_minutes, minute);
            }
        }
        self.levels[k]
    }

    pub fn sample(&self) -> HrSeries {
        let n = self.levels.len() * self.res.steps_per_tp();
        HrSeries::from_trusted((0..n).map(|j| self.value_at(self.res.step_center_minutes(j))).collect())
    }
}

fn lerp_ramp(from: f64, to: f64, shift: f64, c: f64, minute: f64) -> f64 {
    let u = ((minute - (shift - c)) / (2.0 * c)).clamp(0.0, 1.0);
    from + (to - from) * u
}

/// Basic power with linear ramps of half-width C centred on every TP shift.
pub fn hr_controllable(tp: &TpSeries, spec: &RampSpec, res: Resolution) -> HrSeries {
    ControllableTrajectory::new(tp, spec, res).sample()
}
