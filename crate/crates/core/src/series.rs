//! Time-series primitives: trading-period (TP) energy series, high-resolution
//! power series and the conversions between them.
//!
//! Energies are MWh per TP; high-resolution values are MW. One
//! high-resolution step is read as an instantaneous power sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// TP length and high-resolution step length, both in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawResolution", into = "RawResolution")]
pub struct Resolution {
    tp_minutes: u32,
    step_minutes: u32,
}

#[derive(Serialize, Deserialize)]
struct RawResolution {
    tp_minutes: u32,
    step_minutes: u32,
}

impl TryFrom<RawResolution> for Resolution {
    type Error = Error;

    fn try_from(raw: RawResolution) -> Result<Self> {
        Resolution::new(raw.tp_minutes, raw.step_minutes)
    }
}

impl From<Resolution> for RawResolution {
    fn from(r: Resolution) -> Self {
        RawResolution {
            tp_minutes: r.tp_minutes,
            step_minutes: r.step_minutes,
        }
    }
}

impl Resolution {
    pub fn new(tp_minutes: u32, step_minutes: u32) -> Result<Self> {
        if tp_minutes == 0 || step_minutes == 0 {
            return Err(Error::Resolution("tp_minutes and step_minutes must be positive".into()));
        }
        if !tp_minutes.is_multiple_of(step_minutes) {
            return Err(Error::Resolution(format!(
                "step of {step_minutes} min does not divide a {tp_minutes} min TP"
            )));
        }
        if tp_minutes / step_minutes < 2 {
            return Err(Error::Resolution(
                "a TP must contain at least two high-resolution steps".into(),
            ));
        }
        Ok(Resolution {
            tp_minutes,
            step_minutes,
        })
    }

    /// Hourly TPs with minutely steps.
    pub fn hourly_minutely() -> Self {
        Resolution {
            tp_minutes: 60,
            step_minutes: 1,
        }
    }

    pub fn tp_minutes(&self) -> u32 {
        self.tp_minutes
    }

    pub fn step_minutes(&self) -> u32 {
        self.step_minutes
    }

    pub fn steps_per_tp(&self) -> usize {
        (self.tp_minutes / self.step_minutes) as usize
    }

    pub fn tp_hours(&self) -> f64 {
        f64::from(self.tp_minutes) / 60.0
    }

    pub fn step_hours(&self) -> f64 {
        f64::from(self.step_minutes) / 60.0
    }

    /// Continuous time (minutes from horizon start) at the centre of a step.
    pub fn step_center_minutes(&self, step: usize) -> f64 {
        (step as f64 + 0.5) * f64::from(self.step_minutes)
    }

    /// MW level that delivers `energy_mwh` evenly over one TP.
    pub fn energy_to_power(&self, energy_mwh: f64) -> f64 {
        energy_mwh / self.tp_hours()
    }

    pub fn power_to_energy(&self, power_mw: f64) -> f64 {
        power_mw * self.tp_hours()
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Series(format!("non-finite value at index {i}"))),
        None => Ok(()),
    }
}

/// Energy per trading period (MWh/TP), one value per TP.
#[derive(Debug, Clone, PartialEq)]
pub struct TpSeries(Vec<f64>);

impl TpSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Series(format!(
                "a TP series needs at least 2 periods, got {}",
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(TpSeries(values))
    }

    pub fn constant(value: f64, len: usize) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * k).collect())
    }
}

/// High-resolution power trajectory (MW), `steps_per_tp` values per TP.
#[derive(Debug, Clone, PartialEq)]
pub struct HrSeries(Vec<f64>);

impl HrSeries {
    /// Builds a series whose length must be a whole number of TPs at `res`.
    pub fn new(values: Vec<f64>, res: Resolution) -> Result<Self> {
        let spt = res.steps_per_tp();
        if values.is_empty() || !values.len().is_multiple_of(spt) {
            return Err(Error::Series(format!(
                "high-resolution length {} is not a positive multiple of {spt} steps per TP",
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(HrSeries(values))
    }

    pub fn zeros(tps: usize, res: Resolution) -> Self {
        HrSeries(vec![0.0; tps * res.steps_per_tp()])
    }

    pub(crate) fn from_trusted(values: Vec<f64>) -> Self {
        HrSeries(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn tps(&self, res: Resolution) -> usize {
        self.0.len() / res.steps_per_tp()
    }
}

/// Step-function expansion of TP energies to their constant MW level.
pub fn basic_power_expand(tp: &TpSeries, res: Resolution) -> HrSeries {
    let spt = res.steps_per_tp();
    let mut out = Vec::with_capacity(tp.len() * spt);
    for &energy in tp.values() {
        let level = res.energy_to_power(energy);
        out.extend(std::iter::repeat_n(level, spt));
    }
    HrSeries(out)
}

/// Element-wise deviation of actual power from basic power.
pub fn power_imbalance(actual: &HrSeries, basic: &HrSeries) -> Result<HrSeries> {
    if actual.len() != basic.len() {
        return Err(Error::LengthMismatch {
            expected: basic.len(),
            actual: actual.len(),
        });
    }
    Ok(HrSeries(
        actual.values().iter().zip(basic.values()).map(|(a, b)| a - b).collect(),
    ))
}

/// Energy of each TP (MWh) delivered by a high-resolution trajectory.
pub fn tp_energy_of(hr: &HrSeries, res: Resolution) -> Result<TpSeries> {
    let spt = res.steps_per_tp();
    if hr.is_empty() || !hr.len().is_multiple_of(spt) {
        return Err(Error::Series(format!(
            "high-resolution length {} is not a multiple of {spt}",
            hr.len()
        )));
    }
    let step_h = res.step_hours();
    let energies = hr
        .values()
        .chunks_exact(spt)
        .map(|tp| tp.iter().sum::<f64>() * step_h)
        .collect();
    // Single-TP trajectories are legal here even though TpSeries requires two.
    Ok(TpSeries(energies))
}

/// TP energy imbalance (MWh) caused by a series of power imbalances.
pub fn tp_energy_imbalance(imb: &HrSeries, res: Resolution) -> Result<TpSeries> {
    tp_energy_of(imb, res)
}
