use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::component::Category;
use crate::disaggregate::{default_e_min, CorrectionSettings, RampSpec, DEFAULT_MAX_ITERATIONS, MIN_W_MAX_MW};
use crate::error::{Error, Result};
use crate::netting::{AcLine, HvdcLine, NettingConfig};
use crate::series::Resolution;

/// Unit of a ramp rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampMode {
    /// Percent of the component's horizon maximum per minute.
    PercentOfMax,
    /// MW per minute.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampRate {
    pub mode: RampMode,
    pub rate: f64,
}

impl RampRate {
    pub const fn percent(rate: f64) -> Self {
        RampRate {
            mode: RampMode::PercentOfMax,
            rate,
        }
    }

    /// Ramp spec for a component whose horizon maximum is `g_max` MW.
    pub fn spec(&self, g_max: f64) -> Result<RampSpec> {
        match self.mode {
            RampMode::PercentOfMax => RampSpec::percent_of_max(self.rate, g_max.max(MIN_W_MAX_MW)),
            RampMode::Absolute => RampSpec::absolute(self.rate),
        }
    }
}

/// Ramp rates of the controllable categories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampTable {
    pub hydro: RampRate,
    pub flexible: RampRate,
    pub thermal: RampRate,
    pub nuclear: RampRate,
}

impl RampTable {
    /// Rates of today's units, %/min.
    pub const NORMAL: RampTable = RampTable {
        hydro: RampRate::percent(5.0),
        flexible: RampRate::percent(5.0),
        thermal: RampRate::percent(3.0),
        nuclear: RampRate::percent(1.5),
    };

    /// Rates assuming faster ramping units, %/min.
    pub const FAST: RampTable = RampTable {
        hydro: RampRate::percent(15.0),
        flexible: RampRate::percent(15.0),
        thermal: RampRate::percent(10.0),
        nuclear: RampRate::percent(5.0),
    };

    /// Rate of a controllable category; `None` otherwise.
    pub fn get(&self, c: Category) -> Option<&RampRate> {
        match c {
            Category::Hydro => Some(&self.hydro),
            Category::Flexible => Some(&self.flexible),
            Category::Thermal => Some(&self.thermal),
            Category::Nuclear => Some(&self.nuclear),
            Category::Vres | Category::Demand => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for c in Category::ALL.into_iter().filter(|c| c.is_controllable()) {
            let r = self.get(c).expect("controllable");
            if !(r.rate.is_finite() && r.rate > 0.0) {
                return Err(Error::Parameter(format!("{c} ramp rate must be > 0, got {}", r.rate)));
            }
        }
        Ok(())
    }
}

impl Default for RampTable {
    fn default() -> Self {
        RampTable::NORMAL
    }
}

/// Correction settings as written in a manifest; `e_min` defaults to a
/// value scaled by the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectionConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_min: Option<f64>,
    pub max_iterations: usize,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig {
            e_min: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl CorrectionConfig {
    pub fn resolve(&self, tps: usize) -> CorrectionSettings {
        CorrectionSettings {
            e_min: self.e_min.unwrap_or_else(|| default_e_min(tps)),
            max_iterations: self.max_iterations,
        }
    }
}

/// Input files of a scenario, relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentFiles {
    pub hydro: PathBuf,
    pub flexible: PathBuf,
    pub thermal: PathBuf,
    pub nuclear: PathBuf,
    pub vres: PathBuf,
    pub demand: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ac: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hvdc: Option<PathBuf>,
}

impl ComponentFiles {
    pub fn category(&self, c: Category) -> &Path {
        match c {
            Category::Hydro => &self.hydro,
            Category::Flexible => &self.flexible,
            Category::Thermal => &self.thermal,
            Category::Nuclear => &self.nuclear,
            Category::Vres => &self.vres,
            Category::Demand => &self.demand,
        }
    }

    /// Conventional file names used when a scenario is saved.
    pub fn standard(with_ac: bool, with_hvdc: bool) -> Self {
        ComponentFiles {
            hydro: "hydro.csv".into(),
            flexible: "flexible.csv".into(),
            thermal: "thermal.csv".into(),
            nuclear: "nuclear.csv".into(),
            vres: "vres.csv".into(),
            demand: "demand.csv".into(),
            ac: with_ac.then(|| "ac.csv".into()),
            hvdc: with_hvdc.then(|| "hvdc.csv".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioManifest {
    pub name: String,
    pub horizon_tps: usize,
    pub nodes: Vec<String>,
    pub network: PathBuf,
    pub resolution: Resolution,
    pub components: ComponentFiles,
    #[serde(default)]
    pub ramp: RampTable,
    #[serde(default)]
    pub netting: NettingConfig,
    #[serde(default)]
    pub correction: CorrectionConfig,
}

impl ScenarioManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: ScenarioManifest = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        m.validate().map_err(|e| Error::Validation {
            file: path.to_path_buf(),
            row: None,
            message: e.to_string(),
        })?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon_tps < 2 {
            return Err(Error::Parameter(format!(
                "horizon_tps must be at least 2, got {}",
                self.horizon_tps
            )));
        }
        if self.nodes.is_empty() {
            return Err(Error::Parameter("at least one node is required".into()));
        }
        self.ramp.validate()?;
        self.netting.validate()?;
        self.correction.resolve(self.horizon_tps).validate()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serialises")
    }
}

/// Network description file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub ac: Vec<AcLine>,
    #[serde(default)]
    pub hvdc: Vec<HvdcLine>,
}
