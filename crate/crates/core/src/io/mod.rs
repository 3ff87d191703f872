//! Reading and writing scenarios and run results.
//!
//! A scenario directory holds a TOML manifest, a TOML network description
//! and one CSV of TP energies per category (`node,tp_index,energy_mwh`) and
//! per line kind (`from,to,tp_index,energy_mwh`). TP indices are 1-based.
//! All floats are written in shortest round-trip form, so a save/load cycle
//! reproduces every value bit for bit.

mod manifest;
mod results;
mod tables;

use std::path::{Path, PathBuf};

pub use manifest::{ComponentFiles, CorrectionConfig, NetworkFile, RampMode, RampRate, RampTable, ScenarioManifest};
pub use results::*;
pub use tables::{CATEGORY_HEADER, LINE_HEADER};

use crate::component::{Category, PerCategory};
use crate::disaggregate::w_max_of;
use crate::error::{Error, Result};
use crate::netting::{AcLine, HvdcLine, NettingConfig, Network};
use crate::series::{Resolution, TpSeries};
use tables::{position_map, read_energy_table, render_energy_table};

/// Environment variable that overrides the output directory of a run.
pub const OUT_DIR_ENV: &str = "INTRATP_OUT_DIR";

/// TP-resolution scenario with its run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub res: Resolution,
    pub network: Network,
    /// Per node, in `network.nodes()` order.
    pub nodes: Vec<PerCategory<TpSeries>>,
    /// Per AC line, in `network.ac_lines()` order.
    pub ac: Vec<TpSeries>,
    /// Per HVDC line, in `network.hvdc_lines()` order.
    pub hvdc: Vec<TpSeries>,
    pub ramp: RampTable,
    pub netting: NettingConfig,
    pub correction: CorrectionConfig,
}

impl Scenario {
    pub fn tps(&self) -> usize {
        self.nodes.first().map_or(0, |n| n.demand.len())
    }

    /// Horizon maximum of a component's basic power, floored at 1 MW.
    pub fn g_max(&self, node: usize, category: Category) -> f64 {
        w_max_of(self.nodes[node].get(category), self.res)
    }

    /// Checks shapes and sign constraints of an in-memory scenario.
    pub fn validate(&self) -> Result<()> {
        let tps = self.tps();
        if self.nodes.len() != self.network.nodes().len() {
            return Err(Error::Scenario(format!(
                "{} node bundles for {} network nodes",
                self.nodes.len(),
                self.network.nodes().len()
            )));
        }
        if self.ac.len() != self.network.ac_lines().len() || self.hvdc.len() != self.network.hvdc_lines().len() {
            return Err(Error::Scenario("line series do not match the network".into()));
        }
        for (n, per) in self.nodes.iter().enumerate() {
            for (c, s) in per.iter() {
                if s.len() != tps {
                    return Err(Error::Scenario(format!(
                        "{c} series of node {} has {} TPs, expected {tps}",
                        self.network.nodes()[n],
                        s.len()
                    )));
                }
                if c.is_nonnegative() && s.values().iter().any(|v| *v < 0.0) {
                    return Err(Error::Scenario(format!(
                        "{c} series of node {} has negative values",
                        self.network.nodes()[n]
                    )));
                }
            }
        }
        if let Some(s) = self.ac.iter().chain(&self.hvdc).find(|s| s.len() != tps) {
            return Err(Error::Scenario(format!(
                "line series has {} TPs, expected {tps}",
                s.len()
            )));
        }
        for name in self.network.nodes() {
            check_name(name)?;
        }
        self.ramp.validate()?;
        self.netting.validate()?;
        self.correction.resolve(tps).validate()
    }
}

/// Node names end up in CSV cells and file names.
fn check_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !name.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(Error::Network(format!(
            "node name {name:?} must consist of ASCII letters, digits, '_', '-' or '.'"
        )))
    }
}

fn read_network(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: NetworkFile = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.message().to_string(),
    })?;
    let invalid = |e: Error| Error::Validation {
        file: path.to_path_buf(),
        row: None,
        message: e.to_string(),
    };
    for name in file.nodes.iter().chain(file.hvdc.iter().flat_map(|l| [&l.from, &l.to])) {
        check_name(name).map_err(invalid)?;
    }
    Network::new(file.nodes, file.ac, file.hvdc).map_err(invalid)
}

/// Loads and validates the scenario described by the manifest at `path`.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let manifest = ScenarioManifest::read(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let net_path = dir.join(&manifest.network);
    let network = read_network(&net_path)?;
    if network.nodes() != manifest.nodes.as_slice() {
        return Err(Error::Validation {
            file: path.to_path_buf(),
            row: None,
            message: format!(
                "manifest nodes {:?} differ from the network nodes {:?} in {}",
                manifest.nodes,
                network.nodes(),
                net_path.display()
            ),
        });
    }
    let tps = manifest.horizon_tps;
    let node_pos = position_map(network.nodes());
    let node_names = network.nodes();

    let mut per_category = Vec::with_capacity(Category::ALL.len());
    for c in Category::ALL {
        let file = dir.join(manifest.components.category(c));
        let series = read_energy_table(
            &file,
            &CATEGORY_HEADER,
            tps,
            node_names.len(),
            c.is_nonnegative(),
            |i| format!("node {}", node_names[i]),
            |k| {
                node_pos
                    .get(k[0])
                    .copied()
                    .ok_or_else(|| format!("unknown node {:?}", k[0]))
            },
        )?;
        per_category.push(series);
    }
    let mut columns: Vec<std::vec::IntoIter<TpSeries>> = per_category.into_iter().map(Vec::into_iter).collect();
    let nodes: Vec<PerCategory<TpSeries>> = (0..node_names.len())
        .map(|_| {
            let mut it = columns.iter_mut();
            PerCategory::from_fn(|_| it.next().expect("category").next().expect("node"))
        })
        .collect();

    let ac = read_lines(
        dir,
        path,
        manifest.components.ac.as_deref(),
        "ac",
        tps,
        network.ac_lines().iter().map(AcLine::label).collect(),
        |f, t| network.ac_line_index(f, t),
    )?;
    let hvdc = read_lines(
        dir,
        path,
        manifest.components.hvdc.as_deref(),
        "hvdc",
        tps,
        network.hvdc_lines().iter().map(HvdcLine::label).collect(),
        |f, t| network.hvdc_line_index(f, t),
    )?;

    Ok(Scenario {
        name: manifest.name,
        res: manifest.resolution,
        network,
        nodes,
        ac,
        hvdc,
        ramp: manifest.ramp,
        netting: manifest.netting,
        correction: manifest.correction,
    })
}

fn read_lines(
    dir: &Path,
    manifest: &Path,
    file: Option<&Path>,
    kind: &str,
    tps: usize,
    labels: Vec<String>,
    index: impl Fn(&str, &str) -> Option<usize>,
) -> Result<Vec<TpSeries>> {
    match file {
        None if labels.is_empty() => Ok(Vec::new()),
        None => Err(Error::Validation {
            file: manifest.to_path_buf(),
            row: None,
            message: format!("the network has {kind} lines but components.{kind} is not set"),
        }),
        Some(f) => read_energy_table(
            &dir.join(f),
            &LINE_HEADER,
            tps,
            labels.len(),
            false,
            |i| format!("line {}", labels[i]),
            |k| index(k[0], k[1]).ok_or_else(|| format!("unknown {kind} line {}->{}", k[0], k[1])),
        ),
    }
}

/// Writes `scenario` as manifest, network and CSV files into `dir`.
/// Returns the manifest path.
pub fn save_scenario(scenario: &Scenario, dir: &Path) -> Result<PathBuf> {
    scenario.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))?;
    let net = &scenario.network;
    let components = ComponentFiles::standard(!net.ac_lines().is_empty(), !net.hvdc_lines().is_empty());
    let manifest = ScenarioManifest {
        name: scenario.name.clone(),
        horizon_tps: scenario.tps(),
        nodes: net.nodes().to_vec(),
        network: "network.toml".into(),
        resolution: scenario.res,
        components: components.clone(),
        ramp: scenario.ramp,
        netting: scenario.netting,
        correction: scenario.correction,
    };
    let network_file = NetworkFile {
        nodes: net.nodes().to_vec(),
        ac: net.ac_lines().to_vec(),
        hvdc: net.hvdc_lines().to_vec(),
    };
    write_file(
        &dir.join("network.toml"),
        &toml::to_string(&network_file).expect("network serialises"),
    )?;
    for c in Category::ALL {
        let rows = net
            .nodes()
            .iter()
            .zip(&scenario.nodes)
            .map(|(name, per)| (vec![name.as_str()], per.get(c)));
        write_file(
            &dir.join(components.category(c)),
            &render_energy_table(&CATEGORY_HEADER, rows),
        )?;
    }
    if let Some(f) = &components.ac {
        let rows = net
            .ac_lines()
            .iter()
            .zip(&scenario.ac)
            .map(|(l, s)| (vec![l.from.as_str(), l.to.as_str()], s));
        write_file(&dir.join(f), &render_energy_table(&LINE_HEADER, rows))?;
    }
    if let Some(f) = &components.hvdc {
        let rows = net
            .hvdc_lines()
            .iter()
            .zip(&scenario.hvdc)
            .map(|(l, s)| (vec![l.from.as_str(), l.to.as_str()], s));
        write_file(&dir.join(f), &render_energy_table(&LINE_HEADER, rows))?;
    }
    let path = dir.join("manifest.toml");
    write_file(&path, &manifest.to_toml())?;
    Ok(path)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::write(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::write(path, e))
}

/// File-name form of a line label.
pub fn line_file_stem(from: &str, to: &str) -> String {
    format!("{from}__{to}")
}
