//! Synthetic scenarios: seeded random systems and small hand-built cases.
//!
//! Every generated scenario is balanced per node and TP: production plus
//! imports equals demand plus exports.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::component::{Category, PerCategory};
use crate::error::{Error, Result};
use crate::io::{save_scenario, write_file, CorrectionConfig, RampTable, Scenario};
use crate::netting::{AcLine, HvdcLine, NettingConfig, Network};
use crate::series::{basic_power_expand, HrSeries, Resolution, TpSeries};

/// Name of the generator recorded alongside random scenarios.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    pub seed: u64,
    pub nodes: usize,
    pub tps: usize,
    pub res: Resolution,
    /// Largest TP-to-TP change of a component, as a share of its capacity.
    pub volatility: f64,
    /// Attach an HVDC link to an external area at every other node.
    pub hvdc: bool,
}

impl RandomParams {
    pub fn new(seed: u64, nodes: usize, tps: usize) -> Self {
        RandomParams {
            seed,
            nodes,
            tps,
            res: Resolution::hourly_minutely(),
            volatility: 0.15,
            hvdc: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::Parameter("at least one node is required".into()));
        }
        if self.tps < 2 {
            return Err(Error::Parameter(format!(
                "at least 2 TPs are required, got {}",
                self.tps
            )));
        }
        if !(self.volatility.is_finite() && (0.0..=1.0).contains(&self.volatility)) {
            return Err(Error::Parameter(format!(
                "volatility must lie in [0, 1], got {}",
                self.volatility
            )));
        }
        Ok(())
    }
}

/// Bounded random walk of power levels in `[lo, hi]`, MW.
fn walk(rng: &mut ChaCha8Rng, tps: usize, lo: f64, hi: f64, volatility: f64) -> Vec<f64> {
    let span = hi - lo;
    let mut level = rng.gen_range(lo..=hi);
    (0..tps)
        .map(|_| {
            let v = level;
            level = (level + rng.gen_range(-1.0..=1.0) * volatility * span).clamp(lo, hi);
            v
        })
        .collect()
}

fn round_mw(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// Random balanced scenario on a ring of AC lines.
pub fn synth_random(p: &RandomParams) -> Result<Scenario> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let tp_h = p.res.tp_hours();
    let names: Vec<String> = (1..=p.nodes).map(|i| format!("N{i}")).collect();

    let mut ac = Vec::new();
    let ring = match p.nodes {
        1 => 0,
        2 => 1,
        n => n,
    };
    for i in 0..ring {
        let ntc = round_mw(rng.gen_range(300.0..1500.0));
        ac.push(AcLine {
            from: names[i].clone(),
            to: names[(i + 1) % p.nodes].clone(),
            ntc_fwd: ntc,
            ntc_rev: round_mw(ntc * rng.gen_range(0.7..1.0)),
            trm: round_mw(rng.gen_range(20.0..150.0)),
        });
    }
    let mut hvdc = Vec::new();
    if p.hvdc {
        for i in (0..p.nodes).step_by(2) {
            let cap = round_mw(rng.gen_range(400.0..1400.0));
            hvdc.push(HvdcLine {
                from: names[i].clone(),
                to: format!("X{}", i + 1),
                ramp_mw_per_min: 30.0,
                cap_fwd: cap,
                cap_rev: cap,
            });
        }
    }

    // MW levels per TP.
    let mut prod: Vec<PerCategory<Vec<f64>>> = Vec::with_capacity(p.nodes);
    for _ in 0..p.nodes {
        let hydro_cap = rng.gen_range(200.0..1500.0);
        let thermal_cap = rng.gen_range(0.0..800.0);
        let nuclear_cap = if rng.gen_bool(0.3) {
            rng.gen_range(500.0..1500.0)
        } else {
            0.0
        };
        let flex_cap = rng.gen_range(0.0..200.0);
        let vres_cap = rng.gen_range(100.0..1500.0);
        let v = p.volatility;
        prod.push(PerCategory {
            hydro: walk(&mut rng, p.tps, 0.1 * hydro_cap, hydro_cap, v),
            flexible: walk(&mut rng, p.tps, -flex_cap, flex_cap, v),
            thermal: walk(&mut rng, p.tps, 0.2 * thermal_cap, thermal_cap, v),
            nuclear: walk(&mut rng, p.tps, 0.9 * nuclear_cap, nuclear_cap, v / 5.0),
            vres: walk(&mut rng, p.tps, 0.0, vres_cap, v),
            demand: vec![0.0; p.tps],
        });
    }
    let ac_flow: Vec<Vec<f64>> = ac
        .iter()
        .map(|l| walk(&mut rng, p.tps, -0.6 * l.ntc_rev, 0.6 * l.ntc_fwd, p.volatility))
        .collect();
    let hvdc_flow: Vec<Vec<f64>> = hvdc
        .iter()
        .map(|l| walk(&mut rng, p.tps, -0.8 * l.cap_rev, 0.8 * l.cap_fwd, p.volatility))
        .collect();

    // Round levels to energies first so the balance below is exact in MWh.
    let to_energy = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| round_mw(x * tp_h)).collect() };
    let ac_e: Vec<Vec<f64>> = ac_flow.iter().map(|v| to_energy(v)).collect();
    let hvdc_e: Vec<Vec<f64>> = hvdc_flow.iter().map(|v| to_energy(v)).collect();
    let mut nodes_e: Vec<PerCategory<Vec<f64>>> = prod
        .iter()
        .map(|per| PerCategory::from_fn(|c| to_energy(per.get(c))))
        .collect();

    let min_demand = 50.0 * tp_h;
    for (n, per) in nodes_e.iter_mut().enumerate() {
        for t in 0..p.tps {
            let mut export = 0.0;
            for (a, l) in ac.iter().enumerate() {
                if l.from == names[n] {
                    export += ac_e[a][t];
                }
                if l.to == names[n] {
                    export -= ac_e[a][t];
                }
            }
            for (b, l) in hvdc.iter().enumerate() {
                if l.from == names[n] {
                    export += hvdc_e[b][t];
                }
            }
            let production = |per: &PerCategory<Vec<f64>>| -> f64 {
                Category::ALL
                    .into_iter()
                    .filter(|c| c.is_production())
                    .map(|c| per.get(c)[t])
                    .sum()
            };
            let shortfall = min_demand - (production(per) - export);
            if shortfall > 0.0 {
                per.thermal[t] = round_mw(per.thermal[t] + shortfall + tp_h);
            }
            per.demand[t] = production(per) - export;
        }
    }

    let nodes = nodes_e
        .into_iter()
        .map(|per| per.try_map(|_, v| TpSeries::new(v)))
        .collect::<Result<Vec<_>>>()?;
    let series = |v: Vec<Vec<f64>>| v.into_iter().map(TpSeries::new).collect::<Result<Vec<_>>>();
    let scenario = Scenario {
        name: format!("random-{}", p.seed),
        res: p.res,
        network: Network::new(names, ac, hvdc)?,
        nodes,
        ac: series(ac_e)?,
        hvdc: series(hvdc_e)?,
        ramp: RampTable::NORMAL,
        netting: NettingConfig::default(),
        correction: CorrectionConfig::default(),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Hand-built cases illustrating single effects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureCase {
    /// One hydro unit whose actual output deviates symmetrically inside a TP.
    Fig3,
    /// Two nodes with mirrored intra-TP surplus and deficit and ample AC
    /// capacity between them.
    Fig4_5,
    /// One node with a thermal ramp at a TP shift and varying vRES and
    /// demand inside the TPs.
    Fig6,
}

impl FigureCase {
    pub const ALL: [FigureCase; 3] = [FigureCase::Fig3, FigureCase::Fig4_5, FigureCase::Fig6];

    pub fn name(self) -> &'static str {
        match self {
            FigureCase::Fig3 => "fig3",
            FigureCase::Fig4_5 => "fig4_5",
            FigureCase::Fig6 => "fig6",
        }
    }
}

impl std::str::FromStr for FigureCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureCase::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown case {s:?}, expected fig3, fig4_5 or fig6")))
    }
}

fn island(name: &str, res: Resolution, energies: impl Fn(Category) -> Vec<f64>) -> Result<Scenario> {
    Ok(Scenario {
        name: name.into(),
        res,
        network: Network::new(vec!["A".into()], vec![], vec![])?,
        nodes: vec![PerCategory::from_fn(energies).try_map(|_, v| TpSeries::new(v))?],
        ac: vec![],
        hvdc: vec![],
        ramp: RampTable::NORMAL,
        netting: NettingConfig::default(),
        correction: CorrectionConfig::default(),
    })
}

/// Scenario reproducing a figure case, at hourly TPs and minutely steps.
pub fn synth_figure_case(case: FigureCase) -> Result<Scenario> {
    let res = Resolution::hourly_minutely();
    let h = res.tp_hours();
    let s = match case {
        FigureCase::Fig3 => island(case.name(), res, |c| match c {
            Category::Hydro | Category::Demand => vec![120.0 * h; 2],
            _ => vec![0.0; 2],
        })?,
        FigureCase::Fig4_5 => {
            let node = |vres: [f64; 2]| {
                PerCategory::from_fn(|c| match c {
                    Category::Vres => vres.map(|v| v * h).to_vec(),
                    Category::Demand => vec![150.0 * h; 2],
                    _ => vec![0.0; 2],
                })
                .try_map(|_, v| TpSeries::new(v))
            };
            Scenario {
                name: case.name().into(),
                res,
                network: Network::new(
                    vec!["A".into(), "B".into()],
                    vec![AcLine {
                        from: "A".into(),
                        to: "B".into(),
                        ntc_fwd: 1000.0,
                        ntc_rev: 1000.0,
                        trm: 100.0,
                    }],
                    vec![],
                )?,
                nodes: vec![node([100.0, 200.0])?, node([200.0, 100.0])?],
                ac: vec![TpSeries::new(vec![-50.0 * h, 50.0 * h])?],
                hvdc: vec![],
                ramp: RampTable::NORMAL,
                netting: NettingConfig::default(),
                correction: CorrectionConfig::default(),
            }
        }
        FigureCase::Fig6 => island(case.name(), res, |c| {
            let mw: Vec<f64> = match c {
                Category::Thermal => vec![100.0, 200.0, 200.0],
                Category::Vres => vec![100.0, 60.0, 100.0],
                Category::Demand => vec![200.0, 260.0, 300.0],
                _ => vec![0.0; 3],
            };
            mw.into_iter().map(|v| v * h).collect()
        })?,
    };
    s.validate()?;
    Ok(s)
}

/// The symmetric deviation of the `Fig3` case: scheduled energy per TP and
/// an actual trajectory 10 MW above basic power in the first half of each
/// TP and 10 MW below in the second half.
pub fn fig3_actual(res: Resolution) -> Result<(TpSeries, HrSeries)> {
    let w = TpSeries::new(vec![120.0 * res.tp_hours(); 2])?;
    let mut actual = basic_power_expand(&w, res).into_values();
    let spt = res.steps_per_tp();
    if !spt.is_multiple_of(2) {
        return Err(Error::Resolution(
            "the deviation needs an even number of steps per TP".into(),
        ));
    }
    for (j, v) in actual.iter_mut().enumerate() {
        *v += if j % spt < spt / 2 { 10.0 } else { -10.0 };
    }
    Ok((w, HrSeries::new(actual, res)?))
}

/// Per node and TP, production + imports − demand − exports, MWh.
pub fn nodal_energy_residuals(s: &Scenario) -> Vec<Vec<f64>> {
    let net = &s.network;
    (0..net.nodes().len())
        .map(|n| {
            (0..s.tps())
                .map(|t| {
                    let per = &s.nodes[n];
                    let mut r: f64 = Category::ALL
                        .into_iter()
                        .filter(|c| c.is_production())
                        .map(|c| per.get(c).values()[t])
                        .sum();
                    r -= per.demand.values()[t];
                    for (a, &(from, to)) in net.ac_ends().iter().enumerate() {
                        let e = s.ac[a].values()[t];
                        if from == n {
                            r -= e;
                        }
                        if to == n {
                            r += e;
                        }
                    }
                    for (b, &(from, to)) in net.hvdc_ends().iter().enumerate() {
                        let e = s.hvdc[b].values()[t];
                        if from == Some(n) {
                            r -= e;
                        }
                        if to == Some(n) {
                            r += e;
                        }
                    }
                    r
                })
                .collect()
        })
        .collect()
}

#[derive(Serialize)]
struct SynthRecord<'a> {
    generator: &'a str,
    params: Option<&'a RandomParams>,
    case: Option<&'a str>,
}

/// Saves a generated scenario plus a `synth.json` describing how it was made.
pub fn write_synth(
    scenario: &Scenario,
    params: Option<&RandomParams>,
    case: Option<FigureCase>,
    dir: &Path,
) -> Result<std::path::PathBuf> {
    let manifest = save_scenario(scenario, dir)?;
    let record = SynthRecord {
        generator: if params.is_some() { RNG_ALGORITHM } else { "hand-built" },
        params,
        case: case.map(FigureCase::name),
    };
    let mut text = serde_json::to_string_pretty(&record).expect("serialisable");
    text.push('\n');
    write_file(&dir.join("synth.json"), &text)?;
    Ok(manifest)
}
