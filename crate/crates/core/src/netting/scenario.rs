use crate::component::{Category, PerCategory};
use crate::error::{Error, Result};
use crate::netting::network::Network;
use crate::series::{basic_power_expand, HrSeries, Resolution, TpSeries};

/// High-resolution inputs of the netting stage.
///
/// Node series follow `network.nodes()`, HVDC series follow
/// `network.hvdc_lines()` and AC energies follow `network.ac_lines()`.
#[derive(Debug, Clone)]
pub struct ScenarioHr {
    res: Resolution,
    tps: usize,
    nodes: Vec<PerCategory<HrSeries>>,
    hvdc: Vec<HrSeries>,
    ac_energy: Vec<TpSeries>,
}

/// A step where a category that should never be negative is.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeSteps {
    pub node: usize,
    pub category: Category,
    pub count: usize,
    pub min: f64,
}

impl ScenarioHr {
    pub fn new(
        network: &Network,
        res: Resolution,
        nodes: Vec<PerCategory<HrSeries>>,
        hvdc: Vec<HrSeries>,
        ac_energy: Vec<TpSeries>,
    ) -> Result<Self> {
        if nodes.len() != network.nodes().len() {
            return Err(Error::Scenario(format!(
                "{} node series for {} network nodes",
                nodes.len(),
                network.nodes().len()
            )));
        }
        if hvdc.len() != network.hvdc_lines().len() {
            return Err(Error::Scenario(format!(
                "{} HVDC series for {} HVDC lines",
                hvdc.len(),
                network.hvdc_lines().len()
            )));
        }
        if ac_energy.len() != network.ac_lines().len() {
            return Err(Error::Scenario(format!(
                "{} AC series for {} AC lines",
                ac_energy.len(),
                network.ac_lines().len()
            )));
        }
        let steps = nodes[0].demand.len();
        let spt = res.steps_per_tp();
        if steps == 0 || !steps.is_multiple_of(spt) {
            return Err(Error::Scenario(format!(
                "series length {steps} is not a whole number of {spt}-step TPs"
            )));
        }
        let tps = steps / spt;
        for (n, per) in nodes.iter().enumerate() {
            for (c, s) in per.iter() {
                if s.len() != steps {
                    return Err(Error::Scenario(format!(
                        "{c} series of node {} has {} steps, expected {steps}",
                        network.nodes()[n],
                        s.len()
                    )));
                }
            }
        }
        for (b, s) in hvdc.iter().enumerate() {
            if s.len() != steps {
                return Err(Error::Scenario(format!(
                    "HVDC series {} has {} steps, expected {steps}",
                    network.hvdc_lines()[b].label(),
                    s.len()
                )));
            }
        }
        for (a, s) in ac_energy.iter().enumerate() {
            if s.len() != tps {
                return Err(Error::Scenario(format!(
                    "AC series {} has {} TPs, expected {tps}",
                    network.ac_lines()[a].label(),
                    s.len()
                )));
            }
        }
        Ok(ScenarioHr {
            res,
            tps,
            nodes,
            hvdc,
            ac_energy,
        })
    }

    pub fn resolution(&self) -> Resolution {
        self.res
    }

    pub fn tps(&self) -> usize {
        self.tps
    }

    pub fn steps(&self) -> usize {
        self.tps * self.res.steps_per_tp()
    }

    pub fn node(&self, n: usize) -> &PerCategory<HrSeries> {
        &self.nodes[n]
    }

    pub fn hvdc(&self) -> &[HrSeries] {
        &self.hvdc
    }

    pub fn ac_energy(&self) -> &[TpSeries] {
        &self.ac_energy
    }

    /// AC flows held at their basic power (no netting).
    pub fn basic_ac_flows(&self) -> Vec<HrSeries> {
        self.ac_energy.iter().map(|e| basic_power_expand(e, self.res)).collect()
    }

    /// Balancing need of node `n` before any AC exchange: demand minus
    /// production plus net HVDC export.
    pub fn need_before_ac(&self, network: &Network, n: usize) -> Vec<f64> {
        let per = &self.nodes[n];
        let mut out: Vec<f64> = per.demand.values().to_vec();
        for c in Category::ALL.into_iter().filter(|c| c.is_production()) {
            for (o, g) in out.iter_mut().zip(per.get(c).values()) {
                *o -= g;
            }
        }
        for (b, &(from, to)) in network.hvdc_ends().iter().enumerate() {
            let flow = self.hvdc[b].values();
            if from == Some(n) {
                out.iter_mut().zip(flow).for_each(|(o, z)| *o += z);
            }
            if to == Some(n) {
                out.iter_mut().zip(flow).for_each(|(o, z)| *o -= z);
            }
        }
        out
    }

    /// Steps where hydro, thermal, nuclear, vRES or demand is negative.
    pub fn negative_steps(&self) -> Vec<NegativeSteps> {
        let mut out = Vec::new();
        for (n, per) in self.nodes.iter().enumerate() {
            for (category, s) in per.iter().filter(|(c, _)| c.is_nonnegative()) {
                let neg: Vec<f64> = s.values().iter().copied().filter(|v| *v < 0.0).collect();
                if !neg.is_empty() {
                    out.push(NegativeSteps {
                        node: n,
                        category,
                        count: neg.len(),
                        min: neg.iter().copied().fold(f64::INFINITY, f64::min),
                    });
                }
            }
        }
        out
    }
}

/// Nodal balancing need with the AC flows fixed to `ac_flows`.
pub fn balancing_need_fixed_transmission(
    scenario: &ScenarioHr,
    network: &Network,
    ac_flows: &[HrSeries],
) -> Result<Vec<HrSeries>> {
    if ac_flows.len() != network.ac_lines().len() {
        return Err(Error::LengthMismatch {
            expected: network.ac_lines().len(),
            actual: ac_flows.len(),
        });
    }
    if let Some(bad) = ac_flows.iter().find(|f| f.len() != scenario.steps()) {
        return Err(Error::LengthMismatch {
            expected: scenario.steps(),
            actual: bad.len(),
        });
    }
    Ok((0..network.nodes().len())
        .map(|n| {
            let mut need = scenario.need_before_ac(network, n);
            add_ac_terms(&mut need, network, n, |a| ac_flows[a].values());
            HrSeries::from_trusted(need)
        })
        .collect())
}

/// Adds exports and subtracts imports of node `n` over AC lines.
pub(crate) fn add_ac_terms<'a>(need: &mut [f64], network: &Network, n: usize, flow: impl Fn(usize) -> &'a [f64]) {
    for (a, &(from, to)) in network.ac_ends().iter().enumerate() {
        if from == n {
            need.iter_mut().zip(flow(a)).for_each(|(o, z)| *o += z);
        }
        if to == n {
            need.iter_mut().zip(flow(a)).for_each(|(o, z)| *o -= z);
        }
    }
}
