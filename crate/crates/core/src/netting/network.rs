use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// AC interconnection inside the synchronous area. Positive flow runs
/// `from` → `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcLine {
    pub from: String,
    pub to: String,
    /// NTC in the `from` → `to` direction, MW.
    pub ntc_fwd: f64,
    /// NTC in the `to` → `from` direction, MW.
    pub ntc_rev: f64,
    pub trm: f64,
}

impl AcLine {
    /// Flow bounds `(lower, upper)` in MW, optionally widened by the TRM.
    pub fn bounds(&self, use_trm: bool) -> (f64, f64) {
        let margin = if use_trm { self.trm } else { 0.0 };
        (-(self.ntc_rev + margin), self.ntc_fwd + margin)
    }

    pub fn label(&self) -> String {
        format!("{}->{}", self.from, self.to)
    }
}

/// HVDC link. Either end may be an external node outside the studied area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvdcLine {
    pub from: String,
    pub to: String,
    pub ramp_mw_per_min: f64,
    pub cap_fwd: f64,
    pub cap_rev: f64,
}

impl HvdcLine {
    pub fn label(&self) -> String {
        format!("{}->{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<String>,
    ac_lines: Vec<AcLine>,
    hvdc_lines: Vec<HvdcLine>,
    /// For each AC line, (index of `from`, index of `to`).
    ac_ends: Vec<(usize, usize)>,
    /// For each HVDC line, internal indices of its ends, if any.
    hvdc_ends: Vec<(Option<usize>, Option<usize>)>,
}

fn non_negative(what: &str, line: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Network(format!(
            "{what} of line {line} must be finite and >= 0, got {v}"
        )))
    }
}

impl Network {
    pub fn new(nodes: Vec<String>, ac_lines: Vec<AcLine>, hvdc_lines: Vec<HvdcLine>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Network("at least one node is required".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if n.is_empty() {
                return Err(Error::Network("node names must be non-empty".into()));
            }
            if nodes[..i].contains(n) {
                return Err(Error::Network(format!("duplicate node {n}")));
            }
        }
        let index = |name: &str| nodes.iter().position(|n| n == name);

        let mut ac_ends = Vec::with_capacity(ac_lines.len());
        for (i, line) in ac_lines.iter().enumerate() {
            let label = line.label();
            if line.from == line.to {
                return Err(Error::Network(format!("AC line {label} is a self-loop")));
            }
            let (Some(f), Some(t)) = (index(&line.from), index(&line.to)) else {
                return Err(Error::Network(format!("AC line {label} references an unknown node")));
            };
            if ac_lines[..i]
                .iter()
                .any(|o| (o.from == line.from && o.to == line.to) || (o.from == line.to && o.to == line.from))
            {
                return Err(Error::Network(format!("duplicate AC line {label}")));
            }
            non_negative("ntc_fwd", &label, line.ntc_fwd)?;
            non_negative("ntc_rev", &label, line.ntc_rev)?;
            non_negative("trm", &label, line.trm)?;
            ac_ends.push((f, t));
        }

        let mut hvdc_ends = Vec::with_capacity(hvdc_lines.len());
        for (i, line) in hvdc_lines.iter().enumerate() {
            let label = line.label();
            if line.from == line.to {
                return Err(Error::Network(format!("HVDC line {label} is a self-loop")));
            }
            let (f, t) = (index(&line.from), index(&line.to));
            if f.is_none() && t.is_none() {
                return Err(Error::Network(format!(
                    "HVDC line {label} does not touch any studied node"
                )));
            }
            if hvdc_lines[..i].iter().any(|o| o.from == line.from && o.to == line.to) {
                return Err(Error::Network(format!("duplicate HVDC line {label}")));
            }
            if !(line.ramp_mw_per_min.is_finite() && line.ramp_mw_per_min > 0.0) {
                return Err(Error::Network(format!("HVDC line {label} needs a ramp rate > 0")));
            }
            non_negative("cap_fwd", &label, line.cap_fwd)?;
            non_negative("cap_rev", &label, line.cap_rev)?;
            hvdc_ends.push((f, t));
        }

        Ok(Network {
            nodes,
            ac_lines,
            hvdc_lines,
            ac_ends,
            hvdc_ends,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn ac_lines(&self) -> &[AcLine] {
        &self.ac_lines
    }

    pub fn hvdc_lines(&self) -> &[HvdcLine] {
        &self.hvdc_lines
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn ac_ends(&self) -> &[(usize, usize)] {
        &self.ac_ends
    }

    pub fn hvdc_ends(&self) -> &[(Option<usize>, Option<usize>)] {
        &self.hvdc_ends
    }

    pub fn ac_line_index(&self, from: &str, to: &str) -> Option<usize> {
        self.ac_lines.iter().position(|l| l.from == from && l.to == to)
    }

    pub fn hvdc_line_index(&self, from: &str, to: &str) -> Option<usize> {
        self.hvdc_lines.iter().position(|l| l.from == from && l.to == to)
    }

    /// Same topology with every TRM replaced by `trm`.
    pub fn with_uniform_trm(&self, trm: f64) -> Result<Self> {
        let lines = self.ac_lines.iter().map(|l| AcLine { trm, ..l.clone() }).collect();
        Network::new(self.nodes.clone(), lines, self.hvdc_lines.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ac(from: &str, to: &str) -> AcLine {
        AcLine {
            from: from.into(),
            to: to.into(),
            ntc_fwd: 100.0,
            ntc_rev: 80.0,
            trm: 20.0,
        }
    }

    fn dc(from: &str, to: &str) -> HvdcLine {
        HvdcLine {
            from: from.into(),
            to: to.into(),
            ramp_mw_per_min: 30.0,
            cap_fwd: 600.0,
            cap_rev: 600.0,
        }
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn bounds_with_and_without_trm() {
        let l = ac("A", "B");
        assert_eq!(l.bounds(false), (-80.0, 100.0));
        assert_eq!(l.bounds(true), (-100.0, 120.0));
    }

    #[test]
    fn accepts_external_hvdc_end() {
        let net = Network::new(names(&["A", "B"]), vec![ac("A", "B")], vec![dc("B", "DE")]).unwrap();
        assert_eq!(net.hvdc_ends(), &[(Some(1), None)]);
        assert_eq!(net.ac_ends(), &[(0, 1)]);
    }

    #[test]
    fn rejects_structural_defects() {
        assert!(Network::new(vec![], vec![], vec![]).is_err());
        assert!(Network::new(names(&["A", "A"]), vec![], vec![]).is_err());
        assert!(Network::new(names(&["A"]), vec![ac("A", "A")], vec![]).is_err());
        assert!(Network::new(names(&["A"]), vec![ac("A", "B")], vec![]).is_err());
        assert!(Network::new(names(&["A", "B"]), vec![ac("A", "B"), ac("B", "A")], vec![]).is_err());
        let mut neg = ac("A", "B");
        neg.trm = -1.0;
        assert!(Network::new(names(&["A", "B"]), vec![neg], vec![]).is_err());
        assert!(Network::new(names(&["A"]), vec![], vec![dc("X", "Y")]).is_err());
        let mut slow = dc("A", "X");
        slow.ramp_mw_per_min = 0.0;
        assert!(Network::new(names(&["A"]), vec![], vec![slow]).is_err());
    }
}
