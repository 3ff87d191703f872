//! CSV tables of TP energies.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::TpSeries;

pub const CATEGORY_HEADER: [&str; 3] = ["node", "tp_index", "energy_mwh"];
pub const LINE_HEADER: [&str; 4] = ["from", "to", "tp_index", "energy_mwh"];

fn invalid(path: &Path, row: Option<usize>, message: impl Into<String>) -> Error {
    Error::Validation {
        file: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

/// Reads a TP energy table keyed by the leading columns of `header`.
///
/// `key_of` maps the key columns of a row to a series index, or returns a
/// message when the key is unknown. Every series must cover every TP
/// `1..=tps` exactly once.
pub(crate) fn read_energy_table(
    path: &Path,
    header: &[&str],
    tps: usize,
    series: usize,
    nonnegative: bool,
    describe: impl Fn(usize) -> String,
    key_of: impl Fn(&[&str]) -> std::result::Result<usize, String>,
) -> Result<Vec<TpSeries>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let found = reader
        .headers()
        .map_err(|e| invalid(path, Some(1), e.to_string()))?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(invalid(
            path,
            Some(1),
            format!(
                "expected header {:?}, found {:?}",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let keys = header.len() - 2;
    let mut values: Vec<Vec<Option<f64>>> = vec![vec![None; tps]; series];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize);
            invalid(path, row, e.to_string())
        })?;
        let row = record.position().map(|p| p.line() as usize);
        let fields: Vec<&str> = record.iter().collect();
        let idx = key_of(&fields[..keys]).map_err(|m| invalid(path, row, m))?;
        let tp: usize = fields[keys].parse().map_err(|_| {
            invalid(
                path,
                row,
                format!("tp_index {:?} is not a positive integer", fields[keys]),
            )
        })?;
        if tp == 0 || tp > tps {
            return Err(invalid(path, row, format!("tp_index {tp} outside 1..={tps}")));
        }
        let energy: f64 = fields[keys + 1]
            .parse()
            .map_err(|_| invalid(path, row, format!("energy_mwh {:?} is not a number", fields[keys + 1])))?;
        if !energy.is_finite() {
            return Err(invalid(path, row, format!("energy_mwh must be finite, got {energy}")));
        }
        if nonnegative && energy < 0.0 {
            return Err(invalid(
                path,
                row,
                format!("negative energy {energy} MWh in a nonnegative category"),
            ));
        }
        let slot = &mut values[idx][tp - 1];
        if slot.is_some() {
            return Err(invalid(
                path,
                row,
                format!("duplicate entry for {} at TP {tp}", describe(idx)),
            ));
        }
        *slot = Some(energy);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let missing: Vec<usize> = v
                .iter()
                .enumerate()
                .filter(|(_, x)| x.is_none())
                .map(|(t, _)| t + 1)
                .collect();
            if !missing.is_empty() {
                let shown: Vec<String> = missing.iter().take(5).map(|t| t.to_string()).collect();
                let more = if missing.len() > 5 { ", ..." } else { "" };
                return Err(invalid(
                    path,
                    None,
                    format!("missing series for {}: TP {}{more}", describe(i), shown.join(", ")),
                ));
            }
            TpSeries::new(v.into_iter().map(|x| x.expect("checked")).collect())
                .map_err(|e| invalid(path, None, e.to_string()))
        })
        .collect()
}

/// Renders rows of `key columns, tp_index, energy` for each series.
pub(crate) fn render_energy_table<'a>(
    header: &[&str],
    rows: impl Iterator<Item = (Vec<&'a str>, &'a TpSeries)>,
) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for (keys, series) in rows {
        let prefix = keys.join(",");
        for (t, v) in series.values().iter().enumerate() {
            writeln!(out, "{prefix},{},{v}", t + 1).expect("write to string");
        }
    }
    out
}

/// Looks up `name` in `names`, for key closures.
pub(crate) fn position_map(names: &[String]) -> HashMap<&str, usize> {
    names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect()
}
