//! Helpers shared by integration tests: small random netting instances and
//! an independent dense simplex used as a reference LP solver.

#![allow(dead_code)]

use intratp_core::netting::{AcLine, Network, ScenarioHr};
use intratp_core::{Category, HrSeries, PerCategory, Resolution, TpSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random instance with `nodes` nodes on a chain (or ring for 3 nodes),
/// 2 TPs and `spt` steps per TP.
pub fn small_instance(seed: u64, nodes: usize, spt: u32) -> (Network, ScenarioHr) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = Resolution::new(spt * 5, 5).unwrap();
    let tps = 2;
    let steps = tps * spt as usize;
    let names: Vec<String> = (0..nodes).map(|i| format!("N{i}")).collect();
    let n_lines = if nodes == 3 { 3 } else { nodes - 1 };
    let lines: Vec<AcLine> = (0..n_lines)
        .map(|i| AcLine {
            from: names[i].clone(),
            to: names[(i + 1) % nodes].clone(),
            ntc_fwd: rng.gen_range(20.0..80.0),
            ntc_rev: rng.gen_range(20.0..80.0),
            trm: rng.gen_range(0.0..20.0),
        })
        .collect();
    let network = Network::new(names, lines.clone(), vec![]).unwrap();
    let node_series: Vec<PerCategory<HrSeries>> = (0..nodes)
        .map(|_| {
            let base: f64 = rng.gen_range(50.0..150.0);
            let mut vals = |scale: f64| -> HrSeries {
                HrSeries::new((0..steps).map(|_| base + rng.gen_range(-scale..scale)).collect(), res).unwrap()
            };
            let vres = vals(40.0);
            let demand = vals(40.0);
            PerCategory::from_fn(|c| match c {
                Category::Vres => vres.clone(),
                Category::Demand => demand.clone(),
                _ => HrSeries::zeros(tps, res),
            })
        })
        .collect();
    let ac_energy: Vec<TpSeries> = lines
        .iter()
        .map(|l| {
            TpSeries::new(
                (0..tps)
                    .map(|_| rng.gen_range(-0.8 * l.ntc_rev..0.8 * l.ntc_fwd) * res.tp_hours())
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    let scenario = ScenarioHr::new(&network, res, node_series, vec![], ac_energy).unwrap();
    (network, scenario)
}

/// Optimal netting objective computed with a dense two-phase simplex on a
/// formulation built here from scratch.
pub fn reference_objective(network: &Network, scenario: &ScenarioHr, alpha: f64, use_trm: bool) -> f64 {
    let res = scenario.resolution();
    let spt = res.steps_per_tp();
    let steps = scenario.steps();
    let nodes = network.nodes().len();
    let lines = network.ac_lines();
    let l = lines.len();
    let bounds: Vec<(f64, f64)> = lines.iter().map(|a| a.bounds(use_trm)).collect();

    // Columns: y (z - lo), p, m, u, v, bound slacks w.
    let y = |a: usize, s: usize| a * steps + s;
    let p = |n: usize, s: usize| l * steps + n * steps + s;
    let m = |n: usize, s: usize| l * steps + nodes * steps + n * steps + s;
    let smooth = steps - 1;
    let u = |a: usize, k: usize| l * steps + 2 * nodes * steps + a * smooth + k;
    let v = |a: usize, k: usize| l * steps + 2 * nodes * steps + l * smooth + a * smooth + k;
    let w = |a: usize, s: usize| l * steps + 2 * nodes * steps + 2 * l * smooth + a * steps + s;
    let ncols = l * steps + 2 * nodes * steps + 2 * l * smooth + l * steps;

    let mut cost = vec![0.0; ncols];
    for n in 0..nodes {
        for s in 0..steps {
            cost[p(n, s)] = 1.0;
            cost[m(n, s)] = 1.0;
        }
    }
    for a in 0..l {
        for k in 0..smooth {
            cost[u(a, k)] = alpha;
            cost[v(a, k)] = alpha;
        }
    }

    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for n in 0..nodes {
        let per = scenario.node(n);
        for s in 0..steps {
            // need = demand - production + exports - imports
            let mut rhs = -per.demand.values()[s];
            for c in [
                Category::Hydro,
                Category::Flexible,
                Category::Thermal,
                Category::Nuclear,
                Category::Vres,
            ] {
                rhs += per.get(c).values()[s];
            }
            let mut coeffs = vec![(p(n, s), -1.0), (m(n, s), 1.0)];
            for (a, line) in lines.iter().enumerate() {
                let lo = bounds[a].0;
                if line.from == network.nodes()[n] {
                    coeffs.push((y(a, s), 1.0));
                    rhs -= lo;
                }
                if line.to == network.nodes()[n] {
                    coeffs.push((y(a, s), -1.0));
                    rhs += lo;
                }
            }
            rows.push((coeffs, rhs));
        }
    }
    for (a, &(lo, hi)) in bounds.iter().enumerate() {
        for k in 0..scenario.tps() {
            let target = scenario.ac_energy()[a].values()[k] / res.tp_hours();
            let coeffs = (0..spt).map(|j| (y(a, k * spt + j), 1.0)).collect();
            rows.push((coeffs, (target - lo) * spt as f64));
        }
        for k in 0..smooth {
            rows.push((
                vec![(y(a, k + 1), 1.0), (y(a, k), -1.0), (u(a, k), -1.0), (v(a, k), 1.0)],
                0.0,
            ));
        }
        for s in 0..steps {
            rows.push((vec![(y(a, s), 1.0), (w(a, s), 1.0)], hi - lo));
        }
    }
    dense_simplex(&cost, &rows, ncols).expect("reference LP is feasible and bounded")
}

/// Minimises `cost·x` subject to sparse equality rows and `x >= 0` with a
/// two-phase tableau simplex (Dantzig pricing, Bland's rule once degenerate
/// pivots pile up).
pub fn dense_simplex(cost: &[f64], rows: &[(Vec<(usize, f64)>, f64)], ncols: usize) -> Option<f64> {
    const EPS: f64 = 1e-9;
    let mrows = rows.len();
    let width = ncols + mrows + 1;
    let rhs_col = width - 1;
    let mut t = vec![vec![0.0; width]; mrows];
    for (i, (coeffs, b)) in rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for &(j, a) in coeffs {
            t[i][j] += sign * a;
        }
        t[i][ncols + i] = 1.0;
        t[i][rhs_col] = sign * b;
    }
    let mut basis: Vec<usize> = (ncols..ncols + mrows).collect();

    let pivot = |t: &mut Vec<Vec<f64>>, r: usize, c: usize| {
        let pv = t[r][c];
        for x in t[r].iter_mut() {
            *x /= pv;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[c].abs() > 0.0 {
                let f = row[c];
                for (x, px) in row.iter_mut().zip(&prow) {
                    *x -= f * px;
                }
            }
        }
    };

    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, c: &[f64], allowed: usize| -> Option<()> {
        let mut degenerate = 0usize;
        for _ in 0..200_000 {
            // Reduced costs d_j = c_j - c_B · column j.
            let mut best: Option<(usize, f64)> = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let mut d = c[j];
                for (i, &bi) in basis.iter().enumerate() {
                    if c[bi] != 0.0 {
                        d -= c[bi] * t[i][j];
                    }
                }
                if d < -EPS {
                    let better = match best {
                        None => true,
                        Some((_, bd)) => degenerate < 50 && d < bd,
                    };
                    if better {
                        best = Some((j, d));
                    }
                    if degenerate >= 50 {
                        break;
                    }
                }
            }
            let Some((col, _)) = best else {
                return Some(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..t.len() {
                if t[i][col] > EPS {
                    let ratio = t[i][rhs_col] / t[i][col];
                    let take = match leave {
                        None => true,
                        Some((li, lr)) => ratio < lr - EPS || (ratio < lr + EPS && basis[i] < basis[li]),
                    };
                    if take {
                        leave = Some((i, ratio));
                    }
                }
            }
            let (r, ratio) = leave?;
            degenerate = if ratio.abs() < EPS { degenerate + 1 } else { 0 };
            pivot(t, r, col);
            basis[r] = col;
        }
        None
    };

    // Phase 1: minimise the artificials.
    let mut phase1 = vec![0.0; ncols + mrows];
    for x in &mut phase1[ncols..] {
        *x = 1.0;
    }
    run(&mut t, &mut basis, &phase1, ncols + mrows)?;
    let infeas: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= ncols)
        .map(|(i, _)| t[i][rhs_col])
        .sum();
    if infeas > 1e-7 {
        return None;
    }
    // Drive remaining artificials out of the basis.
    for i in 0..mrows {
        if basis[i] >= ncols {
            if let Some(j) = (0..ncols).find(|&j| !basis.contains(&j) && t[i][j].abs() > EPS) {
                pivot(&mut t, i, j);
                basis[i] = j;
            }
        }
    }
    // Phase 2 over original columns; redundant rows keep a zero artificial.
    let mut phase2 = cost.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, mrows));
    run(&mut t, &mut basis, &phase2, ncols)?;
    Some(basis.iter().enumerate().map(|(i, &b)| phase2[b] * t[i][rhs_col]).sum())
}
