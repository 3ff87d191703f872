//! Natural cubic spline through TP-midpoint knots.

use crate::error::{Error, Result};
use crate::series::{HrSeries, Resolution, TpSeries};

/// Natural cubic spline (zero second derivative at both end knots).
///
/// Outside the knot range the end-knot value is held constant.
#[derive(Debug, Clone)]
pub struct NaturalCubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivative at each knot.
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                actual: ys.len(),
            });
        }
        if xs.len() < 2 {
            return Err(Error::Parameter("a spline needs at least two knots".into()));
        }
        if xs
            .windows(2)
            .any(|p| p[1].partial_cmp(&p[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::Parameter("spline knots must be strictly increasing".into()));
        }
        let m = second_derivatives(&xs, &ys);
        Ok(NaturalCubicSpline { xs, ys, m })
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        // first knot strictly greater than x, minus one
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        self.eval_segment(i, x)
    }

    fn eval_segment(&self, i: usize, x: f64) -> f64 {
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    /// Evaluates at ascending points, walking segments instead of searching.
    pub fn eval_sorted(&self, points: impl Iterator<Item = f64>) -> Vec<f64> {
        let n = self.xs.len();
        let mut seg = 0;
        points
            .map(|x| {
                if x <= self.xs[0] {
                    return self.ys[0];
                }
                if x >= self.xs[n - 1] {
                    return self.ys[n - 1];
                }
                while self.xs[seg + 1] <= x {
                    seg += 1;
                }
                self.eval_segment(seg, x)
            })
            .collect()
    }
}

/// Tridiagonal solve for the natural-spline second derivatives.
fn second_derivatives(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Interior equations i = 1..n-2:
    // h_{i-1} m_{i-1} + 2(h_{i-1}+h_i) m_i + h_i m_{i+1} = 6 (d_i - d_{i-1})
    let k = n - 2;
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for j in 0..k {
        let i = j + 1;
        let h0 = xs[i] - xs[i - 1];
        let h1 = xs[i + 1] - xs[i];
        diag[j] = 2.0 * (h0 + h1);
        upper[j] = h1;
        rhs[j] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
    }
    // Thomas algorithm; sub-diagonal of row j is h_{j} = xs[j+1]-xs[j].
    for j in 1..k {
        let lower = xs[j + 1] - xs[j];
        let w = lower / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    let mut sol = vec![0.0; k];
    sol[k - 1] = rhs[k - 1] / diag[k - 1];
    for j in (0..k - 1).rev() {
        sol[j] = (rhs[j] - upper[j] * sol[j + 1]) / diag[j];
    }
    m[1..n - 1].copy_from_slice(&sol);
    m
}

/// Spline through each TP's basic power placed at the TP midpoint.
pub fn varying_spline(tp: &TpSeries, res: Resolution) -> NaturalCubicSpline {
    let len = f64::from(res.tp_minutes());
    let xs = (0..tp.len()).map(|k| (k as f64 + 0.5) * len).collect();
    let ys = tp.values().iter().map(|&e| res.energy_to_power(e)).collect();
    NaturalCubicSpline::new(xs, ys).expect("TP midpoints are increasing and TpSeries has >= 2 values")
}

/// Smooth trajectory for a varying component, sampled at step centres.
pub fn hr_varying(tp: &TpSeries, res: Resolution) -> HrSeries {
    let spline = varying_spline(tp, res);
    let n = tp.len() * res.steps_per_tp();
    HrSeries::from_trusted(spline.eval_sorted((0..n).map(|j| res.step_center_minutes(j))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_knots() {
        assert!(NaturalCubicSpline::new(vec![0.0], vec![1.0]).is_err());
        assert!(NaturalCubicSpline::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(NaturalCubicSpline::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn two_knots_is_linear_and_held() {
        let s = NaturalCubicSpline::new(vec![30.0, 90.0], vec![100.0, 200.0]).unwrap();
        assert_eq!(s.eval(0.0), 100.0);
        assert!((s.eval(60.0) - 150.0).abs() < 1e-12);
        assert_eq!(s.eval(120.0), 200.0);
    }

    #[test]
    fn constant_series_stays_constant() {
        let res = Resolution::hourly_minutely();
        let tp = TpSeries::new(vec![42.0; 5]).unwrap();
        let hr = hr_varying(&tp, res);
        assert!(hr.values().iter().all(|v| (v - 42.0).abs() < 1e-12));
    }

    #[test]
    fn interpolates_knots() {
        let res = Resolution::hourly_minutely();
        let tp = TpSeries::new(vec![100.0, 200.0, 100.0]).unwrap();
        let s = varying_spline(&tp, res);
        for (k, want) in [100.0, 200.0, 100.0].iter().enumerate() {
            assert!((s.eval((k as f64 + 0.5) * 60.0) - want).abs() < 1e-9);
        }
    }

    #[test]
    fn sorted_eval_matches_search() {
        let s = NaturalCubicSpline::new(vec![0.0, 1.0, 2.5, 4.0, 4.5], vec![1.0, -2.0, 0.5, 3.0, 2.0]).unwrap();
        let pts: Vec<f64> = (0..200).map(|i| -0.5 + i as f64 * 0.03).collect();
        let walked = s.eval_sorted(pts.iter().copied());
        for (x, w) in pts.iter().zip(walked) {
            assert_eq!(s.eval(*x), w);
        }
    }
}
