use intratp_core::disaggregate::{
    capacity_violation_scan, default_e_min, enforce_tp_energy, hr_controllable, hr_varying, ramp_window,
    varying_spline, ControllableTrajectory, CorrectionSettings, Method, NaturalCubicSpline, RampSpec,
};
use intratp_core::{basic_power_expand, tp_energy_of, Resolution, TpSeries};
use proptest::prelude::*;

fn hourly() -> Resolution {
    Resolution::hourly_minutely()
}

fn tp(v: &[f64]) -> TpSeries {
    TpSeries::new(v.to_vec()).unwrap()
}

#[test]
fn ramp_half_width_examples() {
    let spec = RampSpec::percent_of_max(5.0, 1000.0).unwrap();
    let w = ramp_window(0, 0.0, 300.0, &spec, hourly());
    assert_eq!((w.c_minutes, w.clipped), (3.0, false));

    let hvdc = RampSpec::absolute(30.0).unwrap();
    let w = ramp_window(0, 0.0, 2000.0, &hvdc, hourly());
    assert_eq!((w.c_minutes, w.clipped), (30.0, true));

    let w = ramp_window(4, 250.0, 250.0, &hvdc, hourly());
    assert_eq!((w.c_minutes, w.clipped), (0.0, false));
}

#[test]
fn ramp_spec_validation() {
    assert!(RampSpec::absolute(0.0).is_err());
    assert!(RampSpec::absolute(-1.0).is_err());
    assert!(RampSpec::percent_of_max(5.0, 0.5).is_err());
    assert!(RampSpec::percent_of_max(5.0, 1.0).is_ok());
}

#[test]
fn controllable_ramp_matches_reference_samples() {
    // 100 -> 160 MW at 30 MW/min: c = 1 min around minute 60.
    // Reference: linear interpolation through (59, 100), (61, 160) at step
    // centres, evaluated independently with numpy.interp.
    let hr = hr_controllable(&tp(&[100.0, 160.0]), &RampSpec::absolute(30.0).unwrap(), hourly());
    let expected = [100.0, 100.0, 115.0, 145.0, 160.0, 160.0];
    assert_eq!(&hr.values()[57..63], &expected);
    let traj = ControllableTrajectory::new(&tp(&[100.0, 160.0]), &RampSpec::absolute(30.0).unwrap(), hourly());
    assert_eq!(traj.value_at(60.0), 130.0);

    // 100 -> 400 MW at 5 %/min of 400 MW: c = 7.5 min.
    let hr = hr_controllable(
        &tp(&[100.0, 400.0]),
        &RampSpec::percent_of_max(5.0, 400.0).unwrap(),
        hourly(),
    );
    let expected = [
        100.0, 100.0, 100.0, 120.0, 140.0, 160.0, 180.0, 200.0, 220.0, 240.0, 260.0, 280.0, 300.0, 320.0, 340.0, 360.0,
        380.0, 400.0, 400.0, 400.0,
    ];
    for (got, want) in hr.values()[50..70].iter().zip(expected) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn clipped_ramp_spans_the_whole_tp_around_the_shift() {
    let spec = RampSpec::absolute(1.0).unwrap();
    let traj = ControllableTrajectory::new(&tp(&[100.0, 200.0, 200.0]), &spec, hourly());
    let w = traj.windows()[0];
    assert!(w.clipped);
    assert_eq!(w.c_minutes, 30.0);
    assert_eq!(traj.value_at(30.0), 100.0);
    assert_eq!(traj.value_at(45.0), 125.0);
    assert_eq!(traj.value_at(90.0), 200.0);
    assert_eq!(w.steps(hourly()), 30..90);
}

#[test]
fn constant_series_has_no_ramps() {
    let w = tp(&[42.0; 5]);
    let spec = RampSpec::absolute(3.0).unwrap();
    assert_eq!(hr_controllable(&w, &spec, hourly()), basic_power_expand(&w, hourly()));
    let hr = hr_varying(&w, hourly());
    assert!(hr.values().iter().all(|v| (v - 42.0).abs() < 1e-12));
}

#[test]
fn spline_matches_reference_implementation() {
    // Reference values from scipy.interpolate.CubicSpline(bc_type="natural"),
    // held constant outside the knots.
    let hr = hr_varying(&tp(&[100.0, 200.0, 100.0]), hourly());
    let reference = [
        (0, 100.0),
        (29, 100.0),
        (30, 101.24997106481482),
        (45, 137.88799189814816),
        (60, 169.68226273148147),
        (89, 199.9896122685185),
        (90, 199.98961226851853),
        (100, 195.67421875),
        (120, 167.80732060185184),
        (149, 101.2499710648148),
        (150, 100.0),
        (179, 100.0),
    ];
    for (i, want) in reference {
        assert!(
            (hr.values()[i] - want).abs() < 1e-9,
            "step {i}: {} vs {want}",
            hr.values()[i]
        );
    }

    let xs: Vec<f64> = (0..5).map(|k| (k as f64 + 0.5) * 60.0).collect();
    let s = NaturalCubicSpline::new(xs, vec![120.0, 80.0, 95.0, 300.0, 10.0]).unwrap();
    for (x, want) in [
        (30.5, 119.73065031828703),
        (47.5, 110.38239655671296),
        (100.5, 70.10755859375),
        (200.5, 289.94130363343254),
        (250.5, 146.44932756696429),
        (269.5, 13.62640407986109),
    ] {
        assert!((s.eval(x) - want).abs() < 1e-9, "x {x}: {} vs {want}", s.eval(x));
    }
}

#[test]
fn spline_peak_lies_in_the_middle_tp() {
    let spline = varying_spline(&tp(&[100.0, 200.0, 100.0]), hourly());
    let (x, y) = (0..=18000)
        .map(|i| i as f64 / 100.0)
        .map(|x| (x, spline.eval(x)))
        .fold((0.0, f64::MIN), |best, p| if p.1 > best.1 { p } else { best });
    assert!((60.0..120.0).contains(&x));
    assert!(y >= 200.0 - 1e-9);
    for (k, want) in [100.0, 200.0, 100.0].iter().enumerate() {
        assert!((spline.eval((k as f64 + 0.5) * 60.0) - want).abs() < 1e-9);
    }
}

#[test]
fn constant_series_converges_immediately() {
    let w = tp(&[300.0; 6]);
    let spec = RampSpec::percent_of_max(5.0, 300.0).unwrap();
    let (hr, report) = enforce_tp_energy(
        &w,
        &Method::Controllable(spec),
        hourly(),
        &CorrectionSettings::defaults(6),
    )
    .unwrap();
    assert_eq!(report.iterations, 1);
    assert_eq!(report.final_error, 0.0);
    assert!(report.converged);
    assert_eq!(hr, basic_power_expand(&w, hourly()));
}

#[test]
fn varying_peak_converges_within_bound() {
    let w = tp(&[100.0, 200.0, 100.0]);
    let settings = CorrectionSettings::defaults(3);
    let (hr, report) = enforce_tp_energy(&w, &Method::Varying, hourly(), &settings).unwrap();
    assert!(report.converged);
    assert!(report.iterations > 1);
    let energy = tp_energy_of(&hr, hourly()).unwrap();
    let bound = (2.0 * settings.e_min / 3.0).sqrt();
    for (e, target) in energy.values().iter().zip(w.values()) {
        assert!((e - target).abs() <= bound.max((2.0 * settings.e_min).sqrt()));
    }
}

#[test]
fn hvdc_jump_reports_a_clipped_window() {
    let w = tp(&[0.0, 2000.0]);
    let spec = RampSpec::absolute(30.0).unwrap();
    let (_, report) = enforce_tp_energy(
        &w,
        &Method::Controllable(spec),
        hourly(),
        &CorrectionSettings::defaults(2),
    )
    .unwrap();
    assert_eq!(report.ramp_windows.len(), 1);
    assert!(report.ramp_windows[0].clipped);
    assert_eq!(report.clipped_shifts(), 1);
}

#[test]
fn exhausted_budget_is_reported_not_raised() {
    let w = tp(&[0.0, 500.0, 0.0, 500.0]);
    let settings = CorrectionSettings {
        e_min: 1e-30,
        max_iterations: 2,
    };
    let (_, report) = enforce_tp_energy(&w, &Method::Varying, hourly(), &settings).unwrap();
    assert!(!report.converged);
    assert_eq!(report.iterations, 2);
    assert!(report.final_error > settings.e_min);
}

#[test]
fn correction_settings_are_validated() {
    let w = tp(&[1.0, 2.0]);
    for bad in [
        CorrectionSettings {
            e_min: 0.0,
            max_iterations: 10,
        },
        CorrectionSettings {
            e_min: f64::NAN,
            max_iterations: 10,
        },
        CorrectionSettings {
            e_min: 1.0,
            max_iterations: 0,
        },
    ] {
        assert!(enforce_tp_energy(&w, &Method::Varying, hourly(), &bad).is_err());
    }
    assert_eq!(default_e_min(48), 48.0 * 1e-8 / 2.0);
}

#[test]
fn capacity_scan_lists_signed_excess() {
    let res = Resolution::new(4, 1).unwrap();
    let hr = intratp_core::HrSeries::new(vec![0.0, 5.0, 105.0, -3.0], res).unwrap();
    assert!(capacity_violation_scan(&hr, -10.0, 110.0).unwrap().is_empty());
    let v = capacity_violation_scan(&hr, 0.0, 100.0).unwrap();
    assert_eq!(v.len(), 2);
    assert_eq!((v[0].step, v[0].excess), (2, 5.0));
    assert_eq!((v[1].step, v[1].excess), (3, -3.0));
    assert!(capacity_violation_scan(&hr, 1.0, 0.0).is_err());
}

#[test]
fn correction_at_capacity_pushes_above_the_limit() {
    // Full capacity in TP 1; the ramp down loses energy that the correction
    // puts back by raising the level above capacity.
    let cap = 600.0;
    let w = tp(&[cap, 0.0]);
    let spec = RampSpec::absolute(30.0).unwrap();
    let (hr, report) = enforce_tp_energy(
        &w,
        &Method::Controllable(spec),
        hourly(),
        &CorrectionSettings::defaults(2),
    )
    .unwrap();
    assert!(report.converged);
    let v = capacity_violation_scan(&hr, -cap, cap).unwrap();
    assert!(!v.is_empty());
    assert!(v.iter().all(|x| x.excess > 0.0 && x.step < 60));
}

fn levels() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..2000.0, 2..20)
}

proptest! {
    #[test]
    fn ramp_never_exceeds_half_a_tp(from in -3000.0f64..3000.0, to in -3000.0f64..3000.0, rate in 0.1f64..100.0) {
        let w = ramp_window(0, from, to, &RampSpec::absolute(rate).unwrap(), hourly());
        prop_assert!(w.c_minutes >= 0.0 && w.c_minutes <= 30.0);
        prop_assert_eq!(w.clipped, (to - from).abs() / rate / 2.0 > 30.0);
    }

    #[test]
    fn trajectory_passes_the_midpoint_at_each_shift(w in levels(), rate in 1.0f64..50.0) {
        let res = hourly();
        let series = tp(&w);
        let traj = ControllableTrajectory::new(&series, &RampSpec::absolute(rate).unwrap(), res);
        for k in 0..w.len() - 1 {
            let at = traj.value_at((k as f64 + 1.0) * 60.0);
            let mid = (w[k] + w[k + 1]) / 2.0;
            prop_assert!((at - mid).abs() <= 1e-9 * mid.abs().max(1.0));
        }
    }

    #[test]
    fn spline_hits_every_knot(w in levels()) {
        let spline = varying_spline(&tp(&w), hourly());
        for (k, v) in w.iter().enumerate() {
            prop_assert!((spline.eval((k as f64 + 0.5) * 60.0) - v).abs() <= 1e-6);
        }
    }

    #[test]
    fn converged_results_conserve_energy(w in levels(), varying in any::<bool>()) {
        let res = hourly();
        let settings = CorrectionSettings::defaults(w.len());
        let method = if varying {
            Method::Varying
        } else {
            Method::Controllable(RampSpec::percent_of_max(5.0, 2000.0).unwrap())
        };
        let (hr, report) = enforce_tp_energy(&tp(&w), &method, res, &settings).unwrap();
        prop_assert!(report.iterations <= settings.max_iterations);
        if report.converged {
            prop_assert!(report.final_error <= settings.e_min);
            let energy = tp_energy_of(&hr, res).unwrap();
            for (e, target) in energy.values().iter().zip(&w) {
                prop_assert!((e - target).abs() <= (2.0 * settings.e_min).sqrt());
            }
        }
        prop_assert!(report.ramp_windows.iter().all(|r| r.c_minutes <= 30.0));
    }

    #[test]
    fn scaling_energy_and_rate_scales_the_result(w in levels(), k in 0.1f64..10.0, varying in any::<bool>()) {
        let res = hourly();
        let spec = RampSpec::absolute(20.0).unwrap();
        let method = |s: f64| if varying { Method::Varying } else { Method::Controllable(spec.scaled(s)) };
        // A fixed iteration count keeps the stopping rule out of the comparison.
        let settings = CorrectionSettings { e_min: f64::MIN_POSITIVE, max_iterations: 6 };
        let scaled: Vec<f64> = w.iter().map(|x| x * k).collect();
        let (a, _) = enforce_tp_energy(&tp(&w), &method(1.0), res, &settings).unwrap();
        let (b, _) = enforce_tp_energy(&tp(&scaled), &method(k), res, &settings).unwrap();
        let scale = w.iter().fold(1.0f64, |m, x| m.max(x.abs())) * k;
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x * k - y).abs() <= 1e-9 * scale);
        }
    }
}
