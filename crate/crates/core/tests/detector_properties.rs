use ldcusum::{ArmaModel, ChangeKind, Detector, DetectorConfig};
use proptest::prelude::*;

fn white_detector(n: usize, nu: f64, tuning: f64) -> Detector<f64> {
    let cfg = DetectorConfig::new(ArmaModel::white_noise(1.0).unwrap(), ChangeKind::MeanShift { nu_bar: nu })
        .with_window(n)
        .with_tuning(tuning);
    Detector::new(cfg).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shifting_window_up_never_lowers_mean_margin(
        x in prop::collection::vec(-3.0f64..3.0, 20),
        c in 0.0f64..5.0,
        nu in 0.5f64..4.0,
    ) {
        let det = white_detector(20, nu, 1.0);
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let before = det.test(&x, 1).unwrap().margin;
        let after = det.test(&shifted, 1).unwrap().margin;
        prop_assert!(after >= before - 1e-12, "{after} < {before}");
    }

    #[test]
    fn tuning_only_removes_alarms(series in prop::collection::vec(-2.0f64..4.0, 40)) {
        let untuned = white_detector(20, 2.0, 1.0).run(&series).unwrap();
        let tuned = white_detector(20, 2.0, 0.95).run(&series).unwrap();
        for (t, u) in tuned.decisions.iter().zip(&untuned.decisions) {
            prop_assert!(!t.alarm || u.alarm);
            prop_assert!(t.margin <= u.margin);
        }
    }

    #[test]
    fn decision_depends_only_on_window(
        series in prop::collection::vec(-2.0f64..4.0, 45),
        pos in 0usize..45,
        bump in -10.0f64..10.0,
    ) {
        let cfg = DetectorConfig::new(ArmaModel::ar1(0.4, 1.0).unwrap(), ChangeKind::MeanShift { nu_bar: 2.0 }).with_window(15);
        let det = Detector::new(cfg).unwrap();
        let base = det.run(&series).unwrap();
        let mut perturbed = series.clone();
        perturbed[pos] += bump;
        let other = det.run(&perturbed).unwrap();
        for (a, b) in base.decisions.iter().zip(&other.decisions) {
            let start = a.window_index - 1;
            if pos < start || pos >= start + 15 {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn identical_input_gives_identical_stream(series in prop::collection::vec(-2.0f64..4.0, 30)) {
        let cfg = DetectorConfig::new(ArmaModel::ma1(-0.3, 1.0).unwrap(), ChangeKind::Scale { f: 1.6, mu_bar: 0.0 }).with_window(12);
        let a = ldcusum::run_sequential(&series, &cfg).unwrap();
        let b = ldcusum::run_sequential(&series, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn alarm_always_matches_margin_sign() {
    let model = ArmaModel::ar1(0.5, 1.0).unwrap();
    let series = model.simulate(300, &ldcusum::ChangeInjection::smooth(150, 3.0), 3).unwrap();
    let cfg = DetectorConfig::new(model, ChangeKind::MeanShift { nu_bar: 3.0 });
    let run = ldcusum::run_sequential(&series, &cfg).unwrap();
    assert_eq!(run.decisions.len(), 251);
    for d in &run.decisions {
        assert_eq!(d.alarm, d.margin > 0.0);
    }
    let t = run.first_detection(150).expect("a 3 sd shift is found");
    assert!(t >= 150);
}
