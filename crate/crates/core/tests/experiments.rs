use ldcusum::experiments::{write_alarm_ratios, write_sensitivity, write_sweep};
use ldcusum::{
    basic_experiment, coefficient_sweep, convergence_diagnostic, sensitivity_sweep, ArmaModel, ExperimentPlan,
    ProcessSpec, TestedMean,
};

fn plan(process: ProcessSpec, seed: u64) -> ExperimentPlan {
    let mut p = ExperimentPlan::new(process);
    p.seed = seed;
    p
}

#[test]
fn ar1_basic_experiment_band() {
    let r = basic_experiment(&plan(ProcessSpec::Ar1(0.5), 21)).unwrap();
    assert!(r.mean_false_alarm <= 0.05, "{}", r.mean_false_alarm);
    assert_eq!(r.first_change_window, 51);
    let best_within_10 = r.detection_ratio_per_window[..=10].iter().cloned().fold(0.0, f64::max);
    assert!(best_within_10 >= 0.95);
}

#[test]
fn strongly_negative_ma_raises_false_alarms() {
    let r = basic_experiment(&plan(ProcessSpec::Ma1(-0.6), 22)).unwrap();
    assert!(r.mean_false_alarm > 0.10, "{}", r.mean_false_alarm);
}

#[test]
fn moderate_coefficients_keep_false_alarms_low() {
    let coefs: Vec<f64> = (-3..=6).map(|i| i as f64 / 10.0).collect();
    for process in [ProcessSpec::Ar1(0.0), ProcessSpec::Ma1(0.0)] {
        let rows = coefficient_sweep(&coefs, &plan(process, 23)).unwrap();
        assert_eq!(rows.iter().map(|r| r.coef).collect::<Vec<_>>(), coefs);
        for r in &rows {
            assert!(r.mean_false_alarm <= 0.05, "coef {}: {}", r.coef, r.mean_false_alarm);
        }
        let white = rows.iter().find(|r| r.coef == 0.0).unwrap();
        assert!((0.0..=0.05).contains(&white.mean_false_alarm));
    }
}

#[test]
fn persistent_ar_delays_detection() {
    let mut slow = plan(ProcessSpec::Ar1(0.9), 24);
    slow.post_mean = 5.0;
    let slow = basic_experiment(&slow).unwrap();
    let fast = basic_experiment(&plan(ProcessSpec::Ar1(0.5), 24)).unwrap();
    assert!(slow.mean_delay.unwrap() > fast.mean_delay.unwrap());
    assert!(slow.mean_delay.unwrap() >= 4.0);
}

#[test]
fn white_noise_false_alarms_concentrate() {
    let mut p = plan(ProcessSpec::Ar1(0.0), 25);
    p.runs = 3000;
    let r = basic_experiment(&p).unwrap();
    let pbar = r.mean_false_alarm;
    let se = (pbar * (1.0 - pbar) / p.runs as f64).sqrt();
    assert!(pbar - 3.0 * se <= 0.05 && pbar + 3.0 * se >= 0.0, "{pbar}");
    assert!(pbar <= 0.05);
}

#[test]
fn reruns_are_identical() {
    let mut p = plan(ProcessSpec::Ma1(0.4), 26);
    p.runs = 40;
    assert_eq!(basic_experiment(&p).unwrap(), basic_experiment(&p).unwrap());
}

#[test]
fn convergence_table_rows() {
    let ma = ArmaModel::ma1(-0.9, 1.0).unwrap();
    let rows = convergence_diagnostic(&ma, 0.5, &[50, 100, 200, 400]).unwrap();
    assert_eq!(rows.len(), 4);
    // approach from below, slowly
    for w in rows.windows(2) {
        assert!(w[1].diff > w[0].diff);
    }
    assert!(rows[3].diff < -1.0);
}

#[test]
fn sensitivity_trends() {
    let p = plan(ProcessSpec::Ar1(0.0), 27);
    let means = [1.0, 2.0, 3.0, 5.0];
    let follow = sensitivity_sweep(&means, TestedMean::Follow, &p).unwrap();
    for w in follow.windows(2) {
        assert!(w[1].mean_delay.unwrap() <= w[0].mean_delay.unwrap());
    }
    let fixed = sensitivity_sweep(&means, TestedMean::Fixed(5.0), &p).unwrap();
    assert!(fixed.iter().all(|r| r.tested_mean == 5.0));
    let fa0 = fixed[0].mean_false_alarm;
    for r in &fixed {
        assert!((r.mean_false_alarm - fa0).abs() < 0.02);
    }
    let d5 = fixed[3].mean_delay.unwrap();
    let d2 = fixed[1].mean_delay.unwrap();
    assert!(d5 <= d2);
}

#[test]
fn csv_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = plan(ProcessSpec::Ar1(0.5), 28);
    p.runs = 10;
    let r = basic_experiment(&p).unwrap();
    let path = dir.path().join("alarm.csv");
    write_alarm_ratios(&r, std::fs::File::create(&path).unwrap()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["window_index", "alarm_ratio"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 151);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), i + 1);
        let v: f64 = row[1].parse().unwrap();
        assert!((v - r.alarm_ratio_per_window[i]).abs() < 1e-15);
    }

    let rows = coefficient_sweep(&[0.1, 0.2], &p).unwrap();
    let mut buf = Vec::new();
    write_sweep(&rows, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);

    let rows = sensitivity_sweep(&[1.0], TestedMean::Follow, &p).unwrap();
    let mut buf = Vec::new();
    write_sensitivity(&rows, &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("simulated_mean,tested_mean,mean_false_alarm,mean_delay"));
}
