use std::path::Path;
use std::process::{Command, Output};

fn ldcusum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldcusum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ldcusum(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    ldcusum(args).status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn simulate_writes_one_value_per_line_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("series.txt");
    ok(&["simulate", "--ar", "0.5", "--change-at", "101", "--seed", "4", "-o", p(&out)]);
    let text = read(&out);
    assert_eq!(text.lines().count(), 200);
    assert!(text.lines().all(|l| l.parse::<f64>().is_ok()));
    let manifest = read(&dir.path().join("series.txt.manifest"));
    assert!(manifest.contains("subcommand = simulate"));
    assert!(manifest.contains("seed = 4"));

    let again = dir.path().join("again.txt");
    ok(&["simulate", "--config", p(&dir.path().join("series.txt.manifest")), "-o", p(&again)]);
    assert_eq!(text, read(&again));
}

#[test]
fn simulate_edge_lengths_and_models() {
    assert_eq!(ok(&["simulate", "--length", "1"]).lines().count(), 1);
    assert_eq!(code(&["simulate", "--ar", "1.0"]), 2);
    assert_eq!(code(&["simulate", "--sigma", "0"]), 2);
    assert_eq!(code(&["simulate", "--length", "0"]), 2);
    assert_eq!(code(&["simulate", "--length", "10", "--change-at", "20"]), 2);
    assert_eq!(code(&["simulate", "--no-such-flag"]), 2);
}

#[test]
fn detect_reports_every_window() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("s.txt");
    let csv_out = dir.path().join("d.csv");
    ok(&["simulate", "--ar", "0.5", "--change-at", "101", "--seed", "1", "-o", p(&series)]);
    let summary = ok(&["detect", "-i", p(&series), "--ar", "0.5", "--change-at", "101", "-o", p(&csv_out)]);
    assert!(summary.starts_with("windows 151"));
    let text = read(&csv_out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "window_index,margin,argmax_beta,alarm");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 151);
    for (i, row) in rows.iter().enumerate() {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0].parse::<usize>().unwrap(), i + 1);
        let margin: f64 = f[1].parse().unwrap();
        assert_eq!(f[3] == "1", margin > 0.0);
    }
    assert!(dir.path().join("d.csv.manifest").exists());

    let long = dir.path().join("long.txt");
    let out100 = dir.path().join("d100.csv");
    ok(&["simulate", "--ma", "-0.6", "--length", "300", "-o", p(&long)]);
    ok(&[
        "detect", "-i", p(&long), "--ma", "-0.6", "--window", "100", "--alpha", "1e-4", "--tuning-max", "0.95", "-o",
        p(&out100),
    ]);
    assert_eq!(read(&out100).lines().count(), 202);
}

#[test]
fn detect_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("short.txt");
    ok(&["simulate", "--length", "10", "-o", p(&short)]);
    assert_eq!(code(&["detect", "-i", p(&short)]), 3);

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "0.1\nnot-a-number\n").unwrap();
    assert_eq!(code(&["detect", "-i", p(&bad)]), 3);

    let fine = dir.path().join("fine.txt");
    ok(&["simulate", "-o", p(&fine)]);
    assert_eq!(code(&["detect", "-i", p(&fine), "--tau", "2", "--ar", "0.5"]), 2);
    assert_eq!(code(&["detect", "-i", p(&fine), "--tau", "1"]), 2);
    assert_eq!(code(&["detect", "-i", p(&fine), "--f", "1"]), 2);
    assert_eq!(code(&["detect", "-i", p(&fine), "--alpha", "1.5"]), 2);
    assert_eq!(code(&["detect", "-i", p(&fine), "--nu-bar", "2", "--tau", "2"]), 2);
    assert_eq!(code(&["detect"]), 2);
    ok(&["detect", "-i", p(&fine), "--tau", "2"]);
    ok(&["detect", "-i", p(&fine), "--f", "1.5", "--ar", "0.3"]);
}

#[test]
fn config_files_fill_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# short series\nlength = 7\nseed = 9\n").unwrap();
    assert_eq!(ok(&["simulate", "--config", p(&cfg)]).lines().count(), 7);
    assert_eq!(ok(&["simulate", "--config", p(&cfg), "--length", "3"]).lines().count(), 3);

    std::fs::write(&cfg, "lenght = 7\n").unwrap();
    assert_eq!(code(&["simulate", "--config", p(&cfg)]), 2);
    std::fs::write(&cfg, "subcommand = detect\n").unwrap();
    assert_eq!(code(&["simulate", "--config", p(&cfg)]), 2);
}

#[test]
fn sweep_has_one_row_per_coefficient_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |out: &Path| {
        vec![
            "experiment".to_string(),
            "--preset".into(),
            "sweep".into(),
            "--process".into(),
            "ma1".into(),
            "--coefs=-0.3:0.3:0.1".into(),
            "--runs".into(),
            "20".into(),
            "--output-dir".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let run = |out: &Path| {
        let v = args(out);
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        ok(&refs)
    };
    run(&a);
    run(&b);
    let text = read(&a.join("sweep.csv"));
    assert_eq!(text.lines().count(), 8);
    assert!(text.starts_with("coef,mean_false_alarm,mean_delay,runs_detected\n"));
    assert_eq!(text, read(&b.join("sweep.csv")));
    let ma = read(&a.join("sweep.csv.manifest"));
    let mb = read(&b.join("sweep.csv.manifest"));
    assert_eq!(ma.replace(p(&a), ""), mb.replace(p(&b), ""));
}

#[test]
fn experiment_presets_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let summary = ok(&["experiment", "--runs", "30", "--output-dir", p(out)]);
    assert!(summary.starts_with("mean_false_alarm"));
    assert_eq!(read(&out.join("alarm_ratio.csv")).lines().count(), 152);
    assert!(out.join("alarm_ratio.csv.manifest").exists());

    ok(&["experiment", "--preset", "sensitivity", "--tested", "5", "--runs", "10", "--output-dir", p(out)]);
    let sens = read(&out.join("sensitivity.csv"));
    assert_eq!(sens.lines().count(), 5);
    assert!(sens.lines().skip(1).all(|l| l.split(',').nth(1) == Some("5")));

    ok(&["experiment", "--preset", "converge", "--output-dir", p(out)]);
    assert_eq!(read(&out.join("convergence.csv")).lines().count(), 6);

    let conv = out.join("conv.csv");
    ok(&["converge", "--process", "ar1:0.5", "--n-values", "20,40", "-o", p(&conv)]);
    assert_eq!(read(&conv).lines().count(), 3);
    assert_eq!(code(&["converge", "--beta", "0.33", "--n-values", "10", "-o", p(&conv)]), 2);

    assert_eq!(code(&["experiment", "--preset", "sweep", "--process", "ma1", "--coefs", "-1", "--output-dir", p(out)]), 2);
    assert_eq!(code(&["experiment", "--change-at", "20", "--output-dir", p(out)]), 2);
    assert_eq!(code(&["experiment", "--preset", "nope"]), 2);
}
