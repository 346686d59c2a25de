use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use ldcusum::experiments::{write_alarm_ratios, write_convergence, write_sensitivity, write_sweep, DetectorSettings};
use ldcusum::{
    basic_experiment, coefficient_sweep, convergence_diagnostic, run_sequential, sensitivity_sweep, ArmaModel,
    ChangeInjection, ChangeKind, DetectorConfig, ExperimentPlan, TestedMean, ThresholdVariant, TransitionMode,
};

use crate::config::{Config, Manifest};
use crate::parse::{Grid, NumberList, ProcessArg};
use crate::{ConvergeArgs, DetectArgs, ExperimentArgs, InputError, ModelArgs, SimulateArgs, UsageError};

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name {
            $($variant),+
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok(Self::$variant),)+
                    other => Err(format!(
                        "unknown value `{other}`, expected one of: {}",
                        [$($text),+].join(", ")
                    )),
                }
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(match self {
                    $(Self::$variant => $text),+
                })
            }
        }
    };
}

keyword_enum!(Mode { Smooth => "smooth", Abrupt => "abrupt" });
keyword_enum!(Variant { Asymptotic => "asymptotic", Finite => "finite" });
keyword_enum!(Preset {
    Basic => "basic",
    Tuned => "tuned",
    Sweep => "sweep",
    Sensitivity => "sensitivity",
    Converge => "converge",
});

impl From<Mode> for TransitionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Smooth => TransitionMode::Smooth,
            Mode::Abrupt => TransitionMode::Abrupt,
        }
    }
}

impl From<Variant> for ThresholdVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Asymptotic => ThresholdVariant::Asymptotic,
            Variant::Finite => ThresholdVariant::FiniteN,
        }
    }
}

/// `follow` or a fixed tested mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tested(pub TestedMean);

impl FromStr for Tested {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("follow") {
            return Ok(Self(TestedMean::Follow));
        }
        s.parse()
            .map(|v| Self(TestedMean::Fixed(v)))
            .map_err(|_| format!("expected `follow` or a number, got `{s}`"))
    }
}

impl std::fmt::Display for Tested {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            TestedMean::Follow => f.write_str("follow"),
            TestedMean::Fixed(v) => write!(f, "{v}"),
        }
    }
}

const MODEL_KEYS: [&str; 4] = ["ar", "ma", "sigma", "mean"];

fn load_config(path: &Option<PathBuf>, subcommand: &str, keys: &[&str]) -> Result<Config> {
    let cfg = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.check(subcommand, keys)?;
    Ok(cfg)
}

fn keys(extra: &[&'static str], with_model: bool) -> Vec<&'static str> {
    let mut k = extra.to_vec();
    if with_model {
        k.extend(MODEL_KEYS);
    }
    k
}

struct ResolvedModel {
    ar: NumberList<f64>,
    ma: NumberList<f64>,
    sigma: f64,
    mean: f64,
}

impl ResolvedModel {
    fn resolve(args: ModelArgs, cfg: &Config) -> Result<Self> {
        Ok(Self {
            ar: cfg.pick(args.ar, "ar", NumberList(vec![]))?,
            ma: cfg.pick(args.ma, "ma", NumberList(vec![]))?,
            sigma: cfg.pick(args.sigma, "sigma", 1.0)?,
            mean: cfg.pick(args.mean, "mean", 0.0)?,
        })
    }

    fn build(&self) -> Result<ArmaModel<f64>> {
        Ok(ArmaModel::new(self.ar.0.clone(), self.ma.0.clone(), self.sigma, self.mean)?)
    }

    fn record(&self, m: &mut Manifest) {
        m.set("ar", &self.ar).set("ma", &self.ma).set("sigma", self.sigma).set("mean", self.mean);
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let cfg = load_config(
        &a.config,
        "simulate",
        &keys(&["length", "change-at", "new-mean", "mode", "seed", "output"], true),
    )?;
    let model_args = ResolvedModel::resolve(a.model, &cfg)?;
    let model = model_args.build()?;
    let length = cfg.pick(a.length, "length", 200usize)?;
    let change_at = cfg.pick_opt(a.change_at, "change-at")?;
    let new_mean = cfg.pick(a.new_mean, "new-mean", model_args.mean + 3.0)?;
    let mode = cfg.pick(a.mode, "mode", Mode::Smooth)?;
    let seed = cfg.pick(a.seed, "seed", 0u64)?;
    let output = cfg.pick_opt(a.output, "output")?;
    if length == 0 {
        bail!(UsageError("length must be at least 1".into()));
    }

    let injection = match change_at {
        Some(k) => ChangeInjection {
            mode: mode.into(),
            ..ChangeInjection::smooth(k, new_mean)
        },
        None => ChangeInjection::none(length),
    };
    let series = model.simulate(length, &injection, seed)?;

    let mut text = String::with_capacity(series.len() * 20);
    for v in &series {
        text.push_str(&format!("{v}\n"));
    }
    match &output {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
            let mut m = Manifest::new("simulate");
            model_args.record(&mut m);
            m.set("length", length);
            if let Some(k) = change_at {
                m.set("change-at", k).set("new-mean", new_mean);
            }
            m.set("mode", mode).set("seed", seed).set("output", path.display());
            m.write_beside(path)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_series(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v: f64 = tok.parse().map_err(|_| {
                InputError(format!("{} line {}: cannot parse `{tok}` as a number", path.display(), no + 1))
            })?;
            if !v.is_finite() {
                bail!(InputError(format!("{} line {}: non-finite value", path.display(), no + 1)));
            }
            out.push(v);
        }
    }
    Ok(out)
}

pub fn detect(a: DetectArgs) -> Result<()> {
    let cfg = load_config(
        &a.config,
        "detect",
        &keys(
            &[
                "input", "window", "alpha", "nu-bar", "tau", "f", "mu-bar", "tuning-max", "variant", "change-at",
                "output",
            ],
            true,
        ),
    )?;
    let input: PathBuf = cfg
        .pick_opt(a.input, "input")?
        .ok_or_else(|| UsageError("an input series is required (--input)".into()))?;
    let model_args = ResolvedModel::resolve(a.model, &cfg)?;
    let model = model_args.build()?;
    let window = cfg.pick(a.window, "window", 50usize)?;
    let alpha = cfg.pick(a.alpha, "alpha", 0.01)?;
    let nu_bar = cfg.pick_opt(a.nu_bar, "nu-bar")?;
    let tau = cfg.pick_opt(a.tau, "tau")?;
    let f = cfg.pick_opt(a.f, "f")?;
    let mu_bar = cfg.pick_opt(a.mu_bar, "mu-bar")?;
    let tuning = cfg.pick(a.tuning_max, "tuning-max", 1.0)?;
    let variant = cfg.pick(a.variant, "variant", Variant::Asymptotic)?;
    let change_at = cfg.pick_opt(a.change_at, "change-at")?;
    let output = cfg.pick_opt(a.output, "output")?;

    let kind = match (nu_bar, tau, f) {
        (_, None, None) => ChangeKind::MeanShift {
            nu_bar: nu_bar.unwrap_or(3.0),
        },
        (None, Some(tau), None) => ChangeKind::Variance { tau },
        (None, None, Some(f)) => ChangeKind::Scale {
            f,
            mu_bar: mu_bar.unwrap_or(model.mean),
        },
        _ => bail!(UsageError("give at most one of --nu-bar, --tau and --f".into())),
    };
    if mu_bar.is_some() && !matches!(kind, ChangeKind::Scale { .. }) {
        bail!(UsageError("--mu-bar only applies to the scale test (--f)".into()));
    }

    let series = read_series(&input)?;
    let det_cfg = DetectorConfig::new(model, kind)
        .with_window(window)
        .with_alpha(alpha)
        .with_tuning(tuning)
        .with_variant(variant.into());
    det_cfg.validate()?;
    let run = run_sequential(&series, &det_cfg)?;

    if let Some(path) = &output {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(create(path)?);
        w.write_record(["window_index", "margin", "argmax_beta", "alarm"])?;
        for d in &run.decisions {
            w.write_record([
                d.window_index.to_string(),
                d.margin.to_string(),
                d.argmax_beta.to_string(),
                (d.alarm as u8).to_string(),
            ])?;
        }
        w.flush()?;

        let mut m = Manifest::new("detect");
        m.set("input", input.display());
        model_args.record(&mut m);
        m.set("window", window).set("alpha", alpha);
        match kind {
            ChangeKind::MeanShift { nu_bar } => m.set("nu-bar", nu_bar),
            ChangeKind::Variance { tau } => m.set("tau", tau),
            ChangeKind::Scale { f, mu_bar } => m.set("f", f).set("mu-bar", mu_bar),
        };
        m.set("tuning-max", tuning).set("variant", variant);
        if let Some(k) = change_at {
            m.set("change-at", k);
        }
        m.set("output", path.display());
        m.write_beside(path)?;
    }

    let alarms = run.alarms().count();
    let first = run.alarms().next().map(|d| d.window_index);
    let mut line = format!("windows {} alarms {alarms}", run.decisions.len());
    match first {
        Some(w) => line.push_str(&format!(" first_alarm_window {w} first_alarm_observation {}", w + window - 1)),
        None => line.push_str(" first_alarm_window none"),
    }
    if let Some(k) = change_at {
        match (run.first_detection(k), run.delay(k)) {
            (Some(t), Some(d)) => line.push_str(&format!(" detection {t} delay {d}")),
            _ => line.push_str(" detection none"),
        }
    }
    println!("{line}");
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |v| format!("{v:.4}"))
}

pub fn experiment(a: ExperimentArgs) -> Result<()> {
    let cfg = load_config(
        &a.config,
        "experiment",
        &keys(
            &[
                "preset", "process", "coefs", "means", "tested", "window", "alpha", "tuning-max", "variant", "nu-bar",
                "length", "change-at", "pre-mean", "post-mean", "sigma", "runs", "seed", "mode", "beta", "n-values",
                "output-dir",
            ],
            false,
        ),
    )?;
    let preset = cfg.pick(a.preset, "preset", Preset::Basic)?;
    let out_dir = cfg.pick(a.output_dir, "output-dir", PathBuf::from("."))?;

    let default_process = match preset {
        Preset::Basic => "ar1:0.5",
        Preset::Tuned => "ma1:-0.6",
        Preset::Sweep => "ar1",
        Preset::Sensitivity => "white",
        Preset::Converge => "ma1:-0.9",
    };
    let process = cfg.pick(a.process, "process", default_process.parse::<ProcessArg>().map_err(UsageError)?)?;
    let sigma = cfg.pick(a.sigma, "sigma", 1.0)?;

    if preset == Preset::Converge {
        let beta = cfg.pick(a.beta, "beta", 0.5)?;
        let n_values = cfg.pick(a.n_values, "n-values", NumberList(vec![50, 100, 200, 400, 800]))?;
        let path = out_dir.join("convergence.csv");
        let mut m = Manifest::new("experiment");
        m.set("preset", preset).set("output-dir", out_dir.display());
        write_convergence_csv(&process, sigma, beta, &n_values, &path, m)?;
        return Ok(());
    }

    let tuned = preset == Preset::Tuned;
    let mut plan = ExperimentPlan::new(process.0.clone());
    plan.sigma = sigma;
    plan.series_length = cfg.pick(a.length, "length", if tuned { 300 } else { 200 })?;
    plan.changepoint = cfg.pick(a.change_at, "change-at", if tuned { 150 } else { 100 })?;
    plan.pre_mean = cfg.pick(a.pre_mean, "pre-mean", 0.0)?;
    plan.post_mean = cfg.pick(a.post_mean, "post-mean", 3.0)?;
    plan.runs = cfg.pick(a.runs, "runs", 300usize)?;
    plan.seed = cfg.pick(a.seed, "seed", 0u64)?;
    let mode = cfg.pick(a.mode, "mode", Mode::Smooth)?;
    plan.mode = mode.into();
    let variant = cfg.pick(a.variant, "variant", Variant::Asymptotic)?;
    plan.detector = DetectorSettings {
        window: cfg.pick(a.window, "window", if tuned { 100 } else { 50 })?,
        alpha: cfg.pick(a.alpha, "alpha", if tuned { 1e-4 } else { 0.01 })?,
        nu_bar: cfg.pick_opt(a.nu_bar, "nu-bar")?,
        tuning_beta_max: cfg.pick(a.tuning_max, "tuning-max", if tuned { 0.95 } else { 1.0 })?,
        variant: variant.into(),
    };

    let mut m = Manifest::new("experiment");
    m.set("preset", preset).set("process", &process);
    m.set("sigma", sigma)
        .set("length", plan.series_length)
        .set("change-at", plan.changepoint)
        .set("pre-mean", plan.pre_mean)
        .set("post-mean", plan.post_mean)
        .set("runs", plan.runs)
        .set("seed", plan.seed)
        .set("mode", mode)
        .set("window", plan.detector.window)
        .set("alpha", plan.detector.alpha)
        .set("tuning-max", plan.detector.tuning_beta_max)
        .set("variant", variant);
    if let Some(nu) = plan.detector.nu_bar {
        m.set("nu-bar", nu);
    }

    match preset {
        Preset::Basic | Preset::Tuned => {
            let report = basic_experiment(&plan)?;
            let path = out_dir.join("alarm_ratio.csv");
            let mut w = create(&path)?;
            write_alarm_ratios(&report, &mut w)?;
            w.flush()?;
            m.set("output-dir", out_dir.display());
            m.write_beside(&path)?;
            let probe = |offset: usize| {
                let w = report.first_change_window + offset;
                if w <= report.alarm_ratio_per_window.len() {
                    format!("{:.4}", report.alarm_ratio(w))
                } else {
                    "none".into()
                }
            };
            println!(
                "mean_false_alarm {:.4} mean_delay {} runs_detected {}/{} ratio_at_first+10 {} ratio_at_first+15 {}",
                report.mean_false_alarm,
                fmt_opt(report.mean_delay),
                report.runs_detected,
                report.runs,
                probe(10),
                probe(15),
            );
        }
        Preset::Sweep => {
            let coefs = cfg.pick(a.coefs, "coefs", "-0.9:0.9:0.1".parse::<Grid>().map_err(UsageError)?)?;
            let rows = coefficient_sweep(&coefs.values, &plan)?;
            let path = out_dir.join("sweep.csv");
            let mut w = create(&path)?;
            write_sweep(&rows, &mut w)?;
            w.flush()?;
            m.set("coefs", &coefs).set("output-dir", out_dir.display());
            m.write_beside(&path)?;
            for r in &rows {
                println!(
                    "coef {:>5} mean_false_alarm {:.4} mean_delay {} runs_detected {}",
                    r.coef,
                    r.mean_false_alarm,
                    fmt_opt(r.mean_delay),
                    r.runs_detected
                );
            }
        }
        Preset::Sensitivity => {
            let means = cfg.pick(a.means, "means", NumberList(vec![1.0, 2.0, 3.0, 5.0]))?;
            let tested = cfg.pick(a.tested, "tested", Tested(TestedMean::Follow))?;
            let rows = sensitivity_sweep(&means.0, tested.0, &plan)?;
            let path = out_dir.join("sensitivity.csv");
            let mut w = create(&path)?;
            write_sensitivity(&rows, &mut w)?;
            w.flush()?;
            m.set("means", &means).set("tested", tested).set("output-dir", out_dir.display());
            m.write_beside(&path)?;
            for r in &rows {
                println!(
                    "simulated {} tested {} mean_false_alarm {:.4} mean_delay {} runs_detected {}",
                    r.simulated_mean,
                    r.tested_mean,
                    r.mean_false_alarm,
                    fmt_opt(r.mean_delay),
                    r.runs_detected
                );
            }
        }
        Preset::Converge => unreachable!(),
    }
    Ok(())
}

fn write_convergence_csv(
    process: &ProcessArg,
    sigma: f64,
    beta: f64,
    n_values: &NumberList<usize>,
    path: &Path,
    mut m: Manifest,
) -> Result<()> {
    let model = process.0.model(sigma, 0.0)?;
    let rows = convergence_diagnostic(&model, beta, &n_values.0)?;
    let mut w = create(path)?;
    write_convergence(&rows, &mut w)?;
    w.flush()?;
    m.set("process", process).set("sigma", sigma).set("beta", beta).set("n-values", n_values);
    m.write_beside(path)?;
    for r in &rows {
        println!("n {:>5} diff {:.6e}", r.n, r.diff);
    }
    Ok(())
}

pub fn converge(a: ConvergeArgs) -> Result<()> {
    let cfg = load_config(&a.config, "converge", &["process", "sigma", "beta", "n-values", "output"])?;
    let process = cfg.pick(a.process, "process", "ma1:-0.9".parse::<ProcessArg>().map_err(UsageError)?)?;
    let sigma = cfg.pick(a.sigma, "sigma", 1.0)?;
    let beta = cfg.pick(a.beta, "beta", 0.5)?;
    let n_values = cfg.pick(a.n_values, "n-values", NumberList(vec![50, 100, 200, 400, 800]))?;
    let output = cfg.pick(a.output, "output", PathBuf::from("convergence.csv"))?;
    let mut m = Manifest::new("converge");
    m.set("output", output.display());
    write_convergence_csv(&process, sigma, beta, &n_values, &output, m)
}
