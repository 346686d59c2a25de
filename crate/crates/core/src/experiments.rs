//! Monte-Carlo experiments: repeated simulation of a series with one mean
//! change, sequential detection, and aggregation into alarm ratios and delays.

use std::io::Write;

use rayon::prelude::*;

use crate::arma::{ArmaModel, ChangeInjection, TransitionMode};
use crate::detector::{Detector, DetectorConfig};
use crate::error::{Error, Result};
use crate::likelihood::ChangeKind;
use crate::scalar::Scalar;
use crate::thresholds::ThresholdVariant;

/// Null process family. Coefficients follow the sign convention of the
/// recursion `X_i − c = Σρ_j(X_{i−j} − c) + ε_i + Σϑ_j ε_{i−j}`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessSpec {
    Ar1(f64),
    Ma1(f64),
    Arma { ar: Vec<f64>, ma: Vec<f64> },
}

impl ProcessSpec {
    pub fn model(&self, sigma: f64, mean: f64) -> Result<ArmaModel<f64>> {
        let (ar, ma) = match self {
            ProcessSpec::Ar1(r) => (vec![*r], vec![]),
            ProcessSpec::Ma1(t) => (vec![], vec![*t]),
            ProcessSpec::Arma { ar, ma } => (ar.clone(), ma.clone()),
        };
        ArmaModel::new(ar, ma, sigma, mean)
    }

    /// Same family with its single coefficient replaced; `Arma` specs take it
    /// as the first AR coefficient.
    pub fn with_coef(&self, coef: f64) -> Self {
        match self {
            ProcessSpec::Ar1(_) => ProcessSpec::Ar1(coef),
            ProcessSpec::Ma1(_) => ProcessSpec::Ma1(coef),
            ProcessSpec::Arma { ar, ma } => {
                let mut ar = ar.clone();
                if ar.is_empty() {
                    ar.push(coef);
                } else {
                    ar[0] = coef;
                }
                ProcessSpec::Arma { ar, ma: ma.clone() }
            }
        }
    }
}

/// Detector part of a plan; the null model comes from the simulated process.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSettings {
    pub window: usize,
    pub alpha: f64,
    /// Tested mean shift `ν̄`; `None` tests the simulated shift.
    pub nu_bar: Option<f64>,
    pub tuning_beta_max: f64,
    pub variant: ThresholdVariant,
}

impl Default for DetectorSettings {
    fn default() -> Self {
        Self {
            window: 50,
            alpha: 0.01,
            nu_bar: None,
            tuning_beta_max: 1.0,
            variant: ThresholdVariant::Asymptotic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub process: ProcessSpec,
    pub series_length: usize,
    /// First observation (1-based) with the post-change mean.
    pub changepoint: usize,
    pub pre_mean: f64,
    pub post_mean: f64,
    pub sigma: f64,
    pub runs: usize,
    pub detector: DetectorSettings,
    pub seed: u64,
    pub mode: TransitionMode,
}

impl ExperimentPlan {
    /// Length 200, change at 100 from mean 0 to 3, `σ = 1`, 300 runs.
    pub fn new(process: ProcessSpec) -> Self {
        Self {
            process,
            series_length: 200,
            changepoint: 100,
            pre_mean: 0.0,
            post_mean: 3.0,
            sigma: 1.0,
            runs: 300,
            detector: DetectorSettings::default(),
            seed: 0,
            mode: TransitionMode::Smooth,
        }
    }

    pub fn model(&self) -> Result<ArmaModel<f64>> {
        self.process.model(self.sigma, self.pre_mean)
    }

    pub fn tested_nu_bar(&self) -> f64 {
        self.detector.nu_bar.unwrap_or(self.post_mean - self.pre_mean)
    }

    pub fn detector_config(&self) -> Result<DetectorConfig<f64>> {
        let d = &self.detector;
        let cfg = DetectorConfig::new(self.model()?, ChangeKind::MeanShift { nu_bar: self.tested_nu_bar() })
            .with_window(d.window)
            .with_alpha(d.alpha)
            .with_tuning(d.tuning_beta_max)
            .with_variant(d.variant);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(Error::InvalidParameter("runs must be at least 1".into()));
        }
        let n = self.detector.window;
        if !(self.changepoint > n && self.changepoint <= self.series_length) {
            return Err(Error::InvalidParameter(format!(
                "changepoint {} must satisfy window {n} < changepoint <= length {}",
                self.changepoint, self.series_length
            )));
        }
        self.detector_config().map(|_| ())
    }

    /// Index of the first window containing the changepoint.
    pub fn first_change_window(&self) -> usize {
        self.changepoint + 1 - self.detector.window
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub window: usize,
    pub runs: usize,
    pub first_change_window: usize,
    /// Fraction of runs alarming in window `w`, at position `w − 1`.
    pub alarm_ratio_per_window: Vec<f64>,
    /// Mean alarm ratio over windows `1..first_change_window`.
    pub mean_false_alarm: f64,
    /// Alarm ratios from `first_change_window` onward.
    pub detection_ratio_per_window: Vec<f64>,
    /// Mean delay over runs with a detection; `None` if no run detected.
    pub mean_delay: Option<f64>,
    pub runs_detected: usize,
}

impl ExperimentReport {
    /// Alarm ratio of window `w` (1-based).
    pub fn alarm_ratio(&self, w: usize) -> f64 {
        self.alarm_ratio_per_window[w - 1]
    }
}

struct RunOutcome {
    alarms: Vec<bool>,
    delay: Option<usize>,
}

fn run_once(plan: &ExperimentPlan, model: &ArmaModel<f64>, detector: &Detector<f64>, run: usize) -> Result<RunOutcome> {
    let injection = ChangeInjection {
        changepoint_index: plan.changepoint,
        new_mean: plan.post_mean,
        mode: plan.mode,
        scale: 1.0,
    };
    let series = model.simulate(plan.series_length, &injection, plan.seed.wrapping_add(run as u64))?;
    let result = detector.run(&series)?;
    Ok(RunOutcome {
        alarms: result.decisions.iter().map(|d| d.alarm).collect(),
        delay: result.delay(plan.changepoint),
    })
}

/// Runs `plan.runs` independent simulations and aggregates them. Run `r`
/// uses seed `plan.seed + r`; aggregation is by run index, so the result does
/// not depend on scheduling.
pub fn basic_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let model = plan.model()?;
    let detector = Detector::new(plan.detector_config()?)?;
    let outcomes = (0..plan.runs)
        .into_par_iter()
        .map(|r| run_once(plan, &model, &detector, r))
        .collect::<Result<Vec<_>>>()?;

    let n = plan.detector.window;
    let windows = plan.series_length - n + 1;
    let mut counts = vec![0usize; windows];
    for o in &outcomes {
        for (c, &a) in counts.iter_mut().zip(&o.alarms) {
            *c += a as usize;
        }
    }
    let runs = plan.runs as f64;
    let ratios: Vec<f64> = counts.iter().map(|&c| c as f64 / runs).collect();
    let first = plan.first_change_window();
    let pre = &ratios[..first - 1];
    let mean_false_alarm = pre.iter().sum::<f64>() / pre.len() as f64;
    let delays: Vec<usize> = outcomes.iter().filter_map(|o| o.delay).collect();
    let mean_delay = if delays.is_empty() {
        None
    } else {
        Some(delays.iter().sum::<usize>() as f64 / delays.len() as f64)
    };
    Ok(ExperimentReport {
        window: n,
        runs: plan.runs,
        first_change_window: first,
        detection_ratio_per_window: ratios[first - 1..].to_vec(),
        alarm_ratio_per_window: ratios,
        mean_false_alarm,
        mean_delay,
        runs_detected: delays.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coef: f64,
    pub mean_false_alarm: f64,
    pub mean_delay: Option<f64>,
    pub runs_detected: usize,
}

/// One experiment per coefficient, substituted into `template.process`.
pub fn coefficient_sweep(coeffs: &[f64], template: &ExperimentPlan) -> Result<Vec<SweepRow>> {
    coeffs
        .iter()
        .map(|&coef| {
            let plan = ExperimentPlan {
                process: template.process.with_coef(coef),
                ..template.clone()
            };
            let r = basic_experiment(&plan)?;
            Ok(SweepRow {
                coef,
                mean_false_alarm: r.mean_false_alarm,
                mean_delay: r.mean_delay,
                runs_detected: r.runs_detected,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow<T> {
    pub n: usize,
    /// `t_{n,β}/(n(1−β)) − 𝒯`.
    pub diff: T,
}

/// Exact gap between the finite-window precision sum and its limit.
/// `beta` must lie on the grid of every `n` in `n_values`.
pub fn convergence_diagnostic<T: Scalar>(model: &ArmaModel<T>, beta: T, n_values: &[usize]) -> Result<Vec<ConvergenceRow<T>>> {
    let limit = model.long_run_precision()?;
    n_values
        .iter()
        .map(|&n| {
            let t = model.context(n)?.t_sum(beta)?;
            let diff = t / (T::from_usize_exact(n) * (T::one() - beta)) - limit;
            Ok(ConvergenceRow { n, diff })
        })
        .collect()
}

/// Mean used by the detector in a sensitivity sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestedMean {
    /// Test for exactly the simulated shift.
    Follow,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub simulated_mean: f64,
    pub tested_mean: f64,
    pub mean_false_alarm: f64,
    pub mean_delay: Option<f64>,
    pub runs_detected: usize,
}

/// One experiment per simulated post-change mean.
pub fn sensitivity_sweep(simulated_means: &[f64], tested: TestedMean, template: &ExperimentPlan) -> Result<Vec<SensitivityRow>> {
    simulated_means
        .iter()
        .map(|&mean| {
            let mut plan = template.clone();
            plan.post_mean = mean;
            plan.detector.nu_bar = match tested {
                TestedMean::Follow => None,
                TestedMean::Fixed(v) => Some(v),
            };
            let r = basic_experiment(&plan)?;
            Ok(SensitivityRow {
                simulated_mean: mean,
                tested_mean: plan.tested_nu_bar(),
                mean_false_alarm: r.mean_false_alarm,
                mean_delay: r.mean_delay,
                runs_detected: r.runs_detected,
            })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), |d| d.to_string())
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub fn write_alarm_ratios<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["window_index", "alarm_ratio"])?;
    for (i, r) in report.alarm_ratio_per_window.iter().enumerate() {
        w.write_record([(i + 1).to_string(), r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["coef", "mean_false_alarm", "mean_delay", "runs_detected"])?;
    for r in rows {
        w.write_record([
            r.coef.to_string(),
            r.mean_false_alarm.to_string(),
            opt(r.mean_delay),
            r.runs_detected.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence<T: Scalar, W: Write>(rows: &[ConvergenceRow<T>], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["n", "diff"])?;
    for r in rows {
        w.write_record([r.n.to_string(), r.diff.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sensitivity<W: Write>(rows: &[SensitivityRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["simulated_mean", "tested_mean", "mean_false_alarm", "mean_delay", "runs_detected"])?;
    for r in rows {
        w.write_record([
            r.simulated_mean.to_string(),
            r.tested_mean.to_string(),
            r.mean_false_alarm.to_string(),
            opt(r.mean_delay),
            r.runs_detected.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
