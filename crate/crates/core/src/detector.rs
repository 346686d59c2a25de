//! Sliding-window changepoint detection.
//!
//! Each window of `n` observations is tested against every candidate
//! changepoint `β = i/n`; the window alarms when `ℒ_{n,β}/n` exceeds `b(β)`
//! for some admissible `β`.

use rayon::prelude::*;

use crate::arma::ArmaModel;
use crate::error::{Error, Result};
use crate::likelihood::{ChangeKind, MeanShiftKernel, ScaleKernel};
use crate::scalar::Scalar;
use crate::thresholds::{gamma_from_alpha, ThresholdCurve, ThresholdVariant};

/// Detector settings. The null model is taken as known.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig<T> {
    pub window: usize,
    pub alpha: T,
    pub tested_change: ChangeKind<T>,
    pub model: ArmaModel<T>,
    /// Largest candidate `β` considered; `1` disables tuning.
    pub tuning_beta_max: T,
    pub threshold_variant: ThresholdVariant,
}

impl<T: Scalar> DetectorConfig<T> {
    /// Window 50, `α = 0.01`, no tuning, asymptotic thresholds.
    pub fn new(model: ArmaModel<T>, tested_change: ChangeKind<T>) -> Self {
        Self {
            window: 50,
            alpha: T::lit(0.01),
            tested_change,
            model,
            tuning_beta_max: T::one(),
            threshold_variant: ThresholdVariant::Asymptotic,
        }
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn with_alpha(mut self, alpha: T) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_tuning(mut self, beta_max: T) -> Self {
        self.tuning_beta_max = beta_max;
        self
    }

    pub fn with_variant(mut self, variant: ThresholdVariant) -> Self {
        self.threshold_variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::InvalidParameter(format!("window must be at least 2, got {}", self.window)));
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(Error::InvalidAlpha(self.alpha.to_f64_lossy()));
        }
        if !(self.tuning_beta_max > T::zero() && self.tuning_beta_max <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "tuning_beta_max must lie in (0, 1], got {}",
                self.tuning_beta_max
            )));
        }
        self.model.validate()?;
        self.tested_change.validate(self.model.sigma)?;
        match self.tested_change {
            ChangeKind::Variance { .. } if !self.model.is_white_noise() => Err(Error::ConfigMismatch(
                "variance test assumes independent observations; use a scale change for ARMA models".into(),
            )),
            ChangeKind::Scale { mu_bar, .. } if mu_bar != self.model.mean => Err(Error::ConfigMismatch(format!(
                "scale change level {mu_bar} differs from the model mean {}",
                self.model.mean
            ))),
            _ => Ok(()),
        }
    }

    pub fn gamma(&self) -> Result<T> {
        gamma_from_alpha(self.alpha, self.window)
    }

    /// Threshold curve matching this configuration.
    pub fn threshold_curve(&self) -> Result<ThresholdCurve<T>> {
        self.validate()?;
        ThresholdCurve::build(
            &self.model,
            self.tested_change,
            self.gamma()?,
            self.window,
            self.threshold_variant,
        )
    }

    /// Number of grid indices `i` with `i/n ≤ tuning_beta_max`.
    pub fn admissible_count(&self) -> usize {
        let n = self.window;
        let cap = (self.tuning_beta_max * T::from_usize_exact(n) + T::lit(1e-9)).floor();
        let cap = cap.to_usize().unwrap_or(n);
        (cap + 1).min(n)
    }
}

/// Outcome of testing one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowDecision<T> {
    /// 1-based; window `w` covers observations `w..=w+n−1`.
    pub window_index: usize,
    pub alarm: bool,
    pub margin: T,
    pub argmax_beta: T,
}

#[derive(Debug, Clone)]
enum Kernels<T> {
    Mean(Vec<MeanShiftKernel<T>>),
    /// Indexed by grid index; kernel `i` sees the last `n − i` observations.
    Scale(Vec<ScaleKernel<T>>),
}

/// A configuration with its threshold curve and precomputed statistics.
#[derive(Debug, Clone)]
pub struct Detector<T> {
    cfg: DetectorConfig<T>,
    curve: ThresholdCurve<T>,
    kernels: Kernels<T>,
}

impl<T: Scalar> Detector<T> {
    pub fn new(cfg: DetectorConfig<T>) -> Result<Self> {
        let curve = cfg.threshold_curve()?;
        Self::with_curve(cfg, curve)
    }

    /// Uses a precomputed curve, which must have been built for `cfg`.
    pub fn with_curve(cfg: DetectorConfig<T>, curve: ThresholdCurve<T>) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.window;
        if curve.n != n || curve.kind != cfg.tested_change || curve.variant != cfg.threshold_variant {
            return Err(Error::ConfigMismatch("threshold curve was built for a different configuration".into()));
        }
        let gamma = cfg.gamma()?;
        if (curve.gamma - gamma).abs() > T::tolerance(1e-12) * gamma {
            return Err(Error::ConfigMismatch(format!("curve rate {} but alpha gives {gamma}", curve.gamma)));
        }
        let count = cfg.admissible_count();
        let ctx = cfg.model.context(n)?;
        let kernels = match cfg.tested_change {
            ChangeKind::MeanShift { nu_bar } => {
                Kernels::Mean((0..count).map(|i| MeanShiftKernel::new(&ctx, nu_bar, i)).collect())
            }
            ChangeKind::Variance { tau } => {
                let f = tau / cfg.model.sigma;
                Kernels::Scale(
                    (0..count)
                        .map(|i| Ok(ScaleKernel::new(&ctx.leading(n - i)?, f, T::zero())))
                        .collect::<Result<_>>()?,
                )
            }
            ChangeKind::Scale { f, mu_bar } => Kernels::Scale(
                (0..count)
                    .map(|i| Ok(ScaleKernel::new(&ctx.leading(n - i)?, f, mu_bar)))
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(Self { cfg, curve, kernels })
    }

    pub fn config(&self) -> &DetectorConfig<T> {
        &self.cfg
    }

    pub fn curve(&self) -> &ThresholdCurve<T> {
        &self.curve
    }

    /// Statistic `ℒ_{n,β}/n` for grid index `i` on a window of raw observations.
    pub fn statistic(&self, x: &[T], i: usize) -> Result<T> {
        let n = self.cfg.window;
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.len() });
        }
        let centered: Vec<T> = x.iter().map(|&v| v - self.cfg.model.mean).collect();
        Ok(self.statistic_centered(&centered, i) / T::from_usize_exact(n))
    }

    fn statistic_centered(&self, centered: &[T], i: usize) -> T {
        match &self.kernels {
            Kernels::Mean(ks) => ks[i].eval(centered),
            Kernels::Scale(ks) => ks[i].eval(&centered[i..]),
        }
    }

    /// Tests one window of `n` raw observations, labelled `window_index`.
    pub fn test(&self, x: &[T], window_index: usize) -> Result<WindowDecision<T>> {
        let n = self.cfg.window;
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.len() });
        }
        let n_t = T::from_usize_exact(n);
        let centered: Vec<T> = x.iter().map(|&v| v - self.cfg.model.mean).collect();
        let count = match &self.kernels {
            Kernels::Mean(ks) => ks.len(),
            Kernels::Scale(ks) => ks.len(),
        };
        let mut best = T::neg_infinity();
        let mut best_i = 0;
        for i in 0..count {
            let margin = self.statistic_centered(&centered, i) / n_t - self.curve.values[i];
            if margin > best {
                best = margin;
                best_i = i;
            }
        }
        Ok(WindowDecision {
            window_index,
            alarm: best > T::zero(),
            margin: best,
            argmax_beta: self.curve.betas[best_i],
        })
    }

    /// Slides the window one observation at a time over `series`.
    pub fn run(&self, series: &[T]) -> Result<SequentialRun<T>> {
        let n = self.cfg.window;
        if series.len() < n {
            return Err(Error::SeriesTooShort {
                len: series.len(),
                window: n,
            });
        }
        let decisions = (0..=series.len() - n)
            .into_par_iter()
            .map(|s| self.test(&series[s..s + n], s + 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(SequentialRun { window: n, decisions })
    }
}

/// Decisions for every window of a series, in window order.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialRun<T> {
    pub window: usize,
    pub decisions: Vec<WindowDecision<T>>,
}

impl<T: Scalar> SequentialRun<T> {
    /// Detection time for a changepoint at observation `k` (1-based): the last
    /// observation of the first alarmed window that contains `k`.
    pub fn first_detection(&self, k: usize) -> Option<usize> {
        let first = (k + 1).saturating_sub(self.window).max(1);
        self.decisions
            .iter()
            .skip(first - 1)
            .find(|d| d.alarm)
            .map(|d| d.window_index + self.window - 1)
    }

    /// Detection time minus `k`.
    pub fn delay(&self, k: usize) -> Option<usize> {
        self.first_detection(k).map(|t| t.saturating_sub(k))
    }

    pub fn alarms(&self) -> impl Iterator<Item = &WindowDecision<T>> {
        self.decisions.iter().filter(|d| d.alarm)
    }
}

/// Tests a single window against a precomputed curve.
pub fn test_window<T: Scalar>(x: &[T], cfg: &DetectorConfig<T>, curve: &ThresholdCurve<T>) -> Result<WindowDecision<T>> {
    Detector::with_curve(cfg.clone(), curve.clone())?.test(x, 1)
}

/// Builds the detector for `cfg` and runs it over `series`.
pub fn run_sequential<T: Scalar>(series: &[T], cfg: &DetectorConfig<T>) -> Result<SequentialRun<T>> {
    if series.len() < cfg.window {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            window: cfg.window,
        });
    }
    Detector::new(cfg.clone())?.run(series)
}
