//! Changepoint detection for Gaussian ARMA sequences with thresholds
//! calibrated by large deviations.
//!
//! A window of `n` observations is tested for a change at every fraction
//! `β = i/n` with the exact Gaussian log-likelihood ratio `ℒ_{n,β}`. The
//! critical function `b(β)` is chosen so that the false-alarm probability of
//! every candidate changepoint decays at the same exponential rate `γ`, and
//! `γ` is set from a significance level through `e^{−nγ} = α`.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` and `*F32` aliases name the usual instantiations. Monte-Carlo
//! experiments run in `f64`.
//!
//! ```
//! use ldcusum::{ArmaModelF64, ChangeInjection, ChangeKind, DetectorConfig, run_sequential};
//!
//! let model = ArmaModelF64::ar1(0.5, 1.0).unwrap();
//! let series = model.simulate(200, &ChangeInjection::smooth(100, 3.0), 7).unwrap();
//! let cfg = DetectorConfig::new(model, ChangeKind::MeanShift { nu_bar: 3.0 });
//! let run = run_sequential(&series, &cfg).unwrap();
//! assert_eq!(run.decisions.len(), 151);
//! ```

pub mod arma;
pub mod detector;
pub mod error;
pub mod experiments;
pub mod likelihood;
pub mod linalg;
pub mod scalar;
pub mod thresholds;

pub use arma::{grid_index, indicator, ArmaModel, ChangeInjection, CovarianceContext, TransitionMode};
pub use detector::{run_sequential, test_window, Detector, DetectorConfig, SequentialRun, WindowDecision};
pub use error::{Error, Result};
pub use experiments::{
    basic_experiment, coefficient_sweep, convergence_diagnostic, sensitivity_sweep, ExperimentPlan,
    ExperimentReport, ProcessSpec, TestedMean,
};
pub use likelihood::{
    legendre, log_likelihood_ratio, mean_shift_llr, mgf_general, mgf_independent, scale_llr, ChangeKind,
    ChangeSpec, GaussianPair, ThetaDomain,
};
pub use scalar::Scalar;
pub use thresholds::{
    b_mean_change, b_mean_change_ar1, b_mean_change_finite, b_mean_change_ma1, b_scale_change,
    b_scale_change_general, b_variance_change, gamma_from_alpha, ThresholdCurve, ThresholdVariant,
};

pub type ArmaModelF64 = ArmaModel<f64>;
pub type ArmaModelF32 = ArmaModel<f32>;
pub type CovarianceContextF64 = CovarianceContext<f64>;
pub type CovarianceContextF32 = CovarianceContext<f32>;
pub type ChangeKindF64 = ChangeKind<f64>;
pub type ChangeKindF32 = ChangeKind<f32>;
pub type GaussianPairF64 = GaussianPair<f64>;
pub type GaussianPairF32 = GaussianPair<f32>;
pub type ThresholdCurveF64 = ThresholdCurve<f64>;
pub type ThresholdCurveF32 = ThresholdCurve<f32>;
pub type DetectorConfigF64 = DetectorConfig<f64>;
pub type DetectorConfigF32 = DetectorConfig<f32>;
pub type DetectorF64 = Detector<f64>;
pub type DetectorF32 = Detector<f32>;
