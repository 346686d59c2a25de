//! Critical functions `b(β)` calibrated so that every candidate changepoint
//! fraction has the same large-deviations decay rate `γ`.
//!
//! Three families are covered:
//!
//! * mean shift in an ARMA sequence, closed form through the long-run
//!   precision `𝒯` (or the exact `t_{n,β}` for the finite-window variant);
//! * variance change in independent data and its dependent-data twin, the
//!   scale change without a mean, both roots of the same implicit equation;
//! * scale change with a nonzero level, solved by inverting a numeric
//!   Legendre transform.

use crate::arma::{grid_index, indicator, ArmaModel, CovarianceContext};
use crate::error::{Error, Result};
use crate::likelihood::{legendre, mgf_independent, ChangeKind, GaussianPair, GeneralLogMgf, ThetaDomain};
use crate::scalar::Scalar;

/// Residual target for the implicit threshold equations.
pub const ROOT_TOL: f64 = 1e-10;
/// Residual target when the rate itself comes from a numeric Legendre transform.
pub const LEGENDRE_ROOT_TOL: f64 = 1e-8;
const MAX_DOUBLINGS: usize = 60;
const MAX_BISECTIONS: usize = 400;

/// `γ` solving `exp(−nγ) = α`.
pub fn gamma_from_alpha<T: Scalar>(alpha: T, n: usize) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidAlpha(alpha.to_f64_lossy()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("window length must be positive".into()));
    }
    Ok(-alpha.ln() / T::from_usize_exact(n))
}

fn check_gamma_beta<T: Scalar>(gamma: T, beta: T) -> Result<()> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    if !(beta >= T::zero() && beta < T::one()) {
        return Err(Error::InvalidParameter(format!("beta must lie in [0, 1), got {beta}")));
    }
    Ok(())
}

/// Mean-shift threshold from a precision density `τ` (so that `νᵀT⁻¹ν ≈ n τ ν̄²`):
/// `|ν̄|√(2τγ) − ½ν̄²τ`. The magnitude of `ν̄` selects the upper-tail root.
fn mean_shift_root<T: Scalar>(nu_bar: T, density: T, gamma: T) -> T {
    nu_bar.abs() * (T::lit(2.0) * density * gamma).sqrt() - T::lit(0.5) * nu_bar * nu_bar * density
}

/// `b(β) = ν̄√(2𝒯γ(1−β)) − ½ν̄²𝒯(1−β)` with `𝒯` the model's long-run precision.
pub fn b_mean_change<T: Scalar>(model: &ArmaModel<T>, nu_bar: T, gamma: T, beta: T) -> Result<T> {
    check_gamma_beta(gamma, beta)?;
    let precision = model.long_run_precision()?;
    Ok(mean_shift_root(nu_bar, precision * (T::one() - beta), gamma))
}

/// AR(1) form: `ν̄` rescaled by `(1−ρ)/σ`.
pub fn b_mean_change_ar1<T: Scalar>(rho: T, sigma: T, nu_bar: T, gamma: T, beta: T) -> Result<T> {
    check_gamma_beta(gamma, beta)?;
    let scale = (T::one() - rho) / sigma;
    let rest = T::one() - beta;
    Ok(nu_bar.abs() * scale * (T::lit(2.0) * gamma * rest).sqrt() - T::lit(0.5) * nu_bar * nu_bar * scale * scale * rest)
}

/// MA(1) form: `ν̄` rescaled by `1/(σ(1+ϑ))`.
pub fn b_mean_change_ma1<T: Scalar>(theta: T, sigma: T, nu_bar: T, gamma: T, beta: T) -> Result<T> {
    check_gamma_beta(gamma, beta)?;
    let scale = T::one() / (sigma * (T::one() + theta));
    let rest = T::one() - beta;
    Ok(nu_bar.abs() * scale * (T::lit(2.0) * gamma * rest).sqrt() - T::lit(0.5) * nu_bar * nu_bar * scale * scale * rest)
}

/// Finite-window mean-shift threshold: solves `(nb + ½ν̄²t)²/(2ν̄²t) = nγ`
/// with the exact `t = t_{n,β}`, i.e. `b = ν̄√(2γt/n) − ν̄²t/(2n)`.
pub fn b_mean_change_finite<T: Scalar>(ctx: &CovarianceContext<T>, nu_bar: T, gamma: T, beta: T) -> Result<T> {
    check_gamma_beta(gamma, beta)?;
    let t = ctx.t_sum(beta)?;
    Ok(mean_shift_root(nu_bar, t / T::from_usize_exact(ctx.n()), gamma))
}

/// Solves `γ = (1−β)(−½ − r·u − ½log(−2r·u))`, `u = b/(1−β) − log_ratio`, on
/// the branch where the optimizing `θ` is positive.
///
/// Writing `w = −2r·u > 0` turns the right-hand side into `(1−β)·½(w − 1 − ln w)`,
/// which vanishes at the null mean `w = 1`. The upper-tail root has `w < 1`
/// when `r > 0` and `w > 1` when `r < 0`. The bisection runs in `ln w`, which
/// keeps the `w → 0` end resolvable as `β → 1`.
fn solve_rate_equation<T: Scalar>(r: T, log_ratio: T, gamma: T, beta: T) -> Result<T> {
    let rest = T::one() - beta;
    let target = gamma / rest;
    let half = T::lit(0.5);
    let h = |l: T| half * (l.exp() - T::one() - l);
    let dir = if r > T::zero() { -T::one() } else { T::one() };

    // h(0) = 0 < target: expand outward until h exceeds the target
    let mut inner = T::zero();
    let mut step = T::one();
    let mut outer = None;
    for _ in 0..MAX_DOUBLINGS {
        let cand = inner + dir * step;
        let v = h(cand);
        if !v.is_finite() {
            break;
        }
        if v >= target {
            outer = Some(cand);
            break;
        }
        inner = cand;
        step = step + step;
    }
    let outer = outer.ok_or_else(|| Error::BracketingFailure(format!("rate {target} not reached")))?;
    let (mut below, mut above) = (inner, outer);
    for _ in 0..MAX_BISECTIONS {
        let mid = (below + above) * half;
        if mid == below || mid == above {
            break;
        }
        if h(mid) < target {
            below = mid;
        } else {
            above = mid;
        }
    }
    let l = (below + above) * half;
    let w = l.exp();
    Ok(rest * (log_ratio - w / (T::lit(2.0) * r)))
}

/// The displayed decay-rate equation for the variance/scale tests, as a
/// residual: `(1−β)(−½ − r·u − ½log(−2r·u)) − γ`. NaN off the admissible branch.
pub fn rate_equation_residual<T: Scalar>(r: T, log_ratio: T, gamma: T, beta: T, b: T) -> T {
    let rest = T::one() - beta;
    let u = b / rest - log_ratio;
    let half = T::lit(0.5);
    rest * (-half - r * u - half * (-T::lit(2.0) * r * u).ln()) - gamma
}

/// Coefficients `(r, log_ratio)` of the variance-change equation.
pub fn variance_coefficients<T: Scalar>(sigma: T, tau: T) -> (T, T) {
    let (s2, t2) = (sigma * sigma, tau * tau);
    (t2 / (s2 - t2), (sigma / tau).ln())
}

/// Coefficients `(r, log_ratio)` of the zero-mean scale-change equation.
pub fn scale_coefficients<T: Scalar>(f: T) -> (T, T) {
    (T::one() / (T::one() / (f * f) - T::one()), -f.ln())
}

/// Threshold for a change in standard deviation from `sigma` to `tau` in
/// independent Gaussian data.
pub fn b_variance_change<T: Scalar>(sigma: T, tau: T, gamma: T, beta: T) -> Result<T> {
    check_gamma_beta(gamma, beta)?;
    if !(sigma > T::zero()) || !(tau > T::zero()) {
        return Err(Error::InvalidSigma(sigma.min(tau).to_f64_lossy()));
    }
    if sigma == tau {
        return Err(Error::EqualVariances(sigma.to_f64_lossy()));
    }
    let (r, log_ratio) = variance_coefficients(sigma, tau);
    solve_rate_equation(r, log_ratio, gamma, beta)
}

/// Threshold for a covariance inflation by `f²` with no level change.
pub fn b_scale_change<T: Scalar>(f: T, gamma: T, beta: T) -> Result<T> {
    check_gamma_beta(gamma, beta)?;
    if !(f > T::zero()) {
        return Err(Error::InvalidParameter("scale factor must be positive".into()));
    }
    if f == T::one() {
        return Err(Error::UnitScale);
    }
    let (r, log_ratio) = scale_coefficients(f);
    solve_rate_equation(r, log_ratio, gamma, beta)
}

/// Per-observation log-MGF of the block scale statistic,
/// `(1/n) log 𝔼₀ exp(θℒ_{n,β}(X̌))`, parameterized by `s_{n,β}/n`.
#[derive(Debug, Clone, Copy)]
pub struct ScaleLogMgf<T> {
    pub f: T,
    pub nu_bar: T,
    pub rest: T,
    pub s_per_n: T,
}

impl<T: Scalar> ScaleLogMgf<T> {
    pub fn new(f: T, mu_bar: T, beta: T, s_per_n: T) -> Self {
        Self {
            f,
            nu_bar: f * mu_bar - mu_bar,
            rest: T::one() - beta,
            s_per_n,
        }
    }

    pub fn domain(&self) -> ThetaDomain<T> {
        scale_domain(self.f)
    }

    pub fn eval(&self, theta: T) -> Result<T> {
        let f2 = self.f * self.f;
        let mix = theta / f2 + T::one() - theta;
        if !(mix > T::zero()) {
            return Err(Error::OutsideDomain {
                theta: theta.to_f64_lossy(),
            });
        }
        let half = T::lit(0.5);
        let sv = self.s_per_n * self.nu_bar * self.nu_bar;
        Ok(-theta * self.rest * self.f.ln() - half * self.rest * mix.ln() - theta * sv * half / f2
            + theta * theta * sv * half / (f2 * f2 * mix))
    }

    /// `Λ′(0)`: the null mean of `ℒ/n`, where the rate vanishes.
    pub fn null_mean(&self) -> T {
        let half = T::lit(0.5);
        let f2 = self.f * self.f;
        -self.rest * self.f.ln() - half * self.rest * (T::one() / f2 - T::one())
            - self.s_per_n * self.nu_bar * self.nu_bar * half / f2
    }

    /// `ℐ(b)`; `+∞` when `b` exceeds every slope of the log-MGF.
    pub fn rate(&self, b: T) -> Result<T> {
        match legendre(b, |t| self.eval(t), self.domain()) {
            Ok(p) => Ok(p.value),
            Err(Error::NoMaximizer) => Ok(T::infinity()),
            Err(e) => Err(e),
        }
    }
}

/// `θ` range where `θ/f² + 1 − θ > 0`.
pub fn scale_domain<T: Scalar>(f: T) -> ThetaDomain<T> {
    let c = T::one() / (f * f) - T::one();
    if c > T::zero() {
        ThetaDomain::new(-T::one() / c, T::infinity())
    } else {
        ThetaDomain::new(T::neg_infinity(), -T::one() / c)
    }
}

/// `θ` range where `θσ² + (1−θ)τ² > 0`.
pub fn variance_domain<T: Scalar>(sigma: T, tau: T) -> ThetaDomain<T> {
    scale_domain(tau / sigma)
}

/// Inverts `ℐ(b) = γ` on the upper side of the null mean for a rate given as a
/// closure, by doubling an offset from `b0` and bisecting.
fn invert_rate<T: Scalar>(rate: impl Fn(T) -> Result<T>, b0: T, scale: T, gamma: T) -> Result<T> {
    let tol = T::tolerance(LEGENDRE_ROOT_TOL) * T::lit(0.01);
    let mut below = b0;
    let mut step = scale;
    let mut above = None;
    for _ in 0..MAX_DOUBLINGS {
        let cand = b0 + step;
        if rate(cand)? >= gamma {
            above = Some(cand);
            break;
        }
        below = cand;
        step = step + step;
    }
    let mut above = above.ok_or_else(|| Error::BracketingFailure(format!("rate {gamma} not reached above {b0}")))?;
    for _ in 0..MAX_BISECTIONS {
        let mid = (below + above) * T::lit(0.5);
        if mid == below || mid == above {
            break;
        }
        let resid = rate(mid)? - gamma;
        if resid.abs() < tol {
            return Ok(mid);
        }
        if resid < T::zero() {
            below = mid;
        } else {
            above = mid;
        }
    }
    Ok((below + above) * T::lit(0.5))
}

fn scale_threshold_from_density<T: Scalar>(f: T, mu_bar: T, gamma: T, beta: T, s_per_n: T) -> Result<T> {
    let mgf = ScaleLogMgf::new(f, mu_bar, beta, s_per_n);
    let b0 = mgf.null_mean();
    let scale = T::lit(0.01) * (T::one() - beta).max(T::lit(1e-3));
    invert_rate(|b| mgf.rate(b), b0, scale, gamma)
}

/// Scale-change threshold with a level change `μ̄ → fμ̄`, using the exact
/// `s_{n,β} = 𝟙ᵀΣ⁻¹𝟙` of the post-change block `ctx_block` (length `n(1−β)`).
pub fn b_scale_change_general<T: Scalar>(
    ctx_block: &CovarianceContext<T>,
    f: T,
    mu_bar: T,
    gamma: T,
    beta: T,
    n: usize,
) -> Result<T> {
    check_gamma_beta(gamma, beta)?;
    if !(f > T::zero()) {
        return Err(Error::InvalidParameter("scale factor must be positive".into()));
    }
    if f == T::one() {
        return Err(Error::UnitScale);
    }
    let m = grid_index(beta, n)?;
    if ctx_block.n() != n - m {
        return Err(Error::DimensionMismatch {
            expected: n - m,
            found: ctx_block.n(),
        });
    }
    let s = ctx_block.t_sum_at(0);
    scale_threshold_from_density(f, mu_bar, gamma, beta, s / T::from_usize_exact(n))
}

/// Scale-change threshold with a level change, replacing `s_{n,β}/n` by its
/// limit `𝒯(1−β)`.
pub fn b_scale_change_limit<T: Scalar>(model: &ArmaModel<T>, f: T, mu_bar: T, gamma: T, beta: T) -> Result<T> {
    check_gamma_beta(gamma, beta)?;
    if f == T::one() {
        return Err(Error::UnitScale);
    }
    let precision = model.long_run_precision()?;
    scale_threshold_from_density(f, mu_bar, gamma, beta, precision * (T::one() - beta))
}

/// Which approximation of `t_{n,β}` / `s_{n,β}` the curve uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdVariant {
    /// Long-run limits through `𝒯`.
    #[default]
    Asymptotic,
    /// Exact finite-window quadratic forms.
    FiniteN,
}

/// `β ↦ b(β)` on the grid `β = i/n`, `i = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve<T> {
    pub n: usize,
    pub betas: Vec<T>,
    pub values: Vec<T>,
    pub gamma: T,
    pub kind: ChangeKind<T>,
    pub variant: ThresholdVariant,
}

impl<T: Scalar> ThresholdCurve<T> {
    /// Computes the curve for windows of length `n` under null model `model`.
    pub fn build(
        model: &ArmaModel<T>,
        kind: ChangeKind<T>,
        gamma: T,
        n: usize,
        variant: ThresholdVariant,
    ) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("window length must be positive".into()));
        }
        model.validate()?;
        kind.validate(model.sigma)?;
        let n_t = T::from_usize_exact(n);
        let betas: Vec<T> = (0..n).map(|i| T::from_usize_exact(i) / n_t).collect();
        let ctx = match (variant, kind) {
            (ThresholdVariant::FiniteN, ChangeKind::MeanShift { .. }) => Some(model.context(n)?),
            (ThresholdVariant::FiniteN, ChangeKind::Scale { f, mu_bar }) if (f * mu_bar - mu_bar) != T::zero() => {
                Some(model.context(n)?)
            }
            _ => None,
        };
        let values = betas
            .iter()
            .enumerate()
            .map(|(i, &beta)| match kind {
                ChangeKind::MeanShift { nu_bar } => match &ctx {
                    Some(ctx) => b_mean_change_finite(ctx, nu_bar, gamma, beta),
                    None => b_mean_change(model, nu_bar, gamma, beta),
                },
                ChangeKind::Variance { tau } => b_variance_change(model.sigma, tau, gamma, beta),
                ChangeKind::Scale { f, mu_bar } => {
                    if (f * mu_bar - mu_bar).is_zero() {
                        b_scale_change(f, gamma, beta)
                    } else if let Some(ctx) = &ctx {
                        b_scale_change_general(&ctx.leading(n - i)?, f, mu_bar, gamma, beta, n)
                    } else {
                        b_scale_change_limit(model, f, mu_bar, gamma, beta)
                    }
                }
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(Self {
            n,
            betas,
            values,
            gamma,
            kind,
            variant,
        })
    }

    pub fn value_at(&self, i: usize) -> T {
        self.values[i]
    }

    /// Recomputes the decay rate `ℐ(b(β_i))` through the moment generating
    /// function of the matching statistic and a numeric Legendre transform.
    /// A well-calibrated curve returns `gamma` at every index.
    pub fn decay_rate_at(&self, model: &ArmaModel<T>, i: usize) -> Result<T> {
        let n = self.n;
        let n_t = T::from_usize_exact(n);
        let beta = self.betas[i];
        let b = self.values[i];
        let rest = T::one() - beta;
        let post = n - i;
        match (self.kind, self.variant) {
            (ChangeKind::MeanShift { nu_bar }, ThresholdVariant::Asymptotic) => {
                let q = nu_bar * nu_bar * model.long_run_precision()? * rest;
                let lam = |t: T| Ok(T::lit(0.5) * (t * t - t) * q);
                Ok(legendre(b, lam, ThetaDomain::unbounded())?.value)
            }
            (ChangeKind::MeanShift { nu_bar }, ThresholdVariant::FiniteN) => {
                let ctx = model.context(n)?;
                let pair = GaussianPair::new(indicator(n, i, nu_bar), ctx.clone(), ctx)?;
                let mgf = GeneralLogMgf::new(&pair)?;
                Ok(legendre(b, |t| Ok(mgf.eval(t)? / n_t), ThetaDomain::unbounded())?.value)
            }
            (ChangeKind::Variance { tau }, _) => {
                let sigma = model.sigma;
                let sigmas = vec![sigma; n];
                let taus: Vec<T> = (0..n).map(|k| if k < i { sigma } else { tau }).collect();
                let nu = vec![T::zero(); n];
                let lam = |t: T| Ok(mgf_independent(t, &sigmas, &taus, &nu)? / n_t);
                Ok(legendre(b, lam, variance_domain(sigma, tau))?.value)
            }
            (ChangeKind::Scale { f, mu_bar }, variant) => {
                let nu_bar = f * mu_bar - mu_bar;
                if nu_bar.is_zero() {
                    // block of `post` independent standardized terms, sd 1 → f
                    let ones = vec![T::one(); post];
                    let fs = vec![f; post];
                    let zeros = vec![T::zero(); post];
                    let lam = |t: T| Ok(mgf_independent(t, &ones, &fs, &zeros)? / n_t);
                    return Ok(legendre(b, lam, scale_domain(f))?.value);
                }
                match variant {
                    ThresholdVariant::FiniteN => {
                        let block = model.context(post)?;
                        let inflated = model.clone().with_sigma(model.sigma * f)?.context(post)?;
                        let pair = GaussianPair::new(vec![nu_bar; post], block, inflated)?;
                        let mgf = GeneralLogMgf::new(&pair)?;
                        Ok(legendre(b, |t| Ok(mgf.eval(t)? / n_t), scale_domain(f))?.value)
                    }
                    ThresholdVariant::Asymptotic => {
                        let s_per_n = model.long_run_precision()? * rest;
                        ScaleLogMgf::new(f, mu_bar, beta, s_per_n).rate(b)
                    }
                }
            }
        }
    }
}
