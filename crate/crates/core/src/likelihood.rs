//! Gaussian log-likelihood ratios, their moment generating functions under the
//! null, and the numeric Legendre transform that turns a log-MGF into a rate
//! function.
//!
//! Everything is kept in log space: for windows of a few dozen correlated
//! observations `|Σ|` under- or overflows long before its logarithm does.

use crate::arma::{grid_index, indicator, CovarianceContext};
use crate::error::{Error, Result};
use crate::linalg::{check_len, dot, Cholesky, DenseMatrix};
use crate::scalar::Scalar;

/// Step for the central-difference derivative of a log-MGF.
pub const DERIVATIVE_STEP: f64 = 1e-7;
const MAX_BRACKET_STEPS: usize = 400;
const MAX_BISECTIONS: usize = 300;

/// Null `N(0, Σ)` against alternative `N(ν, T)`.
#[derive(Debug, Clone)]
pub struct GaussianPair<T> {
    nu: Vec<T>,
    sigma_ctx: CovarianceContext<T>,
    t_ctx: CovarianceContext<T>,
}

impl<T: Scalar> GaussianPair<T> {
    pub fn new(nu: Vec<T>, sigma_ctx: CovarianceContext<T>, t_ctx: CovarianceContext<T>) -> Result<Self> {
        check_len(sigma_ctx.n(), t_ctx.n())?;
        check_len(sigma_ctx.n(), nu.len())?;
        Ok(Self {
            nu,
            sigma_ctx,
            t_ctx,
        })
    }

    pub fn n(&self) -> usize {
        self.nu.len()
    }

    pub fn nu(&self) -> &[T] {
        &self.nu
    }

    pub fn sigma_ctx(&self) -> &CovarianceContext<T> {
        &self.sigma_ctx
    }

    pub fn t_ctx(&self) -> &CovarianceContext<T> {
        &self.t_ctx
    }
}

/// Alternative hypothesis tested after the changepoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChangeKind<T> {
    /// Mean moves from 0 to `nu_bar`; covariance unchanged.
    MeanShift { nu_bar: T },
    /// Independent data whose standard deviation moves from the model's
    /// `sigma` to `tau`.
    Variance { tau: T },
    /// Mean `mu_bar` becomes `f·mu_bar` and the covariance becomes `f²Σ`.
    Scale { f: T, mu_bar: T },
}

impl<T: Scalar> ChangeKind<T> {
    pub fn validate(&self, sigma: T) -> Result<()> {
        let finite = |v: T, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be finite")))
            }
        };
        match *self {
            ChangeKind::MeanShift { nu_bar } => {
                finite(nu_bar, "nu_bar")?;
                if nu_bar.is_zero() {
                    return Err(Error::InvalidParameter("mean shift nu_bar must be nonzero".into()));
                }
            }
            ChangeKind::Variance { tau } => {
                finite(tau, "tau")?;
                if !(tau > T::zero()) {
                    return Err(Error::InvalidSigma(tau.to_f64_lossy()));
                }
                if tau == sigma {
                    return Err(Error::EqualVariances(tau.to_f64_lossy()));
                }
            }
            ChangeKind::Scale { f, mu_bar } => {
                finite(f, "f")?;
                finite(mu_bar, "mu_bar")?;
                if !(f > T::zero()) {
                    return Err(Error::InvalidParameter("scale factor must be positive".into()));
                }
                if f == T::one() {
                    return Err(Error::UnitScale);
                }
            }
        }
        Ok(())
    }
}

/// A change kind together with the changepoint fraction `β` (change effective
/// from observation `nβ + 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeSpec<T> {
    pub kind: ChangeKind<T>,
    pub beta: T,
}

/// `ℒ_n(x) = ½log|Σ| − ½log|T| + ½xᵀΣ⁻¹x − ½(x−ν)ᵀT⁻¹(x−ν)`.
pub fn log_likelihood_ratio<T: Scalar>(x: &[T], pair: &GaussianPair<T>) -> Result<T> {
    check_len(pair.n(), x.len())?;
    let half = T::lit(0.5);
    let resid: Vec<T> = x.iter().zip(&pair.nu).map(|(&a, &b)| a - b).collect();
    let null_q = pair.sigma_ctx.precision_quadratic(x, x)?;
    let alt_q = pair.t_ctx.precision_quadratic(&resid, &resid)?;
    Ok(half * (pair.sigma_ctx.log_det() - pair.t_ctx.log_det()) + half * (null_q - alt_q))
}

/// Mean-shift statistic with `Σ = T = ctx` and `ν = (0,…,0, ν̄,…,ν̄)`, the
/// first `nβ` entries zero: `νᵀT⁻¹x − ½νᵀT⁻¹ν`.
pub fn mean_shift_llr<T: Scalar>(x: &[T], ctx: &CovarianceContext<T>, nu_bar: T, beta: T) -> Result<T> {
    check_len(ctx.n(), x.len())?;
    let m = grid_index(beta, ctx.n())?;
    Ok(MeanShiftKernel::new(ctx, nu_bar, m).eval(x))
}

/// Precomputed mean-shift statistic for one grid index: `x ↦ wᵀx − c` with
/// `w = T⁻¹ν` and `c = ½νᵀT⁻¹ν`.
#[derive(Debug, Clone)]
pub struct MeanShiftKernel<T> {
    weights: Vec<T>,
    offset: T,
}

impl<T: Scalar> MeanShiftKernel<T> {
    pub fn new(ctx: &CovarianceContext<T>, nu_bar: T, m: usize) -> Self {
        let nu = indicator(ctx.n(), m, nu_bar);
        let weights = ctx.solve(&nu).expect("indicator has window length");
        let offset = T::lit(0.5) * dot(&weights, &nu);
        Self { weights, offset }
    }

    pub fn eval(&self, x: &[T]) -> T {
        dot(&self.weights, x) - self.offset
    }
}

/// Scale-change statistic on the post-change block `x̌` of length `n(1−β)`:
/// `−n(1−β)log f + ½x̌ᵀΣ⁻¹x̌ − (1/(2f²))(x̌−ν)ᵀΣ⁻¹(x̌−ν)`, `ν ≡ fμ̄ − μ̄`.
pub fn scale_llr<T: Scalar>(
    x_window: &[T],
    ctx_block: &CovarianceContext<T>,
    f: T,
    mu_bar: T,
    beta: T,
    n: usize,
) -> Result<T> {
    let m = grid_index(beta, n)?;
    check_len(n - m, ctx_block.n())?;
    check_len(n - m, x_window.len())?;
    if !(f > T::zero()) {
        return Err(Error::InvalidParameter("scale factor must be positive".into()));
    }
    Ok(ScaleKernel::new(ctx_block, f, mu_bar).eval(x_window))
}

/// Precomputed scale-change statistic for one block length.
#[derive(Debug, Clone)]
pub struct ScaleKernel<T> {
    ctx: CovarianceContext<T>,
    // Σ⁻¹𝟙
    ones_solved: Vec<T>,
    log_f_term: T,
    quad_coef: T,
    lin_coef: T,
    constant: T,
}

impl<T: Scalar> ScaleKernel<T> {
    pub fn new(ctx_block: &CovarianceContext<T>, f: T, mu_bar: T) -> Self {
        let len = ctx_block.n();
        let ones = vec![T::one(); len];
        let ones_solved = ctx_block.solve(&ones).expect("block length");
        let s = dot(&ones_solved, &ones);
        let nu_bar = f * mu_bar - mu_bar;
        let f2 = f * f;
        let half = T::lit(0.5);
        Self {
            ctx: ctx_block.clone(),
            ones_solved,
            log_f_term: -T::from_usize_exact(len) * f.ln(),
            quad_coef: half - half / f2,
            lin_coef: nu_bar / f2,
            constant: -nu_bar * nu_bar * s * half / f2,
        }
    }

    pub fn eval(&self, block: &[T]) -> T {
        let q = self
            .ctx
            .precision_quadratic(block, block)
            .expect("block length");
        self.log_f_term + self.quad_coef * q + self.lin_coef * dot(&self.ones_solved, block) + self.constant
    }
}

/// `log 𝔼₀ exp(θℒ_n)` for a general Gaussian pair.
///
/// Forms `M = θT⁻¹ + (1−θ)Σ⁻¹` and factorizes it; failure means the MGF is
/// infinite at `θ`. With `a = T⁻¹ν`,
/// `log MGF = (θ/2)(log|Σ| − log|T|) − ½(log|M| + log|Σ|) − (θ/2)νᵀa + (θ²/2)aᵀM⁻¹a`.
pub fn mgf_general<T: Scalar>(theta: T, pair: &GaussianPair<T>) -> Result<T> {
    GeneralLogMgf::new(pair)?.eval(theta)
}

/// [`mgf_general`] with the θ-independent pieces computed once.
#[derive(Debug, Clone)]
pub struct GeneralLogMgf<T> {
    t_inv: DenseMatrix<T>,
    s_inv: DenseMatrix<T>,
    log_sigma: T,
    log_t: T,
    a: Vec<T>,
    q: T,
}

impl<T: Scalar> GeneralLogMgf<T> {
    pub fn new(pair: &GaussianPair<T>) -> Result<Self> {
        let a = pair.t_ctx.solve(&pair.nu)?;
        Ok(Self {
            t_inv: inverse_by_columns(&pair.t_ctx)?,
            s_inv: inverse_by_columns(&pair.sigma_ctx)?,
            log_sigma: pair.sigma_ctx.log_det(),
            log_t: pair.t_ctx.log_det(),
            q: dot(&pair.nu, &a),
            a,
        })
    }

    pub fn eval(&self, theta: T) -> Result<T> {
        let half = T::lit(0.5);
        let one_minus = T::one() - theta;
        let m = DenseMatrix::from_fn(self.a.len(), |i, j| {
            let upper = theta * self.t_inv.get(i, j) + one_minus * self.s_inv.get(i, j);
            let lower = theta * self.t_inv.get(j, i) + one_minus * self.s_inv.get(j, i);
            (upper + lower) * half
        });
        let chol = Cholesky::new(&m).map_err(|_| Error::OutsideDomain {
            theta: theta.to_f64_lossy(),
        })?;
        let r = chol.inverse_quadratic(&self.a, &self.a)?;
        Ok(theta * half * (self.log_sigma - self.log_t)
            - half * (chol.log_det() + self.log_sigma)
            - theta * half * self.q
            + theta * theta * half * r)
    }
}

fn inverse_by_columns<T: Scalar>(ctx: &CovarianceContext<T>) -> Result<DenseMatrix<T>> {
    let n = ctx.n();
    let mut inv = DenseMatrix::zeros(n);
    let mut e = vec![T::zero(); n];
    for j in 0..n {
        e[j] = T::one();
        let col = ctx.solve(&e)?;
        for (i, v) in col.into_iter().enumerate() {
            inv.set(i, j, v);
        }
        e[j] = T::zero();
    }
    Ok(inv)
}

/// `log 𝔼₀ exp(θℒ_n)` when `Σ = diag(σ²)` and `T = diag(τ²)`.
pub fn mgf_independent<T: Scalar>(theta: T, sigmas: &[T], taus: &[T], nu: &[T]) -> Result<T> {
    check_len(sigmas.len(), taus.len())?;
    check_len(sigmas.len(), nu.len())?;
    let half = T::lit(0.5);
    let one_minus = T::one() - theta;
    let mut acc = T::zero();
    for ((&s, &t), &v) in sigmas.iter().zip(taus).zip(nu) {
        let (s2, t2) = (s * s, t * t);
        let mix = theta * s2 + one_minus * t2;
        if !(mix > T::zero()) {
            return Err(Error::OutsideDomain {
                theta: theta.to_f64_lossy(),
            });
        }
        let v2 = v * v;
        acc = acc + theta * (s / t).ln() - half * (mix / t2).ln() - theta * half * v2 / t2
            + theta * theta * half * v2 * s2 / t2 / mix;
    }
    Ok(acc)
}

/// Open interval of `θ` on which a log-MGF is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaDomain<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Scalar> ThetaDomain<T> {
    pub fn new(lower: T, upper: T) -> Self {
        Self { lower, upper }
    }

    pub fn unbounded() -> Self {
        Self::new(T::neg_infinity(), T::infinity())
    }

    pub fn contains(&self, theta: T) -> bool {
        theta > self.lower && theta < self.upper
    }

    fn start(&self) -> T {
        if self.contains(T::zero()) {
            T::zero()
        } else if self.lower.is_finite() && self.upper.is_finite() {
            (self.lower + self.upper) * T::lit(0.5)
        } else if self.lower.is_finite() {
            self.lower + T::one()
        } else {
            self.upper - T::one()
        }
    }
}

/// Supremum of `θb − Λ(θ)` and the `θ` attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendrePoint<T> {
    pub value: T,
    pub theta: T,
}

/// Central difference of `log_mgf` at `theta`, shrinking the step near the
/// domain edges.
pub fn log_mgf_derivative<T, F>(log_mgf: &F, theta: T, domain: &ThetaDomain<T>) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> Result<T>,
{
    let mut h = T::lit(DERIVATIVE_STEP) * T::one().max(theta.abs());
    let room = (theta - domain.lower).min(domain.upper - theta) * T::lit(0.5);
    if room < h {
        h = room;
    }
    if !(h > T::zero()) {
        return Err(Error::OutsideDomain {
            theta: theta.to_f64_lossy(),
        });
    }
    let d = (log_mgf(theta + h)? - log_mgf(theta - h)?) / (h + h);
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::OutsideDomain {
            theta: theta.to_f64_lossy(),
        })
    }
}

/// `sup_θ (θb − Λ(θ))` for a convex log-MGF `Λ` finite on `domain`.
///
/// The maximizer is located by bracketing and bisecting the decreasing
/// function `b − Λ′(θ)`; if derivative evaluations break down inside the
/// bracket the objective itself is maximized by golden-section search.
pub fn legendre<T, F>(b: T, log_mgf: F, domain: ThetaDomain<T>) -> Result<LegendrePoint<T>>
where
    T: Scalar,
    F: Fn(T) -> Result<T>,
{
    let objective = |theta: T| -> Result<T> { Ok(theta * b - log_mgf(theta)?) };
    let slope = |theta: T| -> Result<T> { Ok(b - log_mgf_derivative(&log_mgf, theta, &domain)?) };

    let start = domain.start();
    let g0 = slope(start)?;
    if g0.is_zero() {
        return finish(start, start, &objective, &domain);
    }
    let upward = g0 > T::zero();
    let (edge, sign) = if upward {
        (domain.upper, T::one())
    } else {
        (domain.lower, -T::one())
    };

    // walk away from the start until the slope changes sign
    let mut inner = start;
    let mut step = T::one().max(start.abs());
    let mut outer = None;
    for _ in 0..MAX_BRACKET_STEPS {
        let mut cand = inner + sign * step;
        if edge.is_finite() && (cand - edge) * sign >= T::zero() {
            cand = (inner + edge) * T::lit(0.5);
            if cand == inner || cand == edge {
                return Err(Error::NoMaximizer);
            }
        }
        let g = match slope(cand) {
            Ok(g) => g,
            Err(_) if edge.is_finite() => {
                // too close to the edge for a clean difference quotient
                return golden_section(inner, cand, &objective, &domain);
            }
            Err(e) => return Err(e),
        };
        if (g > T::zero()) == upward && !g.is_zero() {
            inner = cand;
            step = step + step;
            if !step.is_finite() || step > T::lit(1e15) {
                return Err(Error::NoMaximizer);
            }
        } else {
            outer = Some(cand);
            break;
        }
    }
    let Some(outer) = outer else {
        return Err(Error::NoMaximizer);
    };

    // positive slope on `lo`, non-positive on `hi`
    let (mut lo, mut hi) = if upward { (inner, outer) } else { (outer, inner) };
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if hi - lo <= T::epsilon() * T::lit(4.0) * T::one().max(mid.abs()) {
            break;
        }
        match slope(mid) {
            Ok(g) if g > T::zero() => lo = mid,
            Ok(_) => hi = mid,
            Err(_) => return golden_section(lo, hi, &objective, &domain),
        }
    }
    finish((lo + hi) * T::lit(0.5), start, &objective, &domain)
}

fn finish<T: Scalar>(
    theta: T,
    start: T,
    objective: &impl Fn(T) -> Result<T>,
    domain: &ThetaDomain<T>,
) -> Result<LegendrePoint<T>> {
    let mut value = objective(theta)?;
    // the supremum is at least the objective at any feasible point
    if domain.contains(start) {
        if let Ok(v0) = objective(start) {
            value = value.max(v0);
        }
    }
    Ok(LegendrePoint { value, theta })
}

/// Golden-section maximization of a concave objective on `[a, c]`.
fn golden_section<T: Scalar>(
    a: T,
    c: T,
    objective: &impl Fn(T) -> Result<T>,
    domain: &ThetaDomain<T>,
) -> Result<LegendrePoint<T>> {
    let inv_phi = T::lit(0.5) * (T::lit(5.0).sqrt() - T::one());
    let (mut a, mut c) = if a < c { (a, c) } else { (c, a) };
    let mut x1 = c - inv_phi * (c - a);
    let mut x2 = a + inv_phi * (c - a);
    let eval = |t: T| objective(t).unwrap_or(T::neg_infinity());
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    for _ in 0..MAX_BISECTIONS {
        if c - a <= T::epsilon() * T::lit(4.0) * T::one().max(a.abs()) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (c - a);
            f2 = eval(x2);
        } else {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - inv_phi * (c - a);
            f1 = eval(x1);
        }
    }
    let theta = (a + c) * T::lit(0.5);
    if !domain.contains(theta) {
        return Err(Error::NoMaximizer);
    }
    finish(theta, domain.start(), objective, domain)
}
