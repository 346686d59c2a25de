//! ARMA(p,q) models: validation, MA(∞) weights, autocovariances, windowed
//! covariance contexts and simulation with an injected change.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{check_len, DenseMatrix, ToeplitzFactor};
use crate::scalar::Scalar;

/// Root moduli must exceed `1 + STATIONARITY_MARGIN`.
pub const STATIONARITY_MARGIN: f64 = 1e-10;
/// Hard cap on the number of MA(∞) weights.
pub const PSI_CAP: usize = 100_000;
/// Truncation tolerance used for autocovariances.
pub const AUTOCOV_TOL: f64 = 1e-14;
const DEGENERATE_MA: f64 = 1e-12;

/// Gaussian ARMA(p,q) process
/// `X_i - c = ε_i + Σ ρ_j (X_{i-j} - c) + Σ ϑ_j ε_{i-j}`, `ε_i ~ N(0, σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaModel<T> {
    pub ar: Vec<T>,
    pub ma: Vec<T>,
    pub sigma: T,
    pub mean: T,
}

impl<T: Scalar> ArmaModel<T> {
    /// Builds and validates a model.
    pub fn new(ar: Vec<T>, ma: Vec<T>, sigma: T, mean: T) -> Result<Self> {
        let model = Self {
            ar,
            ma,
            sigma,
            mean,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn white_noise(sigma: T) -> Result<Self> {
        Self::new(vec![], vec![], sigma, T::zero())
    }

    pub fn ar1(rho: T, sigma: T) -> Result<Self> {
        Self::new(vec![rho], vec![], sigma, T::zero())
    }

    pub fn ma1(theta: T, sigma: T) -> Result<Self> {
        Self::new(vec![], vec![theta], sigma, T::zero())
    }

    pub fn with_mean(mut self, mean: T) -> Self {
        self.mean = mean;
        self
    }

    pub fn with_sigma(mut self, sigma: T) -> Result<Self> {
        self.sigma = sigma;
        self.validate()?;
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.ar.len()
    }

    pub fn q(&self) -> usize {
        self.ma.len()
    }

    pub fn is_white_noise(&self) -> bool {
        self.ar.iter().all(|c| c.is_zero()) && self.ma.iter().all(|c| c.is_zero())
    }

    /// Checks `sigma > 0` and that every root of `1 - ρ₁z - … - ρ_p z^p` lies
    /// outside the unit circle. MA invertibility is not required.
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > T::zero()) || !self.sigma.is_finite() {
            return Err(Error::InvalidSigma(self.sigma.to_f64_lossy()));
        }
        if self.ar.iter().chain(&self.ma).chain([&self.mean]).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite ARMA coefficient".into()));
        }
        let moduli = self.ar_root_moduli();
        if moduli.iter().any(|&m| !(m > 1.0 + STATIONARITY_MARGIN)) {
            return Err(Error::NonStationary { moduli });
        }
        Ok(())
    }

    /// Moduli of the AR polynomial roots, computed as reciprocals of the
    /// companion-matrix eigenvalue moduli. Zero eigenvalues give infinite roots.
    pub fn ar_root_moduli(&self) -> Vec<f64> {
        // trailing zero coefficients only add roots at infinity
        let p = self
            .ar
            .iter()
            .rposition(|c| !c.is_zero())
            .map_or(0, |i| i + 1);
        if p == 0 {
            return Vec::new();
        }
        let companion = DMatrix::<f64>::from_fn(p, p, |i, j| {
            if i == 0 {
                self.ar[j].to_f64_lossy()
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        companion
            .complex_eigenvalues()
            .iter()
            .map(|l| 1.0 / l.norm())
            .collect()
    }

    /// Weights `ψ₀ = 1, ψ₁, …` of the causal MA(∞) representation.
    ///
    /// The sequence stops before the first run of `max(p, 1)` consecutive
    /// weights below `tol` that starts past lag `q` (and ends at or past lag
    /// `p + q + 1`). A single weight can vanish by accident for AR(p≥2), which
    /// is why a run is needed.
    pub fn psi_weights(&self, tol: T) -> Result<Vec<T>> {
        let p = self.p();
        let q = self.q();
        let run_needed = p.max(1);
        let min_k = p + q + 1;
        let mut psi = vec![T::one()];
        let mut run = 0usize;
        for j in 1..=PSI_CAP {
            let mut v = if j <= q { self.ma[j - 1] } else { T::zero() };
            for i in 1..=j.min(p) {
                v = v + self.ar[i - 1] * psi[j - i];
            }
            psi.push(v);
            if j > q && v.abs() < tol {
                run += 1;
            } else {
                run = 0;
            }
            if run >= run_needed && j >= min_k {
                psi.truncate(j + 1 - run);
                return Ok(psi);
            }
        }
        Err(Error::TruncationFailure {
            tol: tol.to_f64_lossy(),
            cap: PSI_CAP,
        })
    }

    /// `γ(h) = σ² Σ_j ψ_j ψ_{j+h}` for `h = 0..=max_lag`.
    pub fn autocovariance(&self, max_lag: usize) -> Result<Vec<T>> {
        let psi = self.psi_weights(T::lit(AUTOCOV_TOL))?;
        let s2 = self.sigma * self.sigma;
        Ok((0..=max_lag)
            .map(|h| {
                if h >= psi.len() {
                    T::zero()
                } else {
                    psi.iter().zip(&psi[h..]).map(|(&a, &b)| a * b).sum::<T>() * s2
                }
            })
            .collect())
    }

    /// Limit of `t_{n,β} / (n(1-β))`: `((1 - Σρ) / (σ(1 + Σϑ)))²`.
    pub fn long_run_precision(&self) -> Result<T> {
        let ma_sum = T::one() + self.ma.iter().copied().sum::<T>();
        if ma_sum.abs() < T::lit(DEGENERATE_MA) {
            return Err(Error::DegenerateMa);
        }
        let ar_sum = T::one() - self.ar.iter().copied().sum::<T>();
        let r = ar_sum / (self.sigma * ma_sum);
        Ok(r * r)
    }

    /// Limit of `Var(X₁ + … + X_n) / n`: `(σ(1 + Σϑ) / (1 - Σρ))²`.
    pub fn long_run_variance(&self) -> T {
        let ma_sum = T::one() + self.ma.iter().copied().sum::<T>();
        let ar_sum = T::one() - self.ar.iter().copied().sum::<T>();
        let r = self.sigma * ma_sum / ar_sum;
        r * r
    }

    /// Covariance context for windows of length `n`.
    pub fn context(&self, n: usize) -> Result<CovarianceContext<T>> {
        CovarianceContext::new(self.clone(), n)
    }

    /// Number of discarded start-up steps before the first recorded observation.
    pub fn burn_in(&self) -> usize {
        1000 + 20 * (self.p() + self.q())
    }

    /// Simulates `length` observations with the given change injected.
    ///
    /// Deterministic for a given seed. See [`TransitionMode`] for how the
    /// post-change segment is produced.
    pub fn simulate(&self, length: usize, injection: &ChangeInjection<T>, seed: u64) -> Result<Vec<T>>
    where
        StandardNormal: Distribution<T>,
    {
        self.validate()?;
        injection.validate(length)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = injection.changepoint_index;
        let post_sigma = self.sigma * injection.scale;
        let mut out = Vec::with_capacity(length);
        match injection.mode {
            TransitionMode::Smooth => {
                let mut rec = Recursion::new(self);
                rec.warm_up(self.burn_in(), self.mean, self.sigma, &mut rng);
                for i in 1..=length {
                    let (level, sd) = if i >= k {
                        (injection.new_mean, post_sigma)
                    } else {
                        (self.mean, self.sigma)
                    };
                    out.push(rec.step(level, sd, &mut rng));
                }
            }
            TransitionMode::Abrupt => {
                let pre = (k - 1).min(length);
                if pre > 0 {
                    let mut rec = Recursion::new(self);
                    rec.warm_up(self.burn_in(), self.mean, self.sigma, &mut rng);
                    for _ in 0..pre {
                        out.push(rec.step(self.mean, self.sigma, &mut rng));
                    }
                }
                if pre < length {
                    let mut rec = Recursion::new(self);
                    rec.warm_up(self.burn_in(), injection.new_mean, post_sigma, &mut rng);
                    for _ in pre..length {
                        out.push(rec.step(injection.new_mean, post_sigma, &mut rng));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Recursion state: the last `p` observations and last `q` innovations,
/// most recent first.
struct Recursion<'a, T> {
    model: &'a ArmaModel<T>,
    x_lags: Vec<T>,
    eps_lags: Vec<T>,
}

impl<'a, T: Scalar> Recursion<'a, T>
where
    StandardNormal: Distribution<T>,
{
    fn new(model: &'a ArmaModel<T>) -> Self {
        Self {
            model,
            x_lags: vec![model.mean; model.p()],
            eps_lags: vec![T::zero(); model.q()],
        }
    }

    fn warm_up(&mut self, steps: usize, level: T, sd: T, rng: &mut ChaCha8Rng) {
        self.x_lags.iter_mut().for_each(|x| *x = level);
        for _ in 0..steps {
            self.step(level, sd, rng);
        }
    }

    fn step(&mut self, level: T, sd: T, rng: &mut ChaCha8Rng) -> T {
        let z: T = StandardNormal.sample(rng);
        let eps = z * sd;
        let mut dev = eps;
        for (rho, &x) in self.model.ar.iter().zip(&self.x_lags) {
            dev = dev + *rho * (x - level);
        }
        for (theta, &e) in self.model.ma.iter().zip(&self.eps_lags) {
            dev = dev + *theta * e;
        }
        let x = level + dev;
        if !self.x_lags.is_empty() {
            self.x_lags.rotate_right(1);
            self.x_lags[0] = x;
        }
        if !self.eps_lags.is_empty() {
            self.eps_lags.rotate_right(1);
            self.eps_lags[0] = eps;
        }
        x
    }
}

/// How the process moves to its post-change law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransitionMode {
    /// The recursion continues with the new level; lagged observations and
    /// innovations from before the change seed the first post-change values.
    #[default]
    Smooth,
    /// The post-change segment is a fresh stationary series, independent of
    /// the pre-change segment, with its own burn-in.
    Abrupt,
}

/// Change applied to a simulated series from observation `changepoint_index`
/// (1-based) onward. `changepoint_index == length + 1` means no change.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeInjection<T> {
    pub changepoint_index: usize,
    pub new_mean: T,
    pub mode: TransitionMode,
    /// Multiplier for the innovation standard deviation after the change.
    pub scale: T,
}

impl<T: Scalar> ChangeInjection<T> {
    pub fn smooth(changepoint_index: usize, new_mean: T) -> Self {
        Self {
            changepoint_index,
            new_mean,
            mode: TransitionMode::Smooth,
            scale: T::one(),
        }
    }

    pub fn abrupt(changepoint_index: usize, new_mean: T) -> Self {
        Self {
            mode: TransitionMode::Abrupt,
            ..Self::smooth(changepoint_index, new_mean)
        }
    }

    /// No change within a series of `length` observations.
    pub fn none(length: usize) -> Self {
        Self::smooth(length + 1, T::zero())
    }

    pub fn with_scale(mut self, scale: T) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self, length: usize) -> Result<()> {
        if self.changepoint_index < 1 || self.changepoint_index > length + 1 {
            return Err(Error::InvalidParameter(format!(
                "changepoint index {} outside 1..={}",
                self.changepoint_index,
                length + 1
            )));
        }
        if !(self.scale > T::zero()) || !self.new_mean.is_finite() {
            return Err(Error::InvalidParameter("post-change scale must be positive".into()));
        }
        Ok(())
    }
}

/// Maps `beta` onto the grid index `m = nβ`, requiring `0 ≤ m < n`.
pub fn grid_index<T: Scalar>(beta: T, n: usize) -> Result<usize> {
    let scaled = beta * T::from_usize_exact(n);
    let m = scaled.round();
    let slack = T::tolerance(1e-9) * T::from_usize_exact(n.max(1));
    let err = || Error::BetaNotOnGrid {
        beta: beta.to_f64_lossy(),
        n,
    };
    if !scaled.is_finite() || (scaled - m).abs() > slack || m < T::zero() {
        return Err(err());
    }
    let m = m.to_usize().ok_or_else(err)?;
    if m >= n {
        return Err(err());
    }
    Ok(m)
}

/// Autocovariances and a cached factorization of the `n × n` stationary
/// covariance matrix `T` of an ARMA model.
///
/// Cloning and [`leading`](Self::leading) share the underlying factor.
#[derive(Debug, Clone)]
pub struct CovarianceContext<T> {
    model: ArmaModel<T>,
    n: usize,
    autocov: Arc<[T]>,
    factor: Arc<ToeplitzFactor<T>>,
}

impl<T: Scalar> CovarianceContext<T> {
    pub fn new(model: ArmaModel<T>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("window length must be positive".into()));
        }
        model.validate()?;
        let autocov: Arc<[T]> = model.autocovariance(n - 1)?.into();
        let factor = Arc::new(ToeplitzFactor::new(&autocov)?);
        Ok(Self {
            model,
            n,
            autocov,
            factor,
        })
    }

    pub fn model(&self) -> &ArmaModel<T> {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `γ(0..n-1)`.
    pub fn autocov(&self) -> &[T] {
        &self.autocov[..self.n]
    }

    pub fn cov(&self, i: usize, j: usize) -> T {
        self.autocov[i.abs_diff(j)]
    }

    pub fn covariance_matrix(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.n, |i, j| self.cov(i, j))
    }

    /// Context of the leading `m × m` block, i.e. windows of length `m`.
    pub fn leading(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.n {
            return Err(Error::InvalidParameter(format!(
                "block length {m} outside 1..={}",
                self.n
            )));
        }
        Ok(Self {
            n: m,
            ..self.clone()
        })
    }

    pub fn log_det(&self) -> T {
        self.factor.log_det_leading(self.n)
    }

    /// `uᵀ T⁻¹ v`.
    pub fn precision_quadratic(&self, u: &[T], v: &[T]) -> Result<T> {
        check_len(self.n, u.len())?;
        check_len(self.n, v.len())?;
        Ok(self.factor.inverse_quadratic(u, v))
    }

    /// `T⁻¹ u`.
    pub fn solve(&self, u: &[T]) -> Result<Vec<T>> {
        check_len(self.n, u.len())?;
        Ok(self.factor.solve(u))
    }

    /// Sum of the entries of `T⁻¹` over rows and columns `m+1..n`, `m = nβ`.
    pub fn t_sum(&self, beta: T) -> Result<T> {
        Ok(self.t_sum_at(grid_index(beta, self.n)?))
    }

    /// [`t_sum`](Self::t_sum) by grid index `m`.
    pub fn t_sum_at(&self, m: usize) -> T {
        let ind = indicator(self.n, m, T::one());
        self.factor.inverse_quadratic(&ind, &ind)
    }

    /// `Var(X₁ + … + X_n) = 𝟙ᵀ T 𝟙`.
    pub fn partial_sum_variance(&self) -> T {
        let n = self.n;
        let mut v = T::from_usize_exact(n) * self.autocov[0];
        for h in 1..n {
            v = v + T::lit(2.0) * T::from_usize_exact(n - h) * self.autocov[h];
        }
        v
    }
}

/// Vector of length `n` that is zero on the first `m` entries and `value` after.
pub fn indicator<T: Scalar>(n: usize, m: usize, value: T) -> Vec<T> {
    (0..n).map(|i| if i < m { T::zero() } else { value }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn validate_examples() {
        assert!(ArmaModel::ar1(0.5, 1.0).is_ok());
        assert!(matches!(ArmaModel::ar1(1.0, 1.0), Err(Error::NonStationary { .. })));
        // 1 - 0.5z - 0.6z²: roots (-0.5 ± √2.65)/1.2 → 0.9399 and -1.7732
        match ArmaModel::new(vec![0.5, 0.6], vec![], 1.0, 0.0) {
            Err(Error::NonStationary { moduli }) => {
                let mut m = moduli.clone();
                m.sort_by(f64::total_cmp);
                let disc = (0.25f64 + 2.4).sqrt();
                assert_relative_eq!(m[0], (disc - 0.5) / 1.2, epsilon = 1e-10);
                assert_relative_eq!(m[1], (disc + 0.5) / 1.2, epsilon = 1e-10);
            }
            other => panic!("expected NonStationary, got {other:?}"),
        }
        assert!(matches!(ArmaModel::white_noise(0.0), Err(Error::InvalidSigma(_))));
        assert!(matches!(ArmaModel::white_noise(-1.0), Err(Error::InvalidSigma(_))));
        // non-invertible MA is fine
        assert!(ArmaModel::ma1(2.0, 1.0).is_ok());
    }

    #[test]
    fn psi_weights_examples() {
        let ar = ArmaModel::ar1(0.5, 1.0).unwrap();
        let psi = ar.psi_weights(1e-12).unwrap();
        for (j, w) in psi.iter().enumerate() {
            assert_eq!(*w, 0.5f64.powi(j as i32));
        }
        assert!(psi.last().unwrap().abs() >= 1e-12);
        assert!(0.5f64.powi(psi.len() as i32) < 1e-12);

        assert_eq!(ArmaModel::ma1(0.5, 1.0).unwrap().psi_weights(1e-12).unwrap(), vec![1.0, 0.5]);
        assert_eq!(ArmaModel::white_noise(1.0).unwrap().psi_weights(1e-12).unwrap(), vec![1.0]);
    }

    #[test]
    fn psi_weights_survive_isolated_zeros() {
        // ρ = (0, 0.5): every odd weight is exactly zero
        let m = ArmaModel::new(vec![0.0, 0.5], vec![], 1.0, 0.0).unwrap();
        let psi = m.psi_weights(1e-12).unwrap();
        assert!(psi.len() > 40);
        assert_eq!(psi[4], 0.25);
    }

    #[test]
    fn autocovariance_examples() {
        let g = ArmaModel::ar1(0.5, 1.0).unwrap().autocovariance(6).unwrap();
        for (h, v) in g.iter().enumerate() {
            assert_relative_eq!(*v, 0.5f64.powi(h as i32) * 4.0 / 3.0, epsilon = 1e-13);
        }
        let g = ArmaModel::ma1(0.5, 1.0).unwrap().autocovariance(3).unwrap();
        assert_eq!(g, vec![1.25, 0.5, 0.0, 0.0]);
        let g = ArmaModel::white_noise(2.0).unwrap().autocovariance(2).unwrap();
        assert_eq!(g, vec![4.0, 0.0, 0.0]);
    }

    #[test]
    fn context_examples() {
        let c = ArmaModel::ar1(0.5, 1.0).unwrap().context(2).unwrap();
        assert_relative_eq!(c.cov(0, 0), 4.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(c.cov(0, 1), 2.0 / 3.0, epsilon = 1e-14);
        let c = ArmaModel::white_noise(1.0).unwrap().context(3).unwrap();
        assert_eq!(c.covariance_matrix(), DenseMatrix::identity(3));
        let c = ArmaModel::ma1(-0.9, 1.0).unwrap().context(2).unwrap();
        assert_relative_eq!(c.cov(1, 1), 1.81, epsilon = 1e-14);
        assert_relative_eq!(c.cov(1, 0), -0.9, epsilon = 1e-14);
    }

    #[test]
    fn precision_quadratic_examples() {
        let ones = [1.0; 3];
        let c = ArmaModel::white_noise(1.0).unwrap().context(3).unwrap();
        assert_relative_eq!(c.precision_quadratic(&ones, &ones).unwrap(), 3.0, epsilon = 1e-14);
        let c = ArmaModel::ar1(0.5, 1.0).unwrap().context(3).unwrap();
        assert_relative_eq!(c.precision_quadratic(&ones, &ones).unwrap(), 1.25, epsilon = 1e-12);
        assert_eq!(c.precision_quadratic(&[0.0; 3], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(matches!(
            c.precision_quadratic(&[1.0; 2], &ones),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn t_sum_examples() {
        let c = ArmaModel::ar1(0.5, 1.0).unwrap().context(3).unwrap();
        assert_relative_eq!(c.t_sum(0.0).unwrap(), 1.25, epsilon = 1e-12);
        let c = ArmaModel::white_noise(1.0).unwrap().context(50).unwrap();
        assert_relative_eq!(c.t_sum(0.5).unwrap(), 25.0, epsilon = 1e-12);
        assert!(matches!(c.t_sum(0.011), Err(Error::BetaNotOnGrid { .. })));
        assert!(matches!(c.t_sum(1.0), Err(Error::BetaNotOnGrid { .. })));
        let c = ArmaModel::ar1(0.5, 1.0).unwrap().context(50).unwrap();
        let t: f64 = c.t_sum(0.0).unwrap();
        assert!((t / 50.0 - 0.25).abs() < 0.05);
    }

    #[test]
    fn long_run_precision_examples() {
        assert_relative_eq!(ArmaModel::ar1(0.5, 1.0).unwrap().long_run_precision().unwrap(), 0.25);
        assert_relative_eq!(
            ArmaModel::ma1(0.5, 1.0).unwrap().long_run_precision().unwrap(),
            4.0 / 9.0,
            epsilon = 1e-15
        );
        assert_eq!(ArmaModel::white_noise(1.0).unwrap().long_run_precision().unwrap(), 1.0);
        assert!(matches!(
            ArmaModel::ma1(-1.0, 1.0).unwrap().long_run_precision(),
            Err(Error::DegenerateMa)
        ));
    }

    #[test]
    fn partial_sum_variance_examples() {
        let c = ArmaModel::white_noise(1.0).unwrap().context(10).unwrap();
        assert_relative_eq!(c.partial_sum_variance(), 10.0);
        let c = ArmaModel::ma1(-0.9, 1.0).unwrap().context(4000).unwrap();
        // v(n) = n·0.01 + 2·0.9 exactly for MA(1) ϑ = -0.9: n(1.81) + 2(n-1)(-0.9)
        assert_relative_eq!(c.partial_sum_variance(), 4000.0 * 0.01 + 1.8, epsilon = 1e-8);
    }

    #[test]
    fn leading_block_shares_factor() {
        let c = ArmaModel::ar1(0.3, 1.0).unwrap().context(10).unwrap();
        let b = c.leading(4).unwrap();
        let direct = ArmaModel::ar1(0.3, 1.0).unwrap().context(4).unwrap();
        let u = [1.0, -1.0, 2.0, 0.5];
        assert_relative_eq!(
            b.precision_quadratic(&u, &u).unwrap(),
            direct.precision_quadratic(&u, &u).unwrap(),
            epsilon = 1e-13
        );
        assert!(c.leading(11).is_err());
    }

    #[test]
    fn simulate_is_deterministic_and_changes_level() {
        let m = ArmaModel::ar1(0.5, 1.0).unwrap();
        let inj = ChangeInjection::smooth(100, 3.0);
        let a = m.simulate(200, &inj, 11).unwrap();
        let b = m.simulate(200, &inj, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
        let tail: f64 = a[149..].iter().sum::<f64>() / 51.0;
        assert!((tail - 3.0).abs() < 1.0, "tail mean {tail}");
        let c = m.simulate(200, &inj, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn simulate_single_draw() {
        let m = ArmaModel::white_noise(1.0).unwrap().with_mean(4.0);
        let x: Vec<f64> = m.simulate(1, &ChangeInjection::none(1), 3).unwrap();
        assert_eq!(x.len(), 1);
        assert!((x[0] - 4.0).abs() < 6.0);
    }

    #[test]
    fn abrupt_mode_starts_fresh() {
        let m = ArmaModel::ar1(0.9, 1.0).unwrap();
        let x = m.simulate(400, &ChangeInjection::abrupt(201, 10.0), 5).unwrap();
        let post: f64 = x[200..].iter().sum::<f64>() / 200.0;
        assert!((post - 10.0).abs() < 3.0);
        // abrupt from the first observation: whole series at the new level
        let y = m.simulate(300, &ChangeInjection::abrupt(1, 10.0), 5).unwrap();
        assert!((y.iter().sum::<f64>() / 300.0 - 10.0).abs() < 3.0);
    }

    #[test]
    fn injection_bounds() {
        let m = ArmaModel::white_noise(1.0).unwrap();
        assert!(m.simulate(10, &ChangeInjection::smooth(0, 1.0), 1).is_err());
        assert!(m.simulate(10, &ChangeInjection::smooth(12, 1.0), 1).is_err());
        assert!(m.simulate(10, &ChangeInjection::smooth(11, 1.0), 1).is_ok());
    }

    #[test]
    fn grid_index_examples() {
        assert_eq!(grid_index(0.0, 50).unwrap(), 0);
        assert_eq!(grid_index(0.98, 50).unwrap(), 49);
        assert_eq!(grid_index(7.0f64 / 50.0, 50).unwrap(), 7);
        assert!(grid_index(0.5, 3).is_err());
        assert!(grid_index(-0.02, 50).is_err());
    }

    #[test]
    fn f32_context_works() {
        let c = ArmaModel::<f32>::ar1(0.5, 1.0).unwrap().context(3).unwrap();
        assert!((c.t_sum(0.0).unwrap() - 1.25).abs() < 1e-5);
    }
}
