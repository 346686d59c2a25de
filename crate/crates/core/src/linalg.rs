//! Dense and Toeplitz factorizations for symmetric positive-definite systems.
//!
//! Two factorizations live here:
//!
//! * [`ToeplitzFactor`] runs the Durbin-Levinson recursion on an autocovariance
//!   sequence and keeps the rows of one-step prediction coefficients. Those rows
//!   form a unit lower-triangular `L` with `T⁻¹ = Lᵀ D⁻¹ L`, where `D` holds the
//!   prediction error variances. Leading principal blocks of a Toeplitz matrix
//!   are again Toeplitz with the same autocovariances, so the first `m` rows of
//!   the factor are the factor of the `m × m` block.
//! * [`Cholesky`] is a plain `L Lᵀ` decomposition for the dense matrices that
//!   show up in the moment generating function.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Lower-triangular Cholesky factor `A = L Lᵀ` of a dense SPD matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    lower: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factorizes `a`, reading only its lower triangle.
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let mut lower = vec![T::zero(); n * n];
        for j in 0..n {
            let mut diag = a.get(j, j);
            for k in 0..j {
                let l = lower[j * n + k];
                diag = diag - l * l;
            }
            if !(diag > T::zero()) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite { index: j });
            }
            let diag = diag.sqrt();
            lower[j * n + j] = diag;
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s = s - lower[i * n + k] * lower[j * n + k];
                }
                lower[i * n + j] = s / diag;
            }
        }
        Ok(Self { n, lower })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn log_det(&self) -> T {
        (0..self.n)
            .map(|i| self.lower[i * self.n + i].ln())
            .sum::<T>()
            * T::lit(2.0)
    }

    /// Solves `L y = b` in place.
    fn forward(&self, b: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s = s - self.lower[i * n + k] * b[k];
            }
            b[i] = s / self.lower[i * n + i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    fn backward(&self, b: &mut [T]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s = s - self.lower[k * n + i] * b[k];
            }
            b[i] = s / self.lower[i * n + i];
        }
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        check_len(self.n, b.len())?;
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        Ok(x)
    }

    /// `uᵀ A⁻¹ v`.
    pub fn inverse_quadratic(&self, u: &[T], v: &[T]) -> Result<T> {
        check_len(self.n, u.len())?;
        check_len(self.n, v.len())?;
        let mut wu = u.to_vec();
        self.forward(&mut wu);
        let mut wv = v.to_vec();
        self.forward(&mut wv);
        Ok(dot(&wu, &wv))
    }
}

/// Durbin-Levinson factorization of a symmetric positive-definite Toeplitz matrix.
///
/// Row `k` holds the coefficients `φ_{k,1..k}` of the best linear predictor of
/// `x_k` from `x_{k-1}, …, x_0`; `pred_var[k]` is its error variance.
#[derive(Debug, Clone)]
pub struct ToeplitzFactor<T> {
    n: usize,
    // rows packed back to back, row k starts at k(k-1)/2
    coeffs: Vec<T>,
    pred_var: Vec<T>,
}

#[inline]
fn row_start(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

impl<T: Scalar> ToeplitzFactor<T> {
    /// Factorizes the Toeplitz matrix with first column `autocov`.
    pub fn new(autocov: &[T]) -> Result<Self> {
        let n = autocov.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty autocovariance".into()));
        }
        let g0 = autocov[0];
        if !(g0 > T::zero()) || !g0.is_finite() {
            return Err(Error::NotPositiveDefinite { index: 0 });
        }
        let floor = g0 * T::epsilon() * T::lit(16.0);
        let mut coeffs = vec![T::zero(); row_start(n)];
        let mut pred_var = Vec::with_capacity(n);
        pred_var.push(g0);
        for k in 1..n {
            let prev = row_start(k - 1);
            let cur = row_start(k);
            // reflection coefficient for order k
            let mut num = autocov[k];
            for j in 1..k {
                num = num - coeffs[prev + j - 1] * autocov[k - j];
            }
            let v_prev = pred_var[k - 1];
            let refl = num / v_prev;
            for j in 1..k {
                coeffs[cur + j - 1] = coeffs[prev + j - 1] - refl * coeffs[prev + k - j - 1];
            }
            coeffs[cur + k - 1] = refl;
            let v = v_prev * (T::one() - refl * refl);
            if !(refl.abs() < T::one()) || !(v > floor) || !v.is_finite() {
                return Err(Error::NotPositiveDefinite { index: k });
            }
            pred_var.push(v);
        }
        Ok(Self {
            n,
            coeffs,
            pred_var,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn prediction_variances(&self) -> &[T] {
        &self.pred_var
    }

    /// Coefficients `φ_{k,1..k}`.
    pub fn predictor(&self, k: usize) -> &[T] {
        let s = row_start(k);
        &self.coeffs[s..s + k]
    }

    /// Log-determinant of the leading `m × m` block.
    pub fn log_det_leading(&self, m: usize) -> T {
        self.pred_var[..m].iter().map(|v| v.ln()).sum()
    }

    /// One-step prediction errors `L u` for the leading block of size `u.len()`.
    pub fn innovations(&self, u: &[T]) -> Vec<T> {
        debug_assert!(u.len() <= self.n);
        (0..u.len())
            .map(|k| {
                let phi = self.predictor(k);
                let mut e = u[k];
                for (j, &c) in phi.iter().enumerate() {
                    e = e - c * u[k - 1 - j];
                }
                e
            })
            .collect()
    }

    /// `uᵀ T_m⁻¹ v` with `m = u.len()`.
    pub fn inverse_quadratic(&self, u: &[T], v: &[T]) -> T {
        let eu = self.innovations(u);
        let ev = self.innovations(v);
        eu.iter()
            .zip(&ev)
            .zip(&self.pred_var)
            .fold(T::zero(), |acc, ((&a, &b), &d)| acc + a * b / d)
    }

    /// `T_m⁻¹ u` with `m = u.len()`.
    pub fn solve(&self, u: &[T]) -> Vec<T> {
        let m = u.len();
        let y: Vec<T> = self
            .innovations(u)
            .into_iter()
            .zip(&self.pred_var)
            .map(|(e, &d)| e / d)
            .collect();
        // x = Lᵀ y, with L[k][i] = -φ_{k,k-i}
        let mut x = vec![T::zero(); m];
        for i in (0..m).rev() {
            let mut s = y[i];
            for k in i + 1..m {
                s = s - self.predictor(k)[k - i - 1] * y[k];
            }
            x[i] = s;
        }
        x
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
