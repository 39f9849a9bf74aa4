//! Univariate and bivariate statistics: validated series, OLS, differencing
//! and the augmented Dickey-Fuller unit-root test.

mod adf;
mod adf_table;
mod lstsq;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adf::{adf_pvalue, adf_statistic, adf_test, AdfResult, PVALUE_CEIL, PVALUE_FLOOR};
pub(crate) use lstsq::LeastSquares;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("regressor has zero variance")]
    DegenerateRegressor,
    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("regression design is rank deficient")]
    SingularDesign,
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
}

/// An ordered run of finite real samples.
///
/// Finiteness is checked once here; every operation downstream assumes it.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct Series(Vec<f64>);

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self, StatsError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Sample standard deviation (divisor `n - 1`); zero for `n < 2`.
    pub fn sample_std(&self) -> f64 {
        let n = self.0.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self.0.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl<'de> Deserialize<'de> for Series {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        Series::new(values).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<Vec<f64>> for Series {
    type Error = StatsError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Series::new(values)
    }
}

/// Result of regressing `y` on `(1, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub beta0: f64,
    pub beta1: f64,
    pub residuals: Series,
    pub resid_mean: f64,
    /// Sample standard deviation of the residuals (divisor `n - 1`).
    pub resid_std: f64,
}

/// Ordinary least squares of `y` on an intercept and `x`.
pub fn ols_fit(x: &Series, y: &Series) -> Result<LinearModel, StatsError> {
    let n = x.len();
    if n != y.len() {
        return Err(StatsError::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if n < 3 {
        return Err(StatsError::TooShort { needed: 3, got: n });
    }
    let xs = x.values();
    if xs.iter().all(|v| *v == xs[0]) {
        return Err(StatsError::DegenerateRegressor);
    }

    let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
    let fit = LeastSquares::fit(design, y.values()).map_err(|e| match e {
        StatsError::SingularDesign => StatsError::DegenerateRegressor,
        other => other,
    })?;

    let residuals = Series::new(fit.residuals)?;
    Ok(LinearModel {
        beta0: fit.coef[0],
        beta1: fit.coef[1],
        resid_mean: residuals.mean(),
        resid_std: residuals.sample_std(),
        residuals,
    })
}

/// First differences: `out[i] = s[i + 1] - s[i]`.
pub fn diff(s: &Series) -> Result<Series, StatsError> {
    if s.is_empty() {
        return Err(StatsError::TooShort { needed: 1, got: 0 });
    }
    Ok(Series(s.values().windows(2).map(|w| w[1] - w[0]).collect()))
}

/// Schwert's rule `floor(12 * (n / 100)^(1/4))`, clamped to `[0, n/2 - 2]`.
pub fn default_lag(n: usize) -> Result<usize, StatsError> {
    if n < 4 {
        return Err(StatsError::TooShort { needed: 4, got: n });
    }
    let schwert = (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
    Ok(schwert.min(n / 2 - 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Series {
        Series::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            Series::new(vec![1.0, f64::NAN]),
            Err(StatsError::NonFinite { index: 1 })
        );
        assert!(Series::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn ols_exact_line() {
        let m = ols_fit(&s(&[1.0, 2.0, 3.0, 4.0]), &s(&[3.0, 5.0, 7.0, 9.0])).unwrap();
        assert!((m.beta0 - 1.0).abs() < 1e-12);
        assert!((m.beta1 - 2.0).abs() < 1e-12);
        assert!(m.resid_std < 1e-12);
        assert_eq!(m.residuals.len(), 4);
    }

    #[test]
    fn ols_errors() {
        assert_eq!(
            ols_fit(&s(&[5.0, 5.0, 5.0]), &s(&[1.0, 2.0, 3.0])),
            Err(StatsError::DegenerateRegressor)
        );
        assert_eq!(
            ols_fit(&s(&[1.0, 2.0]), &s(&[1.0, 2.0])),
            Err(StatsError::TooShort { needed: 3, got: 2 })
        );
        assert_eq!(
            ols_fit(&s(&[1.0, 2.0, 3.0]), &s(&[1.0, 2.0])),
            Err(StatsError::LengthMismatch { left: 3, right: 2 })
        );
    }

    #[test]
    fn ols_sample_std_divisor() {
        // residuals are +-1 alternating around the line y = x
        let x = s(&[0.0, 1.0, 2.0, 3.0]);
        let y = s(&[1.0, 0.0, 3.0, 2.0]);
        let m = ols_fit(&x, &y).unwrap();
        let ss: f64 = m.residuals.values().iter().map(|r| r * r).sum();
        assert!((m.resid_std - (ss / 3.0).sqrt()).abs() < 1e-12);
        assert!(m.resid_mean.abs() < 1e-12);
    }

    #[test]
    fn diff_examples() {
        assert_eq!(diff(&s(&[1.0, 1.0, 1.0])).unwrap().values(), &[0.0, 0.0]);
        assert_eq!(diff(&s(&[0.0, 1.0, 3.0, 6.0])).unwrap().values(), &[1.0, 2.0, 3.0]);
        assert!(diff(&s(&[7.0])).unwrap().is_empty());
        assert_eq!(
            diff(&Series::default()),
            Err(StatsError::TooShort { needed: 1, got: 0 })
        );
    }

    #[test]
    fn default_lag_examples() {
        assert_eq!(default_lag(100), Ok(12));
        assert_eq!(default_lag(50), Ok(10));
        assert_eq!(default_lag(8), Ok(2));
        assert_eq!(default_lag(4), Ok(0));
        assert_eq!(default_lag(250), Ok(15));
        assert_eq!(default_lag(500), Ok(17));
        assert!(default_lag(3).is_err());
    }
}
