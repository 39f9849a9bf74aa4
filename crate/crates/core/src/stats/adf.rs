//! Augmented Dickey-Fuller test, constant-only specification.
//!
//! Regression: `ds_t = a + rho * s_{t-1} + sum_i g_i * ds_{t-i} + e_t`.
//! The statistic is the t-ratio of `rho`. P-values come from
//! [`DF_CONST_QUANTILES`], a quantile table of the asymptotic constant-case
//! Dickey-Fuller distribution derived from MacKinnon's (1994) response
//! surface (see `tools/adf_table.py`), linearly interpolated.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::adf_table::DF_CONST_QUANTILES;
use super::{default_lag, LeastSquares, Series, StatsError};

pub const PVALUE_FLOOR: f64 = 1e-6;
pub const PVALUE_CEIL: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub pvalue: f64,
    pub used_lags: usize,
    pub n_effective: usize,
}

/// Returns the t-ratio of the lagged level and the number of observations
/// entering the regression (`n - lags - 1`).
pub fn adf_statistic(s: &Series, lags: usize) -> Result<(f64, usize), StatsError> {
    let n = s.len();
    if n < lags + 4 {
        return Err(StatsError::TooShort {
            needed: lags + 4,
            got: n,
        });
    }
    let level = s.values();
    let d: Vec<f64> = level.windows(2).map(|w| w[1] - w[0]).collect();
    let n_eff = d.len() - lags;
    let k = 2 + lags;
    if n_eff <= k {
        return Err(StatsError::TooShort {
            needed: 2 * k + 2,
            got: n,
        });
    }

    // row r corresponds to d[lags + r]
    let design = DMatrix::from_fn(n_eff, k, |r, c| {
        let t = lags + r;
        match c {
            0 => 1.0,
            1 => level[t],
            j => d[t - (j - 1)],
        }
    });
    let fit = LeastSquares::fit(design, &d[lags..])?;
    let se = fit.std_error(1).ok_or(StatsError::SingularDesign)?;
    let stat = fit.coef[1] / se;
    if !stat.is_finite() {
        // perfect fit: no residual variance to scale by
        return Err(StatsError::SingularDesign);
    }
    Ok((stat, n_eff))
}

/// Approximate lower-tail p-value of a constant-case ADF statistic.
///
/// Monotone non-decreasing in `statistic`, clamped to
/// `[PVALUE_FLOOR, PVALUE_CEIL]` outside the table. NaN maps to the ceiling.
pub fn adf_pvalue(statistic: f64) -> f64 {
    let table = &DF_CONST_QUANTILES;
    if statistic.is_nan() {
        return PVALUE_CEIL;
    }
    let (first, last) = (table[0], table[table.len() - 1]);
    if statistic <= first.0 {
        return PVALUE_FLOOR;
    }
    if statistic > last.0 {
        return PVALUE_CEIL;
    }
    let hi = table.partition_point(|(t, _)| *t < statistic);
    let (t1, p1) = table[hi];
    let (t0, p0) = table[hi - 1];
    let w = (statistic - t0) / (t1 - t0);
    (p0 + w * (p1 - p0)).clamp(PVALUE_FLOOR, PVALUE_CEIL)
}

/// Full ADF test; `lags` defaults to [`default_lag`] of the series length.
pub fn adf_test(s: &Series, lags: Option<usize>) -> Result<AdfResult, StatsError> {
    let used_lags = match lags {
        Some(l) => l,
        None => default_lag(s.len())?,
    };
    let (statistic, n_effective) = adf_statistic(s, used_lags)?;
    Ok(AdfResult {
        statistic,
        pvalue: adf_pvalue(statistic),
        used_lags,
        n_effective,
    })
}
