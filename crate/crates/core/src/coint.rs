//! Pairwise cointegration (regression followed by an ADF test on the
//! residuals) and the all-pairs scan over a symbol universe.
//!
//! The residual test uses the plain constant-case Dickey-Fuller p-value, not
//! Engle-Granger residual critical values. Residuals of an estimated
//! regression look more stationary than the raw distribution assumes, so
//! p-values here are optimistic for spurious pairs.

use std::sync::Arc;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::{adf_test, ols_fit, Series, StatsError};
use crate::workers::Workers;

/// Residual std at or below this fraction of the price scale counts as an
/// exact linear relation.
const DEGENERATE_REL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CointError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("pair is perfectly collinear (zero residual spread)")]
    DegeneratePair,
    #[error("universe needs at least 2 symbols, got {0}")]
    UniverseTooSmall(usize),
    #[error("series {symbol} is not aligned to the common calendar")]
    MisalignedCalendar { symbol: String },
    #[error("epsilon must lie in [0, 1), got {0}")]
    InvalidEpsilon(f64),
}

/// Closing prices of one symbol over a shared calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub symbol: String,
    pub dates: Arc<[NaiveDate]>,
    pub values: Series,
}

impl PriceSeries {
    pub fn new(symbol: impl Into<String>, dates: Arc<[NaiveDate]>, values: Series) -> Self {
        debug_assert_eq!(dates.len(), values.len());
        Self {
            symbol: symbol.into(),
            dates,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn aligned_with(&self, other: &PriceSeries) -> bool {
        Arc::ptr_eq(&self.dates, &other.dates) || self.dates == other.dates
    }

    /// `first..last` of the calendar, used as the fitting window id.
    pub fn window_id(&self) -> String {
        match (self.dates.first(), self.dates.last()) {
            (Some(a), Some(b)) => format!("{a}..{b}"),
            _ => String::new(),
        }
    }
}

/// Fitted directional pair model: predicts the destination price from the
/// source price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CointModel {
    pub beta0: f64,
    pub beta1: f64,
    pub resid_mean: f64,
    pub resid_std: f64,
    pub pvalue: f64,
    pub adf_stat: f64,
    pub window_id: String,
}

impl CointModel {
    pub fn predict(&self, x_price: f64) -> f64 {
        self.beta0 + self.beta1 * x_price
    }
}

/// Regresses `y` on `x` and tests the residuals for a unit root.
///
/// `lags` overrides the Schwert default lag order of the ADF regression.
pub fn coint_fit(
    x: &PriceSeries,
    y: &PriceSeries,
    lags: Option<usize>,
) -> Result<CointModel, CointError> {
    if !x.aligned_with(y) {
        return Err(CointError::MisalignedCalendar {
            symbol: y.symbol.clone(),
        });
    }
    let lm = ols_fit(&x.values, &y.values)?;
    let scale = y
        .values
        .values()
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    if lm.resid_std <= DEGENERATE_REL * scale {
        return Err(CointError::DegeneratePair);
    }
    let adf = adf_test(&lm.residuals, lags)?;
    Ok(CointModel {
        beta0: lm.beta0,
        beta1: lm.beta1,
        resid_mean: lm.resid_mean,
        resid_std: lm.resid_std,
        pvalue: adf.pvalue,
        adf_stat: adf.statistic,
        window_id: x.window_id(),
    })
}

/// Which ordered pairs a scan evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionPolicy {
    /// Both `(a, b)` and `(b, a)` for every unordered pair.
    #[default]
    Both,
    /// Only `(a, b)` with `symbol(a) < symbol(b)` lexicographically.
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    /// Index into [`ScanResult::symbols`].
    pub src: usize,
    pub dst: usize,
    pub model: CointModel,
    pub admitted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPair {
    pub src: usize,
    pub dst: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub symbols: Vec<String>,
    pub window_id: String,
    pub window_len: usize,
    pub epsilon: f64,
    /// Sorted by `(src, dst)`.
    pub pairs: Vec<PairResult>,
    pub skipped: Vec<SkippedPair>,
}

impl ScanResult {
    pub fn admitted(&self) -> impl Iterator<Item = &PairResult> {
        self.pairs.iter().filter(|p| p.admitted)
    }

    pub fn evaluated(&self) -> usize {
        self.pairs.len() + self.skipped.len()
    }
}

/// Edge admission rule shared by the scan and graph construction.
pub fn admits(model: &CointModel, epsilon: f64) -> bool {
    model.pvalue < epsilon && model.resid_std > 0.0
}

#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    pub policy: DirectionPolicy,
    pub lags: Option<usize>,
}

/// Fits every ordered pair allowed by the policy.
///
/// Pairs are fanned out over `workers`; the result order is canonical and
/// independent of the worker count.
pub fn scan_pairs(
    universe: &[PriceSeries],
    epsilon: f64,
    opts: &ScanOptions,
    workers: &Workers,
) -> Result<ScanResult, CointError> {
    if universe.len() < 2 {
        return Err(CointError::UniverseTooSmall(universe.len()));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(CointError::InvalidEpsilon(epsilon));
    }
    let first = &universe[0];
    if let Some(bad) = universe.iter().find(|s| !first.aligned_with(s)) {
        return Err(CointError::MisalignedCalendar {
            symbol: bad.symbol.clone(),
        });
    }

    let n = universe.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| match opts.policy {
            _ if i == j => false,
            DirectionPolicy::Both => true,
            DirectionPolicy::Single => universe[i].symbol < universe[j].symbol,
        })
        .collect();

    let outcomes: Vec<Result<CointModel, CointError>> = workers.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| coint_fit(&universe[i], &universe[j], opts.lags))
            .collect()
    });

    let mut fitted = Vec::with_capacity(pairs.len());
    let mut skipped = Vec::new();
    for (&(src, dst), outcome) in pairs.iter().zip(outcomes) {
        match outcome {
            Ok(model) => fitted.push(PairResult {
                src,
                dst,
                admitted: admits(&model, epsilon),
                model,
            }),
            Err(e) => skipped.push(SkippedPair {
                src,
                dst,
                reason: e.to_string(),
            }),
        }
    }

    Ok(ScanResult {
        symbols: universe.iter().map(|s| s.symbol.clone()).collect(),
        window_id: first.window_id(),
        window_len: first.len(),
        epsilon,
        pairs: fitted,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn series(symbol: &str, dates: &Arc<[NaiveDate]>, v: Vec<f64>) -> PriceSeries {
        PriceSeries::new(symbol, dates.clone(), Series::new(v).unwrap())
    }

    #[test]
    fn identical_series_is_degenerate() {
        let dates = synth::business_days(120);
        let mut rng = synth::rng(3);
        let walk = synth::random_walk(&mut rng, 120, 50.0, 1.0);
        let x = series("X", &dates, walk.clone());
        let y = series("Y", &dates, walk);
        assert_eq!(coint_fit(&x, &y, None), Err(CointError::DegeneratePair));
    }

    #[test]
    fn three_symbols_six_evaluations() {
        let dates = synth::business_days(100);
        let mut rng = synth::rng(11);
        let u: Vec<PriceSeries> = ["A", "B", "C"]
            .iter()
            .map(|s| series(s, &dates, synth::random_walk(&mut rng, 100, 80.0, 1.0)))
            .collect();
        let scan = scan_pairs(&u, 0.05, &ScanOptions::default(), &Workers::single()).unwrap();
        assert_eq!(scan.evaluated(), 6);
        let order: Vec<(usize, usize)> = scan.pairs.iter().map(|p| (p.src, p.dst)).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);

        let single = ScanOptions {
            policy: DirectionPolicy::Single,
            ..Default::default()
        };
        let scan = scan_pairs(&u, 0.05, &single, &Workers::single()).unwrap();
        assert_eq!(scan.evaluated(), 3);
        assert!(scan.pairs.iter().all(|p| p.src < p.dst));
    }

    #[test]
    fn epsilon_zero_admits_nothing() {
        let uni = synth::planted_universe(&synth::UniverseSpec::planted_ten(), 5);
        let scan = scan_pairs(&uni.series(), 0.0, &ScanOptions::default(), &Workers::single())
            .unwrap();
        assert_eq!(scan.admitted().count(), 0);
    }

    #[test]
    fn scan_errors() {
        let dates = synth::business_days(30);
        let a = series("A", &dates, (0..30).map(|i| i as f64).collect());
        assert_eq!(
            scan_pairs(&[a.clone()], 0.05, &ScanOptions::default(), &Workers::single()),
            Err(CointError::UniverseTooSmall(1))
        );
        let other = synth::business_days(31);
        let b = series("B", &other, (0..31).map(|i| (i * i) as f64).collect());
        assert!(matches!(
            scan_pairs(&[a, b], 0.05, &ScanOptions::default(), &Workers::single()),
            Err(CointError::MisalignedCalendar { .. })
        ));
    }
}
