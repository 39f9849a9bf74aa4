mod common;

use leashwatch::stats::{
    adf_pvalue, adf_statistic, adf_test, default_lag, diff, ols_fit, Series, StatsError, PVALUE_CEIL,
    PVALUE_FLOOR,
};
use leashwatch::synth::{random_walk, rng, white_noise};
use proptest::prelude::*;
use rand::Rng;

fn series(v: Vec<f64>) -> Series {
    Series::new(v).unwrap()
}

#[test]
fn adf_matches_reference_implementation() {
    let (ar, rw) = common::reference_series();
    for r in &common::ADF_REFERENCE {
        let s = series(if r.which == "ar" { ar.clone() } else { rw.clone() });
        let res = adf_test(&s, Some(r.lags)).unwrap();
        assert!(
            (res.statistic - r.statistic).abs() <= 1e-9 * r.statistic.abs(),
            "{} lags {}: {} vs {}",
            r.which,
            r.lags,
            res.statistic,
            r.statistic
        );
        assert_eq!(res.n_effective, r.nobs);
        assert_eq!(res.used_lags, r.lags);
        // table interpolation against the closed-form response surface
        let tol = 0.002_f64.max(0.05 * r.pvalue);
        assert!(
            (res.pvalue - r.pvalue).abs() <= tol,
            "{} lags {}: p {} vs {}",
            r.which,
            r.lags,
            res.pvalue,
            r.pvalue
        );
    }
}

#[test]
fn pvalue_at_reference_points() {
    assert!((adf_pvalue(-2.86) - 0.0502).abs() < 0.002);
    assert!((adf_pvalue(-2.86) - 0.05).abs() <= 0.01);
    assert!((adf_pvalue(0.0) - 0.9585).abs() < 0.002);
    assert!(adf_pvalue(0.0) > 0.9);
    assert_eq!(adf_pvalue(-40.0), PVALUE_FLOOR);
    assert_eq!(adf_pvalue(40.0), PVALUE_CEIL);
}

#[test]
fn pvalue_monotone_on_grid() {
    let grid: Vec<f64> = (0..1000).map(|i| -10.0 + 15.0 * i as f64 / 999.0).collect();
    for w in grid.windows(2) {
        assert!(adf_pvalue(w[0]) <= adf_pvalue(w[1]), "{} {}", w[0], w[1]);
    }
    for s in grid {
        let p = adf_pvalue(s);
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn ols_examples() {
    let m = ols_fit(&series(vec![1., 2., 3., 4.]), &series(vec![3., 5., 7., 9.])).unwrap();
    assert!((m.beta0 - 1.0).abs() < 1e-12);
    assert!((m.beta1 - 2.0).abs() < 1e-12);
    assert!(m.resid_std.abs() < 1e-12);

    let e = ols_fit(&series(vec![5., 5., 5.]), &series(vec![1., 2., 3.])).unwrap_err();
    assert_eq!(e, StatsError::DegenerateRegressor);

    let e = ols_fit(&series(vec![1., 2.]), &series(vec![1., 2., 3.])).unwrap_err();
    assert!(matches!(e, StatsError::LengthMismatch { .. }));
    let e = ols_fit(&series(vec![1., 2.]), &series(vec![1., 2.])).unwrap_err();
    assert!(matches!(e, StatsError::TooShort { .. }));
}

#[test]
fn ols_matches_normal_equations_on_noisy_data() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let x: Vec<f64> = (0..200).map(|_| r.random_range(0.0..100.0)).collect();
        let noise = white_noise(&mut r, 200, 1.0);
        let y: Vec<f64> = x.iter().zip(&noise).map(|(x, e)| 0.5 * x + e).collect();
        let m = ols_fit(&series(x.clone()), &series(y.clone())).unwrap();
        let (b0, b1) = common::normal_equations(&x, &y);
        assert!((m.beta0 - b0).abs() <= 1e-10 * b0.abs().max(1.0), "{} {}", m.beta0, b0);
        assert!((m.beta1 - b1).abs() <= 1e-10 * b1.abs(), "{} {}", m.beta1, b1);
        assert_eq!(m.residuals.len(), 200);
        assert!(m.resid_mean.abs() < 1e-9);
        assert!((m.residuals.mean() - m.resid_mean).abs() < 1e-9);
    }
}

#[test]
fn diff_examples() {
    assert_eq!(diff(&series(vec![1., 1., 1.])).unwrap().values(), &[0., 0.]);
    assert_eq!(diff(&series(vec![0., 1., 3., 6.])).unwrap().values(), &[1., 2., 3.]);
    assert!(matches!(diff(&series(vec![])), Err(StatsError::TooShort { .. })));
}

#[test]
fn default_lag_examples() {
    assert_eq!(default_lag(100).unwrap(), 12);
    assert_eq!(default_lag(50).unwrap(), 10);
    assert_eq!(default_lag(8).unwrap(), 2);
    assert!(default_lag(3).is_err());
}

#[test]
fn adf_degenerate_and_short_inputs() {
    // a unit-root process with no innovations is a constant series
    let flat = series(vec![4.2; 50]);
    assert_eq!(adf_statistic(&flat, 0).unwrap_err(), StatsError::SingularDesign);
    assert!(matches!(
        adf_test(&series(vec![1., 2., 4.]), Some(5)),
        Err(StatsError::TooShort { .. })
    ));
}

#[test]
fn non_finite_values_rejected_at_construction() {
    assert!(matches!(
        Series::new(vec![1.0, f64::NAN]),
        Err(StatsError::NonFinite { index: 1 })
    ));
    assert!(Series::new(vec![f64::INFINITY]).is_err());
}

#[test]
fn random_walk_statistic_mostly_in_band() {
    let inside = (0..200)
        .filter(|&seed| {
            let mut r = rng(10_000 + seed);
            let s = series(random_walk(&mut r, 500, 0.0, 1.0));
            let (stat, _) = adf_statistic(&s, 0).unwrap();
            (-3.0..=1.0).contains(&stat)
        })
        .count();
    assert!(inside >= 190, "{inside}/200 inside [-3, 1]");
}

#[test]
fn white_noise_statistic_far_below_critical() {
    let one_percent = -3.43;
    let below = (0..200)
        .filter(|&seed| {
            let mut r = rng(20_000 + seed);
            let s = series(white_noise(&mut r, 500, 1.0));
            adf_statistic(&s, 0).unwrap().0 < one_percent
        })
        .count();
    assert!(below >= 198, "{below}/200 below the 1% critical value");
}

proptest! {
    #[test]
    fn ols_recovers_exact_affine_data(
        a in -10.0f64..10.0,
        b in -5.0f64..5.0,
        x in prop::collection::vec(-10.0f64..10.0, 3..60),
    ) {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        prop_assume!(x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() > 1.0);
        let y: Vec<f64> = x.iter().map(|v| a + b * v).collect();
        let m = ols_fit(&series(x), &series(y)).unwrap();
        prop_assert!((m.beta0 - a).abs() < 1e-10, "beta0 {} vs {}", m.beta0, a);
        prop_assert!((m.beta1 - b).abs() < 1e-10, "beta1 {} vs {}", m.beta1, b);
        prop_assert!(m.resid_std < 1e-10);
    }

    #[test]
    fn ols_residuals_orthogonal(
        x in prop::collection::vec(-100.0f64..100.0, 3..80),
        noise in prop::collection::vec(-5.0f64..5.0, 80),
        b in -3.0f64..3.0,
    ) {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        prop_assume!(x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() > 1.0);
        let y: Vec<f64> = x.iter().zip(&noise).map(|(v, e)| 7.0 + b * v + e).collect();
        let m = ols_fit(&series(x.clone()), &series(y.clone())).unwrap();
        let n = x.len() as f64;
        let scale = y.iter().fold(1.0f64, |s, v| s.max(v.abs()))
            * x.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let r = m.residuals.values();
        prop_assert!(r.iter().sum::<f64>().abs() <= 1e-8 * n * scale);
        prop_assert!(r.iter().zip(&x).map(|(r, x)| r * x).sum::<f64>().abs() <= 1e-8 * n * scale);
        prop_assert!(m.resid_std >= 0.0);
    }

    #[test]
    fn adf_invariant_to_level_shift(seed in 0u64..10_000, shift in -1000.0f64..1000.0) {
        let mut r = rng(seed);
        let base = random_walk(&mut r, 120, 0.0, 1.0);
        let shifted: Vec<f64> = base.iter().map(|v| v + shift).collect();
        let a = adf_statistic(&series(base), 2).unwrap().0;
        let b = adf_statistic(&series(shifted), 2).unwrap().0;
        prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
    }

    #[test]
    fn diff_then_cumsum_is_identity(v in prop::collection::vec(-1_000_000i64..1_000_000, 1..100)) {
        let s = series(v.iter().map(|&i| i as f64).collect());
        let d = diff(&s).unwrap();
        let mut acc = s.values()[0];
        let mut rebuilt = vec![acc];
        for step in d.values() {
            acc += step;
            rebuilt.push(acc);
        }
        prop_assert_eq!(rebuilt.as_slice(), s.values());
    }

    #[test]
    fn pvalue_monotone(a in -20.0f64..20.0, b in -20.0f64..20.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(adf_pvalue(lo) <= adf_pvalue(hi));
    }

    #[test]
    fn adf_result_fields_consistent(seed in 0u64..1000, lags in 0usize..10) {
        let mut r = rng(seed);
        let s = series(white_noise(&mut r, 80, 1.0));
        let res = adf_test(&s, Some(lags)).unwrap();
        prop_assert_eq!(res.n_effective, 80 - lags - 1);
        prop_assert!((0.0..=1.0).contains(&res.pvalue));
    }
}
