use ldcusum::{ArmaModel, ChangeInjection};

fn sample_autocov(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    x[..n - lag]
        .iter()
        .zip(&x[lag..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum::<f64>()
        / n as f64
}

/// Bartlett's approximation of the standard error of the lag-`h` sample
/// autocovariance, from the true autocovariances.
fn bartlett_se(gamma: &[f64], h: usize, n: usize) -> f64 {
    let m = gamma.len() - h - 1;
    let g = |k: i64| gamma[k.unsigned_abs() as usize];
    let mut v = 0.0;
    for k in -(m as i64)..=(m as i64) {
        let kh = k + h as i64;
        let kmh = k - h as i64;
        if kh.unsigned_abs() as usize >= gamma.len() || kmh.unsigned_abs() as usize >= gamma.len() {
            continue;
        }
        v += g(k) * g(k) + g(kh) * g(kmh);
    }
    (v / n as f64).sqrt()
}

#[test]
fn empirical_autocovariance_matches_model() {
    let n = 1_000_000;
    for (model, seed) in [
        (ArmaModel::ar1(0.5, 1.0).unwrap(), 1),
        (ArmaModel::ma1(-0.6, 1.3).unwrap(), 2),
        (ArmaModel::new(vec![0.5, -0.2], vec![0.4], 0.8, 2.0).unwrap(), 3),
    ] {
        let x = model.simulate(n, &ChangeInjection::none(n), seed).unwrap();
        let gamma = model.autocovariance(60).unwrap();
        for h in 0..5 {
            let se = bartlett_se(&gamma, h, n);
            let emp = sample_autocov(&x, h);
            assert!(
                (emp - gamma[h]).abs() < 5.0 * se,
                "{model:?} lag {h}: {emp} vs {} (se {se})",
                gamma[h]
            );
        }
        let mean = x.iter().sum::<f64>() / n as f64;
        let se_mean = (model.long_run_variance() / n as f64).sqrt();
        assert!((mean - model.mean).abs() < 5.0 * se_mean);
    }
}

#[test]
fn simulation_is_reproducible_and_seed_sensitive() {
    let model = ArmaModel::ar1(0.5, 1.0).unwrap();
    let inj = ChangeInjection::smooth(100, 3.0);
    let a = model.simulate(200, &inj, 7).unwrap();
    assert_eq!(a, model.simulate(200, &inj, 7).unwrap());
    assert_ne!(a, model.simulate(200, &inj, 8).unwrap());
    assert_eq!(model.simulate(1, &ChangeInjection::none(1), 7).unwrap().len(), 1);
}

#[test]
fn post_change_level_is_reached() {
    let model = ArmaModel::ma1(0.3, 1.0).unwrap();
    let len = 200_000;
    for inj in [ChangeInjection::smooth(1000, 3.0), ChangeInjection::abrupt(1000, 3.0)] {
        let x = model.simulate(len, &inj, 5).unwrap();
        let pre = x[..999].iter().sum::<f64>() / 999.0;
        let post = x[2000..].iter().sum::<f64>() / (len - 2000) as f64;
        assert!(pre.abs() < 0.3, "{pre}");
        assert!((post - 3.0).abs() < 0.05, "{post}");
    }
}

#[test]
fn abrupt_change_starts_at_new_level() {
    // with strong memory the smooth transition lags behind the abrupt one
    let model = ArmaModel::<f64>::ar1(0.95, 0.1).unwrap();
    let mut smooth_first = 0.0;
    let mut abrupt_first = 0.0;
    for seed in 0..50 {
        smooth_first += model.simulate(60, &ChangeInjection::smooth(50, 5.0), seed).unwrap()[49];
        abrupt_first += model.simulate(60, &ChangeInjection::abrupt(50, 5.0), seed).unwrap()[49];
    }
    assert!(smooth_first / 50.0 < 1.0);
    assert!((abrupt_first / 50.0 - 5.0).abs() < 0.2);
}

#[test]
fn scaled_innovations_after_change() {
    let model = ArmaModel::white_noise(1.0).unwrap();
    let len = 100_000;
    let x = model
        .simulate(len, &ChangeInjection::smooth(50_001, 0.0).with_scale(2.0), 9)
        .unwrap();
    let var = |s: &[f64]| s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
    assert!((var(&x[..50_000]) - 1.0).abs() < 0.03);
    assert!((var(&x[50_000..]) - 4.0).abs() < 0.12);
}

#[test]
fn invalid_models_are_rejected() {
    assert!(matches!(ArmaModel::ar1(1.0, 1.0), Err(ldcusum::Error::NonStationary { .. })));
    assert!(matches!(ArmaModel::<f64>::white_noise(0.0), Err(ldcusum::Error::InvalidSigma(_))));
    let m = ArmaModel::ar1(0.5, 1.0).unwrap();
    assert!(m.simulate(10, &ChangeInjection::smooth(12, 1.0), 1).is_err());
}
