use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wavecast::data::{TimeSeriesFrame, Variable};
use wavecast::forecasting::{
    build_design, evaluate, fit_gbt, fit_ols, load_model, predict_direct, rmse_mae, rollout, save_model, DesignMatrix,
    Forecaster, GbtParams, LagSpec, Model, ModelHeader, Node, PastFill, Tree,
};
use wavecast::{Error, Result};

fn design(n: usize, width: usize, horizon: usize, features: Vec<f64>, targets: Vec<f64>) -> DesignMatrix {
    DesignMatrix {
        n_rows: n,
        width,
        horizon,
        features,
        targets,
        row_origins: (0..n as i64).collect(),
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn frame(n: usize, seed: u64) -> TimeSeriesFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sea: Vec<f64> = (0..n).map(|i| (i as f64 / 37.0).sin()).collect();
    let pump: Vec<f64> = (0..n).map(|i| if (i / 20) % 3 == 0 { 1.0 } else { 0.0 }).collect();
    let mut y = vec![0.0; n];
    for t in 1..n {
        y[t] = 0.8 * y[t - 1] + 0.3 * sea[t - 1] - 0.2 * pump[t] + 0.05 * gaussian(&mut rng);
    }
    TimeSeriesFrame::new(
        (0..n as i64).map(|i| 60 * i).collect(),
        60,
        Variable::new("level", y),
        vec![Variable::new("sea", sea)],
        vec![Variable::new("pump", pump)],
    )
    .unwrap()
}

fn sse(model: &dyn Forecaster, d: &DesignMatrix) -> f64 {
    (0..d.n_rows)
        .map(|i| {
            let p = model.predict(d.row(i)).unwrap();
            p.iter().zip(d.target_row(i)).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        })
        .sum()
}

#[test]
fn origin_counting_and_width() {
    let spec = LagSpec::new(10, 4, 8);
    let f = frame(14, 1);
    assert_eq!(build_design(&[f], &spec, 1).unwrap().n_rows, 1);
    let f = frame(14 + 59, 1);
    assert_eq!(build_design(std::slice::from_ref(&f), &spec, 60).unwrap().n_rows, 1);
    assert_eq!(build_design(&[f], &spec, 1).unwrap().n_rows, 60);
    assert_eq!(LagSpec::default().width(2, 1), 1140);
    let d = build_design(&[frame(100, 2)], &spec, 1).unwrap();
    assert_eq!(d.width, spec.width(1, 1));
    assert_eq!(d.features.len(), d.n_rows * d.width);
}

#[test]
fn design_rows_read_the_right_samples() {
    let spec = LagSpec::new(3, 2, 2);
    let f = frame(20, 3);
    let d = build_design(std::slice::from_ref(&f), &spec, 1).unwrap();
    let y = &f.target.values;
    let sea = &f.past_covariates[0].values;
    let pump = &f.future_covariates[0].values;
    for r in 0..d.n_rows {
        let t = 3 + r;
        let expect = [
            y[t - 1],
            y[t - 2],
            y[t - 3],
            sea[t - 1],
            sea[t - 2],
            sea[t - 3],
            pump[t],
            pump[t + 1],
        ];
        assert_eq!(d.row(r), expect);
        assert_eq!(d.target_row(r), &y[t..t + 2]);
        assert_eq!(d.row_origins[r], f.timestamps[t]);
    }
}

#[test]
fn rows_never_cross_frames() {
    let spec = LagSpec::new(5, 2, 2);
    let a = frame(30, 4);
    let b = frame(6, 5);
    let c = frame(25, 6);
    let d = build_design(&[a.clone(), b, c.clone()], &spec, 1).unwrap();
    assert_eq!(d.n_rows, spec.origin_count(30, 1) + spec.origin_count(25, 1));
}

#[test]
fn invalid_specs() {
    let mut s = LagSpec::new(10, 4, 10);
    assert!(matches!(s.validate(), Err(Error::Config(_))));
    s.rollout_horizon = 8;
    s.future_cov_leads.push(4);
    assert!(s.validate().is_err());
    let thin = LagSpec::new(12, 3, 3).thinned(4);
    assert_eq!(thin.target_lags, vec![1, 5, 9]);
    assert_eq!(thin.future_cov_leads, vec![0, 1, 2]);
}

#[test]
fn ols_recovers_exact_generator() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (n, p, h) = (300, 6, 3);
    let w: Vec<f64> = (0..p * h).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let b = [0.5, -1.0, 2.0];
    let x: Vec<f64> = (0..n * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut y = Vec::new();
    for i in 0..n {
        for k in 0..h {
            y.push(b[k] + (0..p).map(|f| x[i * p + f] * w[f * h + k]).sum::<f64>());
        }
    }
    let m = fit_ols(&design(n, p, h, x, y), 0.0).unwrap();
    for f in 0..p {
        for k in 0..h {
            assert!((m.weight(f, k) - w[f * h + k]).abs() < 1e-8);
        }
    }
    for (got, want) in m.intercept.iter().zip(b) {
        assert!((got - want).abs() < 1e-8);
    }
    assert_eq!(m.rank, p);
}

#[test]
fn ols_ar1_coefficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut y = vec![0.0];
    for t in 1..5001 {
        y.push(0.5 * y[t - 1] + gaussian(&mut rng));
    }
    let x = y[..5000].to_vec();
    let m = fit_ols(&design(5000, 1, 1, x, y[1..].to_vec()), 0.0).unwrap();
    assert!((m.weight(0, 0) - 0.5).abs() < 0.02, "{}", m.weight(0, 0));
}

#[test]
fn ols_duplicate_column_minimum_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 200;
    let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..n).map(|i| 3.0 * a[i] - c[i] + 0.1 * gaussian(&mut rng)).collect();
    let single: Vec<f64> = (0..n).flat_map(|i| [a[i], c[i]]).collect();
    let dup: Vec<f64> = (0..n).flat_map(|i| [a[i], a[i], c[i]]).collect();
    let m1 = fit_ols(&design(n, 2, 1, single, y.clone()), 0.0).unwrap();
    let m2 = fit_ols(&design(n, 3, 1, dup, y), 0.0).unwrap();
    assert_eq!(m2.rank, 2);
    assert!((m2.weight(0, 0) - m2.weight(1, 0)).abs() < 1e-8);
    for i in 0..n {
        let p1 = m1.predict(&[a[i], c[i]]).unwrap()[0];
        let p2 = m2.predict(&[a[i], a[i], c[i]]).unwrap()[0];
        assert!((p1 - p2).abs() < 1e-8);
    }
}

#[test]
fn ols_residuals_orthogonal_and_locally_optimal() {
    let spec = LagSpec::new(8, 3, 6);
    let d = build_design(&[frame(400, 7), frame(300, 8)], &spec, 1).unwrap();
    let m = fit_ols(&d, 0.0).unwrap();
    for k in 0..d.horizon {
        for f in 0..d.width {
            let dot: f64 = (0..d.n_rows)
                .map(|i| (d.target_row(i)[k] - m.predict(d.row(i)).unwrap()[k]) * d.row(i)[f])
                .sum();
            assert!(dot.abs() < 1e-8, "feature {f} step {k}: {dot}");
        }
    }
    let base = sse(&m, &d);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let slot = rng.gen_range(0..m.weights.len());
        for delta in [1e-3, -1e-3] {
            let mut moved = m.clone();
            moved.weights[slot] += delta;
            assert!(sse(&moved, &d) >= base);
        }
    }
}

#[test]
fn ols_rejects_bad_input() {
    let d = design(0, 2, 1, vec![], vec![]);
    assert!(fit_ols(&d, 0.0).is_err());
    let d = design(2, 1, 1, vec![1.0, f64::NAN], vec![1.0, 2.0]);
    assert!(fit_ols(&d, 0.0).is_err());
    assert!(fit_ols(&design(2, 1, 1, vec![1.0, 2.0], vec![1.0, 2.0]), -1.0).is_err());
}

#[test]
fn ridge_shrinks_weights() {
    let d = build_design(&[frame(300, 10)], &LagSpec::new(6, 2, 2), 1).unwrap();
    let plain = fit_ols(&d, 0.0).unwrap();
    let ridged = fit_ols(&d, 10.0).unwrap();
    let norm = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>();
    assert!(norm(&ridged.weights) < norm(&plain.weights));
}

#[test]
fn gbt_zero_rounds_and_constant_target() {
    let d = design(
        20,
        1,
        2,
        (0..20).map(|i| i as f64).collect(),
        (0..40).map(|i| (i % 2) as f64 * 3.0).collect(),
    );
    let params = GbtParams {
        n_rounds: 0,
        ..GbtParams::default()
    };
    let m = fit_gbt(&d, &params, None).unwrap();
    assert_eq!(m.predict(&[5.0]).unwrap(), vec![0.0, 3.0]);
    let m = fit_gbt(&d, &GbtParams::default(), None).unwrap();
    assert!(m.ensembles.iter().all(|e| e.trees.is_empty()));
}

#[test]
fn gbt_finds_single_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 200;
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&v| if v < 0.4 { -1.0 } else { 2.0 } + 0.01 * gaussian(&mut rng))
        .collect();
    let params = GbtParams {
        n_rounds: 1,
        max_depth: 1,
        learning_rate: 1.0,
        min_samples_leaf: 1,
        early_stopping_rounds: None,
    };
    let m = fit_gbt(&design(n, 1, 1, x.clone(), y.clone()), &params, None).unwrap();
    let pred: Vec<f64> = x.iter().map(|&v| m.predict(&[v]).unwrap()[0]).collect();
    let (rmse, _) = rmse_mae(&pred, &y);
    assert!(rmse < 0.02, "{rmse}");
    assert_eq!(m.ensembles[0].trees[0].depth(), 1);
}

fn check_thresholds(tree: &Tree, node: usize, rows: &[usize], d: &DesignMatrix) {
    if let Node::Split {
        feature,
        threshold,
        left,
        right,
    } = tree.nodes[node]
    {
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| d.row(i)[feature] < threshold);
        let max_l = l.iter().map(|&i| d.row(i)[feature]).fold(f64::MIN, f64::max);
        let min_r = r.iter().map(|&i| d.row(i)[feature]).fold(f64::MAX, f64::min);
        assert!(!l.is_empty() && !r.is_empty());
        assert!(max_l < threshold && threshold < min_r);
        check_thresholds(tree, left, &l, d);
        check_thresholds(tree, right, &r, d);
    }
}

#[test]
fn gbt_properties_on_lagged_data() {
    let spec = LagSpec::new(12, 3, 6);
    let d = build_design(&[frame(500, 12)], &spec, 1).unwrap();
    let params = GbtParams {
        n_rounds: 25,
        max_depth: 3,
        ..GbtParams::default()
    };
    let a = fit_gbt(&d, &params, None).unwrap();
    let b = fit_gbt(&d, &params, None).unwrap();
    assert_eq!(a, b);
    let rows: Vec<usize> = (0..d.n_rows).collect();
    for e in &a.ensembles {
        assert!(e.train_loss.windows(2).all(|w| w[1] <= w[0]), "{:?}", e.train_loss);
        for t in &e.trees {
            assert!(t.depth() <= 3);
            check_thresholds(t, 0, &rows, &d);
        }
    }
    assert!(matches!(a.predict(&[0.0; 3]), Err(Error::Shape(_))));
}

#[test]
fn gbt_early_stopping_truncates() {
    let spec = LagSpec::new(6, 2, 2);
    let train = build_design(&[frame(300, 13)], &spec, 1).unwrap();
    let val = build_design(&[frame(200, 14)], &spec, 1).unwrap();
    let params = GbtParams {
        n_rounds: 300,
        max_depth: 6,
        learning_rate: 0.5,
        min_samples_leaf: 1,
        early_stopping_rounds: Some(5),
    };
    let m = fit_gbt(&train, &params, Some(&val)).unwrap();
    assert!(m.ensembles.iter().all(|e| e.trees.len() < 300));
}

#[test]
fn rollout_single_chunk_equals_direct() {
    let spec = LagSpec::new(10, 5, 5);
    let f = frame(200, 15);
    let d = build_design(std::slice::from_ref(&f), &spec, 1).unwrap();
    let models = [
        Model::Linear(fit_ols(&d, 0.0).unwrap()),
        Model::Gbt(
            fit_gbt(
                &d,
                &GbtParams {
                    n_rounds: 10,
                    ..GbtParams::default()
                },
                None,
            )
            .unwrap(),
        ),
    ];
    for m in &models {
        for origin in [10, 57, 195] {
            let w = rollout(m, &f, origin, &spec, PastFill::Persistence).unwrap();
            let direct = predict_direct(m, d.row(origin - 10)).unwrap();
            assert_eq!(w.predictions, direct);
        }
    }
}

#[test]
fn oracle_model_reproduces_actuals() {
    let spec = LagSpec::new(4, 2, 8);
    let f = frame(60, 16);
    let y = f.target.values.clone();
    // Lag 1 identifies the position: find t with y[t-1] == lag1 and the matching history.
    let oracle = |x: &[f64]| -> Result<Vec<f64>> {
        let t = (4..y.len())
            .find(|&t| (1..=4).all(|l| y[t - l] == x[l - 1]))
            .expect("known history");
        Ok(y[t..t + 2].to_vec())
    };
    let w = rollout(&oracle, &f, 20, &spec, PastFill::Oracle).unwrap();
    assert_eq!(w.predictions, w.actuals);
    assert_eq!((w.rmse, w.mae), (0.0, 0.0));
}

#[test]
fn rollout_propagates_early_perturbations() {
    let spec = LagSpec::new(360, 60, 360).thinned(10);
    let f = frame(2000, 17);
    let d = build_design(std::slice::from_ref(&f), &spec, 7).unwrap();
    let m = fit_ols(&d, 0.0).unwrap();
    let base = rollout(&m, &f, 400, &spec, PastFill::Persistence).unwrap();
    // Shift every prediction of the first chunk; later chunks only see it through their lags.
    let first_chunk_only = |x: &[f64]| -> Result<Vec<f64>> {
        let mut p = m.predict(x)?;
        if x[0] == f.target.values[399] {
            p.iter_mut().for_each(|v| *v += 0.5);
        }
        Ok(p)
    };
    let w = rollout(&first_chunk_only, &f, 400, &spec, PastFill::Persistence).unwrap();
    for i in 0..60 {
        assert!((w.predictions[i] - base.predictions[i] - 0.5).abs() < 1e-12);
    }
    assert!((w.predictions[359] - base.predictions[359]).abs() > 1e-6);
}

#[test]
fn rollout_contract_errors() {
    let spec = LagSpec::new(10, 5, 10);
    let f = frame(50, 18);
    let m = |_: &[f64]| -> Result<Vec<f64>> { Ok(vec![0.0; 5]) };
    assert!(matches!(
        rollout(&m, &f, 5, &spec, PastFill::Persistence),
        Err(Error::Contract(_))
    ));
    assert!(matches!(
        rollout(&m, &f, 45, &spec, PastFill::Persistence),
        Err(Error::Contract(_))
    ));
    let wrong = |_: &[f64]| -> Result<Vec<f64>> { Ok(vec![0.0; 3]) };
    assert!(matches!(
        rollout(&wrong, &f, 20, &spec, PastFill::Persistence),
        Err(Error::Shape(_))
    ));
}

#[test]
fn persistence_fill_freezes_past_covariates() {
    let spec = LagSpec::new(3, 1, 3);
    let f = frame(40, 19);
    let seen = std::cell::RefCell::new(Vec::new());
    let m = |x: &[f64]| -> Result<Vec<f64>> {
        seen.borrow_mut().push(x[3]);
        Ok(vec![0.0])
    };
    rollout(&m, &f, 10, &spec, PastFill::Persistence).unwrap();
    let sea = &f.past_covariates[0].values;
    assert_eq!(*seen.borrow(), vec![sea[9], sea[9], sea[9]]);
}

fn shifted(by: f64) -> impl Fn(&[f64]) -> Result<Vec<f64>> {
    move |_x: &[f64]| Ok(vec![by; 4])
}

#[test]
fn evaluation_closed_forms() {
    let spec = LagSpec::new(4, 4, 8);
    let flat = TimeSeriesFrame::new(
        (0..100).map(|i| i * 60).collect(),
        60,
        Variable::new("y", vec![0.0; 100]),
        vec![],
        vec![],
    )
    .unwrap();
    let zero = shifted(0.0);
    let r = evaluate(&zero, std::slice::from_ref(&flat), &spec, 10, PastFill::Persistence).unwrap();
    assert_eq!((r.rmse, r.mae), (0.0, 0.0));
    let biased = shifted(-0.75);
    let r = evaluate(&biased, &[flat.clone(), flat.clone()], &spec, 10, PastFill::Persistence).unwrap();
    assert!((r.rmse - 0.75).abs() < 1e-15 && (r.mae - 0.75).abs() < 1e-15);
    assert_eq!(r.segments.len(), 2);
    assert_eq!(r.segments[0].windows, (100 - 4 - 8) / 10 + 1);
    let short = flat.slice(0, 10);
    assert!(matches!(
        evaluate(&zero, &[short], &spec, 10, PastFill::Persistence),
        Err(Error::EmptyEvaluation)
    ));
}

#[test]
fn gaussian_noise_metrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let n = 200_000;
    let actual: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    let pred: Vec<f64> = actual.iter().map(|a| a + gaussian(&mut rng)).collect();
    let (rmse, mae) = rmse_mae(&pred, &actual);
    assert!((rmse - 1.0).abs() < 0.02);
    assert!((mae - (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.02);
}

#[test]
fn model_file_round_trip() {
    let spec = LagSpec::new(6, 2, 4);
    let d = build_design(&[frame(200, 21)], &spec, 1).unwrap();
    let header = ModelHeader {
        lag_spec: spec,
        normalization: None,
        past_covariates: vec!["sea".into()],
        future_covariates: vec!["pump".into()],
    };
    let models = [
        Model::Linear(fit_ols(&d, 0.0).unwrap()),
        Model::Gbt(
            fit_gbt(
                &d,
                &GbtParams {
                    n_rounds: 5,
                    ..GbtParams::default()
                },
                None,
            )
            .unwrap(),
        ),
    ];
    for m in models {
        let bytes = save_model(&m, &header).unwrap();
        assert_eq!(&bytes[..4], b"WFM1");
        let (back, h) = load_model(&bytes).unwrap();
        assert_eq!(h, header);
        for i in 0..d.n_rows {
            assert_eq!(back.predict(d.row(i)).unwrap(), m.predict(d.row(i)).unwrap());
        }
        assert!(matches!(
            load_model(&bytes[..bytes.len() - 3]),
            Err(Error::Format { .. })
        ));
        let mut bad = bytes.clone();
        bad[0] = b'Z';
        assert!(load_model(&bad).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_window_rmse_dominates_mae(seed in any::<u64>(), n in 1usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let (rmse, mae) = rmse_mae(&a, &b);
        prop_assert!(rmse >= mae - 1e-12 && mae >= 0.0);
    }

    #[test]
    fn prop_design_shape(n in 1usize..200, p in 1usize..12, h in 1usize..6, stride in 1usize..9) {
        let spec = LagSpec::new(p, h, h);
        let f = frame(n.max(2), 1);
        let d = build_design(std::slice::from_ref(&f), &spec, stride).unwrap();
        prop_assert_eq!(d.n_rows, spec.origin_count(f.len(), stride));
        prop_assert_eq!(d.targets.len(), d.n_rows * h);
        for r in 0..d.n_rows {
            let t = p + r * stride;
            prop_assert!(t + h <= f.len());
            prop_assert_eq!(d.row(r)[0], f.target.values[t - 1]);
        }
    }
}
