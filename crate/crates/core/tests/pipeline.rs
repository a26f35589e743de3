use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weldnet::block::{BlockMetaParams, TauMode, TrainOptions};
use weldnet::dataset::{split, synthesize_weld, Dataset};
use weldnet::experiment::{compare, fit_method, score, Method, MethodSettings};
use weldnet::metrics::{pearson, spearman};
use weldnet::model::{train_all, FitConfig};
use weldnet::search::{grid_search, SearchSpace};

#[test]
fn dynamic_width_grows_underfit_blocks() {
    let data = synthesize_weld(150, 0.02, 11).unwrap();
    let cfg = FitConfig { dynamic_width: true, ..Default::default() };
    let meta = BlockMetaParams { neurons: 2, iterations: 3000, ..Default::default() };
    let mut grew = 0;
    for seed in 0..10 {
        let (model, _) = train_all(&[meta; 2], &data, seed, &cfg).unwrap();
        if model.blocks.iter().any(|b| b.width() > 2) {
            grew += 1;
        }
        assert!(model.blocks.iter().all(|b| (2..=100).contains(&b.width())));
    }
    assert!(grew >= 6, "only {grew}/10 seeds grew");
}

#[test]
fn single_point_search_is_fast() {
    let data = synthesize_weld(200, 0.02, 1).unwrap();
    let t = Instant::now();
    let (best, board) = grid_search(
        &SearchSpace::single(&BlockMetaParams::default()),
        &data,
        0,
        5,
        1,
        &FitConfig::default(),
        None,
    )
    .unwrap();
    assert!(t.elapsed().as_secs() < 60);
    assert_eq!(board.rows.len(), 1);
    assert!(best.validate().is_ok());
}

#[test]
fn one_method_one_seed_compare_matches_direct_fit() {
    let data = synthesize_weld(80, 0.02, 5).unwrap();
    let settings = MethodSettings::default();
    let cmp = compare(&[Method::Nrn], &settings, &data, 0.25, &[9]).unwrap();
    let (train, test) = split(&data, 0.25, 9).unwrap();
    let model = fit_method(Method::Nrn, &settings, &train, 9).unwrap();
    let (rmse, pe) = score(&model, &test).unwrap();
    assert_eq!(cmp.runs[0].rmse, rmse);
    assert_eq!(cmp.runs[0].pe, pe);
    assert!(cmp.summary.iter().all(|r| r.ci.is_none() && r.z.is_none()));
}

#[test]
fn ner_is_exact_on_linear_targets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = Array2::from_shape_fn((40, 3), |_| rng.random_range(1.0..5.0));
    let y = Array2::from_shape_fn((40, 2), |(i, k)| 1.0 + (k as f64 + 1.0) * x[[i, 0]] - 0.5 * x[[i, 2]]);
    let names = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    let data = Dataset::new(x, y, names("v", 3), names("t", 2)).unwrap();
    let model = fit_method(Method::Ner, &MethodSettings::default(), &data, 0).unwrap();
    let (rmse, _) = score(&model, &data).unwrap();
    assert!(rmse.iter().all(|r| *r < 1e-8), "{rmse:?}");
}

#[test]
fn reduction_holds_inside_compare() {
    let data = synthesize_weld(60, 0.02, 3).unwrap();
    let settings = MethodSettings {
        metas: vec![BlockMetaParams { neurons: 3, gamma: 1.0, ..Default::default() }],
        options: TrainOptions { tau: TauMode::Off, ..Default::default() },
        ..Default::default()
    };
    let c = compare(&[Method::Nrn, Method::Ann], &settings, &data, 0.2, &[1, 2, 3]).unwrap();
    let nrn: Vec<_> = c.runs_of(Method::Nrn).map(|r| r.rmse.clone()).collect();
    let ann: Vec<_> = c.runs_of(Method::Ann).map(|r| r.rmse.clone()).collect();
    assert_eq!(nrn, ann);
}

#[test]
fn independent_noise_is_uncorrelated() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..500).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..500).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!(pearson(&a, &b).unwrap().0.abs() < 0.2);
        assert!(spearman(&a, &b).unwrap().abs() < 0.2);
    }
}
