use lpsketch::knn::{brute_force_error, knn_classify, BlobSpec, DistanceSource, LabeledDataset};
use lpsketch::DataVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn blobs(seed: u64) -> LabeledDataset {
    BlobSpec {
        dim: 60,
        classes: 3,
        train_per_class: 30,
        test_per_class: 20,
        shift: 1.2,
        informative: 6,
        density: 0.3,
        label_noise: 0.05,
        seed,
    }
    .generate()
    .unwrap()
}

fn error(ds: &LabeledDataset, m: usize, p: u32) -> f64 {
    knn_classify(ds, m, p, &DistanceSource::Exact).unwrap().error_rate
}

#[test]
fn matches_brute_force() {
    for seed in 0..3 {
        let ds = blobs(seed);
        for m in [1, 4, 7] {
            for p in [2, 4, 6] {
                assert_eq!(error(&ds, m, p), brute_force_error(&ds, m, p).unwrap(), "m={m} p={p}");
            }
        }
    }
}

#[test]
fn training_order_does_not_matter() {
    let ds = blobs(4);
    let mut order = ds.train().to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
    let shuffled = ds.with_train_order(order).unwrap();
    for m in [1, 5] {
        assert_eq!(error(&ds, m, 4), error(&shuffled, m, 4));
    }
}

#[test]
fn uniform_scaling_does_not_matter() {
    let ds = blobs(6);
    let scaled = ds.map_rows(|r| r.scale(2.0));
    for m in [1, 5] {
        for p in [2, 4] {
            assert_eq!(error(&ds, m, p), error(&scaled, m, p));
        }
    }
}

#[test]
fn single_class_is_always_right() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let row = |rng: &mut ChaCha8Rng| DataVector::dense((0..10).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let train = (0..15).map(|_| (row(&mut rng), 3)).collect();
    let test = (0..5).map(|_| (row(&mut rng), 3)).collect();
    let ds = LabeledDataset::from_parts(train, test).unwrap();
    assert_eq!(error(&ds, 3, 4), 0.0);
}

#[test]
fn duplicated_rows_take_their_own_label() {
    let ds = blobs(10);
    let test: Vec<_> = ds.train().iter().map(|&i| (ds.rows()[i].clone(), ds.labels()[i])).collect();
    let train = test.clone();
    let copy = LabeledDataset::from_parts(train, test).unwrap();
    for p in [2, 4] {
        assert_eq!(error(&copy, 1, p), 0.0);
    }
}

#[test]
fn label_noise_flips_about_the_requested_share() {
    let spec = BlobSpec {
        dim: 10,
        classes: 2,
        train_per_class: 2000,
        test_per_class: 0,
        shift: 10.0,
        informative: 1,
        density: 0.0,
        label_noise: 0.2,
        seed: 9,
    };
    let ds = spec.generate().unwrap();
    // class c is shifted on coordinate c, so the row itself reveals its origin
    let flipped = ds
        .train()
        .iter()
        .filter(|&&i| {
            let r = &ds.rows()[i];
            let origin = if r.get(0) > r.get(1) { 0 } else { 1 };
            ds.labels()[i] != origin
        })
        .count() as f64
        / ds.train().len() as f64;
    assert!((flipped - 0.2).abs() < 0.03, "{flipped}");
}
