use lpsketch::estimators::{lemma4_condition, EstimatorId};
use lpsketch::moments::{beta4, exact_lp};
use lpsketch::simlab::{generate_pair, run_mse, Backend, ExperimentSpec, MseRow, PairKind, PairSource, ValueDist};
use lpsketch::{DataVector, EntryDistribution};

fn spec(x: &DataVector<f64>, y: &DataVector<f64>) -> ExperimentSpec {
    ExperimentSpec {
        source: PairSource::Given {
            x: x.clone(),
            y: y.clone(),
        },
        k_grid: vec![10, 100, 1000],
        trials: 2000,
        estimators: vec![EstimatorId::OneP],
        distribution: EntryDistribution::Normal,
        backend: Backend::Gaussian,
        master_seed: 1,
        tau: 0.9,
    }
}

fn gamma_pair(dim: usize, seed: u64) -> (DataVector<f64>, DataVector<f64>) {
    let kind = PairKind::Gamma {
        shape: 1.5,
        scale: 1.0,
        correlation: 0.4,
    };
    generate_pair(&kind, dim, seed).unwrap()
}

fn row(rows: &[MseRow], id: EstimatorId, k: usize) -> &MseRow {
    rows.iter().find(|r| r.estimator == id && r.k == k).unwrap()
}

/// Three-point entries share the normal's fourth moment (3), so the normal
/// variance formulas apply to real sketches built from them.
#[test]
fn three_point_sketches_match_theory() {
    let (x, y) = gamma_pair(40, 3);
    let mut s = spec(&x, &y);
    s.k_grid = vec![16];
    s.trials = 40_000;
    s.estimators = vec![EstimatorId::ThreeP, EstimatorId::OneP, EstimatorId::OnePIdentity];
    s.distribution = EntryDistribution::ThreePoint;
    s.backend = Backend::Direct;
    let truth = exact_lp(&x, &y, 4).unwrap();
    for r in run_mse(&s).unwrap() {
        let theory = r.theoretical_var_norm.unwrap() * truth * truth;
        let e = (r.sample_var.unwrap() - theory).abs() / theory;
        assert!(e < 0.05, "{}: {e}", r.estimator);
    }
}

#[test]
fn gaussian_and_direct_backends_agree() {
    let (x, y) = gamma_pair(30, 4);
    let mut s = spec(&x, &y);
    s.k_grid = vec![8];
    s.trials = 20_000;
    s.estimators = vec![EstimatorId::ThreeP, EstimatorId::OneP, EstimatorId::OnePMargin];
    let gauss = run_mse(&s).unwrap();
    s.backend = Backend::Direct;
    s.master_seed = 2;
    let direct = run_mse(&s).unwrap();
    for (g, d) in gauss.iter().zip(&direct) {
        let (vg, vd) = (g.sample_var.unwrap(), d.sample_var.unwrap());
        let se = ((vg + vd) / s.trials as f64).sqrt();
        assert!((g.mean.unwrap() - d.mean.unwrap()).abs() < 4.0 * se, "{}", g.estimator);
        assert!((vg - vd).abs() / vd < 0.08, "{}: {vg} vs {vd}", g.estimator);
    }
}

#[test]
fn rows_are_reproducible_across_thread_counts() {
    let (x, y) = gamma_pair(50, 5);
    let mut s = spec(&x, &y);
    s.estimators = vec![EstimatorId::Sampling, EstimatorId::OneP, EstimatorId::ThreePMargin, EstimatorId::D6OneP];
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_mse(&s).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run_mse(&s).unwrap());
}

#[test]
fn exact_rows_have_zero_error() {
    let (x, y) = gamma_pair(20, 6);
    let mut s = spec(&x, &y);
    s.estimators = vec![EstimatorId::Exact];
    for r in run_mse(&s).unwrap() {
        assert_eq!(r.empirical_mse, Some(0.0));
    }

    let mut s = spec(&x, &x);
    s.estimators = vec![EstimatorId::OnePIdentity];
    for r in run_mse(&s).unwrap() {
        assert_eq!(r.empirical_mse, Some(0.0));
    }
    s.estimators = vec![EstimatorId::OneP];
    assert!(run_mse(&s).is_err());
}

#[test]
fn theoretical_variance_falls_as_one_over_k() {
    let (x, y) = gamma_pair(100, 7);
    let mut s = spec(&x, &y);
    s.trials = 100;
    s.estimators = vec![EstimatorId::Sampling, EstimatorId::ThreeP, EstimatorId::OneP, EstimatorId::OnePIdentity];
    let rows = run_mse(&s).unwrap();
    for id in &s.estimators {
        let v: Vec<f64> = s.k_grid.iter().map(|&k| row(&rows, *id, k).theoretical_var_norm.unwrap()).collect();
        for (w, ks) in v.windows(2).zip(s.k_grid.windows(2)) {
            assert!(w[1] < w[0]);
            let ratio = w[0] / w[1];
            let want = ks[1] as f64 / ks[0] as f64;
            assert!((ratio - want).abs() < 1e-9 * want, "{id}");
        }
    }
}

#[test]
fn one_matrix_mse_tracks_theory() {
    let (x, y) = gamma_pair(200, 8);
    let mut s = spec(&x, &y);
    s.k_grid = vec![100];
    s.trials = 100_000;
    let r = &run_mse(&s).unwrap()[0];
    let (emp, theory) = (r.empirical_mse.unwrap(), r.theoretical_var_norm.unwrap());
    assert!((emp - theory).abs() / theory < 0.05, "{emp} vs {theory}");
}

#[test]
fn gamma_pairs_meet_the_one_matrix_condition() {
    let kind = PairKind::Gamma {
        shape: 2.0,
        scale: 1.0,
        correlation: 0.0,
    };
    let held = (0..100)
        .filter(|&seed| {
            let (x, y) = generate_pair(&kind, 10_000, seed).unwrap();
            lemma4_condition(&x, &y).unwrap().0
        })
        .count();
    assert!(held >= 99, "{held}");
}

#[test]
fn overlap_controls_similarity() {
    let kind = |overlap| PairKind::SparseOverlap {
        sparsity_x: 0.1,
        sparsity_y: 0.1,
        overlap,
        values: ValueDist::Gamma { shape: 2.0, scale: 1.0 },
        jitter: 0.0,
    };
    let (x, y) = generate_pair(&kind(1.0), 500, 1).unwrap();
    assert_eq!(beta4(&x, &y).unwrap(), 1.0);
    let (x, y) = generate_pair(&kind(0.0), 500, 1).unwrap();
    assert_eq!(beta4(&x, &y).unwrap(), 0.0);
}
