//! A fast self-check suite run by the `verify` command. Each check compares
//! library output against an independent computation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::estimators::{
    complexity_ratio, d4_plain, est_1p_identity, lemma4_lhs, solve_margin_cubic, var_1p, var_3p, var_sampling,
    CubicInputs, ProjectedPair,
};
use crate::io::{read_sketches, write_sketches};
use crate::moments::{compute_moments, exact_lp};
use crate::projector::{sketch_vector, ProjectionSpec, Scheme};
use crate::scalar::Exact;
use crate::simlab::{derive_seed, GaussianPairModel, Summary};
use crate::vector::DataVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed,
        detail: detail.into(),
    }
}

fn exact_vec(v: &[i64]) -> DataVector<Exact> {
    DataVector::dense(v.iter().map(|&n| Exact::from_integer(n as i128)).collect()).expect("nonempty")
}

fn random_ints(rng: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
    (0..n).map(|_| rng.random_range(-4..=4)).collect()
}

fn hand_values() -> Check {
    let m = compute_moments(&exact_vec(&[1, 0]), &exact_vec(&[0, 1])).expect("same dim");
    let got = (var_3p(&m, 1), var_1p(&m, 1));
    let want = (Exact::from_integer(68), Exact::from_integer(4));
    check("closed-form hand values", got == want, format!("var_3p, var_1p = {}, {}", got.0, got.1))
}

fn decomposition(rng: &mut ChaCha8Rng) -> Check {
    for _ in 0..50 {
        let x = exact_vec(&random_ints(rng, 6));
        let y = exact_vec(&random_ints(rng, 6));
        let m = compute_moments(&x, &y).expect("same dim");
        if m.d4_from_mixed() != exact_lp(&x, &y, 4).expect("order")
            || m.d6_from_mixed() != exact_lp(&x, &y, 6).expect("order")
        {
            return check("distance decomposition", false, format!("{x:?} {y:?}"));
        }
    }
    check("distance decomposition", true, "50 exact rational pairs")
}

fn identity_vanishes(rng: &mut ChaCha8Rng) -> Check {
    for n in 0..20u64 {
        let x = DataVector::dense((0..30).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect()).expect("nonempty");
        let spec = ProjectionSpec::normal(n, 16, Scheme::OneMatrix, 30).expect("valid spec");
        let s = sketch_vector("x", &x, &spec, 3).expect("sketch");
        let v = est_1p_identity(&s, &s, None).expect("same spec").value;
        if v != 0.0 {
            return check("identity estimator vanishes", false, format!("value {v}"));
        }
    }
    check("identity estimator vanishes", true, "20 seeds, bit-exact 0")
}

fn cubic_factorization(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let m1 = rng.random::<f64>() * 10.0 + 0.1;
        let m2 = rng.random::<f64>() * 10.0 + 0.1;
        let a = (rng.random::<f64>() * 2.0 - 1.0) * (m1 * m2).sqrt();
        let k = rng.random_range(1..500);
        let kf = k as f64;
        let got = solve_margin_cubic(&CubicInputs {
            t: a * kf,
            su: m1 * kf,
            sv: m2 * kf,
            m1,
            m2,
            k,
        });
        worst = worst.max((got - a).abs() / (m1 * m2).sqrt());
    }
    check("margin cubic recovers exact inner product", worst < 1e-10, format!("max scaled error {worst:.2e}"))
}

fn holder(rng: &mut ChaCha8Rng) -> Check {
    for _ in 0..100 {
        let d = rng.random_range(1..50);
        let z = DataVector::dense((0..d).map(|_| rng.random::<f64>().powi(3) + 1e-3).collect()).expect("nonempty");
        for p in [4u32, 6, 8] {
            let bound = (d as f64).powf(1.0 - 2.0 / p as f64);
            let r = complexity_ratio(&z, p).expect("nonzero");
            if r > bound * (1.0 + 1e-12) {
                return check("Hölder bound on the complexity ratio", false, format!("{r} > {bound}"));
            }
        }
    }
    check("Hölder bound on the complexity ratio", true, "100 vectors, p = 4, 6, 8")
}

fn sampling_enumeration() -> Check {
    let x = [3i64, 0, 1, -2, 0];
    let y = [1i64, 1, 0, 2, 0];
    let w: Vec<Exact> = x
        .iter()
        .zip(&y)
        .map(|(a, b)| Exact::from_integer(((a - b) as i128).pow(4)))
        .collect();
    let d = w.len();
    let m = compute_moments(&exact_vec(&x), &exact_vec(&y)).expect("same dim");
    for k in 1..=3usize {
        let (mut s1, mut s2) = (Exact::from_integer(0), Exact::from_integer(0));
        let total = d.pow(k as u32);
        for code in 0..total {
            let mut c = code;
            let mut acc = Exact::from_integer(0);
            for _ in 0..k {
                acc += w[c % d];
                c /= d;
            }
            let est = acc * Exact::new(d as i128, k as i128);
            s1 += est;
            s2 += est * est;
        }
        let n = Exact::from_integer(total as i128);
        let var = s2 / n - (s1 / n) * (s1 / n);
        if var != var_sampling(&m, k) {
            return check("sampling variance by enumeration", false, format!("k = {k}"));
        }
    }
    check("sampling variance by enumeration", true, "D = 5, k = 1..3, exact")
}

fn roundtrip() -> Check {
    let spec = ProjectionSpec::normal(5, 7, Scheme::ThreeMatrix, 4).expect("valid spec");
    let s = sketch_vector("v", &DataVector::dense(vec![0.3, -2.0, 0.0, 1e-5]).expect("nonempty"), &spec, 3)
        .expect("sketch");
    let mut buf = Vec::new();
    let ok = write_sketches(std::slice::from_ref(&s), &mut buf).is_ok()
        && read_sketches(buf.as_slice()).map(|b| b == vec![s]).unwrap_or(false);
    check("sketch file round trip", ok, "bit-identical")
}

fn unbiased_quick() -> Check {
    let x = DataVector::dense(vec![1.0, 0.5, 0.0, 2.0, 1.5, 0.2]).expect("nonempty");
    let y = DataVector::dense(vec![0.0, 1.0, 1.0, 1.5, 0.5, 0.0]).expect("nonempty");
    let truth = exact_lp(&x, &y, 4).expect("order");
    let model = GaussianPairModel::new(&x, &y, 20, Scheme::OneMatrix, 3).expect("model");
    let est: Vec<f64> = (0..20_000u64)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(17, t));
            d4_plain(&model.draw(&mut rng)).expect("statistics")
        })
        .collect();
    let s = Summary::of(&est, truth);
    let z = (s.mean - truth) / s.std_error();
    let m = compute_moments(&x, &y).expect("same dim");
    let rel = (s.var - var_1p(&m, 20)).abs() / var_1p(&m, 20);
    check(
        "one-matrix estimator mean and variance",
        z.abs() < 4.0 && rel < 0.05,
        format!("z = {z:.2}, variance rel. error {rel:.3}"),
    )
}

fn counterexample() -> Check {
    let mut z = vec![10.0f64];
    z.extend(std::iter::repeat_n(1.0, 1000));
    let lhs = lemma4_lhs(&z).expect("nonnegative");
    check("variance-ordering condition counterexample", lhs < 0.0, format!("lhs = {lhs:.4e}"))
}

fn gaussian_draw_shape() -> Check {
    let x = DataVector::dense(vec![1.0, 2.0]).expect("nonempty");
    let model = GaussianPairModel::new(&x, &x, 3, Scheme::OneMatrix, 3).expect("model");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = model.draw(&mut rng);
    let ok = d.k() == 3 && d.cross(2, 2).ok() == d.norm_x(2, 2).ok();
    check("sampled statistics are consistent", ok, "shared rows coincide")
}

/// Runs every check; fast enough for routine use.
pub fn run_quick_suite() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    vec![
        hand_values(),
        decomposition(&mut rng),
        identity_vanishes(&mut rng),
        cubic_factorization(&mut rng),
        holder(&mut rng),
        sampling_enumeration(),
        roundtrip(),
        unbiased_quick(),
        counterexample(),
        gaussian_draw_shape(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for c in run_quick_suite() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
