//! The margin cubic.
//!
//! Given projected statistics `t = uᵀv`, `su = ‖u‖²`, `sv = ‖v‖²` and the
//! exact margins `m1 = ‖x‖²`, `m2 = ‖y‖²` of the underlying vectors, the
//! margin-aware estimate of `a = ⟨x, y⟩` is a real root of
//!
//! ```text
//! a³ − (t/k)·a² + ((m1·sv + m2·su)/k − m1·m2)·a − m1·m2·t/k = 0.
//! ```
//!
//! The cubic is solved in the scaled variable `α = a / √(m1·m2)`, where the
//! feasible region is `[−1, 1]` by Cauchy–Schwarz.

use crate::scalar::Real;

/// Inputs to [`solve_margin_cubic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicInputs<T> {
    pub t: T,
    pub su: T,
    pub sv: T,
    pub m1: T,
    pub m2: T,
    pub k: usize,
}

/// Coefficients `(b2, b1, b0)` of the monic scaled cubic
/// `α³ + b2·α² + b1·α + b0`, plus the scale `√(m1·m2)`.
pub fn scaled_coefficients<T: Real>(c: &CubicInputs<T>) -> Option<([T; 3], T)> {
    let prod = c.m1 * c.m2;
    if !(prod > T::zero()) {
        return None;
    }
    let scale = prod.sqrt();
    let k = T::from_usize(c.k);
    let plug = c.t / (k * scale);
    let b1 = (c.m1 * c.sv + c.m2 * c.su) / (k * prod) - T::one();
    Some(([-plug, b1, -plug], scale))
}

const DISCRIMINANT_TOL: f64 = 1e-12;

/// Real roots of `α³ + b2·α² + b1·α + b0`, ascending.
pub fn real_roots<T: Real>(b: [T; 3]) -> Vec<T> {
    let [b2, b1, b0] = b;
    let three = T::from_usize(3);
    let two = T::from_usize(2);
    let shift = b2 / three;
    // depressed: z³ + p z + q, α = z − b2/3
    let p = b1 - b2 * b2 / three;
    let q = two * b2 * b2 * b2 / T::from_usize(27) - b2 * b1 / three + b0;

    let four_p3 = T::from_usize(4) * p * p * p;
    let q2_27 = T::from_usize(27) * q * q;
    let disc = -(four_p3 + q2_27);
    let tol = T::from_f64(DISCRIMINANT_TOL) * (four_p3.abs() + q2_27);

    let mut roots: Vec<T> = if p.is_zero() && q.is_zero() {
        vec![T::zero()]
    } else if disc.abs() <= tol {
        if p.is_zero() {
            vec![-q.cbrt()]
        } else {
            // double root −3q/(2p), simple root 3q/p
            vec![three * q / p, -three * q / (two * p)]
        }
    } else if disc > T::zero() {
        let m = two * (-p / three).sqrt();
        let arg = (three * q / (p * m)).max(-T::one()).min(T::one());
        let theta = arg.acos() / three;
        let step = two * T::from_f64(std::f64::consts::PI) / three;
        (0..3)
            .map(|n| m * (theta - step * T::from_usize(n)).cos())
            .collect()
    } else {
        let half_q = q / two;
        let s = (half_q * half_q + p * p * p / T::from_usize(27)).sqrt();
        // pick the cube-root branch that avoids cancellation
        let w = if half_q > T::zero() { -(half_q + s) } else { s - half_q };
        let c1 = w.cbrt();
        let z = if c1.is_zero() { T::zero() } else { c1 - p / (three * c1) };
        vec![z]
    };

    for r in roots.iter_mut() {
        *r = polish(b, *r - shift);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

fn eval<T: Real>(b: [T; 3], x: T) -> (T, T) {
    let [b2, b1, b0] = b;
    let f = ((x + b2) * x + b1) * x + b0;
    let three = T::from_usize(3);
    let two = T::from_usize(2);
    let df = (three * x + two * b2) * x + b1;
    (f, df)
}

fn polish<T: Real>(b: [T; 3], mut x: T) -> T {
    for _ in 0..3 {
        let (f, df) = eval(b, x);
        if df.is_zero() || !f.is_finite() {
            break;
        }
        let next = x - f / df;
        if eval(b, next).0.abs() < f.abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Selected root of the margin cubic.
///
/// Roots outside `[−√(m1 m2), √(m1 m2)]` are discarded; among the rest the
/// one nearest the plug-in `t/k` wins. If no root is feasible, the nearest
/// root is clamped into the interval. Returns 0 when either margin is 0.
pub fn solve_margin_cubic<T: Real>(c: &CubicInputs<T>) -> T {
    let Some((coef, scale)) = scaled_coefficients(c) else {
        return T::zero();
    };
    let plug = -coef[0];
    let roots = real_roots(coef);
    let one = T::one();
    let nearest = |cands: &mut dyn Iterator<Item = T>| {
        cands.min_by(|a, b| {
            (*a - plug)
                .abs()
                .partial_cmp(&(*b - plug).abs())
                .unwrap()
        })
    };
    let feasible = nearest(&mut roots.iter().copied().filter(|r| r.abs() <= one));
    let alpha = match feasible {
        Some(r) => r,
        None => nearest(&mut roots.iter().copied())
            .unwrap_or(plug)
            .max(-one)
            .min(one),
    };
    alpha * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(b: [f64; 3], x: f64) -> f64 {
        ((x + b[0]) * x + b[1]) * x + b[2]
    }

    #[test]
    fn three_distinct_roots() {
        // (x-1)(x-2)(x+3) = x³ - 7x + 6
        let r = real_roots([0.0f64, -7.0, 6.0]);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn one_real_root() {
        // (x-2)(x²+1) = x³ - 2x² + x - 2
        let r = real_roots([-2.0f64, 1.0, -2.0]);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn repeated_roots() {
        // (x-1)²(x+2) = x³ - 3x + 2
        let r = real_roots([0.0f64, -3.0, 2.0]);
        assert!(r.iter().any(|v| (v + 2.0).abs() < 1e-12));
        assert!(r.iter().any(|v| (v - 1.0).abs() < 1e-6));
        // (x-0.5)³
        let r = real_roots([-1.5f64, 0.75, -0.125]);
        assert!(r.iter().all(|v| (v - 0.5).abs() < 1e-5), "{r:?}");
    }

    #[test]
    fn roots_satisfy_polynomial() {
        for b in [[0.3, -1.1, 0.2], [-0.9, -0.5, 0.4], [2.0, 3.0, 1.0], [0.0, 0.0, -8.0]] {
            for r in real_roots(b) {
                assert!(poly(b, r).abs() < 1e-12, "{b:?} {r}");
            }
        }
    }

    #[test]
    fn exact_statistics_recover_inner_product() {
        // (a − a*)(a² + m1 m2) = 0 when t/k = a*, su/k = m1, sv/k = m2
        let (m1, m2, a_true, k) = (4.0, 9.0, 2.5, 10usize);
        let c = CubicInputs {
            t: a_true * k as f64,
            su: m1 * k as f64,
            sv: m2 * k as f64,
            m1,
            m2,
            k,
        };
        assert!((solve_margin_cubic(&c) - a_true).abs() < 1e-12);
    }

    #[test]
    fn zero_margin_gives_zero() {
        let c = CubicInputs { t: 3.0, su: 0.0, sv: 2.0, m1: 0.0, m2: 5.0, k: 4 };
        assert_eq!(solve_margin_cubic(&c), 0.0);
    }

    #[test]
    fn result_is_feasible() {
        let c = CubicInputs { t: 100.0f64, su: 1.0, sv: 1.0, m1: 1.0, m2: 1.0, k: 1 };
        let a = solve_margin_cubic(&c);
        assert!(a.abs() <= 1.0 + 1e-15);
    }

    #[test]
    fn works_in_f32() {
        let c = CubicInputs { t: 5.0f32, su: 10.0, sv: 10.0, m1: 1.0, m2: 1.0, k: 10 };
        let a = solve_margin_cubic(&c);
        assert!((a - 0.5).abs() < 1e-5);
    }
}
