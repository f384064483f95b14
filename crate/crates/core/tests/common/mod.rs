#![allow(dead_code)]

use dimmax_core::measure::{lyapunov_by_operator, ProbVec};
use dimmax_core::{entropy, OperatorDiscretization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn pv(w: &[f64]) -> ProbVec {
    ProbVec::new(w.to_vec()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Interior vector with every weight at least `0.05/(n + 0.05n)`-ish: raw
/// weights are `Exp(1) + 0.05`.
pub fn random_interior(rng: &mut impl Rng, n: usize) -> ProbVec {
    let raw = (0..n)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln() + 0.05)
        .collect();
    ProbVec::normalized(raw).unwrap()
}

/// `d(p₁, 1−p₁)` through the operator evaluator only.
pub fn d_two(p1: f64, disc: &OperatorDiscretization) -> f64 {
    let p = pv(&[p1, 1.0 - p1]);
    entropy(&p) / lyapunov_by_operator(&p, disc, 60).unwrap().estimate
}

/// Dense grid followed by golden-section search for the maximum of
/// `d(p₁, 1−p₁)`. Returns `(p₁, d)`.
pub fn two_digit_oracle(disc: &OperatorDiscretization) -> (f64, f64) {
    let grid = 200;
    let best = (1..grid)
        .map(|i| i as f64 / grid as f64)
        .map(|x| (x, d_two(x, disc)))
        .fold(
            (0.0, f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 { b } else { a },
        );
    let h = 1.0 / grid as f64;
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let (mut fc, mut fe) = (d_two(c, disc), d_two(e, disc));
    while b - a > 1e-9 {
        if fc > fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = d_two(c, disc);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = d_two(e, disc);
        }
    }
    let x = 0.5 * (a + b);
    (x, d_two(x, disc))
}
