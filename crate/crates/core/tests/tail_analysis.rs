mod common;

use common::pv;
use dimmax_core::optimizer::{maximize_on_simplex, OptSettings};
use dimmax_core::tail::{
    check_ratio_bounds, comparability_constant, default_fit_range, fit_tail_exponent,
    scaled_weight_spread, tail_tsv,
};
use dimmax_core::ProbVec;
use std::f64::consts::PI;

#[test]
fn exact_power_laws() {
    let p = ProbVec::power_shaped(80, 1.5).unwrap();
    let f = fit_tail_exponent(&p, 10, 64).unwrap();
    assert!((f.slope + 1.5).abs() < 1e-12);
    let z = ProbVec::normalized(
        (1..=200)
            .map(|k| 6.0 / (PI * PI * (k * k) as f64))
            .collect(),
    )
    .unwrap();
    assert!((fit_tail_exponent(&z, 5, 150).unwrap().slope + 2.0).abs() < 1e-12);
    assert!((comparability_constant(&z, 1.0, 5, 150) - 1.0).abs() < 1e-12);
}

#[test]
fn optimum_at_256() {
    let out = maximize_on_simplex(256, None, &OptSettings::default()).unwrap();
    assert!(out.converged);
    let d = out.report.dimension;

    let base = fit_tail_exponent(&out.p, 10, 64).unwrap();
    assert!(base.r_squared > 0.999);
    // Moving either cutoff within its documented range barely moves the fit.
    for (lo, hi) in [(8, 64), (12, 64), (16, 64), (10, 48), (10, 80)] {
        let f = fit_tail_exponent(&out.p, lo, hi).unwrap();
        assert!(
            (f.slope - base.slope).abs() <= 0.02,
            "[{lo},{hi}] {}",
            f.slope
        );
    }
    assert!(scaled_weight_spread(&out.p, d, 10, 64) <= 3.0);

    // Local slopes steepen towards -2d as k grows.
    let local = |k: usize| {
        (out.p.get(k + 1) / out.p.get(k - 1)).ln() / ((k + 1) as f64 / (k - 1) as f64).ln()
    };
    let s: Vec<f64> = [10usize, 20, 40, 80, 160]
        .iter()
        .map(|&k| local(k))
        .collect();
    assert!(s.windows(2).all(|w| w[1] < w[0]), "{s:?}");
    assert!(s.iter().all(|&x| x > -2.0 * d));
    assert!((s[4] + 2.0 * d).abs() < 0.03);

    let (lo, hi) = default_fit_range(256);
    assert!(fit_tail_exponent(&out.p, lo, hi).is_ok());
}

#[test]
fn ratio_bounds_hold_at_optima() {
    for n in [2usize, 5, 16, 64] {
        let out = maximize_on_simplex(n, None, &OptSettings::default()).unwrap();
        let audit = check_ratio_bounds(&out.p, out.report.dimension, 10.0 * out.grad.crit_residual);
        assert!(audit.violations.is_empty(), "n={n}: {:?}", audit.violations);
        assert_eq!(audit.pairs_checked, n * (n - 1) / 2);
    }
}

#[test]
fn ratio_bounds_catch_a_wrong_vector() {
    // Reversed order violates the lower bound for every pair.
    let p = pv(&[0.1, 0.2, 0.3, 0.4]);
    let audit = check_ratio_bounds(&p, 0.6, 0.0);
    assert_eq!(audit.violations.len(), 6);
}

#[test]
fn tsv_rows() {
    let out = ProbVec::power_shaped(5, 2.0).unwrap();
    let t = tail_tsv(&out, 1.0);
    let rows: Vec<Vec<f64>> = t
        .lines()
        .skip(1)
        .map(|l| l.split('\t').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    let first = rows[0][2];
    assert!(rows.iter().all(|r| (r[2] - first).abs() < 1e-15));
}
