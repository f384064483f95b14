mod common;

use common::{pv, random_interior, rng};
use dimmax_core::measure::{
    digit_integral, digit_integrals_by_cylinders, lyapunov_by_cylinders,
    lyapunov_by_cylinders_capped, lyapunov_by_operator, truncate, DigitWeights, ErrorKind,
    TailFamily,
};
use dimmax_core::{
    dimension, entropy, EvalMethod, OperatorDiscretization, ProbVec, GOLDEN_LYAPUNOV,
};
use proptest::prelude::*;
use std::f64::consts::PI;

const SILVER_LYAPUNOV: f64 = 1.762_747_174_039_085_9;

fn gauss_kuzmin(n: usize) -> ProbVec {
    let gk = TailFamily::gauss_kuzmin();
    ProbVec::normalized((1..=n).map(|k| gk.weight(k)).collect()).unwrap()
}

#[test]
fn entropy_examples() {
    assert!((entropy(&pv(&[0.5, 0.5])) - 0.693_147_180_559_945_3).abs() < 1e-15);
    assert_eq!(entropy(&pv(&[1.0])), 0.0);

    let p = gauss_kuzmin(50);
    let z: f64 = (1..=50)
        .map(|k| (1.0 + 1.0 / (k as f64 * (k as f64 + 2.0))).log2())
        .sum();
    let direct: f64 = (1..=50)
        .map(|k| (1.0 + 1.0 / (k as f64 * (k as f64 + 2.0))).log2() / z)
        .map(|q| -q * q.ln())
        .sum();
    assert!((entropy(&p) - direct).abs() < 1e-13);
}

#[test]
fn truncation_examples() {
    let p = pv(&[0.5, 0.25, 0.125, 0.125]);
    assert_eq!(truncate(&p, 2).unwrap().weights(), &[0.75, 0.25]);
    let q = pv(&[0.6, 0.4]);
    assert_eq!(truncate(&q, 2).unwrap(), q);
    assert!(truncate(&q, 1).is_err());

    let zeta = TailFamily::power_law(2.0).unwrap();
    let t = truncate(&zeta, 10).unwrap();
    let c = 6.0 / (PI * PI);
    let tail: f64 = (11..2_000_000).map(|k| c / (k as f64).powi(2)).sum::<f64>() + c / 2_000_000.0;
    assert!((t.get(1) - (c + tail)).abs() < 1e-12);
    for k in 2..=10 {
        assert!((t.get(k) - c / (k * k) as f64).abs() < 1e-15);
    }
    assert_eq!(t.support_n(), 10);
}

#[test]
fn cylinder_closed_forms() {
    let golden = lyapunov_by_cylinders(&pv(&[1.0]), 20).unwrap();
    assert_eq!(golden.kind, ErrorKind::Rigorous);
    assert!((golden.estimate - GOLDEN_LYAPUNOV).abs() <= golden.err);
    let silver = lyapunov_by_cylinders(&pv(&[0.0, 1.0]), 20).unwrap();
    assert!((silver.estimate - SILVER_LYAPUNOV).abs() <= silver.err);
    assert!((silver.estimate - 2.0 * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-12);
}

#[test]
fn two_digit_cylinder_depth_14() {
    let p = pv(&[0.5, 0.5]);
    let cyl = lyapunov_by_cylinders(&p, 14).unwrap();
    assert!(cyl.err < 1e-6, "err {}", cyl.err);
    let op = lyapunov_by_operator(&p, &OperatorDiscretization::default(), 60).unwrap();
    assert_eq!(op.kind, ErrorKind::Empirical);
    assert!((cyl.estimate - op.estimate).abs() <= cyl.err + op.err);
}

#[test]
fn operator_examples() {
    let disc = OperatorDiscretization::default();
    let g = lyapunov_by_operator(&pv(&[1.0]), &disc, 60).unwrap();
    assert!((g.estimate - GOLDEN_LYAPUNOV).abs() < 1e-12);

    let p = gauss_kuzmin(50);
    let a = lyapunov_by_operator(&p, &disc, 60).unwrap();
    let b = lyapunov_by_operator(&p, &disc, 65).unwrap();
    assert!((a.estimate - b.estimate).abs() < 1e-9);
    assert!(lyapunov_by_operator(&p, &disc, 0).is_err());
}

#[test]
fn digit_integral_examples() {
    let disc = OperatorDiscretization::default();
    let dirac = pv(&[1.0]);
    let lam = lyapunov_by_operator(&dirac, &disc, 60).unwrap().estimate;
    assert!((digit_integral(&dirac, 1, &disc, 60).unwrap() - lam).abs() < 1e-12);

    let half = pv(&[0.5, 0.5]);
    let i2 = digit_integral(&half, 2, &disc, 60).unwrap();
    assert!(2f64.ln() <= i2 && i2 <= 3f64.ln());

    let gap = pv(&[0.7, 0.0, 0.3]);
    assert_eq!(digit_integral(&gap, 2, &disc, 60).unwrap(), 0.0);
    assert!(digit_integral(&gap, 4, &disc, 60).is_err());
    assert!(digit_integral(&gap, 0, &disc, 60).is_err());
}

#[test]
fn dimension_examples() {
    let dirac = dimension(&pv(&[1.0]), &EvalMethod::Auto).unwrap();
    assert_eq!(dirac.dimension, 0.0);
    assert!((dirac.lyapunov - GOLDEN_LYAPUNOV).abs() < 1e-9);

    let p = pv(&[0.5, 0.5]);
    let r = dimension(&p, &EvalMethod::operator_default()).unwrap();
    assert!((r.dimension - 2f64.ln() / r.lyapunov).abs() < 1e-15);
    let c = dimension(&p, &EvalMethod::Cylinder { depth: 16 }).unwrap();
    assert!((c.dimension - r.dimension).abs() <= c.dimension_err + r.dimension_err);
    assert!(r.dimension < 1.0 - 5e-5);
}

#[test]
fn budget_overflow_is_reported() {
    let p = ProbVec::uniform(40).unwrap();
    assert!(lyapunov_by_cylinders(&p, 6).is_err());
    // Auto falls back to the operator.
    assert!(dimension(&p, &EvalMethod::Auto).is_ok());
}

#[test]
fn partition_identity_and_bracket() {
    let disc = OperatorDiscretization::default();
    let mut r = rng(11);
    for n in [2usize, 3, 5, 8, 12] {
        for _ in 0..5 {
            let p = random_interior(&mut r, n);
            let lam = lyapunov_by_operator(&p, &disc, 60).unwrap().estimate;
            let ints: Vec<f64> = (1..=n)
                .map(|i| digit_integral(&p, i, &disc, 60).unwrap())
                .collect();
            assert!((ints.iter().sum::<f64>() - lam).abs() < 1e-9);
            for (k, &v) in ints.iter().enumerate() {
                let i = (k + 1) as f64;
                let pi = p.get(k + 1);
                assert!(2.0 * pi * i.ln() <= v && v <= 2.0 * pi * (i + 1.0).ln());
            }
        }
    }
}

#[test]
fn cylinder_digit_integrals_match_operator() {
    let disc = OperatorDiscretization::default();
    let p = pv(&[0.55, 0.3, 0.15]);
    let cyl = digit_integrals_by_cylinders(&p, 13).unwrap();
    for (k, v) in cyl.iter().enumerate() {
        let op = digit_integral(&p, k + 1, &disc, 60).unwrap();
        assert!((v - op).abs() < 1e-5, "digit {}: {v} vs {op}", k + 1);
    }
}

#[test]
fn dual_evaluator_agreement() {
    let disc = OperatorDiscretization::default();
    let mut r = rng(12);
    for i in 0..24 {
        let n = 2 + i % 4;
        let p = random_interior(&mut r, n);
        let depth = match n {
            2 => 20,
            3 => 13,
            4 => 11,
            _ => 10,
        };
        let cyl = lyapunov_by_cylinders(&p, depth).unwrap();
        let op = lyapunov_by_operator(&p, &disc, 60).unwrap();
        assert!(
            (cyl.estimate - op.estimate).abs() <= cyl.err + op.err,
            "{p:?}: {} ± {} vs {} ± {}",
            cyl.estimate,
            cyl.err,
            op.estimate,
            op.err
        );
    }
}

#[test]
fn truncation_chain_is_cauchy() {
    let zeta = TailFamily::power_law(2.0).unwrap();
    let d = |n: usize| {
        dimension(
            &truncate(&zeta, n).unwrap(),
            &EvalMethod::operator_default(),
        )
        .unwrap()
        .dimension
    };
    let ds: Vec<f64> = [8usize, 16, 32, 64, 128].iter().map(|&n| d(n)).collect();
    let gaps: Vec<f64> = ds.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    // The moved tail mass is ~ 6/(π²n), so gaps halve with each doubling.
    assert!(gaps.windows(2).all(|g| g[1] < 0.55 * g[0]), "{gaps:?}");
}

#[test]
fn capped_sum_approaches_uncapped() {
    let p = pv(&[0.4, 0.3, 0.2, 0.1]);
    let full = lyapunov_by_cylinders(&p, 9).unwrap().estimate;
    let mut last = 0.0;
    for m in [2u32, 3, 4, 5] {
        let c = lyapunov_by_cylinders_capped(&p, 9, Some(m))
            .unwrap()
            .estimate;
        assert!(c >= last && c <= full + 1e-15);
        last = c;
    }
    assert_eq!(last, full);
}

#[test]
fn golden_floor() {
    let mut r = rng(13);
    for n in 1..=6 {
        let p = random_interior(&mut r, n);
        let rep = dimension(&p, &EvalMethod::Auto).unwrap();
        assert!(rep.lyapunov >= GOLDEN_LYAPUNOV - 1e-12);
        assert!((rep.dimension - rep.entropy / rep.lyapunov).abs() < 1e-15);
    }
}

fn simplex(n: usize) -> impl Strategy<Value = ProbVec> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|v| ProbVec::normalized(v).unwrap())
}

proptest! {
    #[test]
    fn entropy_is_concave(
        (p, q) in (2usize..10).prop_flat_map(|n| (simplex(n), simplex(n))),
        a in 0.0f64..=1.0,
    ) {
        let mix = ProbVec::normalized(
            p.weights().iter().zip(q.weights()).map(|(x, y)| a * x + (1.0 - a) * y).collect(),
        ).unwrap();
        prop_assert!(entropy(&mix) >= a * entropy(&p) + (1.0 - a) * entropy(&q) - 1e-14);
    }

    #[test]
    fn truncation_preserves_mass(p in (3usize..12).prop_flat_map(simplex), n in 2usize..12) {
        let t = truncate(&p, n).unwrap();
        prop_assert!((t.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(t.support_n() <= n);
        prop_assert!((t.get(1) - p.get(1) - p.tail_mass(n)).abs() < 1e-15);
    }
}
