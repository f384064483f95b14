use dimmax_core::cf::{capped_log_deriv, cylinder_geometry, log_deriv};
use dimmax_core::{cf_value, cylinder_interval, DigitWord, GOLDEN_LYAPUNOV};
use proptest::prelude::*;

fn w(d: &[u32]) -> DigitWord {
    DigitWord::new(d.to_vec()).unwrap()
}

#[test]
fn values() {
    assert_eq!(cf_value(&w(&[2])), 0.5);
    assert_eq!(cf_value(&w(&[1, 1])), 0.5);
    assert!((cf_value(&w(&[1, 1, 1])) - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn intervals() {
    assert_eq!(cylinder_interval(&w(&[1])), (0.5, 1.0));
    let (lo, hi) = cylinder_interval(&w(&[2]));
    assert!((lo - 1.0 / 3.0).abs() < 1e-15 && hi == 0.5);
    let (lo, hi) = cylinder_interval(&w(&[1, 1]));
    assert!((lo - 0.5).abs() < 1e-15 && (hi - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn log_derivative_examples() {
    assert!((log_deriv(0.5).unwrap() - 1.386_294_361_119_890_6).abs() < 1e-15);
    assert!((log_deriv((-1f64).exp()).unwrap() - 2.0).abs() < 1e-15);
    let golden = cf_value(&w(&[1; 40]));
    assert!((log_deriv(golden).unwrap() - GOLDEN_LYAPUNOV).abs() < 1e-15);
    assert!(log_deriv(0.0).is_err());
    assert!(log_deriv(1.0).is_err());
    assert!(log_deriv(-0.3).is_err());
}

#[test]
fn capped_examples() {
    let ten = 2.0 * 10f64.ln();
    assert_eq!(capped_log_deriv(0.5, 10).unwrap(), log_deriv(0.5).unwrap());
    assert_eq!(capped_log_deriv(0.001, 10).unwrap(), ten);
    assert!((capped_log_deriv(0.1, 10).unwrap() - ten).abs() < 1e-15);
    assert!(capped_log_deriv(0.5, 1).is_err());
    assert!(capped_log_deriv(1.5, 10).is_err());
}

#[test]
fn empty_and_zero_words_rejected() {
    assert!(DigitWord::new(vec![]).is_err());
    assert!(DigitWord::new(vec![3, 0, 1]).is_err());
}

fn word_strategy(max_len: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1u32..=10, 1..=max_len)
}

proptest! {
    #[test]
    fn refinement_is_monotone(digits in word_strategy(11), k in 1u32..=50) {
        let parent = w(&digits);
        let child = parent.extended(k).unwrap();
        let (plo, phi) = cylinder_interval(&parent);
        let (clo, chi) = cylinder_interval(&child);
        prop_assert!(plo <= clo && chi <= phi);
        prop_assert!(chi - clo <= phi - plo);
        // Widths below ~1e-16 are not resolved in double precision.
        if phi - plo > 1e-12 {
            prop_assert!(chi - clo < phi - plo);
        }
    }

    #[test]
    fn value_inside_its_cylinder(digits in word_strategy(12)) {
        let word = w(&digits);
        let g = cylinder_geometry(&word);
        prop_assert!(0.0 < g.lo && g.lo <= g.value && g.value <= g.hi && g.hi <= 1.0);
        if g.value < 1.0 {
            let ld = log_deriv(g.value).unwrap();
            prop_assert!(g.logderiv_lo <= ld && ld <= g.logderiv_hi);
        }
    }

    #[test]
    fn orientation_follows_parity(digits in word_strategy(8), k in 1u32..=20) {
        let base = w(&digits);
        let a = cf_value(&base.extended(k).unwrap());
        let b = cf_value(&base.extended(k + 1).unwrap());
        // Appending at an odd position (even new length) increases with the
        // digit; at an even position it decreases.
        if (digits.len() + 1) % 2 == 0 {
            prop_assert!(a < b);
        } else {
            prop_assert!(a > b);
        }
    }

    #[test]
    fn digits_round_trip(x in 1e-6f64..1.0, n in 1usize..=8) {
        let word = DigitWord::from_point(x, n).unwrap();
        prop_assert_eq!(word.len(), n);
        let (lo, hi) = cylinder_interval(&word);
        let v = cf_value(&word);
        let tol = 1e-9 * (hi - lo).max(1e-300);
        prop_assert!(lo - tol <= x && x <= hi + tol);
        prop_assert!(lo <= v && v <= hi);
    }
}
