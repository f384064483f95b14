//! Continued-fraction kernel.
//!
//! A [`DigitWord`] `(i₁,…,i_N)` names the rank-`N` cylinder of the Gauss map
//! `T(x) = 1/x mod 1`: the set of points whose first `N` continued-fraction
//! digits are `i₁,…,i_N`. The cylinder is a closed interval whose endpoints
//! are the finite continued fractions `[i₁,…,i_N]` and `[i₁,…,i_N + 1]`.
//!
//! Everything here is evaluated in `f64`, back to front.

use crate::error::{Error, Result};
use serde::Serialize;

/// `2·log((1+√5)/2)`: the Lyapunov exponent at the golden-mean fixed point.
pub const GOLDEN_LYAPUNOV: f64 = 0.962_423_650_119_206_9;

/// A non-empty word of continued-fraction digits, all `≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DigitWord(Vec<u32>);

impl DigitWord {
    pub fn new(digits: Vec<u32>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::InvalidWord("empty word".into()));
        }
        if let Some(pos) = digits.iter().position(|&d| d == 0) {
            return Err(Error::InvalidWord(format!("digit 0 at position {pos}")));
        }
        Ok(Self(digits))
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The word with `digit` appended.
    pub fn extended(&self, digit: u32) -> Result<Self> {
        let mut d = self.0.clone();
        d.push(digit);
        Self::new(d)
    }

    /// First `n` digits of `x ∈ (0,1)`, read off by iterating the Gauss map.
    ///
    /// Returns fewer digits if an iterate hits zero (rational input).
    pub fn from_point(x: f64, n: usize) -> Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::OutOfDomain(x));
        }
        let mut digits = Vec::with_capacity(n);
        let mut y = x;
        for _ in 0..n {
            if y <= 0.0 {
                break;
            }
            let inv = 1.0 / y;
            let a = inv.floor();
            digits.push(a as u32);
            y = inv - a;
        }
        Self::new(digits)
    }
}

/// Nested-reciprocal evaluation of `[d₁,…,d_N]`, optionally with `bump` added
/// to the last digit. Callers guarantee a non-empty slice of positive digits.
#[inline]
pub(crate) fn eval_digits(digits: &[u32], bump: u32) -> f64 {
    let (&last, rest) = digits.split_last().expect("non-empty digit slice");
    let mut t = f64::from(last + bump);
    for &d in rest.iter().rev() {
        t = f64::from(d) + 1.0 / t;
    }
    1.0 / t
}

/// `[i₁,…,i_N] = 1/(i₁ + 1/(i₂ + … + 1/i_N))`.
pub fn cf_value(word: &DigitWord) -> f64 {
    eval_digits(word.digits(), 0)
}

#[inline]
pub(crate) fn interval_of_digits(digits: &[u32]) -> (f64, f64) {
    let a = eval_digits(digits, 0);
    let b = eval_digits(digits, 1);
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Endpoints `(lo, hi)` of the cylinder named by `word`.
pub fn cylinder_interval(word: &DigitWord) -> (f64, f64) {
    interval_of_digits(word.digits())
}

/// Geometry of a cylinder together with a bracket of `log|T'| = 2·log(1/x)`
/// over it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderGeometry {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub logderiv_lo: f64,
    pub logderiv_hi: f64,
}

impl CylinderGeometry {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[inline]
pub(crate) fn geometry_of_digits(digits: &[u32]) -> CylinderGeometry {
    let value = eval_digits(digits, 0);
    let other = eval_digits(digits, 1);
    let (lo, hi) = if value <= other {
        (value, other)
    } else {
        (other, value)
    };
    // 2·log(1/x) is decreasing, so the bracket comes from the endpoints.
    CylinderGeometry {
        value,
        lo,
        hi,
        logderiv_lo: -2.0 * hi.ln(),
        logderiv_hi: -2.0 * lo.ln(),
    }
}

pub fn cylinder_geometry(word: &DigitWord) -> CylinderGeometry {
    geometry_of_digits(word.digits())
}

/// `log|T'(x)| = 2·log(1/x)` for `x ∈ (0,1)`.
pub fn log_deriv(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::OutOfDomain(x));
    }
    Ok(-2.0 * x.ln())
}

/// `min(log|T'(x)|, 2·log M)`.
pub fn capped_log_deriv(x: f64, cap: u32) -> Result<f64> {
    if cap < 2 {
        return Err(Error::InvalidArgument(format!(
            "cap M must be >= 2, got {cap}"
        )));
    }
    Ok(log_deriv(x)?.min(2.0 * f64::from(cap).ln()))
}
