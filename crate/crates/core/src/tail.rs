//! Shape of optimal weights: power-law fits of `p_k` against `k` and an
//! audit of the two-sided ratio bounds
//!
//! ```text
//! 2d·log(i/(j+1)) ≤ log(p_j/p_i) ≤ 2d·log((i+1)/j),   n ≥ i > j ≥ 1.
//! ```

use crate::error::{Error, Result};
use crate::measure::ProbVec;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub fit_range: (usize, usize),
}

impl PowerLawFit {
    pub fn predict(&self, k: usize) -> f64 {
        self.intercept + self.slope * (k as f64).ln()
    }
}

/// `[max(8, n/32), n/4]`: away from the smallest digits and from the
/// truncation edge at `k = n`.
pub fn default_fit_range(n: usize) -> (usize, usize) {
    (8.max(n / 32), n / 4)
}

/// Ordinary least squares of `log p_k` on `log k` for `k ∈ [k_lo, k_hi]`.
pub fn fit_tail_exponent(p: &ProbVec, k_lo: usize, k_hi: usize) -> Result<PowerLawFit> {
    if k_lo == 0 || k_hi > p.support_n() || k_lo > k_hi {
        return Err(Error::InvalidArgument(format!(
            "fit range [{k_lo}, {k_hi}] not inside 1..={}",
            p.support_n()
        )));
    }
    if k_hi - k_lo + 1 < 4 {
        return Err(Error::InvalidArgument(format!(
            "fit range [{k_lo}, {k_hi}] has fewer than 4 points"
        )));
    }
    let mut xs = Vec::with_capacity(k_hi - k_lo + 1);
    let mut ys = Vec::with_capacity(k_hi - k_lo + 1);
    for k in k_lo..=k_hi {
        let w = p.get(k);
        if w <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "p_{k} = 0 inside the fit range"
            )));
        }
        xs.push((k as f64).ln());
        ys.push(w.ln());
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
        fit_range: (k_lo, k_hi),
    })
}

/// Smallest `c` with `1/c ≤ p_k·k^{2d}/G ≤ c` over the range, `G` the
/// geometric mean of the scaled weights. Equals `sqrt(max/min)`.
pub fn comparability_constant(p: &ProbVec, d: f64, k_lo: usize, k_hi: usize) -> f64 {
    let (lo, hi) = (k_lo..=k_hi)
        .map(|k| p.get(k) * (k as f64).powf(2.0 * d))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
            (l.min(v), h.max(v))
        });
    (hi / lo).sqrt()
}

/// `max/min` of `p_k·k^{2d}` over the range.
pub fn scaled_weight_spread(p: &ProbVec, d: f64, k_lo: usize, k_hi: usize) -> f64 {
    comparability_constant(p, d, k_lo, k_hi).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioViolation {
    pub i: usize,
    pub j: usize,
    pub side: BoundSide,
    /// Amount by which the bound (with slack) is missed; positive.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioAudit {
    pub pairs_checked: usize,
    pub slack: f64,
    /// Smallest margin to either bound over all pairs, before slack.
    pub min_margin: f64,
    pub violations: Vec<RatioViolation>,
}

/// Checks both ratio bounds for every pair `n ≥ i > j ≥ 1` with additive
/// `slack`.
pub fn check_ratio_bounds(p: &ProbVec, d: f64, slack: f64) -> RatioAudit {
    check_ratio_bounds_on(p, d, slack, |_, _| true)
}

/// As [`check_ratio_bounds`], restricted to pairs accepted by `filter`.
pub fn check_ratio_bounds_on(
    p: &ProbVec,
    d: f64,
    slack: f64,
    filter: impl Fn(usize, usize) -> bool,
) -> RatioAudit {
    let n = p.support_n();
    let logs: Vec<f64> = p.weights().iter().map(|w| w.ln()).collect();
    let mut violations = Vec::new();
    let mut pairs_checked = 0;
    let mut min_margin = f64::INFINITY;
    for i in 2..=n {
        for j in 1..i {
            if !filter(i, j) {
                continue;
            }
            pairs_checked += 1;
            let ratio = logs[j - 1] - logs[i - 1];
            let lower = 2.0 * d * (i as f64 / (j as f64 + 1.0)).ln();
            let upper = 2.0 * d * ((i as f64 + 1.0) / j as f64).ln();
            let lo_margin = ratio - lower;
            let hi_margin = upper - ratio;
            min_margin = min_margin.min(lo_margin).min(hi_margin);
            if lo_margin + slack < 0.0 || lo_margin.is_nan() {
                violations.push(RatioViolation {
                    i,
                    j,
                    side: BoundSide::Lower,
                    margin: -(lo_margin + slack),
                });
            }
            if hi_margin + slack < 0.0 || hi_margin.is_nan() {
                violations.push(RatioViolation {
                    i,
                    j,
                    side: BoundSide::Upper,
                    margin: -(hi_margin + slack),
                });
            }
        }
    }
    RatioAudit {
        pairs_checked,
        slack,
        min_margin,
        violations,
    }
}

/// Tab-separated `(k, p_k, k^{2d}·p_k)` rows with a header line.
pub fn tail_tsv(p: &ProbVec, d: f64) -> String {
    let mut out = String::from("k\tp_k\tscaled\n");
    for (k, &w) in p.weights().iter().enumerate() {
        let k = k + 1;
        let _ = writeln!(out, "{k}\t{w:.17e}\t{:.17e}", w * (k as f64).powf(2.0 * d));
    }
    out
}
