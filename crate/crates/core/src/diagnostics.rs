//! Numerical checks of the transfer-operator facts behind ergodicity and of
//! the pressure derivatives.
//!
//! Test functions enter through their one-step image `L w`, computed branch by
//! branch without interpolating `w`. For the digit indicator `χ_[i]` that image
//! is the constant `p_i`, so the indicator's jump never touches the nodes.

use crate::discretization::OperatorDiscretization;
use crate::error::{Error, Result};
use crate::gradient::{grad_lyapunov, tangent_shift};
use crate::measure::{ProbVec, DEFAULT_ITERATIONS};
use crate::operator::{analytic_image, dot, InvariantModel, TransferOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Contraction factor claimed for `L²`.
pub const CONTRACTION_BOUND: f64 = 0.25;
/// Floor added to the per-function slack of [`contraction_check`].
pub const CONTRACTION_SLACK: f64 = 1e-9;
/// Default half-spacing of the pressure grid.
pub const PRESSURE_STEP: f64 = 1e-3;
/// Relative bracket width at which power iteration stops.
pub const EIGEN_TOL: f64 = 1e-14;
const EXACT_GRID: usize = 1024;
const DIRECT_WORD_BUDGET: usize = 200_000;
const DIRECT_MAX_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `Σ c_j x^j`.
    Polynomial { coeffs: Vec<f64> },
    /// `a_0 + Σ_m a_m cos(2π m x) + b_m sin(2π m x)`, `m ≥ 1`.
    Trig {
        constant: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    /// Indicator of the cylinder `[i] = (1/(i+1), 1/i]`.
    DigitIndicator { digit: u32 },
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        TestFunction::Polynomial { coeffs: vec![c] }
    }

    pub fn identity() -> Self {
        TestFunction::Polynomial {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn sine(freq: usize) -> Self {
        let mut sin = vec![0.0; freq];
        sin[freq - 1] = 1.0;
        TestFunction::Trig {
            constant: 0.0,
            cos: vec![0.0; freq],
            sin,
        }
    }

    /// Random trigonometric polynomial of degree `1..=max_degree` with
    /// coefficients uniform in `[-1, 1]`.
    pub fn random_trig(rng: &mut impl Rng, max_degree: usize) -> Self {
        let deg = rng.gen_range(1..=max_degree.max(1));
        let mut coef = |_| rng.gen_range(-1.0..=1.0);
        let constant = coef(0);
        let cos = (0..deg).map(&mut coef).collect();
        let sin = (0..deg).map(&mut coef).collect();
        TestFunction::Trig { constant, cos, sin }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, TestFunction::DigitIndicator { .. })
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            TestFunction::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            TestFunction::Trig { constant, cos, sin } => {
                let mut s = *constant;
                for (m, (a, b)) in cos.iter().zip(sin).enumerate() {
                    let arg = TAU * (m + 1) as f64 * x;
                    s += a * arg.cos() + b * arg.sin();
                }
                s
            }
            TestFunction::DigitIndicator { digit } => {
                if x > 0.0 && x <= 1.0 && (1.0 / x).floor() as u64 == u64::from(*digit) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `w'(x)`; `None` for the indicator.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        match self {
            TestFunction::Polynomial { coeffs } => Some(
                coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (j, c)| acc * x + j as f64 * c),
            ),
            TestFunction::Trig { cos, sin, .. } => {
                let mut s = 0.0;
                for (m, (a, b)) in cos.iter().zip(sin).enumerate() {
                    let w = TAU * (m + 1) as f64;
                    s += w * (b * (w * x).cos() - a * (w * x).sin());
                }
                Some(s)
            }
            TestFunction::DigitIndicator { .. } => None,
        }
    }

    /// `L w` at the nodes, computed from the branches.
    pub fn first_image(&self, p: &ProbVec, disc: &OperatorDiscretization) -> Vec<f64> {
        match self {
            TestFunction::DigitIndicator { digit } => vec![p.get(*digit as usize); disc.len()],
            _ => analytic_image(p, disc, |y| self.value(y)),
        }
    }

    /// `w(g_word(y))` where `g_word` is the inverse branch of the word.
    fn value_through(&self, word: &[u32], y: f64) -> f64 {
        match self {
            TestFunction::DigitIndicator { digit } => f64::from(u8::from(word[0] == *digit)),
            _ => self.value(word.iter().rev().fold(y, |x, &k| 1.0 / (f64::from(k) + x))),
        }
    }
}

/// `count` random trigonometric polynomials from a seeded stream.
pub fn trig_battery(seed: u64, count: usize, max_degree: usize) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| TestFunction::random_trig(&mut rng, max_degree))
        .collect()
}

fn grid_sup(f: impl Fn(f64) -> f64) -> f64 {
    (0..=EXACT_GRID)
        .map(|i| f(i as f64 / EXACT_GRID as f64).abs())
        .fold(0.0, f64::max)
}

/// `(Lw)(x_a) = Σ_k p_k w(1/(k + x_a))` with `w` given by its node values.
pub fn apply_operator(p: &ProbVec, w: &[f64], disc: &OperatorDiscretization) -> Result<Vec<f64>> {
    if w.len() != disc.len() {
        return Err(Error::InvalidArgument(format!(
            "{} values for {} nodes",
            w.len(),
            disc.len()
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite node value".into()));
    }
    Ok(TransferOperator::new(p, disc).apply(w))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionEntry {
    pub sup_w: f64,
    pub sup_dw: f64,
    /// `‖(L²w)'‖_∞` from the exact double branch sum on a dense grid.
    pub sup_d_l2w: f64,
    /// The same quantity by spectral differentiation of the node values.
    pub spectral_d_l2w: f64,
    pub slack: f64,
    /// `‖(L²w)'‖_∞ / ‖w‖_∞`.
    pub ratio: f64,
    /// `‖(L²w)'‖_∞ / ‖w'‖_∞`.
    pub ratio_deriv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub bound: f64,
    pub entries: Vec<ContractionEntry>,
    pub max_ratio: f64,
    pub max_ratio_deriv: f64,
    /// Battery indices with `ratio > bound + slack`.
    pub flagged: Vec<usize>,
    /// Battery indices with `ratio_deriv > bound + slack`.
    pub flagged_deriv: Vec<usize>,
}

impl ContractionReport {
    pub fn passes(&self) -> bool {
        self.flagged.is_empty()
    }
}

fn l2_derivative_exact(p: &ProbVec, w: &TestFunction, x: f64) -> f64 {
    let mut s = 0.0;
    for (k, pk) in p.active() {
        let kx = f64::from(k) + x;
        let y = 1.0 / kx;
        for (l, pl) in p.active() {
            let ly = f64::from(l) + y;
            let z = 1.0 / ly;
            let dw = w.derivative(z).unwrap_or(0.0);
            s += pk * pl * dw / (ly * ly * kx * kx);
        }
    }
    s
}

/// Compares `‖(L²w)'‖_∞` with `‖w‖_∞/4` (and with `‖w'‖_∞/4`) over a battery
/// of smooth functions.
pub fn contraction_check(
    p: &ProbVec,
    disc: &OperatorDiscretization,
    battery: &[TestFunction],
) -> Result<ContractionReport> {
    if battery.is_empty() {
        return Err(Error::InvalidArgument("empty test-function battery".into()));
    }
    if let Some(i) = battery.iter().position(|w| !w.is_smooth()) {
        return Err(Error::InvalidArgument(format!(
            "battery entry {i} is not smooth"
        )));
    }
    let op = TransferOperator::new(p, disc);
    let entries: Vec<ContractionEntry> = battery
        .par_iter()
        .map(|w| {
            let sup_w = grid_sup(|x| w.value(x));
            let sup_dw = grid_sup(|x| w.derivative(x).unwrap_or(0.0));
            let sup_d_l2w = grid_sup(|x| l2_derivative_exact(p, w, x));
            let l2w = op.apply(&w.first_image(p, disc));
            let (spectral, spectral_err) = disc.derivative_sup(&l2w);
            let gap = (spectral - sup_d_l2w).abs() + spectral_err;
            let ratio_of = |den: f64| if den > 0.0 { sup_d_l2w / den } else { 0.0 };
            let slack_of = |den: f64| if den > 0.0 { gap / den } else { 0.0 };
            ContractionEntry {
                sup_w,
                sup_dw,
                sup_d_l2w,
                spectral_d_l2w: spectral,
                slack: CONTRACTION_SLACK + slack_of(sup_w).max(slack_of(sup_dw)),
                ratio: ratio_of(sup_w),
                ratio_deriv: ratio_of(sup_dw),
            }
        })
        .collect();
    let flag = |f: fn(&ContractionEntry) -> f64| -> Vec<usize> {
        entries
            .iter()
            .enumerate()
            .filter(|(_, e)| f(e) > CONTRACTION_BOUND + e.slack)
            .map(|(i, _)| i)
            .collect()
    };
    let flagged = flag(|e| e.ratio);
    let flagged_deriv = flag(|e| e.ratio_deriv);
    Ok(ContractionReport {
        bound: CONTRACTION_BOUND,
        max_ratio: entries.iter().map(|e| e.ratio).fold(0.0, f64::max),
        max_ratio_deriv: entries.iter().map(|e| e.ratio_deriv).fold(0.0, f64::max),
        entries,
        flagged,
        flagged_deriv,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationDecay {
    pub mean_v: f64,
    pub mean_w: f64,
    /// `‖v − ∫v‖_∞`.
    pub sup_v: f64,
    /// `c_m = ‖v − ∫v‖_∞ · ‖Lᵐ(w − ∫w)‖_∞` for `m = 1..=m_max`.
    pub certificates: Vec<f64>,
    /// `∫ (v−∫v)·Lᵐ(w−∫w) dμ_p` from the node quadrature, `m = 1..=m_max`.
    pub operator_correlations: Vec<f64>,
    /// `∫ (v−∫v)∘Tᵐ · (w−∫w) dμ_p` summed over all words of length `m`, for
    /// the small `m` the word budget allows.
    pub direct_correlations: Vec<f64>,
}

impl CorrelationDecay {
    /// First `m` with `c_m < threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.certificates
            .iter()
            .position(|&c| c < threshold)
            .map(|i| i + 1)
    }

    /// Largest increase `c_{m+1} − c_m` over `m ≥ from`.
    pub fn max_increase_from(&self, from: usize) -> f64 {
        self.certificates
            .windows(2)
            .skip(from.saturating_sub(1))
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn correlation_decay(
    p: &ProbVec,
    v: &TestFunction,
    w: &TestFunction,
    m_max: usize,
    disc: &OperatorDiscretization,
) -> Result<CorrelationDecay> {
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be >= 1".into()));
    }
    if !v.is_smooth() {
        return Err(Error::InvalidArgument(
            "the observable v must be smooth".into(),
        ));
    }
    let model = InvariantModel::new(p, disc, DEFAULT_ITERATIONS)?;
    let mean_v = model.mean(&v.first_image(p, disc));
    let w_image = w.first_image(p, disc);
    let mean_w = model.mean(&w_image);
    let v_nodes: Vec<f64> = disc.sample(|x| v.value(x) - mean_v);
    let mut lw: Vec<f64> = w_image.iter().map(|x| x - mean_w).collect();
    let scale = w_image.iter().fold(mean_w.abs(), |m, x| m.max(x.abs()));
    let residual_mean = model.mean(&lw);
    if residual_mean.abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::Numeric(format!(
            "centering left a mean of {residual_mean:.3e}"
        )));
    }
    let sup_v = grid_sup(|x| v.value(x) - mean_v);

    let mut certificates = Vec::with_capacity(m_max);
    let mut operator_correlations = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        if m > 1 {
            lw = model.operator().apply(&lw);
        }
        certificates.push(sup_v * disc.sup_norm(&lw));
        let vl: Vec<f64> = v_nodes.iter().zip(&lw).map(|(a, b)| a * b).collect();
        operator_correlations.push(model.mean(&vl));
    }

    let digits: Vec<(u32, f64)> = p.active().collect();
    let mut direct_correlations = Vec::new();
    let mut words = 1usize;
    for m in 1..=m_max.min(DIRECT_MAX_DEPTH) {
        words = words.saturating_mul(digits.len());
        if words > DIRECT_WORD_BUDGET {
            break;
        }
        direct_correlations.push(direct_correlation(&digits, &model, &v_nodes, w, mean_w, m));
    }

    Ok(CorrelationDecay {
        mean_v,
        mean_w,
        sup_v,
        certificates,
        operator_correlations,
        direct_correlations,
    })
}

/// `Σ_{|a|=m} p_a ∫ ṽ(y) (w(g_a y) − ∫w) dμ_p(y)`: independence of the
/// digits splits `x = g_a(y)` into a word and an independent tail point.
fn direct_correlation(
    digits: &[(u32, f64)],
    model: &InvariantModel<'_>,
    v_nodes: &[f64],
    w: &TestFunction,
    mean_w: f64,
    m: usize,
) -> f64 {
    let nodes = model.discretization().nodes();
    let mut word = vec![0u32; m];
    let mut idx = vec![0usize; m];
    let mut total = 0.0;
    let mut buf = vec![0.0; nodes.len()];
    loop {
        let mut weight = 1.0;
        for (slot, &i) in word.iter_mut().zip(&idx) {
            *slot = digits[i].0;
            weight *= digits[i].1;
        }
        for ((b, &y), &vy) in buf.iter_mut().zip(nodes).zip(v_nodes) {
            *b = vy * (w.value_through(&word, y) - mean_w);
        }
        total += weight * dot(model.weights(), &buf);
        let mut pos = 0;
        loop {
            if pos == m {
                return total;
            }
            idx[pos] += 1;
            if idx[pos] < digits.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureProbe {
    pub t_grid: Vec<f64>,
    /// `P(t) = log ρ(L_t)` at each grid point.
    pub logs: Vec<f64>,
    /// Five-point central difference at `0`.
    pub d1: f64,
    pub d2: f64,
    /// Round-off bound on `d1` from the eigenvalue tolerance.
    pub d1_err: f64,
    /// Round-off bound on `d2`; convexity is checked as `d2 ≥ −d2_err`.
    pub d2_err: f64,
}

impl PressureProbe {
    pub fn at_zero(&self) -> f64 {
        self.logs[2]
    }

    pub fn is_convex(&self) -> bool {
        self.d2 >= -self.d2_err
    }
}

/// Pressure of `log p_k + t·log|T'|` on the grid `{−2h, −h, 0, h, 2h}`.
pub fn pressure_probe(
    p: &ProbVec,
    disc: &OperatorDiscretization,
    step: f64,
) -> Result<PressureProbe> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidArgument(format!(
            "pressure step {step} outside (0, 0.1]"
        )));
    }
    let t_grid: Vec<f64> = (-2..=2).map(|i| f64::from(i) * step).collect();
    let logs = t_grid
        .par_iter()
        .map(|&t| {
            TransferOperator::tilted(p, disc, t)
                .leading_eigenvalue(EIGEN_TOL, 20_000)
                .map(f64::ln)
        })
        .collect::<Result<Vec<f64>>>()?;
    let [m2, m1, z, p1, p2] = [logs[0], logs[1], logs[2], logs[3], logs[4]];
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * step);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * step * step);
    // Each log is off by at most half the bracket plus a little round-off.
    let e = EIGEN_TOL;
    let d1_err = 18.0 * e / (12.0 * step);
    let d2_err = 64.0 * e / (12.0 * step * step);
    Ok(PressureProbe {
        t_grid,
        logs,
        d1,
        d2,
        d1_err,
        d2_err,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedPartial {
    pub i: usize,
    pub j: usize,
    /// Central difference of the pressure slope along `e_i − e_j`.
    pub finite_difference: f64,
    /// `∂λ/∂p_i − ∂λ/∂p_j` from the gradient module.
    pub gradient: f64,
}

impl MixedPartial {
    pub fn error(&self) -> f64 {
        (self.finite_difference - self.gradient).abs()
    }
}

pub fn mixed_partial(
    p: &ProbVec,
    disc: &OperatorDiscretization,
    i: usize,
    j: usize,
    delta: f64,
) -> Result<MixedPartial> {
    let n = p.support_n();
    if i == j || i == 0 || j == 0 || i > n || j > n {
        return Err(Error::InvalidArgument(format!(
            "digit pair ({i}, {j}) invalid for support 1..={n}"
        )));
    }
    let plus = pressure_probe(&tangent_shift(p, i, j, delta)?, disc, PRESSURE_STEP)?;
    let minus = pressure_probe(&tangent_shift(p, i, j, -delta)?, disc, PRESSURE_STEP)?;
    let model = InvariantModel::new(p, disc, DEFAULT_ITERATIONS)?;
    let g = grad_lyapunov(&model)?;
    Ok(MixedPartial {
        i,
        j,
        finite_difference: (plus.d1 - minus.d1) / (2.0 * delta),
        gradient: g[i - 1] - g[j - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_function_values() {
        let w = TestFunction::Polynomial {
            coeffs: vec![1.0, -2.0, 3.0],
        };
        assert!((w.value(0.5) - 0.75).abs() < 1e-15);
        assert!((w.derivative(0.5).unwrap() - 1.0).abs() < 1e-15);
        let s = TestFunction::sine(2);
        assert!((s.value(0.125) - 1.0).abs() < 1e-15);
        assert!((s.derivative(0.0).unwrap() - 2.0 * TAU).abs() < 1e-12);
        let chi = TestFunction::DigitIndicator { digit: 2 };
        assert_eq!(chi.value(0.4), 1.0);
        assert_eq!(chi.value(0.5), 1.0);
        assert_eq!(chi.value(0.3), 0.0);
        assert!(chi.derivative(0.4).is_none());
    }

    #[test]
    fn battery_is_reproducible() {
        assert_eq!(trig_battery(7, 5, 4), trig_battery(7, 5, 4));
        assert_ne!(trig_battery(7, 5, 4), trig_battery(8, 5, 4));
    }

    #[test]
    fn indicator_image_is_constant() {
        let disc = OperatorDiscretization::default();
        let p = ProbVec::new(vec![0.5, 0.3, 0.2]).unwrap();
        let chi = TestFunction::DigitIndicator { digit: 2 };
        assert!(chi.first_image(&p, &disc).iter().all(|&v| v == 0.3));
    }

    #[test]
    fn pressure_at_zero_and_slope() {
        let disc = OperatorDiscretization::default();
        let p = ProbVec::new(vec![0.5, 0.5]).unwrap();
        let probe = pressure_probe(&p, &disc, PRESSURE_STEP).unwrap();
        assert!(probe.at_zero().abs() < 1e-12);
        let model = InvariantModel::new(&p, &disc, 60).unwrap();
        assert!((probe.d1 - model.lyapunov()).abs() < 1e-6);
        assert!(probe.d2 >= 0.0);
    }

    #[test]
    fn dirac_pressure_is_linear() {
        let disc = OperatorDiscretization::default();
        let p = ProbVec::new(vec![1.0]).unwrap();
        let probe = pressure_probe(&p, &disc, PRESSURE_STEP).unwrap();
        for (t, lp) in probe.t_grid.iter().zip(&probe.logs) {
            assert!((lp - t * crate::cf::GOLDEN_LYAPUNOV).abs() < 1e-13);
        }
        assert!(probe.d2.abs() <= probe.d2_err);
        assert!(probe.is_convex());
    }
}
