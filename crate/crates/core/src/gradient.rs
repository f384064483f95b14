//! Derivatives of `h`, `λ` and `d` with respect to the digit weights.
//!
//! Weights are treated as homogeneous coordinates: `λ` depends on `p` only
//! through `p/Σp`, so `Σ p_i ∂λ/∂p_i = 0`, and `h` is differentiated as the
//! literal sum `−Σ p_k log p_k`, so `Σ p_i ∂h/∂p_i = h − 1`. Differences
//! `∂_i − ∂_j` are the simplex-tangent derivatives.
//!
//! Perturbing `p_i` changes the law of every digit of the coding, not only
//! the first one. With `ψ_0 = φ = 2·log(1/x)`, `ψ_n = Lⁿφ`, and the branch
//! `g_i(x) = 1/(i+x)`,
//!
//! ```text
//! ∂λ/∂p_i = Σ_{n≥0} ( ∫ ψ_n∘g_i dμ_p − λ )
//!         = ( I_i/p_i − λ ) + ∫ H∘g_i dμ_p,     H = Σ_{n≥1} (ψ_n − λ),
//! ```
//!
//! where `I_i = ∫_{[i]} log|T'| dμ_p`. The first bracket is the single-step
//! term; the correlation sum `H` is smooth and decays geometrically. Dropping
//! `H` gives a derivative that disagrees with finite differences by tens of
//! percent, see [`single_step_lyapunov_term`].

use crate::discretization::OperatorDiscretization;
use crate::error::{Error, Result};
use crate::measure::{entropy, ProbVec, DEFAULT_ITERATIONS};
use crate::operator::InvariantModel;
use serde::Serialize;

const SERIES_MAX_TERMS: usize = 2000;

#[derive(Debug, Clone)]
pub struct GradSettings {
    pub disc: OperatorDiscretization,
    /// Minimum transfer-operator iterations for the stationary quadrature.
    pub iterations: usize,
}

impl Default for GradSettings {
    fn default() -> Self {
        Self {
            disc: OperatorDiscretization::default(),
            iterations: DEFAULT_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradReport {
    pub entropy: f64,
    pub lyapunov: f64,
    pub dimension: f64,
    /// `∂h/∂p_i`.
    pub dh: Vec<f64>,
    /// `∂λ/∂p_i`.
    pub dlam: Vec<f64>,
    /// `∂d/∂p_i`.
    pub dd: Vec<f64>,
    /// `I_i = ∫_{[i]} log|T'| dμ_p`.
    pub digit_integrals: Vec<f64>,
    /// `C_i = −(log p_i + 1) − d·∂λ/∂p_i`; constant at a critical point.
    pub crit: Vec<f64>,
    /// `max_i C_i − min_i C_i`.
    pub crit_residual: f64,
}

fn require_interior(p: &ProbVec) -> Result<()> {
    if let Some(k) = p.weights().iter().position(|&w| w <= 0.0) {
        return Err(Error::Boundary(format!(
            "p_{} = 0 on the support 1..={}",
            k + 1,
            p.support_n()
        )));
    }
    Ok(())
}

/// `∂h/∂p_i = −(log p_i + 1)`.
pub fn grad_entropy(p: &ProbVec) -> Result<Vec<f64>> {
    require_interior(p)?;
    Ok(p.weights().iter().map(|&w| -(w.ln() + 1.0)).collect())
}

/// `H = Σ_{n≥1} (Lⁿφ − λ)` at the nodes.
fn correlation_sum(model: &InvariantModel<'_>) -> Result<Vec<f64>> {
    let lam = model.lyapunov();
    let mut psi = model.lyapunov_image().to_vec();
    let mut acc = vec![0.0; psi.len()];
    for _ in 0..SERIES_MAX_TERMS {
        for (a, v) in acc.iter_mut().zip(&psi) {
            *a += v - lam;
        }
        // Once ψ_n is constant to rounding it equals λ to rounding; later
        // terms only add round-off.
        if spread(&psi) <= 64.0 * f64::EPSILON * lam {
            return Ok(acc);
        }
        psi = model.operator().apply(&psi);
    }
    Err(Error::NonConvergence {
        what: "correlation series",
        iterations: SERIES_MAX_TERMS,
        spread: spread(&psi),
    })
}

/// `∂λ/∂p_i` for every digit in the support.
pub fn grad_lyapunov(model: &InvariantModel<'_>) -> Result<Vec<f64>> {
    let p = model.probabilities();
    require_interior(p)?;
    let disc = model.discretization();
    let lam = model.lyapunov();
    let h_sum = correlation_sum(model)?;
    Ok((1..=p.support_n())
        .map(|digit| {
            let k = digit as f64;
            let values: Vec<f64> = disc
                .nodes()
                .iter()
                .map(|&x| {
                    let y = 1.0 / (k + x);
                    2.0 * (k + x).ln() + disc.interpolate(&h_sum, y)
                })
                .collect();
            model.mean(&values) - lam
        })
        .collect())
}

/// The single-step term `I_i/p_i − λ` alone: the derivative of `λ` when only
/// the law of the first digit is perturbed. It omits the correlation sum and
/// is not the gradient of `λ`; exposed for comparison.
pub fn single_step_lyapunov_term(model: &InvariantModel<'_>) -> Result<Vec<f64>> {
    let p = model.probabilities();
    require_interior(p)?;
    let lam = model.lyapunov();
    Ok((1..=p.support_n())
        .map(|digit| model.digit_integral(digit as u32) / p.get(digit) - lam)
        .collect())
}

/// Full gradient report with the criticality residual.
pub fn grad_dimension(p: &ProbVec, settings: &GradSettings) -> Result<GradReport> {
    let model = InvariantModel::new(p, &settings.disc, settings.iterations)?;
    grad_dimension_with(&model)
}

pub fn grad_dimension_with(model: &InvariantModel<'_>) -> Result<GradReport> {
    let p = model.probabilities();
    let dh = grad_entropy(p)?;
    let h = entropy(p);
    if h == 0.0 {
        return Err(Error::Boundary(
            "dimension gradient is undefined for a Dirac vector (h = 0)".into(),
        ));
    }
    let lam = model.lyapunov();
    let d = h / lam;
    let dlam = grad_lyapunov(model)?;
    let dd: Vec<f64> = dh
        .iter()
        .zip(&dlam)
        .map(|(a, b)| d * (a / h - b / lam))
        .collect();
    let crit: Vec<f64> = dh.iter().zip(&dlam).map(|(a, b)| a - d * b).collect();
    let crit_residual = spread(&crit);
    if !crit_residual.is_finite() {
        return Err(Error::Numeric("non-finite criticality quantity".into()));
    }
    let digit_integrals = (1..=p.support_n())
        .map(|digit| model.digit_integral(digit as u32))
        .collect();
    Ok(GradReport {
        entropy: h,
        lyapunov: lam,
        dimension: d,
        dh,
        dlam,
        dd,
        digit_integrals,
        crit,
        crit_residual,
    })
}

pub(crate) fn spread(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
            (l.min(x), h.max(x))
        });
    hi - lo
}

/// `p + δ(e_i − e_j)` (digits 1-based).
pub fn tangent_shift(p: &ProbVec, i: usize, j: usize, delta: f64) -> Result<ProbVec> {
    let mut w = p.weights().to_vec();
    w[i - 1] += delta;
    w[j - 1] -= delta;
    ProbVec::new(w)
}

/// Central difference of `f` along `e_i − e_j` with one Richardson step:
/// `(4·D(δ/2) − D(δ))/3`.
pub fn tangent_fd(
    f: impl Fn(&ProbVec) -> Result<f64>,
    p: &ProbVec,
    i: usize,
    j: usize,
    delta: f64,
) -> Result<f64> {
    let central = |h: f64| -> Result<f64> {
        let plus = f(&tangent_shift(p, i, j, h)?)?;
        let minus = f(&tangent_shift(p, i, j, -h)?)?;
        Ok((plus - minus) / (2.0 * h))
    };
    let coarse = central(delta)?;
    let fine = central(0.5 * delta)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
