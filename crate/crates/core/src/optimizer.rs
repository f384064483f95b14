//! Maximization of `d(μ_p)` over the simplex `P_n` and sweeps over `n`.
//!
//! Both update rules keep every iterate strictly positive:
//!
//! * exponentiated gradient: `p_i ← p_i·exp(η·∂d/∂p_i)/Z`;
//! * damped fixed point: `p_i ← (1−θ)p_i + θ·q_i`, `q_i ∝ exp(−d·∂λ/∂p_i)`,
//!   which is the stationarity condition `−(log p_i + 1) − d·∂λ/∂p_i = const`
//!   solved for `p_i`.
//!
//! A step is accepted only if `d` does not decrease by more than the
//! evaluator tolerance [`ASCENT_SLACK`]; otherwise `η` (or `θ`) is halved.
//! Convergence is declared on the criticality residual.

use crate::error::{Error, Result};
use crate::gradient::{grad_dimension_with, GradReport, GradSettings};
use crate::measure::{dimension, entropy, EvalMethod, EvalReport, ProbVec};
use crate::operator::InvariantModel;
use serde::Serialize;

/// Exponent of the default starting point `p_i ∝ i^{-1.9}`.
pub const DEFAULT_INIT_EXPONENT: f64 = 1.9;
const MAX_HALVINGS: usize = 60;
/// Relative evaluator error tolerated by the ascent test.
pub const ASCENT_SLACK: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AscentMethod {
    ExpGradient,
    FixedPoint,
}

#[derive(Debug, Clone)]
pub struct OptSettings {
    pub method: AscentMethod,
    /// Target criticality residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Fixed-point damping `θ`.
    pub damping: f64,
    pub grad: GradSettings,
}

impl Default for OptSettings {
    fn default() -> Self {
        Self {
            method: AscentMethod::ExpGradient,
            tol: 1e-8,
            max_iter: 500,
            damping: 0.5,
            grad: GradSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptState {
    pub p: ProbVec,
    pub iter: usize,
    pub residual_history: Vec<f64>,
    pub dimension_history: Vec<f64>,
    /// `η` for exponentiated gradient, `θ` for the fixed point.
    pub step: f64,
    pub method: AscentMethod,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptOutcome {
    pub n: usize,
    pub p: ProbVec,
    pub report: EvalReport,
    pub grad: GradReport,
    pub converged: bool,
    pub state: OptState,
}

fn default_init(n: usize) -> Result<ProbVec> {
    ProbVec::power_shaped(n, DEFAULT_INIT_EXPONENT)
}

fn candidate(method: AscentMethod, p: &ProbVec, grad: &GradReport, step: f64) -> Result<ProbVec> {
    let w = p.weights();
    let raw: Vec<f64> = match method {
        AscentMethod::ExpGradient => {
            let shift = grad.dd.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            w.iter()
                .zip(&grad.dd)
                .map(|(pi, g)| pi * (step * (g - shift)).exp())
                .collect()
        }
        AscentMethod::FixedPoint => {
            let expo: Vec<f64> = grad.dlam.iter().map(|g| -grad.dimension * g).collect();
            let top = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let q: Vec<f64> = expo.iter().map(|e| (e - top).exp()).collect();
            let z: f64 = q.iter().sum();
            w.iter()
                .zip(&q)
                .map(|(pi, qi)| (1.0 - step) * pi + step * qi / z)
                .collect()
        }
    };
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite weights in update".into()));
    }
    let out = ProbVec::normalized(raw)?;
    if !out.is_interior() {
        return Err(Error::Numeric(
            "update left the interior of the simplex".into(),
        ));
    }
    Ok(out)
}

/// Maximizes `d` over `P_n` starting from `init` (or `p_i ∝ i^{-1.9}`).
///
/// Returns the best iterate; `converged` is false when `max_iter` is reached
/// or no step can increase `d` while the residual is still above `tol`.
pub fn maximize_on_simplex(
    n: usize,
    init: Option<&ProbVec>,
    settings: &OptSettings,
) -> Result<OptOutcome> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "alphabet size must be >= 2, got {n}"
        )));
    }
    if !(settings.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mut p = match init {
        Some(q) => {
            if q.support_n() != n || !q.is_interior() {
                return Err(Error::InvalidArgument(format!(
                    "initial point must be interior on 1..={n}"
                )));
            }
            q.clone()
        }
        None => default_init(n)?,
    };
    let disc = &settings.grad.disc;
    let iters = settings.grad.iterations;
    let mut model = InvariantModel::new(&p, disc, iters)?;
    let mut grad = grad_dimension_with(&model)?;
    let mut state = OptState {
        p: p.clone(),
        iter: 0,
        residual_history: vec![grad.crit_residual],
        dimension_history: vec![grad.dimension],
        step: match settings.method {
            AscentMethod::ExpGradient => model.lyapunov(),
            AscentMethod::FixedPoint => settings.damping,
        },
        method: settings.method,
    };
    let max_step = state.step;
    let mut converged = grad.crit_residual <= settings.tol;

    while !converged && state.iter < settings.max_iter {
        let d_old = grad.dimension;
        let mut accepted = None;
        let mut step = state.step;
        for _ in 0..MAX_HALVINGS {
            let q = candidate(settings.method, &p, &grad, step)?;
            let m = InvariantModel::new(&q, disc, iters)?;
            let d_new = entropy(&q) / m.lyapunov();
            if !d_new.is_finite() {
                return Err(Error::Numeric(format!(
                    "dimension is {d_new} at iteration {}",
                    state.iter
                )));
            }
            if d_new >= d_old - ASCENT_SLACK * d_old {
                accepted = Some((q, m));
                break;
            }
            step *= 0.5;
        }
        let Some((q, m)) = accepted else {
            break;
        };
        p = q;
        model = m;
        grad = grad_dimension_with(&model)?;
        state.iter += 1;
        state.residual_history.push(grad.crit_residual);
        state.dimension_history.push(grad.dimension);
        // Recover the step after a backtrack.
        state.step = (step * 2.0).min(max_step);
        converged = grad.crit_residual <= settings.tol;
    }

    state.p = p.clone();
    Ok(OptOutcome {
        n,
        report: dimension(
            &p,
            &EvalMethod::Operator {
                iterations: iters,
                disc: disc.clone(),
            },
        )?,
        p,
        grad,
        converged,
        state,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub n: usize,
    pub p: ProbVec,
    pub dimension: f64,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Extrapolation {
    pub note: String,
    /// Limit `D` of the fit `d_n ≈ D − c·n^{−β}`, when one exists.
    pub limit: Option<f64>,
    pub c: Option<f64>,
    pub beta: Option<f64>,
    pub residual: Option<f64>,
    pub used_n: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub per_n: Vec<SweepEntry>,
    pub d_max: f64,
    pub d_estimate: f64,
    pub nondecreasing: bool,
    pub extrapolation: Extrapolation,
}

impl SweepResult {
    pub fn all_converged(&self) -> bool {
        self.per_n.iter().all(|e| e.converged)
    }
}

/// Pads `p` from `P_n` into `P_m` with the predicted tail
/// `p_k = p_n·(k/n)^{−2d}`, then renormalizes.
pub fn warm_start(p: &ProbVec, d: f64, m: usize) -> Result<ProbVec> {
    let n = p.support_n();
    let last = p.get(n);
    let mut w = p.weights().to_vec();
    w.extend((n + 1..=m).map(|k| last * (k as f64 / n as f64).powf(-2.0 * d)));
    ProbVec::normalized(w)
}

/// Maximizes on each `P_n` in turn, warm-starting from the previous optimum.
pub fn sweep_n(n_list: &[usize], settings: &OptSettings) -> Result<SweepResult> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty n list".into()));
    }
    if n_list.iter().any(|&n| n < 2) || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "n list must be strictly increasing with entries >= 2, got {n_list:?}"
        )));
    }
    let mut per_n: Vec<SweepEntry> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let init = match per_n.last() {
            Some(prev) => Some(warm_start(&prev.p, prev.dimension, n)?),
            None => None,
        };
        let out = maximize_on_simplex(n, init.as_ref(), settings)?;
        per_n.push(SweepEntry {
            n,
            dimension: out.report.dimension,
            residual: out.grad.crit_residual,
            converged: out.converged,
            iterations: out.state.iter,
            p: out.p,
        });
    }
    let converged: Vec<&SweepEntry> = per_n.iter().filter(|e| e.converged).collect();
    let d_max = converged
        .iter()
        .map(|e| e.dimension)
        .fold(f64::NEG_INFINITY, f64::max);
    let nondecreasing = per_n
        .windows(2)
        .all(|w| w[1].dimension >= w[0].dimension - 1e-10);
    let points: Vec<(usize, f64)> = converged.iter().map(|e| (e.n, e.dimension)).collect();
    let extrapolation = extrapolate(&points);
    let d_estimate = extrapolation.limit.unwrap_or(d_max);
    Ok(SweepResult {
        per_n,
        d_max,
        d_estimate,
        nondecreasing,
        extrapolation,
    })
}

/// Fits `d_n = D − c·n^{−β}` exactly through the three largest `n`.
pub fn extrapolate(points: &[(usize, f64)]) -> Extrapolation {
    let none = |note: &str, used: Vec<usize>| Extrapolation {
        note: note.to_string(),
        limit: None,
        c: None,
        beta: None,
        residual: None,
        used_n: used,
    };
    if points.len() < 3 {
        return none("fewer than three converged n; no extrapolation", vec![]);
    }
    let last = &points[points.len() - 3..];
    let used: Vec<usize> = last.iter().map(|e| e.0).collect();
    let (n1, n2, n3) = (last[0].0 as f64, last[1].0 as f64, last[2].0 as f64);
    let (d1, d2, d3) = (last[0].1, last[1].1, last[2].1);
    let (a, b) = (d2 - d1, d3 - d2);
    if !(a > 0.0 && b > 0.0) {
        return none("increments not positive; no extrapolation", used);
    }
    let target = b / a;
    let ratio = |beta: f64| (n2.powf(-beta) - n3.powf(-beta)) / (n1.powf(-beta) - n2.powf(-beta));
    // ratio decreases from its β→0 limit towards 0 as β grows.
    let (mut lo, mut hi) = (1e-6, 50.0);
    if !(ratio(hi) < target && target < ratio(lo)) {
        return none(
            "increments not consistent with a power-law correction",
            used,
        );
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    let c = b / (n2.powf(-beta) - n3.powf(-beta));
    let limit = d3 + c * n3.powf(-beta);
    let residual = last
        .iter()
        .map(|&(n, d)| (limit - c * (n as f64).powf(-beta) - d).abs())
        .fold(0.0, f64::max);
    Extrapolation {
        note: "exact three-point fit d_n = D - c n^-beta on the largest n".into(),
        limit: Some(limit),
        c: Some(c),
        beta: Some(beta),
        residual: Some(residual),
        used_n: used,
    }
}
