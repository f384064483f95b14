//! Probability vectors on digits and the functionals of the Bernoulli measure
//! `μ_p` they induce on `[0,1]`: entropy `h`, Lyapunov exponent `λ` and
//! dimension `d = h/λ`.
//!
//! `λ` has two independent evaluators:
//!
//! * [`lyapunov_by_cylinders`] sums `p_ī · log|T'|` over every depth-`N`
//!   cylinder. `μ_p` of a cylinder is exactly the product of its digit
//!   weights and `log|T'|` is monotone on it, so the reported error is a
//!   rigorous half-width.
//! * [`lyapunov_by_operator`] iterates the transfer operator on
//!   `L(2·log(1/x)) = Σ p_k 2·log(k+x)`; its error is empirical.

use crate::cf::{geometry_of_digits, GOLDEN_LYAPUNOV};
use crate::discretization::OperatorDiscretization;
use crate::error::{Error, Result};
use crate::operator::{lyapunov_image, TransferOperator};
use rayon::prelude::*;
use serde::Serialize;

/// Tolerance on `Σ p_k = 1`.
pub const SUM_TOL: f64 = 1e-12;
/// Maximum number of depth-`N` words the cylinder evaluator will visit.
pub const CYLINDER_BUDGET: f64 = 1e7;
/// Default operator iteration count.
pub const DEFAULT_ITERATIONS: usize = 60;
const MAX_AUTO_DEPTH: usize = 40;
const MIN_AUTO_DEPTH: usize = 10;
const PRUNE_WEIGHT: f64 = 1e-300;

/// A finitely supported probability vector; `weights()[k-1]` is the weight
/// of digit `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVec {
    weights: Vec<f64>,
}

impl ProbVec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some((k, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidWeights(format!(
                "weight of digit {} is {w}",
                k + 1
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum:.17}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Divides `raw` by its sum.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
        }
        Self::new(raw.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::normalized(vec![1.0; n])
    }

    /// `p_k ∝ k^{-s}` on `{1..n}`.
    pub fn power_shaped(n: usize, s: f64) -> Result<Self> {
        Self::normalized((1..=n).map(|k| (k as f64).powf(-s)).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support_n(&self) -> usize {
        self.weights.len()
    }

    /// Weight of `digit` (1-based); zero outside the support.
    pub fn get(&self, digit: usize) -> f64 {
        if digit == 0 {
            return 0.0;
        }
        self.weights.get(digit - 1).copied().unwrap_or(0.0)
    }

    /// All weights on `{1..support_n}` are strictly positive.
    pub fn is_interior(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    /// `(digit, weight)` for every digit of positive weight.
    pub fn active(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(k, &w)| (k as u32 + 1, w))
    }

    pub fn active_count(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }

    /// The same vector viewed in a larger simplex.
    pub fn padded(&self, n: usize) -> Self {
        let mut weights = self.weights.clone();
        if n > weights.len() {
            weights.resize(n, 0.0);
        }
        Self { weights }
    }
}

/// A source of digit weights with a computable tail mass.
pub trait DigitWeights {
    fn weight(&self, digit: usize) -> f64;
    /// `ε_n = Σ_{l>n} p_l`.
    fn tail_mass(&self, n: usize) -> f64;
}

impl DigitWeights for ProbVec {
    fn weight(&self, digit: usize) -> f64 {
        self.get(digit)
    }

    fn tail_mass(&self, n: usize) -> f64 {
        self.weights.iter().skip(n).sum()
    }
}

/// Infinite weight families with finite entropy and Lyapunov exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailFamily {
    /// `p_k = k^{-s} / ζ(s)`, `s > 1`.
    PowerLaw {
        exponent: f64,
        zeta: f64,
    },
    /// `p_k = log₂(1 + 1/(k(k+2)))`, the Gauss measure of `[k]`.
    GaussKuzmin,
    CustomTable {
        table: ProbVec,
    },
}

impl TailFamily {
    pub fn power_law(exponent: f64) -> Result<Self> {
        if !(exponent > 1.0 && exponent.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "power law exponent must exceed 1, got {exponent}"
            )));
        }
        Ok(Self::PowerLaw {
            exponent,
            zeta: power_sum_from(1, exponent),
        })
    }

    pub fn gauss_kuzmin() -> Self {
        Self::GaussKuzmin
    }

    pub fn custom(table: ProbVec) -> Self {
        Self::CustomTable { table }
    }

    /// Entropy and Lyapunov exponent are finite for every constructible
    /// family: power laws need `s > 1`, Gauss–Kuzmin decays like `k^{-2}`,
    /// tables have finite support.
    pub fn certified(&self) -> bool {
        match self {
            Self::PowerLaw { exponent, .. } => *exponent > 1.0,
            Self::GaussKuzmin | Self::CustomTable { .. } => true,
        }
    }
}

impl DigitWeights for TailFamily {
    fn weight(&self, digit: usize) -> f64 {
        if digit == 0 {
            return 0.0;
        }
        let k = digit as f64;
        match self {
            Self::PowerLaw { exponent, zeta } => k.powf(-exponent) / zeta,
            Self::GaussKuzmin => (1.0 / (k * (k + 2.0))).ln_1p() / std::f64::consts::LN_2,
            Self::CustomTable { table } => table.get(digit),
        }
    }

    fn tail_mass(&self, n: usize) -> f64 {
        match self {
            Self::PowerLaw { exponent, zeta } => power_sum_from(n + 1, *exponent) / zeta,
            // The product telescopes: Σ_{k>n} p_k = log₂((n+2)/(n+1)).
            Self::GaussKuzmin => (1.0 / (n as f64 + 1.0)).ln_1p() / std::f64::consts::LN_2,
            Self::CustomTable { table } => table.tail_mass(n),
        }
    }
}

/// `Σ_{k≥start} k^{-s}`: direct summation up to a cut, Euler–Maclaurin beyond.
fn power_sum_from(start: usize, s: f64) -> f64 {
    const CUT: usize = 64;
    let cut = start.max(CUT);
    let direct: f64 = (start..cut).map(|k| (k as f64).powf(-s)).sum();
    let a = cut as f64;
    let fa = a.powf(-s);
    let d1 = s * a.powf(-s - 1.0);
    let d3 = s * (s + 1.0) * (s + 2.0) * a.powf(-s - 3.0);
    let d5 = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * a.powf(-s - 5.0);
    let tail = a.powf(1.0 - s) / (s - 1.0) + 0.5 * fa + d1 / 12.0 - d3 / 720.0 + d5 / 30240.0;
    direct + tail
}

/// Moves the tail mass `ε_n` onto digit 1 and drops digits beyond `n`.
pub fn truncate<W: DigitWeights + ?Sized>(source: &W, n: usize) -> Result<ProbVec> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "truncation level must be >= 2, got {n}"
        )));
    }
    let eps = source.tail_mass(n);
    let mut weights: Vec<f64> = (1..=n).map(|k| source.weight(k)).collect();
    weights[0] += eps;
    while weights.len() > 1 && weights.last() == Some(&0.0) {
        weights.pop();
    }
    ProbVec::new(weights)
}

/// `h = −Σ p_k log p_k` (nats), with `0·log 0 = 0`.
pub fn entropy(p: &ProbVec) -> f64 {
    -p.active().map(|(_, w)| w * w.ln()).sum::<f64>() + 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// A guaranteed bracket half-width.
    Rigorous,
    /// Spread of successive iterates plus an interpolation estimate.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub estimate: f64,
    pub err: f64,
    pub kind: ErrorKind,
}

fn depth_budget_check(p: &ProbVec, depth: usize) -> Result<()> {
    if depth == 0 {
        return Err(Error::InvalidArgument("cylinder depth must be >= 1".into()));
    }
    let words = (p.active_count() as f64).powi(depth as i32);
    if words > CYLINDER_BUDGET {
        return Err(Error::BudgetExceeded {
            words,
            depth,
            budget: CYLINDER_BUDGET,
        });
    }
    Ok(())
}

/// Visits every depth-`depth` word over the active digits, split by first
/// digit. Returns per-first-digit accumulators `[f64; K]`, in digit order.
pub(crate) fn cylinder_sums<const K: usize, F>(
    p: &ProbVec,
    depth: usize,
    leaf: F,
) -> Result<Vec<(u32, [f64; K])>>
where
    F: Fn(f64, &[u32]) -> [f64; K] + Sync,
{
    depth_budget_check(p, depth)?;
    let active: Vec<(u32, f64)> = p.active().collect();

    fn visit<const K: usize, F: Fn(f64, &[u32]) -> [f64; K]>(
        active: &[(u32, f64)],
        depth: usize,
        word: &mut Vec<u32>,
        weight: f64,
        leaf: &F,
        acc: &mut [f64; K],
    ) {
        if weight < PRUNE_WEIGHT {
            return;
        }
        if word.len() == depth {
            let v = leaf(weight, word);
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b;
            }
            return;
        }
        for &(d, w) in active {
            word.push(d);
            visit(active, depth, word, weight * w, leaf, acc);
            word.pop();
        }
    }

    Ok(active
        .par_iter()
        .map(|&(d, w)| {
            let mut acc = [0.0; K];
            let mut word = Vec::with_capacity(depth);
            word.push(d);
            visit(&active, depth, &mut word, w, &leaf, &mut acc);
            (d, acc)
        })
        .collect())
}

/// Depth-`N` cylinder sum of `log|T'|`, optionally capped at `2·log M`.
///
/// Per cylinder the bracket `[min, max]` of the (capped) log-derivative is
/// weighted by `p_ī`; the estimate is the bracket midpoint and `err` its
/// half-width.
pub fn lyapunov_by_cylinders_capped(
    p: &ProbVec,
    depth: usize,
    cap: Option<u32>,
) -> Result<LyapunovEstimate> {
    let cap_value = cap
        .map(|m| 2.0 * f64::from(m).ln())
        .unwrap_or(f64::INFINITY);
    let parts = cylinder_sums(p, depth, |w, word| {
        let g = geometry_of_digits(word);
        let lo = g.logderiv_lo.min(cap_value);
        let hi = g.logderiv_hi.min(cap_value);
        [w * 0.5 * (lo + hi), w * 0.5 * (hi - lo)]
    })?;
    let (estimate, err) = parts
        .iter()
        .fold((0.0, 0.0), |(e, r), (_, [a, b])| (e + a, r + b));
    // Worst-case round-off: recursive summation of the leaves plus the
    // back-to-front evaluation of each leaf.
    let words = (p.active_count() as f64).powi(depth as i32);
    let rounding = (words + 4.0 * depth as f64) * f64::EPSILON * estimate;
    Ok(LyapunovEstimate {
        estimate,
        err: err + rounding,
        kind: ErrorKind::Rigorous,
    })
}

pub fn lyapunov_by_cylinders(p: &ProbVec, depth: usize) -> Result<LyapunovEstimate> {
    lyapunov_by_cylinders_capped(p, depth, None)
}

/// `I_i = ∫_{[i]} log|T'| dμ_p` for every digit, as depth-`N` cylinder sums
/// grouped by first digit. Index `i-1` holds `I_i`.
pub fn digit_integrals_by_cylinders(p: &ProbVec, depth: usize) -> Result<Vec<f64>> {
    let parts = cylinder_sums(p, depth, |w, word| {
        let g = geometry_of_digits(word);
        [w * 0.5 * (g.logderiv_lo + g.logderiv_hi)]
    })?;
    let mut out = vec![0.0; p.support_n()];
    for (d, [v]) in parts {
        out[d as usize - 1] = v;
    }
    Ok(out)
}

/// Iterates `L` on `f` sampled at the nodes and reports the midpoint and
/// half-width of the final iterate's range, plus the range history.
fn iterate_to_constant(
    op: &TransferOperator<'_>,
    start: Vec<f64>,
    m: usize,
) -> (f64, f64, Vec<f64>) {
    let range = |v: &[f64]| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
                (l.min(x), h.max(x))
            })
    };
    let mut v = start;
    let mut history = Vec::with_capacity(m);
    for _ in 0..m {
        v = op.apply(&v);
        let (lo, hi) = range(&v);
        history.push(hi - lo);
    }
    let (lo, hi) = range(&v);
    (0.5 * (lo + hi), 0.5 * (hi - lo), history)
}

/// `λ(μ_p)` by `m` applications of `L` to `φ(x) = 2·log(1/x)`: the first
/// application is analytic, the remaining `m−1` act on the node values.
pub fn lyapunov_by_operator(
    p: &ProbVec,
    disc: &OperatorDiscretization,
    m: usize,
) -> Result<LyapunovEstimate> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "operator iterations must be >= 1".into(),
        ));
    }
    let op = TransferOperator::new(p, disc);
    let first = lyapunov_image(p, disc);
    let interp = disc.interpolation_error(&first);
    let (mid, half, history) = iterate_to_constant(&op, first, m - 1);
    check_contracting("operator Lyapunov iteration", &history, half)?;
    Ok(LyapunovEstimate {
        estimate: mid,
        err: half + interp,
        kind: ErrorKind::Empirical,
    })
}

fn check_contracting(what: &'static str, history: &[f64], half: f64) -> Result<()> {
    if !half.is_finite() {
        return Err(Error::Numeric(format!("{what} produced non-finite values")));
    }
    let m = history.len();
    if m >= 4 && half > 1e-6 {
        let early = history[m / 2];
        let late = history[m - 1];
        if late > 0.5 * early {
            return Err(Error::NonConvergence {
                what,
                iterations: m,
                spread: late,
            });
        }
    }
    Ok(())
}

/// `I_i = ∫_{[i]} log|T'| dμ_p = 2 p_i ∫ log(i+x) dμ_p(x)`, the remaining
/// integral evaluated by `m` operator iterations.
pub fn digit_integral(
    p: &ProbVec,
    digit: usize,
    disc: &OperatorDiscretization,
    m: usize,
) -> Result<f64> {
    if digit == 0 || digit > p.support_n() {
        return Err(Error::InvalidArgument(format!(
            "digit {digit} outside support 1..={}",
            p.support_n()
        )));
    }
    let pi = p.get(digit);
    if pi == 0.0 {
        return Ok(0.0);
    }
    let op = TransferOperator::new(p, disc);
    let k = digit as f64;
    let start = disc.sample(|x| (k + x).ln());
    let (mid, half, history) = iterate_to_constant(&op, start, m);
    check_contracting("digit integral iteration", &history, half)?;
    Ok(2.0 * pi * mid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodTag {
    Cylinder { depth: usize },
    Operator { iterations: usize, nodes: usize },
}

#[derive(Debug, Clone)]
pub enum EvalMethod {
    Cylinder {
        depth: usize,
    },
    Operator {
        iterations: usize,
        disc: OperatorDiscretization,
    },
    /// Cylinders when a depth of at least 10 fits the enumeration budget,
    /// otherwise the operator with 60 iterations on the default nodes.
    Auto,
}

impl EvalMethod {
    pub fn operator_default() -> Self {
        Self::Operator {
            iterations: DEFAULT_ITERATIONS,
            disc: OperatorDiscretization::default(),
        }
    }

    pub fn resolve(&self, p: &ProbVec) -> Self {
        match self {
            Self::Auto => match auto_depth(p) {
                Some(depth) => Self::Cylinder { depth },
                None => Self::operator_default(),
            },
            other => other.clone(),
        }
    }
}

/// Largest depth `≤ 40` whose word count fits the budget, if it is at
/// least 10.
pub fn auto_depth(p: &ProbVec) -> Option<usize> {
    let k = p.active_count() as f64;
    if k <= 1.0 {
        return Some(MAX_AUTO_DEPTH);
    }
    let depth = ((CYLINDER_BUDGET.ln() / k.ln()).floor() as usize).min(MAX_AUTO_DEPTH);
    (depth >= MIN_AUTO_DEPTH).then_some(depth)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub entropy: f64,
    pub lyapunov: f64,
    pub dimension: f64,
    pub entropy_err: f64,
    pub lyapunov_err: f64,
    pub dimension_err: f64,
    pub error_kind: ErrorKind,
    pub method: MethodTag,
}

/// Entropy, Lyapunov exponent and dimension of `μ_p` by the chosen method.
pub fn dimension(p: &ProbVec, method: &EvalMethod) -> Result<EvalReport> {
    let h = entropy(p);
    let entropy_err = 2.0 * f64::EPSILON * (p.active_count() as f64) * h.max(1.0);
    let (lam, tag) = match method.resolve(p) {
        EvalMethod::Cylinder { depth } => (
            lyapunov_by_cylinders(p, depth)?,
            MethodTag::Cylinder { depth },
        ),
        EvalMethod::Operator { iterations, disc } => (
            lyapunov_by_operator(p, &disc, iterations)?,
            MethodTag::Operator {
                iterations,
                nodes: disc.len(),
            },
        ),
        EvalMethod::Auto => unreachable!("resolved above"),
    };
    if lam.estimate + lam.err + 1e-12 < GOLDEN_LYAPUNOV {
        return Err(Error::Numeric(format!(
            "Lyapunov exponent {} below the golden-mean floor {GOLDEN_LYAPUNOV}",
            lam.estimate
        )));
    }
    let d = h / lam.estimate;
    Ok(EvalReport {
        entropy: h,
        lyapunov: lam.estimate,
        dimension: d,
        entropy_err,
        lyapunov_err: lam.err,
        dimension_err: d * (lam.err / lam.estimate) + entropy_err / lam.estimate,
        error_kind: lam.kind,
        method: tag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(w: &[f64]) -> ProbVec {
        ProbVec::new(w.to_vec()).unwrap()
    }

    #[test]
    fn probvec_validation() {
        assert!(ProbVec::new(vec![]).is_err());
        assert!(ProbVec::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVec::new(vec![1.5, -0.5]).is_err());
        assert!(ProbVec::new(vec![0.0, 0.0]).is_err());
        assert!(ProbVec::new(vec![f64::NAN, 1.0]).is_err());
        let p = pv(&[0.0, 1.0]);
        assert!(!p.is_interior());
        assert_eq!(p.active().collect::<Vec<_>>(), vec![(2, 1.0)]);
        assert_eq!(p.get(3), 0.0);
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&pv(&[0.5, 0.5])) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&pv(&[1.0])), 0.0);
        assert_eq!(entropy(&pv(&[0.0, 1.0])), 0.0);
    }

    #[test]
    fn truncate_examples() {
        let p = pv(&[0.5, 0.25, 0.125, 0.125]);
        assert_eq!(truncate(&p, 2).unwrap().weights(), &[0.75, 0.25]);
        let q = pv(&[0.5, 0.3, 0.2]);
        assert_eq!(truncate(&q, 3).unwrap(), q);
        assert_eq!(truncate(&q, 8).unwrap(), q);
        assert!(truncate(&q, 1).is_err());
    }

    #[test]
    fn power_law_requires_summability() {
        assert!(TailFamily::power_law(1.0).is_err());
        assert!(TailFamily::power_law(0.5).is_err());
        assert!(TailFamily::power_law(2.0).unwrap().certified());
    }

    #[test]
    fn gauss_kuzmin_tail_telescopes() {
        let gk = TailFamily::gauss_kuzmin();
        for n in [1usize, 5, 50] {
            let direct: f64 = (1..=n).map(|k| gk.weight(k)).sum();
            assert!((direct + gk.tail_mass(n) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn auto_depth_choices() {
        assert_eq!(auto_depth(&pv(&[1.0])), Some(40));
        assert_eq!(auto_depth(&pv(&[0.5, 0.5])), Some(23));
        assert_eq!(auto_depth(&pv(&[0.2; 5])), Some(10));
        assert_eq!(auto_depth(&ProbVec::uniform(6).unwrap()), None);
    }

    #[test]
    fn budget_is_enforced() {
        let p = ProbVec::uniform(10).unwrap();
        assert!(matches!(
            lyapunov_by_cylinders(&p, 8),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn cap_is_inactive_for_finite_support() {
        let p = pv(&[0.5, 0.3, 0.2]);
        let a = lyapunov_by_cylinders(&p, 8).unwrap();
        let b = lyapunov_by_cylinders_capped(&p, 8, Some(4)).unwrap();
        assert_eq!(a.estimate, b.estimate);
        // A cap below the largest branch derivative lowers the sum.
        let c = lyapunov_by_cylinders_capped(&p, 8, Some(2)).unwrap();
        assert!(c.estimate < a.estimate);
    }

    #[test]
    fn digit_integral_edges() {
        let disc = OperatorDiscretization::default();
        let p = pv(&[0.0, 1.0]);
        assert_eq!(digit_integral(&p, 1, &disc, 40).unwrap(), 0.0);
        assert!(digit_integral(&p, 3, &disc, 40).is_err());
        assert!(digit_integral(&p, 0, &disc, 40).is_err());
    }
}
