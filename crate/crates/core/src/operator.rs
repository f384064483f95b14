//! The transfer operator `(L w)(x) = Σ_k p_k w(1/(k+x))` on a node
//! discretization, and the stationary quadrature it induces.
//!
//! On nodes `x_a` the operator is the matrix
//! `A[a][b] = Σ_k p_k ℓ_b(1/(k + x_a))`, where `ℓ_b` is the cardinal basis of
//! the discretization. Rows sum to one because interpolation reproduces
//! constants. Iterating `A` drives smooth functions to the constant
//! `∫ w dμ_p`; iterating its transpose from a probability vector gives a
//! quadrature rule `ν` with `ν·w ≈ ∫ w dμ_p`.

use crate::discretization::OperatorDiscretization;
use crate::error::{Error, Result};
use crate::measure::ProbVec;

#[derive(Debug, Clone)]
pub struct TransferOperator<'a> {
    disc: &'a OperatorDiscretization,
    matrix: Vec<f64>,
}

impl<'a> TransferOperator<'a> {
    pub fn new(p: &ProbVec, disc: &'a OperatorDiscretization) -> Self {
        Self::with_branch_weight(p, disc, |_, _| 1.0)
    }

    /// The tilted operator `L_t w(x) = Σ_k p_k (k+x)^{2t} w(1/(k+x))`, i.e. the
    /// potential `log p_k + t·log|T'|`.
    pub fn tilted(p: &ProbVec, disc: &'a OperatorDiscretization, t: f64) -> Self {
        Self::with_branch_weight(p, disc, |k, x| (k + x).powf(2.0 * t))
    }

    /// Operator with branch weights `p_k · g(k, x)`.
    pub fn with_branch_weight(
        p: &ProbVec,
        disc: &'a OperatorDiscretization,
        g: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let n = disc.len();
        let mut matrix = vec![0.0; n * n];
        let mut row = vec![0.0; n];
        for (a, &x) in disc.nodes().iter().enumerate() {
            let target = &mut matrix[a * n..(a + 1) * n];
            for (digit, pk) in p.active() {
                let k = f64::from(digit);
                let y = 1.0 / (k + x);
                disc.basis_row(y, &mut row);
                let wk = pk * g(k, x);
                for (t, &r) in target.iter_mut().zip(&row) {
                    *t += wk * r;
                }
            }
        }
        Self { disc, matrix }
    }

    pub fn discretization(&self) -> &'a OperatorDiscretization {
        self.disc
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let n = self.disc.len();
        debug_assert_eq!(values.len(), n);
        self.matrix
            .chunks_exact(n)
            .map(|row| row.iter().zip(values).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn apply_transpose(&self, weights: &[f64]) -> Vec<f64> {
        let n = self.disc.len();
        let mut out = vec![0.0; n];
        for (row, &w) in self.matrix.chunks_exact(n).zip(weights) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += w * a;
            }
        }
        out
    }

    pub fn iterate(&self, values: &[f64], m: usize) -> Vec<f64> {
        let mut v = values.to_vec();
        for _ in 0..m {
            v = self.apply(&v);
        }
        v
    }

    /// Row sums of the node matrix (all ones for an unweighted operator).
    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.disc.len();
        self.matrix
            .chunks_exact(n)
            .map(|r| r.iter().sum())
            .collect()
    }

    /// Fixed point of the transposed operator on probability vectors.
    pub fn stationary_weights(&self, min_iter: usize, max_iter: usize) -> Result<Vec<f64>> {
        let n = self.disc.len();
        let mut nu = vec![1.0 / n as f64; n];
        let mut change = f64::INFINITY;
        for it in 0..max_iter {
            let next = self.apply_transpose(&nu);
            change = next.iter().zip(&nu).map(|(a, b)| (a - b).abs()).sum();
            nu = next;
            if it + 1 >= min_iter && change < 1e-15 {
                return Ok(nu);
            }
        }
        if change < 1e-12 {
            return Ok(nu);
        }
        Err(Error::NonConvergence {
            what: "stationary weights",
            iterations: max_iter,
            spread: change,
        })
    }

    /// Leading eigenvalue by power iteration, bracketed by the min and max of
    /// the componentwise ratios `(Av)_a / v_a`.
    pub fn leading_eigenvalue(&self, tol: f64, max_iter: usize) -> Result<f64> {
        let n = self.disc.len();
        let mut v = vec![1.0; n];
        let mut spread = f64::INFINITY;
        for _ in 0..max_iter {
            let w = self.apply(&v);
            if w.iter().any(|x| !x.is_finite() || *x <= 0.0) {
                return Err(Error::Numeric(
                    "power iterate lost positivity; shrink t or refine the discretization".into(),
                ));
            }
            let (lo, hi) = w
                .iter()
                .zip(&v)
                .map(|(a, b)| a / b)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| {
                    (l.min(r), h.max(r))
                });
            let mid = 0.5 * (lo + hi);
            spread = (hi - lo) / mid;
            let scale = w.iter().fold(0.0f64, |m, x| m.max(*x));
            v = w.into_iter().map(|x| x / scale).collect();
            if spread < tol {
                return Ok(mid);
            }
        }
        Err(Error::NonConvergence {
            what: "power iteration",
            iterations: max_iter,
            spread,
        })
    }
}

/// `(L f)(x_a) = Σ_k p_k f(1/(k + x_a))` evaluated exactly at the nodes.
///
/// This is the analytic first step: `f` may be singular at `0` (as
/// `2·log(1/x)` is) while its image is smooth.
pub fn analytic_image(
    p: &ProbVec,
    disc: &OperatorDiscretization,
    f: impl Fn(f64) -> f64,
) -> Vec<f64> {
    disc.nodes()
        .iter()
        .map(|&x| {
            p.active()
                .map(|(digit, pk)| pk * f(1.0 / (f64::from(digit) + x)))
                .sum()
        })
        .collect()
}

/// `L φ` for `φ(x) = 2·log(1/x)`: `Σ_k p_k · 2·log(k + x)`.
pub fn lyapunov_image(p: &ProbVec, disc: &OperatorDiscretization) -> Vec<f64> {
    disc.sample(|x| {
        p.active()
            .map(|(digit, pk)| 2.0 * pk * (f64::from(digit) + x).ln())
            .sum()
    })
}

/// Stationary quadrature for `μ_p` together with the operator that
/// produced it.
#[derive(Debug, Clone)]
pub struct InvariantModel<'a> {
    p: ProbVec,
    op: TransferOperator<'a>,
    weights: Vec<f64>,
    lyapunov: f64,
    lyapunov_image: Vec<f64>,
}

impl<'a> InvariantModel<'a> {
    pub fn new(p: &ProbVec, disc: &'a OperatorDiscretization, iterations: usize) -> Result<Self> {
        let op = TransferOperator::new(p, disc);
        let weights = op.stationary_weights(iterations, 50 * iterations.max(20))?;
        let image = lyapunov_image(p, disc);
        let lyapunov = dot(&weights, &image);
        Ok(Self {
            p: p.clone(),
            op,
            weights,
            lyapunov,
            lyapunov_image: image,
        })
    }

    pub fn probabilities(&self) -> &ProbVec {
        &self.p
    }

    pub fn operator(&self) -> &TransferOperator<'a> {
        &self.op
    }

    pub fn discretization(&self) -> &'a OperatorDiscretization {
        self.op.disc
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ w dμ_p` for `w` sampled at the nodes.
    pub fn mean(&self, values: &[f64]) -> f64 {
        dot(&self.weights, values)
    }

    pub fn lyapunov(&self) -> f64 {
        self.lyapunov
    }

    /// `Lφ` sampled at the nodes.
    pub fn lyapunov_image(&self) -> &[f64] {
        &self.lyapunov_image
    }

    /// `∫_{[i]} log|T'| dμ_p = 2 p_i ∫ log(i + x) dμ_p(x)`.
    pub fn digit_integral(&self, digit: u32) -> f64 {
        let pi = self.p.get(digit as usize);
        if pi == 0.0 {
            return 0.0;
        }
        let k = f64::from(digit);
        let v = self.op.disc.sample(|x| (k + x).ln());
        2.0 * pi * self.mean(&v)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::GOLDEN_LYAPUNOV;

    #[test]
    fn stochastic_rows() {
        let disc = OperatorDiscretization::default();
        let p = ProbVec::new(vec![0.5, 0.3, 0.2]).unwrap();
        let op = TransferOperator::new(&p, &disc);
        for s in op.row_sums() {
            assert!((s - 1.0).abs() < 1e-13);
        }
        let ones = vec![1.0; disc.len()];
        assert!(op.apply(&ones).iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn golden_mean_quadrature() {
        let disc = OperatorDiscretization::default();
        let p = ProbVec::new(vec![1.0]).unwrap();
        let model = InvariantModel::new(&p, &disc, 60).unwrap();
        assert!((model.lyapunov() - GOLDEN_LYAPUNOV).abs() < 1e-12);
        assert!((model.digit_integral(1) - model.lyapunov()).abs() < 1e-12);
        assert_eq!(model.digit_integral(2), 0.0);
    }

    #[test]
    fn eigenvalue_one_at_zero_tilt() {
        let disc = OperatorDiscretization::default();
        let p = ProbVec::new(vec![0.6, 0.4]).unwrap();
        let op = TransferOperator::tilted(&p, &disc, 0.0);
        let rho = op.leading_eigenvalue(1e-13, 1000).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
    }
}
