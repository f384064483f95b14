//! Node-based representation of functions on `[0,1]`.
//!
//! The default scheme interpolates at Chebyshev–Lobatto points
//! `x_j = (1 − cos(jπ/D))/2`, `j = 0..=D`, with the barycentric formula. All
//! branch preimages `1/(k+x)` lie inside `[0,1]`, so interpolation never
//! extrapolates. A uniform grid with piecewise-linear interpolation is kept
//! as a low-order comparison scheme.

use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

pub const DEFAULT_DEGREE: usize = 64;
const MIN_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    Chebyshev { degree: usize },
    UniformGrid { points: usize },
}

#[derive(Debug, Clone)]
pub struct OperatorDiscretization {
    scheme: Scheme,
    nodes: Vec<f64>,
    bary: Vec<f64>,
    // cos(k·θ_j) for the Chebyshev scheme, row-major in k.
    cheb_table: Vec<f64>,
}

impl Default for OperatorDiscretization {
    fn default() -> Self {
        Self::chebyshev(DEFAULT_DEGREE).expect("default degree is valid")
    }
}

impl OperatorDiscretization {
    pub fn chebyshev(degree: usize) -> Result<Self> {
        if degree + 1 < MIN_NODES {
            return Err(Error::InvalidArgument(format!(
                "Chebyshev degree {degree} gives fewer than {MIN_NODES} nodes"
            )));
        }
        let d = degree as f64;
        let nodes: Vec<f64> = (0..=degree)
            .map(|j| 0.5 * (1.0 - (PI * j as f64 / d).cos()))
            .collect();
        let bary = (0..=degree)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == degree {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        // t_j = 2x_j − 1 = −cos(jπ/D) = cos(θ_j) with θ_j = π − jπ/D.
        let mut cheb_table = Vec::with_capacity((degree + 1) * (degree + 1));
        for k in 0..=degree {
            for j in 0..=degree {
                let theta = PI - PI * j as f64 / d;
                cheb_table.push((k as f64 * theta).cos());
            }
        }
        Ok(Self {
            scheme: Scheme::Chebyshev { degree },
            nodes,
            bary,
            cheb_table,
        })
    }

    pub fn uniform(points: usize) -> Result<Self> {
        if points < MIN_NODES {
            return Err(Error::InvalidArgument(format!(
                "uniform grid needs at least {MIN_NODES} points, got {points}"
            )));
        }
        let h = 1.0 / (points - 1) as f64;
        Ok(Self {
            scheme: Scheme::UniformGrid { points },
            nodes: (0..points).map(|j| j as f64 * h).collect(),
            bary: Vec::new(),
            cheb_table: Vec::new(),
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Writes the cardinal-basis values `ℓ_j(y)` into `out`.
    pub fn basis_row(&self, y: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.nodes.len());
        out.iter_mut().for_each(|v| *v = 0.0);
        match self.scheme {
            Scheme::Chebyshev { .. } => {
                let mut total = 0.0;
                for (j, (&x, &b)) in self.nodes.iter().zip(&self.bary).enumerate() {
                    let diff = y - x;
                    if diff == 0.0 {
                        out.iter_mut().for_each(|v| *v = 0.0);
                        out[j] = 1.0;
                        return;
                    }
                    let t = b / diff;
                    out[j] = t;
                    total += t;
                }
                out.iter_mut().for_each(|v| *v /= total);
            }
            Scheme::UniformGrid { points } => {
                let (j, frac) = self.locate(y, points);
                out[j] = 1.0 - frac;
                if frac > 0.0 {
                    out[j + 1] = frac;
                }
            }
        }
    }

    fn locate(&self, y: f64, points: usize) -> (usize, f64) {
        let s = y.clamp(0.0, 1.0) * (points - 1) as f64;
        let j = (s.floor() as usize).min(points - 2);
        (j, s - j as f64)
    }

    pub fn interpolate(&self, values: &[f64], y: f64) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        match self.scheme {
            Scheme::Chebyshev { .. } => {
                let mut num = 0.0;
                let mut den = 0.0;
                for ((&x, &b), &v) in self.nodes.iter().zip(&self.bary).zip(values) {
                    let diff = y - x;
                    if diff == 0.0 {
                        return v;
                    }
                    let t = b / diff;
                    num += t * v;
                    den += t;
                }
                num / den
            }
            Scheme::UniformGrid { points } => {
                let (j, frac) = self.locate(y, points);
                if frac == 0.0 {
                    values[j]
                } else {
                    (1.0 - frac) * values[j] + frac * values[j + 1]
                }
            }
        }
    }

    /// Chebyshev coefficients `c_k` of the interpolant in `t = 2x − 1`.
    /// `None` for the uniform grid.
    pub fn coefficients(&self, values: &[f64]) -> Option<Vec<f64>> {
        let Scheme::Chebyshev { degree } = self.scheme else {
            return None;
        };
        let n = degree + 1;
        let scale = 2.0 / degree as f64;
        let coeffs = (0..n)
            .map(|k| {
                let row = &self.cheb_table[k * n..(k + 1) * n];
                let mut s = 0.0;
                for (j, (&c, &v)) in row.iter().zip(values).enumerate() {
                    let w = if j == 0 || j == degree { 0.5 } else { 1.0 };
                    s += w * c * v;
                }
                let s = s * scale;
                if k == 0 || k == degree {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Some(coeffs)
    }

    /// Estimated sup-norm interpolation error for the function sampled in
    /// `values`.
    pub fn interpolation_error(&self, values: &[f64]) -> f64 {
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let roundoff = 8.0 * f64::EPSILON * scale * (self.len() as f64).ln().max(1.0);
        match self.coefficients(values) {
            Some(c) => {
                let tail: f64 = c.iter().rev().take(3).map(|v| v.abs()).sum();
                2.0 * tail + roundoff
            }
            None => {
                let second = values
                    .windows(3)
                    .map(|w| (w[0] - 2.0 * w[1] + w[2]).abs())
                    .fold(0.0, f64::max);
                // |f''| h² / 8 with f'' ≈ Δ²f / h².
                second / 8.0 + roundoff
            }
        }
    }

    fn dense_grid(&self) -> Vec<f64> {
        let m = 16 * self.len();
        let mut grid: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
        grid.extend_from_slice(&self.nodes);
        grid
    }

    /// Sup norm of the interpolant on a dense grid that includes the nodes.
    pub fn sup_norm(&self, values: &[f64]) -> f64 {
        match self.scheme {
            Scheme::UniformGrid { .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
            Scheme::Chebyshev { .. } => self
                .dense_grid()
                .into_iter()
                .map(|y| self.interpolate(values, y).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Sup norm of the derivative of the interpolant, with an error estimate.
    pub fn derivative_sup(&self, values: &[f64]) -> (f64, f64) {
        match self.coefficients(values) {
            Some(c) => {
                let dc = derivative_coefficients(&c);
                let sup = self
                    .dense_grid()
                    .into_iter()
                    .map(|x| (2.0 * clenshaw(&dc, 2.0 * x - 1.0)).abs())
                    .fold(0.0, f64::max);
                // Truncated tail of the derivative series, T_k' ≤ k².
                let deg = c.len() - 1;
                let tail: f64 = c
                    .iter()
                    .enumerate()
                    .skip(deg.saturating_sub(2))
                    .map(|(k, v)| 2.0 * (k * k) as f64 * v.abs())
                    .sum();
                let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let roundoff = 2.0 * (deg * deg) as f64 * f64::EPSILON * scale;
                (sup, tail + roundoff)
            }
            None => {
                let h = 1.0 / (self.len() - 1) as f64;
                let sup = values
                    .windows(2)
                    .map(|w| ((w[1] - w[0]) / h).abs())
                    .fold(0.0, f64::max);
                let second = values
                    .windows(3)
                    .map(|w| (w[0] - 2.0 * w[1] + w[2]).abs() / h)
                    .fold(0.0, f64::max);
                (sup, second)
            }
        }
    }
}

/// Coefficients of the `t`-derivative of a Chebyshev series.
pub fn derivative_coefficients(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    if n < 2 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n];
    for k in (1..n).rev() {
        let next = if k + 1 < n { d[k + 1] } else { 0.0 };
        d[k - 1] = next + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

/// Evaluates `Σ c_k T_k(t)`.
pub fn clenshaw(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c.first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_sorted_in_unit_interval() {
        let d = OperatorDiscretization::default();
        assert_eq!(d.len(), DEFAULT_DEGREE + 1);
        assert_eq!(d.nodes()[0], 0.0);
        assert!((d.nodes()[DEFAULT_DEGREE] - 1.0).abs() < 1e-15);
        assert!(d.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(OperatorDiscretization::chebyshev(5).is_err());
        assert!(OperatorDiscretization::uniform(4).is_err());
    }

    #[test]
    fn interpolates_smooth_functions() {
        let d = OperatorDiscretization::chebyshev(32).unwrap();
        let v = d.sample(|x| (3.0 * x).sin() + (1.0 + x).ln());
        for i in 0..50 {
            let y = i as f64 / 49.0;
            let exact = (3.0 * y).sin() + (1.0 + y).ln();
            assert!((d.interpolate(&v, y) - exact).abs() < 1e-13);
        }
        assert!(d.interpolation_error(&v) < 1e-12);
    }

    #[test]
    fn basis_row_matches_interpolate_and_reproduces_constants() {
        let d = OperatorDiscretization::chebyshev(20).unwrap();
        let v = d.sample(|x| x.exp());
        let mut row = vec![0.0; d.len()];
        for y in [0.0, 0.123, 0.5, 1.0 / 3.0, 0.999] {
            d.basis_row(y, &mut row);
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            let via_row: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!((via_row - d.interpolate(&v, y)).abs() < 1e-13);
        }
    }

    #[test]
    fn spectral_derivative() {
        let d = OperatorDiscretization::chebyshev(40).unwrap();
        let v = d.sample(|x| (2.0 * x).sin());
        let (sup, err) = d.derivative_sup(&v);
        assert!((sup - 2.0).abs() < 1e-10, "{sup}");
        assert!(err < 1e-9);
        let c = d.coefficients(&v).unwrap();
        assert!((clenshaw(&c, 2.0 * 0.3 - 1.0) - (0.6f64).sin()).abs() < 1e-14);
    }

    #[test]
    fn uniform_grid_is_piecewise_linear() {
        let d = OperatorDiscretization::uniform(11).unwrap();
        let v = d.sample(|x| 2.0 * x + 1.0);
        assert!((d.interpolate(&v, 0.37) - 1.74).abs() < 1e-14);
        assert!((d.derivative_sup(&v).0 - 2.0).abs() < 1e-12);
    }
}
