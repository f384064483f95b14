//! Numerical maximization of the dimension `d(μ_p) = h(μ_p)/λ(μ_p)` of
//! Bernoulli measures for the continued-fraction (Gauss map) coding.
//!
//! * [`cf`]: continued-fraction values, cylinders, `log|T'|`.
//! * [`measure`]: probability vectors, entropy, two Lyapunov evaluators,
//!   dimension, truncation.
//! * [`discretization`], [`operator`]: functions on `[0,1]` and the transfer
//!   operator `L w(x) = Σ p_k w(1/(k+x))`.
//! * [`gradient`]: analytic derivatives and the criticality residual.
//! * [`optimizer`]: maximization on `P_n` and sweeps over `n`.
//! * [`tail`]: power-law fits and ratio-bound audits of optimal weights.
//! * [`diagnostics`]: operator facts behind mixing, and the pressure probe.

pub mod cf;
pub mod diagnostics;
pub mod discretization;
pub mod error;
pub mod gradient;
pub mod measure;
pub mod operator;
pub mod optimizer;
pub mod tail;

pub use cf::{cf_value, cylinder_interval, DigitWord, GOLDEN_LYAPUNOV};
pub use discretization::OperatorDiscretization;
pub use error::{Error, Result};
pub use measure::{dimension, entropy, EvalMethod, EvalReport, ProbVec};
