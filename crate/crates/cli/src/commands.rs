//! The four commands. Each returns a JSON result tree plus optional CSV and
//! TSV bodies; nothing here touches the file system.

use crate::config::{CommandKind, RunConfig};
use crate::error::CliError;
use dimmax_core::diagnostics::{
    contraction_check, correlation_decay, mixed_partial, pressure_probe, trig_battery,
    TestFunction, PRESSURE_STEP,
};
use dimmax_core::gradient::{grad_dimension, GradSettings};
use dimmax_core::measure::{auto_depth, lyapunov_by_operator};
use dimmax_core::operator::TransferOperator;
use dimmax_core::optimizer::{maximize_on_simplex, sweep_n, OptOutcome, OptSettings};
use dimmax_core::tail::{check_ratio_bounds, default_fit_range, fit_tail_exponent, PowerLawFit};
use dimmax_core::{dimension, EvalMethod, OperatorDiscretization, ProbVec};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;

const BATTERY_SIZE: usize = 20;
const BATTERY_DEGREE: usize = 6;
const CORRELATION_STEPS: usize = 40;
const CORRELATION_THRESHOLD: f64 = 1e-6;
const MIXED_PAIRS: usize = 4;
const MIXED_DELTA: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NotConverged,
    EvaluatorDisagreement,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::NotConverged => 3,
            Status::EvaluatorDisagreement => 4,
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub result: Value,
    pub summary: String,
    pub weights_csv: Option<String>,
    pub tail_tsv: Option<String>,
}

fn discretization(cfg: &RunConfig) -> Result<OperatorDiscretization, CliError> {
    Ok(OperatorDiscretization::chebyshev(cfg.nodes - 1)?)
}

fn opt_settings(cfg: &RunConfig) -> Result<OptSettings, CliError> {
    Ok(OptSettings {
        method: cfg.method.into(),
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        grad: GradSettings {
            disc: discretization(cfg)?,
            iterations: cfg.iters,
        },
        ..OptSettings::default()
    })
}

fn weights(cfg: &RunConfig) -> Result<ProbVec, CliError> {
    let w = cfg.weights.clone().expect("checked when resolving");
    Ok(ProbVec::new(w)?)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        CommandKind::Evaluate => evaluate(cfg),
        CommandKind::Optimize => optimize(cfg),
        CommandKind::Sweep => sweep(cfg),
        CommandKind::Diagnose => diagnose(cfg),
    }
}

fn evaluate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = weights(cfg)?;
    let disc = discretization(cfg)?;
    let operator = dimension(
        &p,
        &EvalMethod::Operator {
            iterations: cfg.iters,
            disc: disc.clone(),
        },
    )?;
    let (cylinder, cylinder_note) = match cfg.depth.or_else(|| auto_depth(&p)) {
        Some(depth) => match dimension(&p, &EvalMethod::Cylinder { depth }) {
            Ok(r) => (Some(r), None),
            Err(e @ dimmax_core::Error::BudgetExceeded { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        },
        None => (
            None,
            Some("no cylinder depth fits the enumeration budget".to_string()),
        ),
    };
    let agreement = cylinder.as_ref().map(|c| {
        let difference = (c.lyapunov - operator.lyapunov).abs();
        let bound = c.lyapunov_err + operator.lyapunov_err + cfg.agree_tol;
        json!({ "difference": difference, "bound": bound, "ok": difference <= bound })
    });
    let agrees = agreement
        .as_ref()
        .map_or(true, |a| a["ok"] == Value::Bool(true));
    let gradient = if p.is_interior() && operator.entropy > 0.0 {
        Some(grad_dimension(
            &p,
            &GradSettings {
                disc,
                iterations: cfg.iters,
            },
        )?)
    } else {
        None
    };
    let summary = format!(
        "h = {:.12}  lambda = {:.12}  d = {:.12}",
        operator.entropy, operator.lyapunov, operator.dimension
    );
    Ok(Outcome {
        status: if agrees {
            Status::Ok
        } else {
            Status::EvaluatorDisagreement
        },
        result: json!({
            "weights": p.weights(),
            "operator": operator,
            "cylinder": cylinder,
            "cylinder_note": cylinder_note,
            "agreement": agreement,
            "gradient": gradient,
        }),
        summary,
        weights_csv: None,
        tail_tsv: None,
    })
}

/// Fit range for plots: the asymptotic window when it holds enough points,
/// otherwise the whole support.
fn plot_fit(p: &ProbVec) -> Option<PowerLawFit> {
    let n = p.support_n();
    let (lo, hi) = default_fit_range(n);
    fit_tail_exponent(p, lo, hi)
        .or_else(|_| fit_tail_exponent(p, 1, n))
        .ok()
}

fn tail_plot(p: &ProbVec, fit: Option<&PowerLawFit>) -> String {
    let mut out = String::from("log_k\tlog_p_k\tfitted\n");
    for (i, &w) in p.weights().iter().enumerate() {
        let k = i + 1;
        let fitted = fit.map_or(f64::NAN, |f| f.predict(k));
        let _ = writeln!(
            out,
            "{:.17e}\t{:.17e}\t{:.17e}",
            (k as f64).ln(),
            w.ln(),
            fitted
        );
    }
    out
}

fn optimum_json(out: &OptOutcome) -> (Value, Option<PowerLawFit>) {
    let audit = check_ratio_bounds(&out.p, out.report.dimension, 10.0 * out.grad.crit_residual);
    let fit = plot_fit(&out.p);
    let value = json!({
        "n": out.n,
        "converged": out.converged,
        "iterations": out.state.iter,
        "method": out.state.method,
        "p": out.p.weights(),
        "report": out.report,
        "gradient": out.grad,
        "residual_history": out.state.residual_history,
        "dimension_history": out.state.dimension_history,
        "ratio_audit": audit,
        "tail_fit": fit,
    });
    (value, fit)
}

fn optimize(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.n.expect("checked when resolving");
    let out = maximize_on_simplex(n, None, &opt_settings(cfg)?)?;
    let (result, fit) = optimum_json(&out);
    let mut csv = String::from("k,p_k\n");
    for (i, w) in out.p.weights().iter().enumerate() {
        let _ = writeln!(csv, "{},{w:.17e}", i + 1);
    }
    Ok(Outcome {
        status: if out.converged {
            Status::Ok
        } else {
            Status::NotConverged
        },
        summary: format!(
            "n = {n}  d = {:.12}  residual = {:.3e}  {}",
            out.report.dimension,
            out.grad.crit_residual,
            if out.converged {
                "converged"
            } else {
                "NOT CONVERGED"
            }
        ),
        weights_csv: Some(csv),
        tail_tsv: Some(tail_plot(&out.p, fit.as_ref())),
        result,
    })
}

fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let list = cfg.n_list.clone().expect("checked when resolving");
    let res = sweep_n(&list, &opt_settings(cfg)?)?;
    let audits: Vec<Value> = res
        .per_n
        .iter()
        .map(|e| {
            json!({
                "n": e.n,
                "audit": check_ratio_bounds(&e.p, e.dimension, 10.0 * e.residual),
            })
        })
        .collect();
    let mut csv = String::from("n,k,p_k\n");
    for e in &res.per_n {
        for (i, w) in e.p.weights().iter().enumerate() {
            let _ = writeln!(csv, "{},{},{w:.17e}", e.n, i + 1);
        }
    }
    let last = res.per_n.last().expect("non-empty list");
    let fit = plot_fit(&last.p);
    let mut summary = String::new();
    for e in &res.per_n {
        let _ = writeln!(
            summary,
            "n = {:>4}  d = {:.12}  residual = {:.3e}{}",
            e.n,
            e.dimension,
            e.residual,
            if e.converged { "" } else { "  NOT CONVERGED" }
        );
    }
    let _ = write!(summary, "estimate = {:.12}", res.d_estimate);
    Ok(Outcome {
        status: if res.all_converged() {
            Status::Ok
        } else {
            Status::NotConverged
        },
        result: json!({
            "sweep": res,
            "ratio_audits": audits,
            "tail_fit": fit,
        }),
        summary,
        weights_csv: Some(csv),
        tail_tsv: Some(tail_plot(&last.p, fit.as_ref())),
    })
}

fn diagnose(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let disc = discretization(cfg)?;
    let (p, optimum, status) = match &cfg.weights {
        Some(_) => (weights(cfg)?, Value::Null, Status::Ok),
        None => {
            let n = cfg.n.expect("checked when resolving");
            let out = maximize_on_simplex(n, None, &opt_settings(cfg)?)?;
            let status = if out.converged {
                Status::Ok
            } else {
                Status::NotConverged
            };
            let summary = json!({
                "n": n,
                "converged": out.converged,
                "dimension": out.report.dimension,
                "crit_residual": out.grad.crit_residual,
            });
            (out.p, summary, status)
        }
    };

    let rows = TransferOperator::new(&p, &disc).row_sums();
    let stochasticity = rows.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);

    let battery = trig_battery(cfg.seed, BATTERY_SIZE, BATTERY_DEGREE);
    let contraction = contraction_check(&p, &disc, &battery)?;

    let mut pairs: Vec<(TestFunction, TestFunction)> = battery
        .chunks_exact(2)
        .take(3)
        .map(|c| (c[0].clone(), c[1].clone()))
        .collect();
    pairs.push((
        TestFunction::identity(),
        TestFunction::DigitIndicator { digit: 1 },
    ));
    let correlations = pairs
        .iter()
        .map(|(v, w)| {
            let c = correlation_decay(&p, v, w, CORRELATION_STEPS, &disc)?;
            Ok(json!({
                "v": v,
                "w": w,
                "first_below_threshold": c.first_below(CORRELATION_THRESHOLD),
                "decay": c,
            }))
        })
        .collect::<Result<Vec<Value>, CliError>>()?;

    let pressure = pressure_probe(&p, &disc, PRESSURE_STEP)?;
    let lam = lyapunov_by_operator(&p, &disc, cfg.iters)?;
    let support: Vec<usize> = (1..=p.support_n()).filter(|&k| p.get(k) > 0.0).collect();
    let mixed = if p.is_interior() {
        support
            .windows(2)
            .take(MIXED_PAIRS)
            .map(|w| {
                let m = mixed_partial(&p, &disc, w[1], w[0], MIXED_DELTA)?;
                Ok(json!({ "error": m.error(), "partial": m }))
            })
            .collect::<Result<Vec<Value>, CliError>>()?
    } else {
        Vec::new()
    };

    let summary = format!(
        "|L1 - 1| = {stochasticity:.2e}  contraction ratio max = {:.4} (flagged {}/{})  \
         derivative ratio max = {:.4}  P'(0) - lambda = {:.2e}",
        contraction.max_ratio,
        contraction.flagged.len(),
        battery.len(),
        contraction.max_ratio_deriv,
        pressure.d1 - lam.estimate,
    );
    Ok(Outcome {
        status,
        result: json!({
            "weights": p.weights(),
            "optimum": optimum,
            "stochasticity": stochasticity,
            "contraction": contraction,
            "contraction_passes": contraction.passes(),
            "correlations": correlations,
            "correlation_threshold": CORRELATION_THRESHOLD,
            "pressure": {
                "probe": pressure,
                "at_zero": pressure.at_zero(),
                "convex": pressure.is_convex(),
                "lyapunov": lam.estimate,
                "lyapunov_err": lam.err,
                "slope_error": (pressure.d1 - lam.estimate).abs(),
            },
            "mixed_partials": mixed,
        }),
        summary,
        weights_csv: None,
        tail_tsv: None,
    })
}
