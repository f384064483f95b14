//! Flags, the flat `key = value` config file, and the resolved run
//! configuration.

use crate::error::CliError;
use clap::{Args, ValueEnum};
use dimmax_core::optimizer::AscentMethod;
use dimmax_core::ProbVec;
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const MAX_N: usize = 4096;
pub const MAX_DEPTH: usize = 40;
pub const MAX_ITERS: usize = 10_000;
pub const MIN_NODES: usize = 9;
pub const MAX_NODES: usize = 1025;
pub const MAX_OPT_ITER: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Evaluate,
    Optimize,
    Sweep,
    Diagnose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Tsv,
    #[default]
    All,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::All)
    }
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::All)
    }
    pub fn tsv(self) -> bool {
        matches!(self, Format::Tsv | Format::All)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    ExpGradient,
    FixedPoint,
}

impl From<Method> for AscentMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::ExpGradient => AscentMethod::ExpGradient,
            Method::FixedPoint => AscentMethod::FixedPoint,
        }
    }
}

/// Options shared by every command. Unset flags fall back to the config
/// file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Alphabet size n (digits 1..=n).
    #[arg(long)]
    pub n: Option<usize>,
    /// Increasing list of alphabet sizes, e.g. 2,4,8.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Cylinder depth for the cylinder evaluator.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Transfer-operator iterations.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Chebyshev node count.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Criticality tolerance for the optimizer.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Extra tolerance allowed between the two Lyapunov evaluators.
    #[arg(long)]
    pub agree_tol: Option<f64>,
    /// Seed for randomized test batteries.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Digit weights as a comma list, or @path to a file of numbers.
    #[arg(long)]
    pub weights: Option<String>,
    /// Directory for output files.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Ascent rule for optimize and sweep.
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Iteration cap for the optimizer.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Flat key = value file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse {key} = {value:?}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value.trim(), true)
        .map_err(|_| CliError::Config(format!("invalid {key} = {value:?}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>, CliError> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl Flags {
    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key.replace('_', "-").as_str() {
            "n" => self.n = Some(parse(key, value)?),
            "n-list" => self.n_list = Some(parse_list(key, value)?),
            "depth" => self.depth = Some(parse(key, value)?),
            "iters" => self.iters = Some(parse(key, value)?),
            "nodes" => self.nodes = Some(parse(key, value)?),
            "tol" => self.tol = Some(parse(key, value)?),
            "agree-tol" => self.agree_tol = Some(parse(key, value)?),
            "seed" => self.seed = Some(parse(key, value)?),
            "weights" => self.weights = Some(value.trim().to_string()),
            "out-dir" => self.out_dir = Some(PathBuf::from(value.trim())),
            "format" => self.format = Some(parse_enum(key, value)?),
            "method" => self.method = Some(parse_enum(key, value)?),
            "max-iter" => self.max_iter = Some(parse(key, value)?),
            _ => return Err(CliError::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Flags, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut flags = Flags::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    i + 1
                ))
            })?;
            flags.set(k.trim(), v)?;
        }
        Ok(flags)
    }

    /// `self` with unset fields taken from `base`.
    pub fn over(self, base: Flags) -> Flags {
        Flags {
            n: self.n.or(base.n),
            n_list: self.n_list.or(base.n_list),
            depth: self.depth.or(base.depth),
            iters: self.iters.or(base.iters),
            nodes: self.nodes.or(base.nodes),
            tol: self.tol.or(base.tol),
            agree_tol: self.agree_tol.or(base.agree_tol),
            seed: self.seed.or(base.seed),
            weights: self.weights.or(base.weights),
            out_dir: self.out_dir.or(base.out_dir),
            format: self.format.or(base.format),
            method: self.method.or(base.method),
            max_iter: self.max_iter.or(base.max_iter),
            config: self.config,
        }
    }
}

/// Fully resolved configuration. Output location and format are not part of
/// the serialized form, so reports from different directories compare equal.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub depth: Option<usize>,
    pub iters: usize,
    pub nodes: usize,
    pub tol: f64,
    pub agree_tol: f64,
    pub seed: u64,
    pub weights: Option<Vec<f64>>,
    pub method: Method,
    pub max_iter: usize,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub format: Format,
}

fn read_weights(spec: &str) -> Result<Vec<f64>, CliError> {
    let text = match spec.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read weights file {path}: {e}")))?,
        None => spec.to_string(),
    };
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse("weights", s))
        .collect()
}

fn check_range<T: PartialOrd + std::fmt::Display>(
    key: &str,
    v: T,
    lo: T,
    hi: T,
) -> Result<T, CliError> {
    if v < lo || v > hi {
        return Err(CliError::Config(format!(
            "{key} = {v} outside [{lo}, {hi}]"
        )));
    }
    Ok(v)
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::Config(format!(
            "{key} must be a positive number, got {v}"
        )));
    }
    Ok(v)
}

impl RunConfig {
    pub fn resolve(command: CommandKind, cli: Flags) -> Result<RunConfig, CliError> {
        let flags = match &cli.config {
            Some(path) => cli.clone().over(Flags::from_file(path)?),
            None => cli,
        };
        let n = flags.n.map(|n| check_range("n", n, 2, MAX_N)).transpose()?;
        let n_list = match flags.n_list {
            Some(list) => {
                if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(CliError::Config(format!(
                        "n-list must be non-empty and strictly increasing, got {list:?}"
                    )));
                }
                for &n in &list {
                    check_range("n-list entry", n, 2, MAX_N)?;
                }
                Some(list)
            }
            None => None,
        };
        let weights = flags.weights.as_deref().map(read_weights).transpose()?;
        if let Some(w) = &weights {
            ProbVec::new(w.clone()).map_err(|e| CliError::Config(e.to_string()))?;
        }
        let cfg = RunConfig {
            command,
            n,
            n_list,
            depth: flags
                .depth
                .map(|d| check_range("depth", d, 1, MAX_DEPTH))
                .transpose()?,
            iters: check_range("iters", flags.iters.unwrap_or(60), 1, MAX_ITERS)?,
            nodes: check_range("nodes", flags.nodes.unwrap_or(65), MIN_NODES, MAX_NODES)?,
            tol: positive("tol", flags.tol.unwrap_or(1e-8))?,
            agree_tol: positive("agree-tol", flags.agree_tol.unwrap_or(1e-8))?,
            seed: flags.seed.unwrap_or(0),
            weights,
            method: flags.method.unwrap_or_default(),
            max_iter: check_range("max-iter", flags.max_iter.unwrap_or(500), 1, MAX_OPT_ITER)?,
            out_dir: flags.out_dir.unwrap_or_else(|| PathBuf::from("dimmax-out")),
            format: flags.format.unwrap_or_default(),
        };
        match command {
            CommandKind::Evaluate if cfg.weights.is_none() => {
                Err(CliError::Config("evaluate needs --weights".into()))
            }
            CommandKind::Optimize if cfg.n.is_none() => {
                Err(CliError::Config("optimize needs --n".into()))
            }
            CommandKind::Sweep if cfg.n_list.is_none() => {
                Err(CliError::Config("sweep needs --n-list".into()))
            }
            CommandKind::Diagnose if cfg.weights.is_none() && cfg.n.is_none() => {
                Err(CliError::Config("diagnose needs --weights or --n".into()))
            }
            _ => Ok(cfg),
        }
    }
}
