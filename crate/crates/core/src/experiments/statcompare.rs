//! Estimation error of classical penalties against their PAR approximants
//! on shared synthetic datasets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SeedAxis;
use super::{fmt_f, CsvTable};
use crate::error::{ParoError, Result};
use crate::losses::CompositeProblem;
use crate::par::{par_approx_classic, ClassicTarget, ParSpec};
use crate::regularizer::{LHalf, Regularizer, SquaredL2};
use crate::solvers::{solve, SolverConfig, SolverKind};
use crate::statbench::{
    error_report, gen_dataset, noise_lambda, recommended_ridge_lambda, ErrorReport, ridge_closed_form, RegressionDataset, SyntheticSpec, Task,
    Truth,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Penalty {
    #[serde(rename = "ridge")]
    Ridge,
    #[serde(rename = "l1")]
    L1,
    #[serde(rename = "l0.5")]
    LHalf,
}

impl Penalty {
    pub fn name(self) -> &'static str {
        match self {
            Penalty::Ridge => "ridge",
            Penalty::L1 => "l1",
            Penalty::LHalf => "l0.5",
        }
    }

    pub fn target(self) -> ClassicTarget {
        match self {
            Penalty::Ridge => ClassicTarget::Square,
            Penalty::L1 => ClassicTarget::Abs,
            Penalty::LHalf => ClassicTarget::Sqrt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaChoice {
    Value(f64),
    Rule(LambdaRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaRule {
    /// Ridge: `sigma / ||x*|| * sqrt(tr(Sigma_hat) / n)`.
    #[serde(rename = "recommended")]
    Recommended,
    /// Lasso: `||grad f(x*)||_inf / (2 nu)` at the true parameter (an oracle).
    #[serde(rename = "noise-bound")]
    NoiseBound,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Lambdas {
    ridge: LambdaChoice,
    l1: LambdaChoice,
    #[serde(rename = "l0.5")]
    lhalf: LambdaChoice,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PerTask<T> {
    linear: T,
    logistic: T,
}

impl<T> PerTask<T> {
    fn get(&self, task: Task) -> &T {
        match task {
            Task::Linear => &self.linear,
            Task::Logistic => &self.logistic,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct Config {
    d: usize,
    n: Vec<usize>,
    noise_sigma: f64,
    gaps: Vec<f64>,
    seeds: SeedAxis,
    tasks: Vec<Task>,
    regularizers: Vec<Penalty>,
    algorithm: SolverKind,
    max_level: f64,
    truth: PerTask<Truth>,
    lambda: PerTask<Lambdas>,
    solver: SolverConfig,
}

pub const HEADER: [&str; 14] = [
    "task", "regularizer", "approximation", "gap", "n", "d", "lambda", "seed", "l2_error", "mahalanobis_error",
    "qrate", "objective", "iterations", "status",
];

pub(super) fn run(cfg: &Config) -> Result<Vec<CsvTable>> {
    if cfg.gaps.is_empty() || cfg.n.is_empty() || cfg.tasks.is_empty() || cfg.regularizers.is_empty() {
        return Err(ParoError::InvalidConfig("statcompare sweep axes must be non-empty".into()));
    }
    let seeds = cfg.seeds.values()?;
    let mut jobs = Vec::new();
    for &task in &cfg.tasks {
        for &n in &cfg.n {
            for &seed in &seeds {
                for &pen in &cfg.regularizers {
                    jobs.push((task, n, seed, pen));
                }
            }
        }
    }
    let blocks: Vec<Vec<Vec<String>>> = jobs.par_iter().map(|&(t, n, s, p)| job(cfg, t, n, s, p)).collect();
    let mut table = CsvTable::new("statcompare.csv", &HEADER);
    table.rows = blocks.into_iter().flatten().collect();
    Ok(vec![table])
}

fn job(cfg: &Config, task: Task, n: usize, seed: u64, pen: Penalty) -> Vec<Vec<String>> {
    let key = |approx: &str, gap: Option<f64>, lambda: f64| {
        vec![
            task.name().to_string(),
            pen.name().to_string(),
            approx.to_string(),
            gap.map(fmt_f).unwrap_or_default(),
            n.to_string(),
            cfg.d.to_string(),
            fmt_f(lambda),
            seed.to_string(),
        ]
    };
    let spec = SyntheticSpec {
        n,
        d: cfg.d,
        task,
        noise_sigma: cfg.noise_sigma,
        truth: cfg.truth.get(task).clone(),
        seed,
    };
    let prepared = gen_dataset(&spec).and_then(|ds| {
        let lambda = resolve_lambda(cfg, &ds, task, pen)?;
        Ok((ds, lambda))
    });
    let (ds, lambda) = match prepared {
        Ok(v) => v,
        Err(e) => return vec![failed(key("classic", None, f64::NAN), e)],
    };

    let mut rows = Vec::new();
    let classic = fit_classic(cfg, &ds, pen, lambda);
    rows.push(match classic {
        Ok((iters, report)) => finished(key("classic", None, lambda), report, iters),
        Err(e) => failed(key("classic", None, lambda), e),
    });
    for &gap in &cfg.gaps {
        let k = key("par", Some(gap), lambda);
        rows.push(match fit_par(cfg, &ds, pen, gap, lambda) {
            Ok((iters, report)) => finished(k, report, iters),
            Err(e) => failed(k, e),
        });
    }
    rows
}

fn resolve_lambda(cfg: &Config, ds: &RegressionDataset, task: Task, pen: Penalty) -> Result<f64> {
    let l = cfg.lambda.get(task);
    let choice = match pen {
        Penalty::Ridge => l.ridge,
        Penalty::L1 => l.l1,
        Penalty::LHalf => l.lhalf,
    };
    match (choice, task, pen) {
        (LambdaChoice::Value(v), _, _) => Ok(v),
        (LambdaChoice::Rule(LambdaRule::Recommended), Task::Linear, Penalty::Ridge) => {
            recommended_ridge_lambda(ds, 0.0, cfg.noise_sigma, ds.truth.norm())
        }
        (LambdaChoice::Rule(LambdaRule::NoiseBound), _, Penalty::L1) => {
            let nu = par_approx_classic(pen.target(), cfg.gaps[0], cfg.max_level)?.nu();
            noise_lambda(ds, nu)
        }
        (LambdaChoice::Rule(rule), _, _) => Err(ParoError::InvalidConfig(format!(
            "lambda rule {rule:?} does not apply to {} {}",
            task.name(),
            pen.name()
        ))),
    }
}

/// Iteration count and error report.
type Fitted = (usize, ErrorReport);

fn fit_iterative<R: Regularizer>(cfg: &Config, ds: &RegressionDataset, reg: R, lambda: f64) -> Result<Fitted> {
    let problem = CompositeProblem::new(ds.loss()?, reg, lambda)?;
    let out = solve(cfg.algorithm, &problem, &cfg.solver)?;
    let report = error_report(ds, &out.x, &problem.reg, lambda)?;
    Ok((out.iterations, report))
}

fn fit_classic(cfg: &Config, ds: &RegressionDataset, pen: Penalty, lambda: f64) -> Result<Fitted> {
    match (pen, ds.spec.task) {
        (Penalty::Ridge, Task::Linear) => {
            let x = ridge_closed_form(ds, lambda)?;
            let report = error_report(ds, &x, &SquaredL2, lambda)?;
            Ok((0, report))
        }
        (Penalty::Ridge, Task::Logistic) => fit_iterative(cfg, ds, SquaredL2, lambda),
        (Penalty::L1, _) => fit_iterative(cfg, ds, ParSpec::l1(), lambda),
        (Penalty::LHalf, _) => fit_iterative(cfg, ds, LHalf, lambda),
    }
}

fn fit_par(cfg: &Config, ds: &RegressionDataset, pen: Penalty, gap: f64, lambda: f64) -> Result<Fitted> {
    let par = par_approx_classic(pen.target(), gap, cfg.max_level)?;
    fit_iterative(cfg, ds, par, lambda)
}

fn finished(mut key: Vec<String>, r: ErrorReport, iterations: usize) -> Vec<String> {
    key.extend([
        fmt_f(r.l2_error),
        fmt_f(r.mahalanobis_error),
        fmt_f(r.qrate),
        fmt_f(r.objective),
        iterations.to_string(),
        "ok".into(),
    ]);
    key
}

fn failed(mut key: Vec<String>, e: ParoError) -> Vec<String> {
    key.extend(std::iter::repeat_n(String::new(), HEADER.len() - key.len() - 1));
    key.push(e.kind().into());
    key
}
