//! One composite problem, one solver: trace, solution and a summary row.

use std::path::PathBuf;

use serde::Deserialize;

use super::{fmt_f, CsvTable};
use crate::error::Result;
use crate::losses::{load_csv, CompositeProblem, LeastSquaresLoss, LogisticLoss, Loss};
use crate::par::{ParConfig, DEFAULT_QUANT_TOL};
use crate::solvers::{check_criticality, solve, IterateTrace, SolverConfig, SolverKind, TRACE_HEADER};
use crate::statbench::{gen_dataset, SyntheticSpec, Task};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum DataSource {
    File { csv: PathBuf, task: Task },
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct Config {
    lambda: f64,
    algorithm: SolverKind,
    crit_tol: f64,
    data: DataSource,
    par: ParConfig,
    solver: SolverConfig,
}

pub(super) fn run(cfg: &Config) -> Result<Vec<CsvTable>> {
    let loss = match &cfg.data {
        DataSource::File { csv, task } => {
            let (a, b) = load_csv(csv)?;
            match task {
                Task::Linear => Loss::LeastSquares(LeastSquaresLoss::new(a, b)?),
                Task::Logistic => Loss::Logistic(LogisticLoss::new(a, b)?),
            }
        }
        DataSource::Synthetic(spec) => gen_dataset(spec)?.loss()?,
    };
    let par = cfg.par.build()?;
    let problem = CompositeProblem::new(loss, par.clone(), cfg.lambda)?;
    let out = solve(cfg.algorithm, &problem, &cfg.solver)?;
    let crit = check_criticality(&problem, &out.x, cfg.crit_tol)?;
    let report = par.quantization_rate(out.x.as_slice(), DEFAULT_QUANT_TOL);

    let mut trace = CsvTable::new("solve_trace.csv", &TRACE_HEADER);
    trace.rows = out.trace.rows.iter().map(|r| IterateTrace::csv_record(r).to_vec()).collect();

    let mut solution = CsvTable::new("solve_solution.csv", &["index", "value", "nearest_level", "quantized"]);
    for (i, (&v, &q)) in out.x.iter().zip(&report.quantized_mask).enumerate() {
        solution.rows.push(vec![i.to_string(), fmt_f(v), fmt_f(par.nearest_level(v)), q.to_string()]);
    }

    let mut summary = CsvTable::new(
        "solve_summary.csv",
        &["algorithm", "family", "lambda", "iterations", "converged", "F", "f", "qrate", "crit_residual", "critical"],
    );
    summary.rows.push(vec![
        cfg.algorithm.to_string(),
        par.family().to_string(),
        fmt_f(cfg.lambda),
        out.iterations.to_string(),
        out.converged.to_string(),
        fmt_f(out.objective),
        fmt_f(problem.loss.value(&out.x)?),
        fmt_f(report.rate),
        fmt_f(crit.residual),
        crit.is_critical.to_string(),
    ]);
    Ok(vec![summary, trace, solution])
}
