//! Quantization rate of converged solutions across sample sizes and lambdas.
//!
//! Noiseless linear data, convex PAR over the integers truncated at
//! `ceil(2 ||x*||_inf)` with slopes `1, 2, ...` and a final wall.

use rayon::prelude::*;
use serde::Deserialize;

use super::config::{FloatAxis, SeedAxis};
use super::{fmt_f, CsvTable};
use crate::error::Result;
use crate::losses::CompositeProblem;
use crate::par::ParSpec;
use crate::solvers::{check_criticality, solve, SolverConfig, SolverKind};
use crate::statbench::{gen_dataset, SyntheticSpec, Task, Truth};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct Config {
    d: usize,
    n: Vec<usize>,
    lambda: FloatAxis,
    seeds: SeedAxis,
    algorithm: SolverKind,
    crit_tol: f64,
    snap_tol: f64,
    solver: SolverConfig,
}

pub const HEADER: [&str; 15] = [
    "n", "d", "lambda", "seed", "family", "max_level", "qrate", "bound", "train_loss", "objective",
    "crit_residual", "critical", "iterations", "converged", "status",
];

pub(super) fn run(cfg: &Config) -> Result<Vec<CsvTable>> {
    let lambdas = cfg.lambda.values()?;
    let seeds = cfg.seeds.values()?;
    let mut jobs = Vec::new();
    for &n in &cfg.n {
        for &lambda in &lambdas {
            for &seed in &seeds {
                jobs.push((n, lambda, seed));
            }
        }
    }
    let rows: Vec<Vec<String>> = jobs.par_iter().map(|&(n, lambda, seed)| job(cfg, n, lambda, seed)).collect();
    let mut table = CsvTable::new("quantsweep.csv", &HEADER);
    table.rows = rows;
    Ok(vec![table])
}

fn job(cfg: &Config, n: usize, lambda: f64, seed: u64) -> Vec<String> {
    let key = vec![n.to_string(), cfg.d.to_string(), fmt_f(lambda), seed.to_string(), "convex".to_string()];
    match solve_cell(cfg, n, lambda, seed) {
        Ok(mut cells) => {
            let mut row = key;
            row.append(&mut cells);
            row.push("ok".into());
            row
        }
        Err(e) => {
            let mut row = key;
            row.extend(std::iter::repeat_n(String::new(), HEADER.len() - 6));
            row.push(e.kind().into());
            row
        }
    }
}

fn solve_cell(cfg: &Config, n: usize, lambda: f64, seed: u64) -> Result<Vec<String>> {
    let spec = SyntheticSpec { n, d: cfg.d, task: Task::Linear, noise_sigma: 0.0, truth: Truth::DenseGaussian, seed };
    let ds = gen_dataset(&spec)?;
    let max_level = (2.0 * ds.truth.amax()).ceil().max(1.0) as usize;
    let par = ParSpec::convex_integer(max_level);
    let problem = CompositeProblem::new(ds.loss()?, par.clone(), lambda)?;
    let out = solve(cfg.algorithm, &problem, &cfg.solver)?;
    let crit = check_criticality(&problem, &out.x, cfg.crit_tol)?;
    let qrate = par.quantization_rate(out.x.as_slice(), cfg.snap_tol).rate;
    let bound = (1.0 - n as f64 / cfg.d as f64).max(0.0);
    Ok(vec![
        max_level.to_string(),
        fmt_f(qrate),
        fmt_f(bound),
        fmt_f(problem.loss.value(&out.x)?),
        fmt_f(out.objective),
        fmt_f(crit.residual),
        crit.is_critical.to_string(),
        out.iterations.to_string(),
        out.converged.to_string(),
    ])
}
