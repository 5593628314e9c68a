//! PG, accelerated PG and ADMM on the three PAR families.
//!
//! Levels are the integers up to `ceil(2 ||x*||_inf)`: convex with slopes
//! `1, 2, ...`, a unit staircase, and distance to the nearest level.

use rayon::prelude::*;
use serde::Deserialize;

use super::config::SeedAxis;
use super::{fmt_f, CsvTable};
use crate::error::{ParoError, Result};
use crate::losses::CompositeProblem;
use crate::par::{Family, ParSpec};
use crate::solvers::{solve, IterateTrace, SolveOutput, SolverConfig, SolverKind};
use crate::statbench::{gen_dataset, RegressionDataset, SyntheticSpec, Task, Truth};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct Config {
    d: usize,
    n: usize,
    noise_sigma: f64,
    lambda: f64,
    seeds: SeedAxis,
    families: Vec<Family>,
    gap_threshold: f64,
    solver: SolverConfig,
}

const SUMMARY: [&str; 15] = [
    "family", "seed", "solver", "lambda", "n", "d", "iterations", "converged", "final_F", "best_F", "F_star",
    "final_qrate", "final_crit_residual", "iters_to_gap", "status",
];

/// Integer level set shared by the three families.
pub fn integer_par(family: Family, max_level: usize) -> Result<ParSpec> {
    match family {
        Family::Convex => Ok(ParSpec::convex_integer(max_level)),
        Family::QuasiconvexUniform => ParSpec::quasiconvex_uniform(1.0, 1.0),
        Family::NonconvexNearest => {
            let m = max_level as i64;
            let levels: Vec<f64> = (-m..=m).map(|k| k as f64).collect();
            ParSpec::nonconvex_nearest(&levels)
        }
        Family::General => Err(ParoError::InvalidConfig("the general family has no integer preset".into())),
    }
}

pub fn dataset(n: usize, d: usize, sigma: f64, seed: u64) -> Result<RegressionDataset> {
    gen_dataset(&SyntheticSpec { n, d, task: Task::Linear, noise_sigma: sigma, truth: Truth::DenseGaussian, seed })
}

pub(super) fn run(cfg: &Config) -> Result<Vec<CsvTable>> {
    let seeds = cfg.seeds.values()?;
    let jobs: Vec<(Family, u64)> = cfg.families.iter().flat_map(|&f| seeds.iter().map(move |&s| (f, s))).collect();
    let results: Vec<Result<Vec<(SolverKind, Result<SolveOutput>)>>> =
        jobs.par_iter().map(|&(family, seed)| job(cfg, family, seed)).collect();

    let mut summary = CsvTable::new("solvers_summary.csv", &SUMMARY);
    let mut header = vec!["family", "seed", "solver"];
    header.extend(crate::solvers::TRACE_HEADER);
    let mut traces = CsvTable::new("solvers_traces.csv", &header);

    for (&(family, seed), res) in jobs.iter().zip(results) {
        let runs = res?;
        let f_star = runs
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok())
            .flat_map(|o| o.trace.rows.iter().map(|r| r.objective))
            .fold(f64::INFINITY, f64::min);
        for (kind, r) in runs {
            let key = vec![family.to_string(), seed.to_string(), kind.to_string()];
            match r {
                Ok(out) => {
                    let last = out.trace.last().copied().expect("trace has a start row");
                    let best = out.trace.rows.iter().map(|r| r.objective).fold(f64::INFINITY, f64::min);
                    let hit = out.trace.rows.iter().find(|r| r.objective - f_star <= cfg.gap_threshold);
                    let mut row = key.clone();
                    row.extend([
                        fmt_f(cfg.lambda),
                        cfg.n.to_string(),
                        cfg.d.to_string(),
                        out.iterations.to_string(),
                        out.converged.to_string(),
                        fmt_f(out.objective),
                        fmt_f(best),
                        fmt_f(f_star),
                        fmt_f(last.qrate),
                        last.crit_residual.map(fmt_f).unwrap_or_default(),
                        hit.map(|r| r.iter.to_string()).unwrap_or_default(),
                        "ok".into(),
                    ]);
                    summary.rows.push(row);
                    push_trace(&mut traces, &key, &out.trace);
                }
                Err(e) => {
                    let mut row = key;
                    row.extend([fmt_f(cfg.lambda), cfg.n.to_string(), cfg.d.to_string()]);
                    row.extend(std::iter::repeat_n(String::new(), SUMMARY.len() - 7));
                    row.push(e.kind().into());
                    summary.rows.push(row);
                }
            }
        }
    }
    Ok(vec![summary, traces])
}

fn push_trace(table: &mut CsvTable, key: &[String], trace: &IterateTrace) {
    for r in &trace.rows {
        let mut row = key.to_vec();
        row.extend(IterateTrace::csv_record(r));
        table.rows.push(row);
    }
}

fn job(cfg: &Config, family: Family, seed: u64) -> Result<Vec<(SolverKind, Result<SolveOutput>)>> {
    let ds = dataset(cfg.n, cfg.d, cfg.noise_sigma, seed)?;
    let max_level = (2.0 * ds.truth.amax()).ceil().max(1.0) as usize;
    let par = integer_par(family, max_level)?;
    let problem = CompositeProblem::new(ds.loss()?, par, cfg.lambda)?;
    Ok(SolverKind::ALL.iter().map(|&k| (k, solve(k, &problem, &cfg.solver))).collect())
}
