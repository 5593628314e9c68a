//! Quality of hard-quantized iterates `f(Q(x^t))` for the three PAR families
//! over a shared integer level set.

use rayon::prelude::*;
use serde::Deserialize;

use super::config::{FloatAxis, SeedAxis};
use super::solvers::{dataset, integer_par};
use super::{fmt_f, CsvTable};
use crate::error::Result;
use crate::losses::CompositeProblem;
use crate::par::Family;
use crate::solvers::{solve_observed, SolverConfig, SolverKind};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct Config {
    d: usize,
    n: usize,
    noise_sigma: f64,
    lambda: FloatAxis,
    seeds: SeedAxis,
    families: Vec<Family>,
    algorithm: SolverKind,
    solver: SolverConfig,
}

const CURVE: [&str; 6] = ["family", "lambda", "seed", "iter", "f_quantized", "F"];
const SUMMARY: [&str; 9] =
    ["family", "lambda", "seed", "final_f_quantized", "best_f_quantized", "best_iter", "final_qrate", "is_best_lambda", "status"];

struct Cell {
    curve: Vec<(usize, f64, f64)>,
    final_qrate: f64,
}

pub(super) fn run(cfg: &Config) -> Result<Vec<CsvTable>> {
    let lambdas = cfg.lambda.values()?;
    let seeds = cfg.seeds.values()?;
    let mut jobs = Vec::new();
    for &family in &cfg.families {
        for &seed in &seeds {
            for &lambda in &lambdas {
                jobs.push((family, seed, lambda));
            }
        }
    }
    let cells: Vec<Result<Cell>> = jobs.par_iter().map(|&(f, s, l)| job(cfg, f, s, l)).collect();

    let mut curve = CsvTable::new("parcompare_curves.csv", &CURVE);
    let mut summary = CsvTable::new("parcompare_summary.csv", &SUMMARY);
    // best lambda (> 0) per (family, seed), by best f(Q(x))
    let best_of = |cell: &Cell| cell.curve.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let mut winners = Vec::new();
    for (i, &(family, seed, lambda)) in jobs.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        if let Ok(cell) = &cells[i] {
            let score = best_of(cell);
            match winners.iter_mut().find(|(f, s, _, _)| *f == family && *s == seed) {
                Some(w) if score < w.3 => *w = (family, seed, i, score),
                Some(_) => {}
                None => winners.push((family, seed, i, score)),
            }
        }
    }
    for (i, (&(family, seed, lambda), cell)) in jobs.iter().zip(&cells).enumerate() {
        let key = vec![family.to_string(), fmt_f(lambda), seed.to_string()];
        match cell {
            Ok(c) => {
                for &(iter, fq, big_f) in &c.curve {
                    let mut row = key.clone();
                    row.extend([iter.to_string(), fmt_f(fq), fmt_f(big_f)]);
                    curve.rows.push(row);
                }
                let (best_iter, best) = c
                    .curve
                    .iter()
                    .fold((0, f64::INFINITY), |acc, &(it, fq, _)| if fq < acc.1 { (it, fq) } else { acc });
                let last = c.curve.last().map(|c| c.1).unwrap_or(f64::NAN);
                let is_best = winners.iter().any(|w| w.2 == i);
                let mut row = key;
                row.extend([
                    fmt_f(last),
                    fmt_f(best),
                    best_iter.to_string(),
                    fmt_f(c.final_qrate),
                    is_best.to_string(),
                    "ok".into(),
                ]);
                summary.rows.push(row);
            }
            Err(e) => {
                let mut row = key;
                row.extend(std::iter::repeat_n(String::new(), SUMMARY.len() - 4));
                row.push(e.kind().into());
                summary.rows.push(row);
            }
        }
    }
    Ok(vec![summary, curve])
}

fn job(cfg: &Config, family: Family, seed: u64, lambda: f64) -> Result<Cell> {
    let ds = dataset(cfg.n, cfg.d, cfg.noise_sigma, seed)?;
    let max_level = (2.0 * ds.truth.amax()).ceil().max(1.0) as usize;
    let quantizer = integer_par(Family::NonconvexNearest, max_level)?;
    let par = integer_par(family, max_level)?;
    let problem = CompositeProblem::new(ds.loss()?, par, lambda)?;
    let mut curve = Vec::new();
    let mut failure = None;
    let out = solve_observed(cfg.algorithm, &problem, &cfg.solver, &mut |iter, x| {
        let q = nalgebra::DVector::from_vec(quantizer.project(x.as_slice()));
        match (problem.loss.value(&q), problem.objective(x)) {
            (Ok(fq), Ok(big_f)) => curve.push((iter, fq, big_f)),
            (Err(e), _) | (_, Err(e)) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let final_qrate = quantizer.quantization_rate(out.x.as_slice(), crate::par::DEFAULT_QUANT_TOL).rate;
    Ok(Cell { curve, final_qrate })
}

#[cfg(test)]
mod tests {
    use crate::par::ParSpec;

    #[test]
    fn projection_is_idempotent() {
        let q = ParSpec::nonconvex_nearest(&[-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap();
        let x = [0.5, -0.5, 1.49, -7.0, 2.2, 0.0];
        let once = q.project(&x);
        assert_eq!(once, vec![0.0, 0.0, 1.0, -2.0, 2.0, 0.0]);
        assert_eq!(q.project(&once), once);
    }
}
