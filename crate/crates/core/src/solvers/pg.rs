use nalgebra::DVector;

use super::trace::Recorder;
use super::{prox_step, rounding_slack, Observer, SolveOutput, SolverConfig, MAX_BACKTRACKS};
use crate::error::{ParoError, Result};
use crate::losses::CompositeProblem;
use crate::regularizer::Regularizer;

/// `x+ = prox_{eta lambda psi}(x - eta grad f(x))`, with optional
/// backtracking on `F(x+) <= F(x) - (c / eta) ||x+ - x||^2`.
pub fn proximal_gradient<R: Regularizer>(
    problem: &CompositeProblem<R>,
    config: &SolverConfig,
) -> Result<SolveOutput> {
    run(problem, config, &mut |_, _| {})
}

/// Outcome of one (possibly backtracked) proximal step from an anchor point.
pub(crate) struct Step {
    pub x: DVector<f64>,
    pub loss: f64,
    pub objective: f64,
    pub eta: f64,
}

/// Proximal step from `anchor` with sufficient decrease measured against
/// `anchor_objective`.
pub(crate) fn backtracked_step<R: Regularizer>(
    problem: &CompositeProblem<R>,
    config: &SolverConfig,
    iter: usize,
    eta0: f64,
    anchor: &DVector<f64>,
    anchor_objective: f64,
    grad: &DVector<f64>,
) -> Result<Step> {
    let mut eta = eta0;
    let mut backtracks = 0;
    loop {
        let x = prox_step(problem, eta, anchor, grad)?;
        let loss = problem.loss.value(&x)?;
        let objective = loss + problem.weighted_penalty(&x);
        if !config.line_search {
            return Ok(Step { x, loss, objective, eta });
        }
        let dist2 = (&x - anchor).norm_squared();
        let target = anchor_objective - config.sufficient_decrease_const / eta * dist2;
        if objective <= target + rounding_slack(anchor_objective) {
            return Ok(Step { x, loss, objective, eta });
        }
        backtracks += 1;
        if backtracks > MAX_BACKTRACKS {
            return Err(ParoError::LineSearchExhausted { iter, backtracks, step: eta });
        }
        eta *= config.backtrack_factor;
    }
}

pub(crate) fn run<R: Regularizer>(
    problem: &CompositeProblem<R>,
    config: &SolverConfig,
    observer: Observer<'_>,
) -> Result<SolveOutput> {
    config.validate()?;
    let eta0 = config.resolve_step(problem.loss.lipschitz_bound());
    let mut x = config.initial_point(problem.loss.d());
    let (mut loss, mut grad) = problem.loss.eval(&x)?;
    let mut objective = loss + problem.weighted_penalty(&x);
    if !objective.is_finite() {
        return Err(ParoError::InfiniteStart);
    }
    let mut rec = Recorder::new(config.crit_every);
    rec.push(problem, 0, &x, loss, f64::NAN, f64::NAN);
    observer(0, &x);

    let mut converged = false;
    let mut iterations = 0;
    for t in 1..=config.max_iters {
        let step = backtracked_step(problem, config, t, eta0, &x, objective, &grad)?;
        let step_norm = (&step.x - &x).norm();
        x = step.x;
        objective = step.objective;
        loss = step.loss;
        grad = problem.loss.eval(&x)?.1;
        rec.push(problem, t, &x, loss, step.eta, step_norm);
        observer(t, &x);
        iterations = t;
        if step_norm <= config.tol_residual {
            converged = true;
            break;
        }
    }
    let trace = rec.finish(problem, &x);
    Ok(SolveOutput { x, trace, iterations, converged, objective })
}
