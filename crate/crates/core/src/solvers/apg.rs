use super::pg::backtracked_step;
use super::trace::Recorder;
use super::{Observer, SolveOutput, SolverConfig};
use crate::error::{ParoError, Result};
use crate::losses::CompositeProblem;
use crate::regularizer::Regularizer;

/// Proximal gradient from the extrapolated point
/// `y = x_t + beta_t (x_t - x_{t-1})`.
///
/// The line-search test is taken at `y`. With `restart`, a step that raises
/// `F` is redone from `x_t` without momentum and the momentum counter resets.
pub fn accelerated_proximal_gradient<R: Regularizer>(
    problem: &CompositeProblem<R>,
    config: &SolverConfig,
) -> Result<SolveOutput> {
    run(problem, config, &mut |_, _| {})
}

pub(crate) fn run<R: Regularizer>(
    problem: &CompositeProblem<R>,
    config: &SolverConfig,
    observer: Observer<'_>,
) -> Result<SolveOutput> {
    config.validate()?;
    let eta0 = config.resolve_step(problem.loss.lipschitz_bound());
    let mut x = config.initial_point(problem.loss.d());
    let mut x_prev = x.clone();
    let loss0 = problem.loss.value(&x)?;
    let mut objective = loss0 + problem.weighted_penalty(&x);
    if !objective.is_finite() {
        return Err(ParoError::InfiniteStart);
    }
    let mut rec = Recorder::new(config.crit_every);
    rec.push(problem, 0, &x, loss0, f64::NAN, f64::NAN);
    observer(0, &x);

    let mut momentum_t = 1;
    let mut converged = false;
    let mut iterations = 0;
    for t in 1..=config.max_iters {
        let beta = config.momentum.beta(momentum_t);
        let y = &x + (&x - &x_prev) * beta;
        let (fy, gy) = problem.loss.eval(&y)?;
        let fy_total = fy + problem.weighted_penalty(&y);
        let mut step = backtracked_step(problem, config, t, eta0, &y, fy_total, &gy)?;
        if config.restart && beta != 0.0 && step.objective > objective {
            let (_, gx) = problem.loss.eval(&x)?;
            step = backtracked_step(problem, config, t, eta0, &x, objective, &gx)?;
            momentum_t = 1;
        }
        let step_norm = (&step.x - &x).norm();
        x_prev = std::mem::replace(&mut x, step.x);
        objective = step.objective;
        momentum_t += 1;
        rec.push(problem, t, &x, step.loss, step.eta, step_norm);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::{LeastSquaresLoss, Loss};
    use crate::par::ParSpec;
    use crate::solvers::{proximal_gradient, MomentumRule};
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(seed: u64, par: ParSpec, lambda: f64) -> CompositeProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(8, 15, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(8, |_, _| rng.random_range(-2.0..2.0));
        CompositeProblem::new(Loss::LeastSquares(LeastSquaresLoss::new(a, b).unwrap()), par, lambda).unwrap()
    }

    #[test]
    fn zero_momentum_reproduces_pg() {
        for par in [ParSpec::convex_integer(3), ParSpec::quasiconvex_uniform(0.5, 1.0).unwrap()] {
            let p = random_problem(4, par, 0.05);
            let cfg = SolverConfig { max_iters: 200, momentum: MomentumRule::Constant(0.0), ..Default::default() };
            let a = accelerated_proximal_gradient(&p, &cfg).unwrap();
            let b = proximal_gradient(&p, &cfg).unwrap();
            assert_eq!(a.x, b.x);
            let csv = |t: &crate::solvers::IterateTrace| {
                let mut buf = Vec::new();
                t.write_csv(&mut buf).unwrap();
                buf
            };
            assert_eq!(csv(&a.trace), csv(&b.trace));
        }
    }

    #[test]
    fn quadratic_rate_bound() {
        // lambda = 0, fixed eta = 1/L: F(x_T) - F* <= 2 ||x0 - x*||^2 / (eta (T + 1)^2)
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = DMatrix::from_fn(20, 10, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(20, |_, _| rng.random_range(-1.0..1.0));
        let loss = Loss::LeastSquares(LeastSquaresLoss::new(a.clone(), b.clone()).unwrap());
        let xstar = a.clone().svd(true, true).solve(&b, 1e-14).unwrap();
        let fstar = loss.value(&xstar).unwrap();
        let eta = 1.0 / loss.lipschitz_bound();
        let p = CompositeProblem::new(loss, ParSpec::l1(), 0.0).unwrap();
        let cfg = SolverConfig {
            max_iters: 300,
            step_init: Some(eta),
            line_search: false,
            restart: false,
            tol_residual: 0.0,
            ..Default::default()
        };
        let out = accelerated_proximal_gradient(&p, &cfg).unwrap();
        let r0 = xstar.norm_squared();
        for row in &out.trace.rows[1..] {
            let t = row.iter as f64;
            assert!(row.objective - fstar <= 2.0 * r0 / (eta * (t + 1.0).powi(2)) + 1e-12, "t = {t}");
        }
    }

    #[test]
    fn restart_keeps_objective_monotone() {
        let p = random_problem(2, ParSpec::convex_integer(4), 0.02);
        let out = accelerated_proximal_gradient(&p, &SolverConfig::default()).unwrap();
        let f = out.trace.objectives();
        assert!(f.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}
