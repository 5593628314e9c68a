use nalgebra::{DMatrix, DVector};

use super::trace::Recorder;
use super::{Observer, SolveOutput, SolverConfig};
use crate::error::{ParoError, Result};
use crate::linalg::{cholesky, ShiftedGram};
use crate::losses::{sigmoid, CompositeProblem, Loss};
use crate::regularizer::Regularizer;

const NEWTON_GRAD_TOL: f64 = 1e-8;
const NEWTON_MAX_ITERS: usize = 100;

/// ADMM on the split `x = z` with scaled dual `y`:
///
/// ```text
/// x <- argmin f(x) + (rho/2) ||x - z + y||^2
/// z <- prox_{(lambda/rho) psi}(x + y)
/// y <- y + x - z
/// ```
///
/// Stops when `max(||x - z||_inf, rho ||z_new - z||_inf) <= tol_residual` and
/// returns `z`.
pub fn admm<R: Regularizer>(problem: &CompositeProblem<R>, config: &SolverConfig) -> Result<SolveOutput> {
    run(problem, config, &mut |_, _| {})
}

enum XStep {
    // least squares: (A^T A + rho n I) x = A^T b + rho n (z - y)
    Exact { gram: ShiftedGram, atb: DVector<f64>, scale: f64 },
    Newton,
}

pub(crate) fn run<R: Regularizer>(
    problem: &CompositeProblem<R>,
    config: &SolverConfig,
    observer: Observer<'_>,
) -> Result<SolveOutput> {
    config.validate()?;
    let rho = config.admm_rho;
    let n = problem.loss.n().max(1) as f64;
    if problem.loss.design().iter().any(|v| !v.is_finite()) {
        return Err(ParoError::Factorization("design matrix has non-finite entries".into()));
    }
    let x_step = match &problem.loss {
        Loss::LeastSquares(l) => XStep::Exact {
            gram: ShiftedGram::new(&l.design, rho * n)?,
            atb: l.design.tr_mul(&l.response),
            scale: rho * n,
        },
        Loss::Logistic(_) => XStep::Newton,
    };

    let mut z = config.initial_point(problem.loss.d());
    let mut x = z.clone();
    let mut y = DVector::zeros(z.len());
    let loss0 = problem.loss.value(&z)?;
    let mut objective = loss0 + problem.weighted_penalty(&z);
    if !objective.is_finite() {
        return Err(ParoError::InfiniteStart);
    }
    let mut rec = Recorder::new(config.crit_every);
    rec.push(problem, 0, &z, loss0, f64::NAN, f64::NAN);
    observer(0, &z);

    let weight = problem.lambda / rho;
    let mut converged = false;
    let mut iterations = 0;
    for t in 1..=config.max_iters {
        let v = &z - &y;
        x = match &x_step {
            XStep::Exact { gram, atb, scale } => gram.solve(&(atb + &v * *scale)),
            XStep::Newton => newton_x_step(&problem.loss, rho, &v, x)?,
        };
        let z_new = DVector::from_vec(problem.reg.prox_vec(weight, (&x + &y).as_slice())?);
        y += &x - &z_new;
        let primal = (&x - &z_new).amax();
        let dual = rho * (&z_new - &z).amax();
        let step_norm = (&z_new - &z).norm();
        z = z_new;
        let loss = problem.loss.value(&z)?;
        objective = loss + problem.weighted_penalty(&z);
        rec.push(problem, t, &z, loss, 1.0 / rho, step_norm);
        observer(t, &z);
        iterations = t;
        if primal.max(dual) <= config.tol_residual {
            converged = true;
            break;
        }
    }
    let trace = rec.finish(problem, &z);
    Ok(SolveOutput { x: z, trace, iterations, converged, objective })
}

/// Damped Newton on `f(x) + (rho/2) ||x - v||^2`, warm-started at `x`.
fn newton_x_step(loss: &Loss, rho: f64, v: &DVector<f64>, mut x: DVector<f64>) -> Result<DVector<f64>> {
    let Loss::Logistic(l) = loss else {
        unreachable!("newton x-step is only used for the logistic loss")
    };
    let n = loss.n().max(1) as f64;
    let h = |x: &DVector<f64>| -> Result<f64> { Ok(loss.value(x)? + 0.5 * rho * (x - v).norm_squared()) };
    for _ in 0..NEWTON_MAX_ITERS {
        let (_, g) = loss.eval(&x)?;
        let grad = g + (&x - v) * rho;
        if grad.norm() <= NEWTON_GRAD_TOL {
            break;
        }
        let margins = &l.design * &x;
        let weights = DVector::from_iterator(
            margins.len(),
            margins.iter().map(|&m| {
                let s = sigmoid(m);
                s * (1.0 - s) / n
            }),
        );
        let mut hess = l.design.tr_mul(&DMatrix::from_diagonal(&weights)) * &l.design;
        for i in 0..hess.nrows() {
            hess[(i, i)] += rho;
        }
        let dir = -cholesky(hess)?.solve(&grad);
        let h0 = h(&x)?;
        let slope = grad.dot(&dir);
        let mut s = 1.0;
        loop {
            let cand = &x + &dir * s;
            if h(&cand)? <= h0 + 1e-4 * s * slope || s < 1e-12 {
                x = cand;
                break;
            }
            s *= 0.5;
        }
    }
    Ok(x)
}
