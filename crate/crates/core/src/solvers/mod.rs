//! First-order solvers for [`CompositeProblem`].
//!
//! Every solver starts from `x0 = 0` unless the config asks for a random
//! start, records one [`TraceRow`] per iteration (row 0 is the start) and
//! returns the final iterate.

mod admm;
mod apg;
mod criticality;
mod pg;
mod trace;

use std::str::FromStr;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ParoError, Result};
use crate::losses::CompositeProblem;
use crate::regularizer::Regularizer;

pub use admm::admm;
pub use apg::accelerated_proximal_gradient;
pub use criticality::{check_criticality, CriticalityReport, KINK_SNAP_TOL};
pub use pg::proximal_gradient;
pub use trace::{IterateTrace, TraceRow, TRACE_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentumRule {
    /// `beta_t = (t - 1) / (t + 2)`
    NesterovT,
    Constant(f64),
}

impl MomentumRule {
    pub fn beta(self, t: usize) -> f64 {
        match self {
            MomentumRule::NesterovT => (t as f64 - 1.0) / (t as f64 + 2.0),
            MomentumRule::Constant(b) => b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Initial (or fixed) step. Defaults to `1/L` with line search and
    /// `1/(2L)` without.
    pub step_init: Option<f64>,
    pub line_search: bool,
    pub backtrack_factor: f64,
    pub sufficient_decrease_const: f64,
    pub momentum: MomentumRule,
    /// Redo an accelerated step without momentum when it increases `F`.
    pub restart: bool,
    pub admm_rho: f64,
    pub tol_residual: f64,
    /// Record the criticality residual every this many iterations (0: never).
    pub crit_every: usize,
    /// Standard deviation of a seeded Gaussian start; 0 starts at the origin.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 1000,
            step_init: None,
            line_search: true,
            backtrack_factor: 0.5,
            sufficient_decrease_const: 0.25,
            momentum: MomentumRule::NesterovT,
            restart: true,
            admm_rho: 1.0,
            tol_residual: 1e-8,
            crit_every: 10,
            init_scale: 0.0,
            seed: 0,
        }
    }
}

pub const MAX_BACKTRACKS: usize = 60;

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ParoError::InvalidConfig(m));
        if let Some(s) = self.step_init {
            if !(s.is_finite() && s > 0.0) {
                return bad(format!("step_init must be positive, got {s}"));
            }
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad(format!("backtrack_factor must lie in (0, 1), got {}", self.backtrack_factor));
        }
        if !(self.sufficient_decrease_const >= 0.0 && self.sufficient_decrease_const.is_finite()) {
            return bad("sufficient_decrease_const must be finite and >= 0".into());
        }
        if !(self.admm_rho.is_finite() && self.admm_rho > 0.0) {
            return bad(format!("admm_rho must be positive, got {}", self.admm_rho));
        }
        if !(self.tol_residual >= 0.0) || !(self.init_scale >= 0.0) {
            return bad("tol_residual and init_scale must be >= 0".into());
        }
        Ok(())
    }

    /// Step used by PG/APG given the smoothness constant `l`.
    pub fn resolve_step(&self, l: f64) -> f64 {
        match self.step_init {
            Some(s) => s,
            None if l > 0.0 && self.line_search => 1.0 / l,
            None if l > 0.0 => 0.5 / l,
            None => 1.0,
        }
    }

    pub fn initial_point(&self, d: usize) -> DVector<f64> {
        if self.init_scale == 0.0 {
            return DVector::zeros(d);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        DVector::from_fn(d, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            self.init_scale * z
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "pg")]
    Pg,
    #[serde(rename = "acc_pg")]
    AccPg,
    #[serde(rename = "admm")]
    Admm,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Pg, SolverKind::AccPg, SolverKind::Admm];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Pg => "pg",
            SolverKind::AccPg => "acc_pg",
            SolverKind::Admm => "admm",
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = ParoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pg" => Ok(SolverKind::Pg),
            "acc_pg" | "apg" | "acc-pg" => Ok(SolverKind::AccPg),
            "admm" => Ok(SolverKind::Admm),
            other => Err(ParoError::InvalidConfig(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub x: DVector<f64>,
    pub trace: IterateTrace,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

/// Called with `(iteration, iterate)` for row 0 and every accepted step.
pub type Observer<'a> = &'a mut dyn FnMut(usize, &DVector<f64>);

/// Dispatches to the requested solver, reporting every iterate to `observer`.
pub fn solve_observed<R: Regularizer>(
    kind: SolverKind,
    problem: &CompositeProblem<R>,
    config: &SolverConfig,
    observer: Observer<'_>,
) -> Result<SolveOutput> {
    match kind {
        SolverKind::Pg => pg::run(problem, config, observer),
        SolverKind::AccPg => apg::run(problem, config, observer),
        SolverKind::Admm => admm::run(problem, config, observer),
    }
}

pub fn solve<R: Regularizer>(
    kind: SolverKind,
    problem: &CompositeProblem<R>,
    config: &SolverConfig,
) -> Result<SolveOutput> {
    solve_observed(kind, problem, config, &mut |_, _| {})
}

pub(crate) fn prox_step<R: Regularizer>(
    problem: &CompositeProblem<R>,
    eta: f64,
    point: &DVector<f64>,
    grad: &DVector<f64>,
) -> Result<DVector<f64>> {
    let shifted = point - grad * eta;
    let out = problem.reg.prox_vec(eta * problem.lambda, shifted.as_slice())?;
    Ok(DVector::from_vec(out))
}

/// Tolerance for comparing objective values that differ only by rounding.
pub(crate) fn rounding_slack(f: f64) -> f64 {
    8.0 * f64::EPSILON * f.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::{LeastSquaresLoss, Loss};
    use crate::par::strategies::{convex_par, nearest_par, staircase_par};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trace_fits_iteration_budget(
            par in prop_oneof![convex_par(), staircase_par(), nearest_par()],
            kind in prop::sample::select(SolverKind::ALL.to_vec()),
            max_iters in 0usize..40,
            entries in prop::collection::vec(-1.0f64..1.0, 15),
            b in prop::collection::vec(-2.0f64..2.0, 3),
        ) {
            let loss = Loss::LeastSquares(LeastSquaresLoss::new(DMatrix::from_row_slice(3, 5, &entries), DVector::from_vec(b)).unwrap());
            let p = CompositeProblem::new(loss, par, 0.1).unwrap();
            let cfg = SolverConfig { max_iters, crit_every: 3, ..Default::default() };
            let out = solve(kind, &p, &cfg).unwrap();
            prop_assert!(out.trace.rows.len() <= max_iters + 1);
            prop_assert!(out.iterations <= max_iters);
        }
    }
}
