//! Piecewise affine regularizers (PARs): construction, proximal maps,
//! composite solvers and a small statistical benchmark harness.

pub mod error;
pub mod experiments;
pub mod par;
pub mod prox;
pub mod regularizer;
pub mod linalg;
pub mod losses;
pub mod solvers;
pub mod statbench;

pub use error::{ParoError, Result};
pub use par::{build_par, par_approx_classic, ClassicTarget, Family, ParConfig, ParSpec};
pub use losses::{CompositeProblem, LeastSquaresLoss, LogisticLoss, Loss};
pub use regularizer::{LHalf, Regularizer, SquaredL2};
pub use solvers::{
    accelerated_proximal_gradient, admm, check_criticality, proximal_gradient, solve, SolveOutput,
    SolverConfig, SolverKind,
};
pub use prox::{prox_any, prox_oracle, prox_scalar, prox_vector, ProxResult};
