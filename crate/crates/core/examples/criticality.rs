//! Certifying a solver output as a critical point, and what the residual
//! looks like away from one.
//!
//! cargo run --example criticality

use nalgebra::{DMatrix, DVector};
use paro::{check_criticality, proximal_gradient, CompositeProblem, LeastSquaresLoss, Loss, ParSpec, SolverConfig};

fn main() -> paro::Result<()> {
    let a = DMatrix::from_row_slice(3, 4, &[1.0, 0.5, -0.2, 0.0, 0.3, 1.0, 0.4, -0.6, -0.5, 0.2, 1.0, 0.8]);
    let b = DVector::from_vec(vec![1.7, -0.4, 2.2]);
    let loss = Loss::LeastSquares(LeastSquaresLoss::new(a, b)?);
    let problem = CompositeProblem::new(loss, ParSpec::convex_integer(3), 0.1)?;

    let out = proximal_gradient(&problem, &SolverConfig { max_iters: 5000, tol_residual: 1e-12, ..Default::default() })?;
    let report = check_criticality(&problem, &out.x, 1e-8)?;
    println!("solution      {:?}", out.x.as_slice());
    println!("residual      {:.3e} (critical: {})", report.residual, report.is_critical);
    println!("per coordinate {:?}", report.per_coordinate);

    let nudged = out.x.map(|v| v + 0.05);
    let report = check_criticality(&problem, &nudged, 1e-8)?;
    println!("nudged point  residual {:.3e} (critical: {})", report.residual, report.is_critical);
    Ok(())
}
