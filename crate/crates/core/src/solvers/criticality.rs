use nalgebra::DVector;

use crate::error::Result;
use crate::losses::CompositeProblem;
use crate::regularizer::Regularizer;

/// Coordinates this close to a kink are moved onto it before the
/// subdifferential is evaluated.
pub const KINK_SNAP_TOL: f64 = 1e-9;

/// Distance from 0 to `grad f(x) + lambda * dPsi(x)` per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalityReport {
    /// Largest coordinate residual.
    pub residual: f64,
    pub per_coordinate: Vec<f64>,
    pub is_critical: bool,
}

pub fn check_criticality<R: Regularizer>(
    problem: &CompositeProblem<R>,
    x: &DVector<f64>,
    tol: f64,
) -> Result<CriticalityReport> {
    let snapped = x.map(|v| problem.reg.kink_within(v, KINK_SNAP_TOL).unwrap_or(v));
    let (_, grad) = problem.loss.eval(&snapped)?;
    let lambda = problem.lambda;
    let per_coordinate: Vec<f64> = snapped
        .iter()
        .zip(grad.iter())
        .map(|(&xi, &g)| {
            if lambda == 0.0 {
                return g.abs();
            }
            let s = problem.reg.subgradient(xi);
            0f64.max(g + lambda * s.lo).max(-g - lambda * s.hi)
        })
        .collect();
    let residual = per_coordinate.iter().copied().fold(0.0, f64::max);
    Ok(CriticalityReport { residual, is_critical: residual <= tol, per_coordinate })
}
