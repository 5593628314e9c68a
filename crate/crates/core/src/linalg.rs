//! Dense helpers: largest eigenvalue of `A^T A` and solves with `A^T A + cI`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ParoError, Result};

/// Outcome of [`gram_top_eigenvalue`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenEstimate {
    /// Rayleigh quotient at the final iterate.
    pub rayleigh: f64,
    /// `||M v - rayleigh v||` for the final unit iterate `v`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on `M = A^T A` from a fixed pseudo-random start.
pub fn gram_top_eigenvalue(a: &DMatrix<f64>, rel_tol: f64, max_iters: usize) -> EigenEstimate {
    let d = a.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9);
    let mut v = DVector::from_fn(d, |_, _| rng.random_range(0.5..1.5));
    let norm = v.norm();
    if norm == 0.0 || a.nrows() == 0 {
        return EigenEstimate { rayleigh: 0.0, residual: 0.0, iterations: 0, converged: true };
    }
    v /= norm;
    let mut prev = f64::NAN;
    let mut est = EigenEstimate { rayleigh: 0.0, residual: 0.0, iterations: 0, converged: false };
    for it in 1..=max_iters {
        let mv = a.tr_mul(&(a * &v));
        let rq = v.dot(&mv);
        est.rayleigh = rq;
        est.residual = (&mv - &v * rq).norm();
        est.iterations = it;
        let mv_norm = mv.norm();
        if mv_norm == 0.0 {
            est.converged = true;
            break;
        }
        if (rq - prev).abs() <= rel_tol * rq.abs() {
            est.converged = true;
            break;
        }
        prev = rq;
        v = mv / mv_norm;
    }
    est
}

/// Upper bound on `lambda_max(A^T A)`: power-iteration estimate plus its
/// residual, inflated by 1%, never above `||A||_F^2`.
pub fn gram_spectral_bound(a: &DMatrix<f64>) -> f64 {
    let fro = a.norm_squared();
    let est = gram_top_eigenvalue(a, 1e-6, 10_000);
    if !est.converged {
        return fro;
    }
    ((est.rayleigh + est.residual) * 1.01).min(fro)
}

/// Solves `(A^T A + c I) x = r` with a factorization computed once.
/// Uses the `n x n` system `(c I + A A^T)` through Woodbury when `n < d`.
#[derive(Debug, Clone)]
pub struct ShiftedGram {
    a: DMatrix<f64>,
    shift: f64,
    factor: Factor,
}

#[derive(Debug, Clone)]
enum Factor {
    Primal(Cholesky<f64, Dyn>),
    Woodbury(Cholesky<f64, Dyn>),
}

impl ShiftedGram {
    pub fn new(a: &DMatrix<f64>, shift: f64) -> Result<Self> {
        if !shift.is_finite() || shift < 0.0 {
            return Err(ParoError::Factorization(format!("invalid shift {shift}")));
        }
        let (n, d) = a.shape();
        let factor = if n < d && shift > 0.0 {
            let mut m = a * a.transpose();
            for i in 0..n {
                m[(i, i)] += shift;
            }
            Factor::Woodbury(cholesky(m)?)
        } else {
            let mut m = a.tr_mul(a);
            for i in 0..d {
                m[(i, i)] += shift;
            }
            Factor::Primal(cholesky(m)?)
        };
        Ok(ShiftedGram { a: a.clone(), shift, factor })
    }

    pub fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        match &self.factor {
            Factor::Primal(ch) => ch.solve(r),
            Factor::Woodbury(ch) => {
                // (cI + A^T A)^{-1} = (I - A^T (cI + A A^T)^{-1} A) / c
                let t = ch.solve(&(&self.a * r));
                (r - self.a.tr_mul(&t)) / self.shift
            }
        }
    }
}

/// Cholesky factorization of an SPD matrix.
pub fn cholesky(m: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(ParoError::Factorization("non-finite matrix entry".into()));
    }
    Cholesky::new(m).ok_or_else(|| ParoError::Factorization("matrix is not positive definite".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn random_matrix(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn top_eigenvalue_matches_symmetric_eigen() {
        for (n, d) in [(5, 3), (4, 9), (12, 12)] {
            let a = random_matrix(n, d, (n * d) as u64);
            let exact = a.tr_mul(&a).symmetric_eigen().eigenvalues.max();
            let bound = gram_spectral_bound(&a);
            assert!(bound >= exact, "{bound} < {exact}");
            assert!(bound <= exact * 1.02 + 1e-12);
        }
    }

    #[test]
    fn diagonal_bound() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        assert_relative_eq!(gram_spectral_bound(&a), 4.0, max_relative = 0.011);
        assert_eq!(gram_spectral_bound(&DMatrix::zeros(3, 2)), 0.0);
    }

    #[test]
    fn shifted_solves_agree() {
        for (n, d) in [(3, 8), (8, 3)] {
            let a = random_matrix(n, d, 7);
            let r = DVector::from_fn(d, |i, _| i as f64 - 1.0);
            let s = ShiftedGram::new(&a, 0.7).unwrap();
            let x = s.solve(&r);
            let back = a.tr_mul(&(&a * &x)) + &x * 0.7;
            assert!((back - r).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_without_shift() {
        let a = random_matrix(2, 4, 1);
        assert!(ShiftedGram::new(&a, 0.0).is_err());
    }
}
