//! Synthetic regression data, the ridge baseline and estimation-error metrics.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ParoError, Result};
use crate::linalg::ShiftedGram;
use crate::losses::{load_csv, sigmoid, write_csv, LeastSquaresLoss, LogisticLoss, Loss};
use crate::regularizer::Regularizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Linear,
    Logistic,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Linear => "linear",
            Task::Logistic => "logistic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truth {
    /// `x* ~ N(0, I)`
    DenseGaussian,
    /// `s` nonzeros at uniformly chosen positions, values `N(0, 1)`.
    Sparse(usize),
    User(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub task: Task,
    pub noise_sigma: f64,
    pub truth: Truth,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    pub design: DMatrix<f64>,
    /// Responses (linear) or `+-1` labels (logistic).
    pub response: DVector<f64>,
    pub truth: DVector<f64>,
    pub spec: SyntheticSpec,
}

/// Sampling order: design (row by row), truth, then noise or labels.
pub fn gen_dataset(spec: &SyntheticSpec) -> Result<RegressionDataset> {
    let (n, d) = (spec.n, spec.d);
    if n == 0 || d == 0 {
        return Err(ParoError::InvalidDataset("n and d must be at least 1".into()));
    }
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(ParoError::InvalidDataset(format!("noise_sigma must be >= 0, got {}", spec.noise_sigma)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut entries = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        let v: f64 = StandardNormal.sample(&mut rng);
        entries.push(v);
    }
    let design = DMatrix::from_row_slice(n, d, &entries);
    let truth = match &spec.truth {
        Truth::DenseGaussian => DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng)),
        Truth::Sparse(s) => {
            if *s > d {
                return Err(ParoError::InvalidDataset(format!("sparsity {s} exceeds dimension {d}")));
            }
            let mut support = sample(&mut rng, d, *s).into_vec();
            support.sort_unstable();
            let mut x = DVector::zeros(d);
            for j in support {
                let mut v: f64 = StandardNormal.sample(&mut rng);
                while v == 0.0 {
                    v = StandardNormal.sample(&mut rng);
                }
                x[j] = v;
            }
            x
        }
        Truth::User(v) => {
            if v.len() != d {
                return Err(ParoError::DimensionMismatch { expected: d, found: v.len() });
            }
            DVector::from_column_slice(v)
        }
    };
    let clean = &design * &truth;
    let response = match spec.task {
        Task::Linear => {
            if spec.noise_sigma == 0.0 {
                clean
            } else {
                let noise = Normal::new(0.0, spec.noise_sigma).expect("sigma checked above");
                clean.map(|v| v + noise.sample(&mut rng))
            }
        }
        Task::Logistic => clean.map(|v| if rng.random::<f64>() < sigmoid(v) { 1.0 } else { -1.0 }),
    };
    Ok(RegressionDataset { design, response, truth, spec: spec.clone() })
}

impl RegressionDataset {
    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn d(&self) -> usize {
        self.design.ncols()
    }

    pub fn loss(&self) -> Result<Loss> {
        Ok(match self.spec.task {
            Task::Linear => Loss::LeastSquares(LeastSquaresLoss::new(self.design.clone(), self.response.clone())?),
            Task::Logistic => Loss::Logistic(LogisticLoss::new(self.design.clone(), self.response.clone())?),
        })
    }

    /// `A^T A / n`
    pub fn sigma_hat(&self) -> DMatrix<f64> {
        self.design.tr_mul(&self.design) / self.n() as f64
    }

    /// Writes `<stem>.csv` (features then response) and `<stem>.json`
    /// (spec and truth).
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        write_csv(dir.join(format!("{stem}.csv")), &self.design, &self.response)?;
        let sidecar = Sidecar { spec: self.spec.clone(), truth: self.truth.iter().copied().collect() };
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>, stem: &str) -> Result<Self> {
        let dir = dir.as_ref();
        let (design, response) = load_csv(dir.join(format!("{stem}.csv")))?;
        let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        if sidecar.truth.len() != design.ncols() {
            return Err(ParoError::DimensionMismatch { expected: design.ncols(), found: sidecar.truth.len() });
        }
        Ok(RegressionDataset { design, response, truth: DVector::from_vec(sidecar.truth), spec: sidecar.spec })
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    spec: SyntheticSpec,
    truth: Vec<f64>,
}

/// `(A^T A + n lambda I)^{-1} A^T b`, the minimizer of
/// `||Ax - b||^2 / (2n) + (lambda / 2) ||x||^2`.
pub fn ridge_closed_form(dataset: &RegressionDataset, lambda: f64) -> Result<DVector<f64>> {
    let n = dataset.n() as f64;
    let gram = ShiftedGram::new(&dataset.design, n * lambda)?;
    Ok(gram.solve(&dataset.design.tr_mul(&dataset.response)))
}

/// `sigma / (||x*|| + sqrt(d) q) * sqrt(tr(Sigma_hat) / n)` with unit constant.
pub fn recommended_ridge_lambda(dataset: &RegressionDataset, gap: f64, sigma: f64, truth_norm: f64) -> Result<f64> {
    let denom = truth_norm + (dataset.d() as f64).sqrt() * gap;
    if !(denom > 0.0) {
        return Err(ParoError::InvalidConfig("recommended lambda needs ||x*|| + sqrt(d) q > 0".into()));
    }
    let n = dataset.n() as f64;
    let trace = dataset.design.norm_squared() / n;
    Ok(sigma / denom * (trace / n).sqrt())
}

/// Oracle Lasso-style level `||grad f(x*)||_inf / (2 nu)`, which is
/// `||A^T eps||_inf / (2 nu n)` for least squares.
pub fn noise_lambda(dataset: &RegressionDataset, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(ParoError::InvalidConfig(format!("nu must be positive, got {nu}")));
    }
    let grad = dataset.loss()?.eval(&dataset.truth)?.1;
    Ok(grad.amax() / (2.0 * nu))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub l2_error: f64,
    /// `||x - x*||_{Sigma_hat}`; its square is the excess risk.
    pub mahalanobis_error: f64,
    /// NaN when the regularizer has no level set.
    pub qrate: f64,
    /// `f(x) + lambda * reg(x)` on the dataset's loss.
    pub objective: f64,
}

pub fn error_report<R: Regularizer>(
    dataset: &RegressionDataset,
    estimate: &DVector<f64>,
    reg: &R,
    lambda: f64,
) -> Result<ErrorReport> {
    if estimate.len() != dataset.d() {
        return Err(ParoError::DimensionMismatch { expected: dataset.d(), found: estimate.len() });
    }
    let diff = estimate - &dataset.truth;
    let n = dataset.n() as f64;
    let mahalanobis_error = (&dataset.design * &diff).norm() / n.sqrt();
    let loss = dataset.loss()?.value(estimate)?;
    let penalty = if lambda == 0.0 { 0.0 } else { lambda * reg.value_sum(estimate.as_slice()) };
    Ok(ErrorReport {
        l2_error: diff.norm(),
        mahalanobis_error,
        qrate: reg.quantization_rate(estimate.as_slice()).unwrap_or(f64::NAN),
        objective: loss + penalty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::par::ParSpec;
    use crate::regularizer::SquaredL2;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn spec(n: usize, d: usize, sigma: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec { n, d, task: Task::Linear, noise_sigma: sigma, truth: Truth::DenseGaussian, seed }
    }

    #[test]
    fn noiseless_and_deterministic() {
        let ds = gen_dataset(&spec(10, 4, 0.0, 1)).unwrap();
        assert_eq!(ds.response, &ds.design * &ds.truth);
        assert_eq!(ds, gen_dataset(&spec(10, 4, 0.0, 1)).unwrap());
        assert_ne!(ds, gen_dataset(&spec(10, 4, 0.0, 2)).unwrap());
    }

    #[test]
    fn noise_level_concentrates() {
        let ds = gen_dataset(&spec(10_000, 5, 0.1, 3)).unwrap();
        let r = &ds.response - &ds.design * &ds.truth;
        let mean = r.mean();
        let std = (r.map(|v| (v - mean).powi(2)).sum() / (r.len() - 1) as f64).sqrt();
        assert!((0.097..=0.103).contains(&std), "{std}");
    }

    #[test]
    fn sparse_truth_and_labels() {
        let mut s = spec(50, 20, 0.0, 4);
        s.truth = Truth::Sparse(5);
        let ds = gen_dataset(&s).unwrap();
        assert_eq!(ds.truth.iter().filter(|v| **v != 0.0).count(), 5);
        s.truth = Truth::Sparse(21);
        assert!(gen_dataset(&s).is_err());
        s.truth = Truth::Sparse(3);
        s.task = Task::Logistic;
        let ds = gen_dataset(&s).unwrap();
        assert!(ds.response.iter().all(|&y| y == 1.0 || y == -1.0));
        assert!(ds.loss().unwrap().is_logistic());
    }

    #[test]
    fn ridge_examples() {
        let n = 5;
        let mut ds = gen_dataset(&spec(n, n, 0.0, 5)).unwrap();
        ds.design = DMatrix::identity(n, n);
        let lambda = 0.3;
        let x = ridge_closed_form(&ds, lambda).unwrap();
        assert!((x - &ds.response / (1.0 + n as f64 * lambda)).norm() < 1e-14);

        let ds = gen_dataset(&spec(30, 8, 0.1, 6)).unwrap();
        let big = 1e6;
        let x = ridge_closed_form(&ds, big).unwrap();
        assert!(x.norm() <= ds.design.tr_mul(&ds.response).norm() / (30.0 * big));

        let lambda = 0.05;
        let x = ridge_closed_form(&ds, lambda).unwrap();
        let grad = ds.loss().unwrap().eval(&x).unwrap().1 + &x * lambda;
        assert!(grad.norm() <= 1e-8);
    }

    #[test]
    fn noiseless_ridge_recovers_truth() {
        let ds = gen_dataset(&spec(40, 6, 0.0, 7)).unwrap();
        let x = ridge_closed_form(&ds, 1e-12).unwrap();
        let rep = error_report(&ds, &x, &SquaredL2, 0.0).unwrap();
        assert!(rep.l2_error < 1e-8 && rep.mahalanobis_error < 1e-8);
    }

    #[test]
    fn recommended_lambda_examples() {
        let n = 9;
        let mut ds = gen_dataset(&spec(n, n, 0.0, 8)).unwrap();
        assert_eq!(recommended_ridge_lambda(&ds, 0.1, 0.0, 1.0).unwrap(), 0.0);
        let l1 = recommended_ridge_lambda(&ds, 0.1, 0.5, 1.0).unwrap();
        assert_relative_eq!(recommended_ridge_lambda(&ds, 0.1, 1.0, 1.0).unwrap(), 2.0 * l1);
        // identity design: tr(Sigma_hat) = d / n = 1
        ds.design = DMatrix::identity(n, n);
        assert_relative_eq!(recommended_ridge_lambda(&ds, 0.0, 1.0, 1.0).unwrap(), 1.0 / 3.0);
        assert!(recommended_ridge_lambda(&ds, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn noise_lambda_matches_loop() {
        let ds = gen_dataset(&spec(25, 7, 0.3, 10)).unwrap();
        let mut best: f64 = 0.0;
        for j in 0..7 {
            let mut s = 0.0;
            for i in 0..25 {
                let fit: f64 = (0..7).map(|k| ds.design[(i, k)] * ds.truth[k]).sum();
                s += ds.design[(i, j)] * (ds.response[i] - fit);
            }
            best = best.max(s.abs());
        }
        assert_relative_eq!(noise_lambda(&ds, 0.5).unwrap(), best / 25.0, max_relative = 1e-12);
        assert_eq!(noise_lambda(&gen_dataset(&spec(25, 7, 0.0, 10)).unwrap(), 1.0).unwrap(), 0.0);
        assert!(noise_lambda(&ds, 0.0).is_err());
    }

    #[test]
    fn error_report_examples() {
        let ds = gen_dataset(&spec(12, 3, 0.1, 9)).unwrap();
        let par = ParSpec::convex_integer(3);
        let rep = error_report(&ds, &ds.truth, &par, 0.1).unwrap();
        assert_eq!(rep.l2_error, 0.0);
        assert_eq!(rep.mahalanobis_error, 0.0);
        let mut e1 = ds.truth.clone();
        e1[0] += 1.0;
        let rep = error_report(&ds, &e1, &par, 0.1).unwrap();
        assert_abs_diff_eq!(rep.mahalanobis_error.powi(2), ds.sigma_hat()[(0, 0)], epsilon = 1e-12);
        assert!(error_report(&ds, &DVector::zeros(2), &par, 0.1).is_err());
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = spec(6, 3, 0.1, 10);
        s.truth = Truth::Sparse(2);
        let ds = gen_dataset(&s).unwrap();
        ds.save(dir.path(), "train").unwrap();
        assert_eq!(RegressionDataset::load(dir.path(), "train").unwrap(), ds);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn sparse_truth_has_exact_support(n in 1usize..40, d in 1usize..40, frac in 0.0f64..1.0, logistic in any::<bool>(), seed in 0u64..1000) {
                let s = (frac * d as f64) as usize;
                let task = if logistic { Task::Logistic } else { Task::Linear };
                let ds = gen_dataset(&SyntheticSpec { n, d, task, noise_sigma: 0.1, truth: Truth::Sparse(s), seed }).unwrap();
                prop_assert_eq!(ds.truth.iter().filter(|v| **v != 0.0).count(), s);
            }

            #[test]
            fn linear_noise_has_level_sigma(n in 200usize..800, sigma in 0.01f64..2.0, seed in 0u64..64) {
                let ds = gen_dataset(&spec(n, 3, sigma, seed)).unwrap();
                let r = &ds.response - &ds.design * &ds.truth;
                let mean = r.mean();
                let std = (r.map(|v| (v - mean).powi(2)).sum() / (n - 1) as f64).sqrt();
                prop_assert!((std - sigma).abs() <= 3.0 * sigma / (n as f64).sqrt());
            }

            #[test]
            fn mahalanobis_is_sigma_hat_quadratic_form(n in 2usize..20, d in 1usize..10, seed in 0u64..1000, shift in prop::collection::vec(-2.0f64..2.0, 10)) {
                let ds = gen_dataset(&spec(n, d, 0.1, seed)).unwrap();
                let diff = DVector::from_row_slice(&shift[..d]);
                let x = &ds.truth + &diff;
                let rep = error_report(&ds, &x, &SquaredL2, 0.0).unwrap();
                let quad = (diff.transpose() * ds.sigma_hat() * &diff)[(0, 0)];
                prop_assert!(quad >= -1e-12);
                prop_assert!((rep.mahalanobis_error.powi(2) - quad).abs() <= 1e-10 * quad.max(1.0));
            }
        }
    }
}
