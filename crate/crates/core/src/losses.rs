//! Smooth empirical risks and the composite objective `f(x) + lambda * psi(x)`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{ParoError, Result};
use crate::linalg::gram_spectral_bound;
use crate::par::ParSpec;
use crate::regularizer::Regularizer;

/// `||Ax - b||^2 / (2n)`.
#[derive(Debug, Clone)]
pub struct LeastSquaresLoss {
    pub design: DMatrix<f64>,
    pub response: DVector<f64>,
}

/// `(1/n) sum log(1 + exp(-b_i <a_i, x>))` with labels in `{-1, +1}`.
#[derive(Debug, Clone)]
pub struct LogisticLoss {
    pub design: DMatrix<f64>,
    pub labels: DVector<f64>,
}

#[derive(Debug, Clone)]
pub enum Loss {
    LeastSquares(LeastSquaresLoss),
    Logistic(LogisticLoss),
}

impl LeastSquaresLoss {
    pub fn new(design: DMatrix<f64>, response: DVector<f64>) -> Result<Self> {
        if design.nrows() != response.len() {
            return Err(ParoError::DimensionMismatch {
                expected: design.nrows(),
                found: response.len(),
            });
        }
        Ok(LeastSquaresLoss { design, response })
    }
}

impl LogisticLoss {
    pub fn new(design: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        if design.nrows() != labels.len() {
            return Err(ParoError::DimensionMismatch {
                expected: design.nrows(),
                found: labels.len(),
            });
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(ParoError::InvalidDataset("logistic labels must be -1 or +1".into()));
        }
        Ok(LogisticLoss { design, labels })
    }
}

/// `log(1 + e^t)` without overflow.
pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `1 / (1 + e^{-t})`.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl Loss {
    pub fn design(&self) -> &DMatrix<f64> {
        match self {
            Loss::LeastSquares(l) => &l.design,
            Loss::Logistic(l) => &l.design,
        }
    }

    pub fn n(&self) -> usize {
        self.design().nrows()
    }

    pub fn d(&self) -> usize {
        self.design().ncols()
    }

    pub fn is_logistic(&self) -> bool {
        matches!(self, Loss::Logistic(_))
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.d() {
            return Err(ParoError::DimensionMismatch { expected: self.d(), found: x.len() });
        }
        Ok(())
    }

    /// Value and gradient in one pass.
    pub fn eval(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        self.check_dim(x)?;
        let n = self.n().max(1) as f64;
        Ok(match self {
            Loss::LeastSquares(l) => {
                let r = &l.design * x - &l.response;
                (0.5 * r.norm_squared() / n, l.design.tr_mul(&r) / n)
            }
            Loss::Logistic(l) => {
                let margins = (&l.design * x).component_mul(&l.labels);
                let value = margins.iter().map(|&m| softplus(-m)).sum::<f64>() / n;
                let w = DVector::from_iterator(
                    margins.len(),
                    margins.iter().zip(l.labels.iter()).map(|(&m, &y)| -y * sigmoid(-m)),
                );
                (value, l.design.tr_mul(&w) / n)
            }
        })
    }

    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        let n = self.n().max(1) as f64;
        Ok(match self {
            Loss::LeastSquares(l) => 0.5 * (&l.design * x - &l.response).norm_squared() / n,
            Loss::Logistic(l) => {
                let margins = (&l.design * x).component_mul(&l.labels);
                margins.iter().map(|&m| softplus(-m)).sum::<f64>() / n
            }
        })
    }

    /// Certified smoothness constant `L` of the gradient.
    pub fn lipschitz_bound(&self) -> f64 {
        let n = self.n().max(1) as f64;
        let top = gram_spectral_bound(self.design());
        match self {
            Loss::LeastSquares(_) => top / n,
            Loss::Logistic(_) => top / (4.0 * n),
        }
    }
}

/// `F(x) = f(x) + lambda * sum_i reg(x_i)`.
#[derive(Debug, Clone)]
pub struct CompositeProblem<R = ParSpec> {
    pub loss: Loss,
    pub reg: R,
    pub lambda: f64,
}

impl<R: Regularizer> CompositeProblem<R> {
    pub fn new(loss: Loss, reg: R, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(ParoError::InvalidConfig(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(CompositeProblem { loss, reg, lambda })
    }

    pub fn penalty(&self, x: &DVector<f64>) -> f64 {
        self.reg.value_sum(x.as_slice())
    }

    /// `lambda * psi(x)`, taken as 0 when `lambda = 0` even if psi is infinite.
    pub fn weighted_penalty(&self, x: &DVector<f64>) -> f64 {
        if self.lambda == 0.0 {
            0.0
        } else {
            self.lambda * self.penalty(x)
        }
    }

    pub fn objective(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.loss.value(x)? + self.weighted_penalty(x))
    }
}

/// Reads a CSV with the first `d` columns as features and the last as the
/// response; a non-numeric first row is treated as a header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(ParoError::InvalidDataset(format!("row {}: {e}", i + 1)));
            }
        }
    }
    let width = rows.first().map(Vec::len).unwrap_or(0);
    if width < 2 {
        return Err(ParoError::InvalidDataset("need at least one feature and a response column".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(ParoError::InvalidDataset(format!(
            "row {} has {} columns, expected {width}",
            i + 1,
            r.len()
        )));
    }
    let n = rows.len();
    let design = DMatrix::from_fn(n, width - 1, |i, j| rows[i][j]);
    let response = DVector::from_fn(n, |i, _| rows[i][width - 1]);
    Ok((design, response))
}

/// Writes features then response, with a header `x0,...,x{d-1},y`.
pub fn write_csv(path: impl AsRef<Path>, design: &DMatrix<f64>, response: &DVector<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..design.ncols()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for i in 0..design.nrows() {
        let mut row: Vec<String> = design.row(i).iter().map(|v| format!("{v}")).collect();
        row.push(format!("{}", response[i]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn ls(a: DMatrix<f64>, b: Vec<f64>) -> Loss {
        let b = DVector::from_vec(b);
        Loss::LeastSquares(LeastSquaresLoss::new(a, b).unwrap())
    }

    #[test]
    fn least_squares_examples() {
        let loss = ls(DMatrix::identity(2, 2), vec![0.0, 0.0]);
        let (v, g) = loss.eval(&DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert_abs_diff_eq!(v, 25.0 / 4.0);
        assert_abs_diff_eq!(g[0], 1.5);
        assert_abs_diff_eq!(g[1], 2.0);

        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let loss = ls(a, vec![5.0, 11.0]);
        let (v, g) = loss.eval(&DVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn logistic_at_origin() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -2.0, 1.0, 0.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, -1.0, 1.0]);
        let loss = Loss::Logistic(LogisticLoss::new(a.clone(), y.clone()).unwrap());
        let (v, g) = loss.eval(&DVector::zeros(2)).unwrap();
        assert_abs_diff_eq!(v, 2f64.ln(), epsilon = 1e-15);
        let expected = -a.tr_mul(&y) / 6.0;
        assert!((g - expected).norm() < 1e-15);
    }

    #[test]
    fn logistic_large_margins_stay_finite() {
        let a = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let loss = Loss::Logistic(LogisticLoss::new(a, DVector::from_vec(vec![1.0, -1.0])).unwrap());
        let (v, g) = loss.eval(&DVector::from_vec(vec![800.0])).unwrap();
        assert_relative_eq!(v, 400.0, max_relative = 1e-12);
        assert!(g[0].is_finite());
    }

    #[test]
    fn rejects_bad_labels_and_dims() {
        let a = DMatrix::identity(2, 2);
        assert!(LogisticLoss::new(a.clone(), DVector::from_vec(vec![0.0, 1.0])).is_err());
        assert!(LeastSquaresLoss::new(a.clone(), DVector::zeros(3)).is_err());
        let loss = ls(a, vec![0.0, 0.0]);
        assert!(loss.eval(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        let n = 4;
        assert_relative_eq!(ls(DMatrix::identity(n, n), vec![0.0; n]).lipschitz_bound(), 0.25, max_relative = 0.011);
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        assert_relative_eq!(ls(diag, vec![0.0; 2]).lipschitz_bound(), 2.0, max_relative = 0.011);
        let logit = Loss::Logistic(LogisticLoss::new(DMatrix::identity(n, n), DVector::from_element(n, 1.0)).unwrap());
        assert_relative_eq!(logit.lipschitz_bound(), 1.0 / 16.0, max_relative = 0.011);
    }

    #[test]
    fn objective_examples() {
        let loss = ls(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]), vec![1.0, 2.0]);
        let p = CompositeProblem::new(loss.clone(), ParSpec::l1(), 0.0).unwrap();
        let x = DVector::from_vec(vec![0.3, -0.1]);
        assert_eq!(p.objective(&x).unwrap(), loss.value(&x).unwrap());
        let p = CompositeProblem::new(loss, ParSpec::l1(), 1.0).unwrap();
        assert_abs_diff_eq!(p.objective(&DVector::zeros(2)).unwrap(), 5.0 / 4.0);

        let zero = ls(DMatrix::zeros(2, 2), vec![0.0, 0.0]);
        let p = CompositeProblem::new(zero, ParSpec::l1(), 1.0).unwrap();
        assert_eq!(p.objective(&DVector::from_vec(vec![1.0, -2.0])).unwrap(), 3.0);

        let walled = ls(DMatrix::zeros(1, 1), vec![0.0]);
        let p = CompositeProblem::new(walled, ParSpec::convex_integer(1), 1.0).unwrap();
        assert_eq!(p.objective(&DVector::from_vec(vec![1.5])).unwrap(), f64::INFINITY);
    }

    #[test]
    fn csv_round_trip_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.5]);
        let b = DVector::from_vec(vec![-1.0, 0.25]);
        write_csv(&path, &a, &b).unwrap();
        let (a2, b2) = load_csv(&path).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);

        std::fs::write(&path, "1,2\n3\n").unwrap();
        assert!(load_csv(&path).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn problem(logistic: bool, seed: u64) -> Loss {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = DMatrix::from_fn(7, 4, |_, _| rng.random_range(-1.0..1.0));
            if logistic {
                let y = DVector::from_fn(7, |_, _| if rng.random_bool(0.5) { 1.0 } else { -1.0 });
                Loss::Logistic(LogisticLoss::new(a, y).unwrap())
            } else {
                let b = DVector::from_fn(7, |_, _| rng.random_range(-2.0..2.0));
                Loss::LeastSquares(LeastSquaresLoss::new(a, b).unwrap())
            }
        }

        proptest! {
            #[test]
            fn gradient_matches_central_differences(logistic in any::<bool>(), seed in 0u64..50, x in prop::collection::vec(-3.0f64..3.0, 4)) {
                let loss = problem(logistic, seed);
                let x = DVector::from_vec(x);
                let (_, g) = loss.eval(&x).unwrap();
                let h = 1e-6;
                let fd = DVector::from_fn(4, |j, _| {
                    let mut p = x.clone();
                    let mut m = x.clone();
                    p[j] += h;
                    m[j] -= h;
                    (loss.value(&p).unwrap() - loss.value(&m).unwrap()) / (2.0 * h)
                });
                prop_assert!((&fd - &g).norm() <= 1e-5 * g.norm().max(1e-3));
            }

            #[test]
            fn descent_lemma(logistic in any::<bool>(), seed in 0u64..50,
                             x in prop::collection::vec(-3.0f64..3.0, 4),
                             y in prop::collection::vec(-3.0f64..3.0, 4)) {
                let loss = problem(logistic, seed);
                let l = loss.lipschitz_bound();
                let (x, y) = (DVector::from_vec(x), DVector::from_vec(y));
                let (fx, g) = loss.eval(&x).unwrap();
                let bound = fx + g.dot(&(&y - &x)) + 0.5 * l * (&y - &x).norm_squared();
                prop_assert!(loss.value(&y).unwrap() <= bound + 1e-12);
            }
        }
    }
}
