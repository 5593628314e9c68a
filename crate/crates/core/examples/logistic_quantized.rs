//! Logistic regression with a nonconvex PAR: weights land on a small
//! integer grid while the classifier still fits.
//!
//! cargo run --release --example logistic_quantized

use paro::statbench::{gen_dataset, SyntheticSpec, Task, Truth};
use paro::{solve, CompositeProblem, ParSpec, SolverConfig, SolverKind};

fn main() -> paro::Result<()> {
    let ds = gen_dataset(&SyntheticSpec {
        n: 400,
        d: 50,
        task: Task::Logistic,
        noise_sigma: 0.0,
        truth: Truth::Sparse(10),
        seed: 5,
    })?;
    let levels: Vec<f64> = (-3..=3).map(|k| k as f64).collect();
    let par = ParSpec::nonconvex_nearest(&levels)?;
    let problem = CompositeProblem::new(ds.loss()?, par.clone(), 0.05)?;
    let cfg = SolverConfig { max_iters: 5000, tol_residual: 1e-9, ..Default::default() };
    let out = solve(SolverKind::AccPg, &problem, &cfg)?;

    let margins = &ds.design * &out.x;
    let correct = margins.iter().zip(ds.response.iter()).filter(|(m, y)| *m * *y > 0.0).count();
    let rate = par.quantization_rate(out.x.as_slice(), 1e-6).rate;
    println!("iterations {}  F = {:.5}", out.iterations, out.objective);
    println!("training accuracy {:.3}", correct as f64 / ds.n() as f64);
    println!("quantization rate {rate:.3}");
    for level in &levels {
        let count = out.x.iter().filter(|v| (*v - level).abs() <= 1e-6).count();
        println!("  weights at {level:>3}: {count}");
    }
    Ok(())
}
