//! Critical points of an overparameterized least-squares problem are mostly
//! quantized: at least `1 - n/d` of the coordinates sit on a level.
//!
//! cargo run --release --example quantization_rate

use paro::par::DEFAULT_QUANT_TOL;
use paro::statbench::{gen_dataset, SyntheticSpec, Task, Truth};
use paro::{check_criticality, solve, CompositeProblem, ParSpec, SolverConfig, SolverKind};

fn main() -> paro::Result<()> {
    let (n, d) = (20, 200);
    let ds = gen_dataset(&SyntheticSpec {
        n,
        d,
        task: Task::Linear,
        noise_sigma: 0.0,
        truth: Truth::DenseGaussian,
        seed: 7,
    })?;
    let max_level = (2.0 * ds.truth.amax()).ceil() as usize;
    let par = ParSpec::convex_integer(max_level);
    let cfg = SolverConfig { max_iters: 100_000, tol_residual: 1e-10, crit_every: 0, ..Default::default() };

    println!("bound 1 - n/d = {}", 1.0 - n as f64 / d as f64);
    println!("{:>8} {:>8} {:>10} {:>12}", "lambda", "qrate", "iters", "crit_resid");
    for lambda in [1e-3, 1e-2, 0.1, 1.0] {
        let problem = CompositeProblem::new(ds.loss()?, par.clone(), lambda)?;
        let out = solve(SolverKind::AccPg, &problem, &cfg)?;
        let crit = check_criticality(&problem, &out.x, 1e-5)?;
        let rate = par.quantization_rate(out.x.as_slice(), DEFAULT_QUANT_TOL).rate;
        println!("{lambda:>8} {rate:>8.3} {:>10} {:>12.2e}", out.iterations, crit.residual);
    }
    Ok(())
}
