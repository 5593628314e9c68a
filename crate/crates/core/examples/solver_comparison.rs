//! PG, accelerated PG and ADMM on one sparse regression problem with each
//! PAR family.
//!
//! cargo run --release --example solver_comparison

use paro::statbench::{gen_dataset, SyntheticSpec, Task, Truth};
use paro::{solve, CompositeProblem, ParSpec, SolverConfig, SolverKind};

fn main() -> paro::Result<()> {
    let ds = gen_dataset(&SyntheticSpec {
        n: 20,
        d: 200,
        task: Task::Linear,
        noise_sigma: 0.1,
        truth: Truth::DenseGaussian,
        seed: 3,
    })?;
    let m = (2.0 * ds.truth.amax()).ceil() as usize;
    let levels: Vec<f64> = (-(m as i64)..=m as i64).map(|k| k as f64).collect();
    let families = [
        ("convex", ParSpec::convex_integer(m)),
        ("quasiconvex", ParSpec::quasiconvex_uniform(1.0, 1.0)?),
        ("nonconvex", ParSpec::nonconvex_nearest(&levels)?),
    ];
    let cfg = SolverConfig { max_iters: 1000, tol_residual: 1e-10, crit_every: 0, ..Default::default() };
    for (name, par) in families {
        let problem = CompositeProblem::new(ds.loss()?, par, 0.05)?;
        println!("{name}");
        for kind in SolverKind::ALL {
            let out = solve(kind, &problem, &cfg)?;
            println!("  {kind:<7} F = {:.6}  iterations = {:>4}  converged = {}", out.objective, out.iterations, out.converged);
        }
    }
    Ok(())
}
