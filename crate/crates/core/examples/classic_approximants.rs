//! PAR approximants of x^2/2, |x| and sqrt|x|, and how close the
//! square-approximant estimate stays to exact ridge regression.
//!
//! cargo run --release --example classic_approximants

use paro::statbench::{gen_dataset, ridge_closed_form, SyntheticSpec, Task, Truth};
use paro::{admm, par_approx_classic, ClassicTarget, CompositeProblem, SolverConfig};

fn main() -> paro::Result<()> {
    let q = 0.5;
    let square = par_approx_classic(ClassicTarget::Square, q, 3.0)?;
    let abs = par_approx_classic(ClassicTarget::Abs, q, 3.0)?;
    let sqrt = par_approx_classic(ClassicTarget::Sqrt, q, 3.0)?;
    println!("{:>6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}", "x", "x^2/2", "par", "|x|", "par", "sqrt|x|", "par");
    for i in 0..=12 {
        let x = 0.25 * i as f64;
        println!(
            "{x:>6.2} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            x * x / 2.0,
            square.value(x),
            x,
            abs.value(x),
            x.sqrt(),
            sqrt.value(x)
        );
    }

    let ds = gen_dataset(&SyntheticSpec {
        n: 20,
        d: 100,
        task: Task::Linear,
        noise_sigma: 0.1,
        truth: Truth::DenseGaussian,
        seed: 11,
    })?;
    let lambda = 0.1;
    let ridge = ridge_closed_form(&ds, lambda)?;
    println!("\n{:>6} {:>14} {:>14}", "gap", "||x_par - x_r||", "sqrt(d/2) q");
    for gap in [0.1, 0.05, 0.01] {
        let par = par_approx_classic(ClassicTarget::Square, gap, 8.0)?;
        let problem = CompositeProblem::new(ds.loss()?, par, lambda)?;
        let cfg = SolverConfig { max_iters: 100_000, tol_residual: 1e-10, crit_every: 0, ..Default::default() };
        let x = admm(&problem, &cfg)?.x;
        println!("{gap:>6} {:>14.5} {:>14.5}", (&x - &ridge).norm(), (50.0f64).sqrt() * gap);
    }
    Ok(())
}
