//! Closed-form proximal maps of the three PAR families next to the
//! exhaustive oracle.
//!
//! cargo run --example prox_maps

use paro::{prox_oracle, prox_scalar, ParSpec};

fn main() -> paro::Result<()> {
    let pars = [
        ("convex", ParSpec::convex_integer(2)),
        ("quasiconvex", ParSpec::quasiconvex_uniform(1.0, 1.0)?),
        ("nonconvex", ParSpec::nonconvex_nearest(&[-2.0, -1.0, 0.0, 1.0, 2.0])?),
    ];
    for lambda in [0.2, 0.8] {
        println!("lambda = {lambda}");
        println!("{:>6} {:>12} {:>12} {:>12}", "x", pars[0].0, pars[1].0, pars[2].0);
        for i in -5..=5 {
            let x = 0.5 * i as f64;
            print!("{x:>6.2}");
            for (_, par) in &pars {
                let z = prox_scalar(par, lambda, x)?;
                assert!((z.objective - prox_oracle(par, lambda, x).objective).abs() < 1e-12);
                print!(" {:>12.4}", z.point);
            }
            println!();
        }
    }
    Ok(())
}
