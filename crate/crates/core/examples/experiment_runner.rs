//! Running an experiment from code: built-in defaults, dotted overrides and
//! CSV output, as the `paro` binary does.
//!
//! cargo run --release --example experiment_runner -- /tmp/paro-out

use paro::experiments::{self, Experiment};

fn main() -> paro::Result<()> {
    let out_dir = std::env::args().nth(1).unwrap_or_else(|| "out".into());
    let overrides = [
        "seeds = { range = [0, 2] }".replace(' ', ""),
        "lambda = [0.01, 0.1, 1.0]".into(),
        "solver.max_iters = 5000".into(),
        format!("output_dir = {}", toml::Value::String(out_dir)),
    ];
    let table = experiments::resolve(Experiment::Quantsweep, None, &overrides)?;
    for path in experiments::run_to_dir(Experiment::Quantsweep, &table)? {
        println!("wrote {}", path.display());
        let text = std::fs::read_to_string(&path)?;
        for line in text.lines().take(4) {
            println!("  {line}");
        }
    }
    Ok(())
}
