//! Synthetic data written to CSV with a JSON sidecar, then solved from the
//! CSV through the `solve` experiment.
//!
//! cargo run --release --example dataset_files

use paro::experiments::{self, Experiment};
use paro::statbench::{gen_dataset, RegressionDataset, SyntheticSpec, Task, Truth};

fn main() -> paro::Result<()> {
    let dir = std::env::temp_dir().join("paro-dataset-example");
    std::fs::create_dir_all(&dir)?;
    let ds = gen_dataset(&SyntheticSpec {
        n: 30,
        d: 60,
        task: Task::Linear,
        noise_sigma: 0.05,
        truth: Truth::Sparse(6),
        seed: 2,
    })?;
    ds.save(&dir, "train")?;
    let back = RegressionDataset::load(&dir, "train")?;
    println!("reloaded {} x {} design, truth norm {:.4}", back.n(), back.d(), back.truth.norm());

    let csv = dir.join("train.csv");
    let overrides = [
        format!("data = {{ csv = {}, task = \"linear\" }}", toml::Value::String(csv.display().to_string())),
        format!("output_dir = {}", toml::Value::String(dir.display().to_string())),
    ];
    let table = experiments::resolve(Experiment::Solve, None, &overrides)?;
    for path in experiments::run_to_dir(Experiment::Solve, &table)? {
        println!("wrote {}", path.display());
    }
    print!("{}", std::fs::read_to_string(dir.join("solve_summary.csv"))?);
    Ok(())
}
