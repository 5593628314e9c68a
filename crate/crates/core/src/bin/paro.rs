use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use paro::experiments::{self, Experiment};
use paro::ParoError;

/// Piecewise-affine regularized optimization experiments.
#[derive(Parser)]
#[command(name = "paro", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantization rate across sample sizes and lambdas.
    Quantsweep(Run),
    /// PG, accelerated PG and ADMM on the three PAR families.
    Solvers(Run),
    /// f(Q(x^t)) of hard-quantized iterates per PAR family.
    Parcompare(Run),
    /// Classical penalties against their PAR approximants.
    Statcompare(Run),
    /// Closed-form prox against the exhaustive oracle on a grid.
    ProxTable(Run),
    /// Solve a single problem and write its trace and solution.
    Solve(Run),
}

#[derive(Args)]
struct Run {
    /// TOML config merged over the built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the CSV outputs.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
    /// Field overrides: `--solver.max_iters=500`, `--lambda 0.1` or `seed=3`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

fn normalize_overrides(raw: &[String]) -> Result<Vec<String>, ParoError> {
    let mut out = Vec::new();
    let mut it = raw.iter();
    while let Some(tok) = it.next() {
        let body = tok.strip_prefix("--").unwrap_or(tok);
        if body.contains('=') {
            out.push(body.to_string());
        } else if tok.starts_with("--") {
            let value = it
                .next()
                .ok_or_else(|| ParoError::InvalidConfig(format!("flag `{tok}` needs a value")))?;
            out.push(format!("{body}={value}"));
        } else {
            return Err(ParoError::InvalidConfig(format!("unexpected argument `{tok}`")));
        }
    }
    Ok(out)
}

fn execute(kind: Experiment, run: Run) -> Result<(), ParoError> {
    let mut overrides = normalize_overrides(&run.overrides)?;
    if let Some(dir) = &run.output_dir {
        overrides.push(format!("output_dir={}", toml::Value::String(dir.display().to_string())));
    }
    let table = experiments::resolve(kind, run.config.as_deref(), &overrides)?;
    if run.print_config {
        print!("{}", toml::to_string(&table).map_err(|e| ParoError::InvalidConfig(e.to_string()))?);
        return Ok(());
    }
    for path in experiments::run_to_dir(kind, &table)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn error_record(kind: &str, message: &str, experiment: Option<Experiment>) -> String {
    serde_json::json!({
        "error": kind,
        "message": message,
        "experiment": experiment.map(|e| e.name()),
    })
    .to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_record("usage", e.to_string().trim(), None));
            return ExitCode::from(2);
        }
    };
    let (kind, run) = match cli.command {
        Command::Quantsweep(r) => (Experiment::Quantsweep, r),
        Command::Solvers(r) => (Experiment::Solvers, r),
        Command::Parcompare(r) => (Experiment::Parcompare, r),
        Command::Statcompare(r) => (Experiment::Statcompare, r),
        Command::ProxTable(r) => (Experiment::ProxTable, r),
        Command::Solve(r) => (Experiment::Solve, r),
    };
    match execute(kind, run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_record(e.kind(), &e.to_string(), Some(kind)));
            ExitCode::FAILURE
        }
    }
}
