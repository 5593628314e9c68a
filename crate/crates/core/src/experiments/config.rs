//! Experiment configuration: built-in defaults, a user TOML file and dotted
//! `key.path=value` overrides, merged in that order.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use super::Experiment;
use crate::error::{ParoError, Result};

const QUANTSWEEP: &str = r#"
d = 200
n = [20]
lambda = { logspace = [1e-4, 100.0, 20] }
seeds = { range = [0, 10] }
algorithm = "acc_pg"
crit_tol = 1e-5
snap_tol = 1e-6

[solver]
max_iters = 100000
tol_residual = 1e-10
crit_every = 0
"#;

const SOLVERS: &str = r#"
d = 200
n = 20
noise_sigma = 0.1
lambda = 0.05
seeds = { range = [0, 10] }
families = ["convex", "quasiconvex-uniform", "nonconvex-nearest"]
gap_threshold = 1e-6

[solver]
max_iters = 1000
tol_residual = 1e-10
crit_every = 10
"#;

const PARCOMPARE: &str = r#"
d = 1000
n = 100
noise_sigma = 0.1
lambda = [0.0, 0.01, 0.015, 0.02, 0.05]
seeds = { range = [0, 3] }
families = ["convex", "quasiconvex-uniform", "nonconvex-nearest"]
algorithm = "admm"

[solver]
max_iters = 300
tol_residual = 1e-8
crit_every = 0
"#;

const STATCOMPARE: &str = r#"
d = 200
n = [100, 200, 400]
noise_sigma = 0.1
gaps = [0.1, 0.05, 0.01]
seeds = { range = [0, 10] }
tasks = ["linear", "logistic"]
regularizers = ["ridge", "l1", "l0.5"]
algorithm = "acc_pg"
max_level = 8.0

[truth]
linear = { sparse = 20 }
logistic = { sparse = 20 }

[lambda.linear]
ridge = "recommended"
l1 = "noise-bound"
"l0.5" = 0.005

[lambda.logistic]
ridge = 0.01
l1 = "noise-bound"
"l0.5" = 0.01

[solver]
max_iters = 20000
tol_residual = 1e-9
crit_every = 0
"#;

const PROX_TABLE: &str = r#"
lambda = 0.5
x = { linspace = [-3.0, 3.0, 601] }

[par]
family = "convex"
levels = [0.0, 1.0, 2.0]
slopes = [0.2, 1.0, "inf"]
"#;

const SOLVE: &str = r#"
lambda = 0.01
algorithm = "acc_pg"
crit_tol = 1e-5

[data]
n = 20
d = 200
task = "linear"
noise_sigma = 0.1
truth = "dense-gaussian"
seed = 0

[par]
family = "convex"
levels = [0.0, 1.0, 2.0, 3.0, 4.0]
slopes = [1.0, 2.0, 3.0, 4.0, "inf"]

[solver]
max_iters = 5000
tol_residual = 1e-10
"#;

/// Default configuration of an experiment as TOML text.
pub fn default_toml(kind: Experiment) -> &'static str {
    match kind {
        Experiment::Quantsweep => QUANTSWEEP,
        Experiment::Solvers => SOLVERS,
        Experiment::Parcompare => PARCOMPARE,
        Experiment::Statcompare => STATCOMPARE,
        Experiment::ProxTable => PROX_TABLE,
        Experiment::Solve => SOLVE,
    }
}

pub fn default_table(kind: Experiment) -> Table {
    default_toml(kind).parse().expect("built-in defaults are valid TOML")
}

/// Recursively merges `top` into `base`; tables merge, everything else replaces.
pub fn deep_merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => deep_merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Applies `a.b.c=value`; the value is parsed as TOML, falling back to a
/// plain string.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| ParoError::InvalidConfig(format!("override `{spec}` is not of the form key=value")))?;
    let keys = key_path(path)?;
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key present"),
        Err(_) => Value::String(raw.to_string()),
    };
    let (last, parents) = keys.split_last().expect("at least one key");
    let mut cur = table;
    for k in parents {
        let entry = cur.entry(k.clone()).or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(ParoError::InvalidConfig(format!("override `{path}`: `{k}` is not a table"))),
        };
    }
    cur.insert(last.clone(), value);
    Ok(())
}

/// Splits a dotted TOML key, honouring quoted segments such as `a."b.c"`.
fn key_path(path: &str) -> Result<Vec<String>> {
    let bad = || ParoError::InvalidConfig(format!("bad override key `{path}`"));
    let mut node: Table = format!("{path} = 0").parse().map_err(|_| bad())?;
    let mut keys = Vec::new();
    loop {
        let (k, v) = node.into_iter().next().ok_or_else(bad)?;
        keys.push(k);
        match v {
            Value::Table(t) => node = t,
            _ => return Ok(keys),
        }
    }
}

/// Defaults, then the optional file, then overrides.
pub fn resolve(kind: Experiment, file: Option<&Path>, overrides: &[String]) -> Result<Table> {
    let mut table = default_table(kind);
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)?;
        let mut user: Table = text
            .parse()
            .map_err(|e| ParoError::InvalidConfig(format!("{}: {e}", path.display())))?;
        if let Some(Value::String(named)) = user.remove("experiment") {
            if named != kind.name() {
                return Err(ParoError::InvalidConfig(format!(
                    "config is for `{named}` but `{}` was requested",
                    kind.name()
                )));
            }
        }
        deep_merge(&mut table, user);
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    Ok(table)
}

pub(crate) fn parse<T: DeserializeOwned>(table: &Table) -> Result<T> {
    Value::Table(table.clone())
        .try_into()
        .map_err(|e: toml::de::Error| ParoError::InvalidConfig(e.message().to_string()))
}

/// A float sweep axis: an explicit list, `{ linspace = [a, b, k] }` or
/// `{ logspace = [a, b, k] }` (endpoints included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FloatAxis {
    List(Vec<f64>),
    Single(f64),
    Linspace { linspace: (f64, f64, usize) },
    Logspace { logspace: (f64, f64, usize) },
}

impl FloatAxis {
    pub fn values(&self) -> Result<Vec<f64>> {
        let out = match self {
            FloatAxis::List(v) => v.clone(),
            FloatAxis::Single(v) => vec![*v],
            FloatAxis::Linspace { linspace: (a, b, k) } => spaced(*a, *b, *k),
            FloatAxis::Logspace { logspace: (a, b, k) } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return Err(ParoError::InvalidConfig("logspace endpoints must be positive".into()));
                }
                spaced(a.log10(), b.log10(), *k).into_iter().map(|e| 10f64.powf(e)).collect()
            }
        };
        if out.is_empty() {
            return Err(ParoError::InvalidConfig("sweep axis is empty".into()));
        }
        Ok(out)
    }
}

fn spaced(a: f64, b: f64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![a],
        _ => (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect(),
    }
}

/// Seeds: an explicit list or `{ range = [start, end) }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedAxis {
    List(Vec<u64>),
    Range { range: (u64, u64) },
}

impl SeedAxis {
    pub fn values(&self) -> Result<Vec<u64>> {
        let out: Vec<u64> = match self {
            SeedAxis::List(v) => v.clone(),
            SeedAxis::Range { range: (a, b) } => (*a..*b).collect(),
        };
        if out.is_empty() {
            return Err(ParoError::InvalidConfig("seed list is empty".into()));
        }
        Ok(out)
    }
}
