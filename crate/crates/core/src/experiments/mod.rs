//! Config-driven experiment runners that emit CSV tables.
//!
//! Each runner expands its sweep into independent jobs, runs them on the
//! rayon pool and concatenates the results in job order, so output is
//! byte-identical across runs and thread counts.

pub mod config;
mod parcompare;
mod prox_table;
mod quantsweep;
mod solve;
mod solvers;
mod statcompare;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use toml::Table;

use crate::error::{ParoError, Result};

pub use config::{apply_override, deep_merge, default_table, default_toml, resolve, FloatAxis, SeedAxis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Quantsweep,
    Solvers,
    Parcompare,
    Statcompare,
    ProxTable,
    Solve,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Quantsweep,
        Experiment::Solvers,
        Experiment::Parcompare,
        Experiment::Statcompare,
        Experiment::ProxTable,
        Experiment::Solve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Quantsweep => "quantsweep",
            Experiment::Solvers => "solvers",
            Experiment::Parcompare => "parcompare",
            Experiment::Statcompare => "statcompare",
            Experiment::ProxTable => "prox-table",
            Experiment::Solve => "solve",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ParoError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ParoError::InvalidConfig(format!("unknown experiment `{s}`")))
    }
}

/// One CSV output file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &str, header: &[&str]) -> Self {
        CsvTable { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Writes `<dir>/<name>` through a temporary file and a rename.
    pub fn write_to_dir(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(&self.name);
        let tmp = dir.join(format!(".{}.tmp", self.name));
        self.write(std::fs::File::create(&tmp)?)?;
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

/// Float cell: shortest round-trip representation, empty for NaN.
pub fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Deserialize)]
struct Common {
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Runs an experiment from a resolved config table.
pub fn run(kind: Experiment, table: &Table) -> Result<Vec<CsvTable>> {
    let mut table = table.clone();
    table.remove("output_dir");
    table.remove("experiment");
    match kind {
        Experiment::Quantsweep => quantsweep::run(&config::parse(&table)?),
        Experiment::Solvers => solvers::run(&config::parse(&table)?),
        Experiment::Parcompare => parcompare::run(&config::parse(&table)?),
        Experiment::Statcompare => statcompare::run(&config::parse(&table)?),
        Experiment::ProxTable => prox_table::run(&config::parse(&table)?),
        Experiment::Solve => solve::run(&config::parse(&table)?),
    }
}

/// Runs an experiment and writes its tables under `output_dir`.
pub fn run_to_dir(kind: Experiment, table: &Table) -> Result<Vec<PathBuf>> {
    let common: Common = config::parse(&{
        let mut t = Table::new();
        if let Some(v) = table.get("output_dir") {
            t.insert("output_dir".into(), v.clone());
        }
        t
    })?;
    run(kind, table)?
        .iter()
        .map(|t| t.write_to_dir(&common.output_dir))
        .collect()
}

/// `quantile(0.5)` of a sample, NaN entries dropped.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
