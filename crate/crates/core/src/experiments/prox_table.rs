//! Closed-form prox against the exhaustive oracle on a grid of inputs.

use serde::Deserialize;

use super::config::FloatAxis;
use super::{fmt_f, CsvTable};
use crate::error::{ParoError, Result};
use crate::par::ParConfig;
use crate::prox::{prox_oracle, prox_scalar};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct Config {
    lambda: f64,
    x: FloatAxis,
    par: ParConfig,
}

pub(super) fn run(cfg: &Config) -> Result<Vec<CsvTable>> {
    let par = cfg.par.build()?;
    let mut table = CsvTable::new("prox_table.csv", &["x", "prox_closed_form", "prox_oracle", "abs_diff"]);
    for x in cfg.x.values()? {
        let oracle = prox_oracle(&par, cfg.lambda, x).point;
        let closed = match prox_scalar(&par, cfg.lambda, x) {
            Ok(r) => Some(r.point),
            Err(ParoError::NoClosedForm(_)) => None,
            Err(e) => return Err(e),
        };
        table.rows.push(vec![
            fmt_f(x),
            closed.map(fmt_f).unwrap_or_default(),
            fmt_f(oracle),
            closed.map(|c| fmt_f((c - oracle).abs())).unwrap_or_default(),
        ]);
    }
    Ok(vec![table])
}
