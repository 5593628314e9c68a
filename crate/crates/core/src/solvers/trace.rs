use std::io::Write;

use nalgebra::DVector;

use super::criticality::check_criticality;
use crate::error::Result;
use crate::losses::CompositeProblem;
use crate::regularizer::Regularizer;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub loss: f64,
    pub penalty: f64,
    /// NaN on row 0.
    pub eta: f64,
    /// NaN on row 0.
    pub step_norm: f64,
    /// NaN when the regularizer has no level set.
    pub qrate: f64,
    pub crit_residual: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterateTrace {
    pub rows: Vec<TraceRow>,
}

pub const TRACE_HEADER: [&str; 8] = ["iter", "F", "f", "psi", "eta", "step_norm", "qrate", "crit_residual"];

pub(crate) fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

impl IterateTrace {
    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Objective values in iteration order.
    pub fn objectives(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.objective).collect()
    }

    pub fn csv_record(row: &TraceRow) -> [String; 8] {
        [
            row.iter.to_string(),
            fmt_float(row.objective),
            fmt_float(row.loss),
            fmt_float(row.penalty),
            fmt_float(row.eta),
            fmt_float(row.step_norm),
            fmt_float(row.qrate),
            row.crit_residual.map(fmt_float).unwrap_or_default(),
        ]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_HEADER)?;
        for row in &self.rows {
            w.write_record(Self::csv_record(row))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) struct Recorder {
    pub trace: IterateTrace,
    crit_every: usize,
}

impl Recorder {
    pub fn new(crit_every: usize) -> Self {
        Recorder { trace: IterateTrace::default(), crit_every }
    }

    pub fn push<R: Regularizer>(
        &mut self,
        problem: &CompositeProblem<R>,
        iter: usize,
        x: &DVector<f64>,
        loss: f64,
        eta: f64,
        step_norm: f64,
    ) {
        let penalty = problem.penalty(x);
        let objective = loss + problem.weighted_penalty(x);
        let crit_residual = (self.crit_every > 0 && iter % self.crit_every == 0)
            .then(|| check_criticality(problem, x, 0.0).ok().map(|r| r.residual))
            .flatten();
        self.trace.rows.push(TraceRow {
            iter,
            objective,
            loss,
            penalty,
            eta,
            step_norm,
            qrate: problem.reg.quantization_rate(x.as_slice()).unwrap_or(f64::NAN),
            crit_residual,
        });
    }

    /// Ensures the final row carries a criticality residual.
    pub fn finish<R: Regularizer>(mut self, problem: &CompositeProblem<R>, x: &DVector<f64>) -> IterateTrace {
        if let Some(last) = self.trace.rows.last_mut() {
            if last.crit_residual.is_none() && self.crit_every > 0 {
                last.crit_residual = check_criticality(problem, x, 0.0).ok().map(|r| r.residual);
            }
        }
        self.trace
    }
}
