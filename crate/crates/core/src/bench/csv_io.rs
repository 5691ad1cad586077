use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::{AlgoSummary, RunResult};
use crate::error::{Result, RprError};
use crate::trace::RunStatus;

pub const TRACE_HEADER: [&str; 10] =
    ["seed", "algo", "k", "F", "rel_err", "step", "inner_iters", "cum_inner", "wall_ms", "status"];

/// One CSV line: a trace record tagged with its run and the run's final
/// status.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub seed: u64,
    pub algo: String,
    pub k: usize,
    pub objective: f64,
    pub rel_err: f64,
    pub step: f64,
    pub inner_iters: usize,
    pub cum_inner: usize,
    pub wall_ms: f64,
    pub status: RunStatus,
}

pub fn rows_from_results(runs: &[RunResult]) -> Vec<TraceRow> {
    let mut rows = Vec::new();
    for run in runs {
        let status = run.trace.status().unwrap_or(RunStatus::MaxIter);
        for r in run.trace.records() {
            rows.push(TraceRow {
                seed: run.seed,
                algo: run.algo.clone(),
                k: r.k,
                objective: r.objective,
                rel_err: r.rel_err,
                step: r.step,
                inner_iters: r.inner_iters,
                cum_inner: r.cum_inner,
                wall_ms: r.wall_ms,
                status,
            });
        }
    }
    rows
}

fn csv_err(e: csv::Error) -> RprError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => RprError::Io(io),
        other => RprError::Csv { line, msg: format!("{other:?}") },
    }
}

/// Writes rows in the given order. Floats use the shortest representation
/// that parses back to the same value.
pub fn write_traces<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.algo.clone(),
            r.k.to_string(),
            r.objective.to_string(),
            r.rel_err.to_string(),
            r.step.to_string(),
            r.inner_iters.to_string(),
            r.cum_inner.to_string(),
            r.wall_ms.to_string(),
            r.status.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_traces_csv(rows: &[TraceRow], path: &Path) -> Result<()> {
    write_traces(rows, BufWriter::new(File::create(path)?))
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| RprError::Csv { line, msg: format!("missing column {}", TRACE_HEADER[i]) })?;
    raw.parse()
        .map_err(|_| RprError::Csv { line, msg: format!("bad {} value {raw:?}", TRACE_HEADER[i]) })
}

pub fn read_traces<R: std::io::Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(csv_err)?;
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(RprError::Csv { line: 1, msg: format!("unexpected header {header:?}") });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let status: String = field(&rec, 9, line)?;
        rows.push(TraceRow {
            seed: field(&rec, 0, line)?,
            algo: field(&rec, 1, line)?,
            k: field(&rec, 2, line)?,
            objective: field(&rec, 3, line)?,
            rel_err: field(&rec, 4, line)?,
            step: field(&rec, 5, line)?,
            inner_iters: field(&rec, 6, line)?,
            cum_inner: field(&rec, 7, line)?,
            wall_ms: field(&rec, 8, line)?,
            status: status.parse().map_err(|msg| RprError::Csv { line, msg })?,
        });
    }
    Ok(rows)
}

pub fn read_traces_csv(path: &Path) -> Result<Vec<TraceRow>> {
    read_traces(File::open(path)?)
}

pub fn write_summary_csv(summary: &[AlgoSummary], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record([
        "algo",
        "runs",
        "successes",
        "success_rate",
        "median_wall_ms",
        "iqr_wall_ms",
        "median_total_iters",
        "median_main_iters",
    ])
    .map_err(csv_err)?;
    for s in summary {
        w.write_record([
            s.algo.clone(),
            s.runs.to_string(),
            s.successes.to_string(),
            s.success_rate.to_string(),
            s.median_wall_ms.to_string(),
            s.iqr_wall_ms.to_string(),
            s.median_total_iters.to_string(),
            s.median_main_iters.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
