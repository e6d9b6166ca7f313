//! CSV trace files: one row per recorded iterate.

use std::io::{Read, Write};

use stotam::experiment::RunTrace;
use stotam::{Algorithm, TraceRecord};

use crate::error::{CliError, Result};

pub const HEADER: [&str; 7] = [
    "trial",
    "algorithm",
    "iter",
    "elapsed_s",
    "loss",
    "rel_error",
    "diverged",
];

/// Writes the header and every record. Floats use the shortest form that
/// parses back to the same value; metrics are in exponent notation.
pub fn write_records<'a, W: Write>(out: W, records: impl IntoIterator<Item = &'a TraceRecord>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.algorithm.tag().to_string(),
            r.iter.to_string(),
            r.elapsed_s.to_string(),
            format!("{:e}", r.loss),
            format!("{:e}", r.rel_error),
            u8::from(r.diverged).to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io("<csv>", e))?;
    Ok(())
}

/// Reads a trace file written by [`write_records`].
pub fn read_records<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(HEADER) {
        return Err(CliError::Config(format!(
            "unexpected trace header, expected {}",
            HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (n, row) in r.records().enumerate() {
        let row = row?;
        let bad = |field: &str| CliError::Config(format!("trace row {}: bad {field}", n + 1));
        let field = |i: usize| row.get(i).unwrap_or("");
        let num = |i: usize| field(i).parse::<f64>().map_err(|_| bad(HEADER[i]));
        out.push(TraceRecord {
            trial: field(0).parse().map_err(|_| bad("trial"))?,
            algorithm: field(1).parse().map_err(|_| bad("algorithm"))?,
            iter: field(2).parse().map_err(|_| bad("iter"))?,
            elapsed_s: num(3)?,
            loss: num(4)?,
            rel_error: num(5)?,
            diverged: match field(6) {
                "0" => false,
                "1" => true,
                _ => return Err(bad("diverged")),
            },
        });
    }
    Ok(out)
}

/// Regroups flat records into per-trial runs, ordered by trial.
pub fn group_runs(records: &[TraceRecord], algorithm: Algorithm) -> Vec<RunTrace> {
    let mut runs: Vec<RunTrace> = Vec::new();
    let mut trials: Vec<usize> = Vec::new();
    for r in records.iter().filter(|r| r.algorithm == algorithm) {
        match trials.iter().position(|&t| t == r.trial) {
            Some(i) => runs[i].records.push(r.clone()),
            None => {
                trials.push(r.trial);
                runs.push(RunTrace {
                    algorithm,
                    records: vec![r.clone()],
                    divergence: None,
                });
            }
        }
    }
    for run in &mut runs {
        run.records.sort_by_key(|r| r.iter);
        if run.records.iter().any(|r| r.diverged) {
            run.divergence = Some("flagged in trace".into());
        }
    }
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by_key(|&i| trials[i]);
    order.into_iter().map(|i| runs[i].clone()).collect()
}
