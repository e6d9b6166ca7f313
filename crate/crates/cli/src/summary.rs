//! Human-readable campaign summary.

use std::fmt::Write as _;

use stotam::experiment::{median, median_time_to_threshold, Metric, RunTrace};
use stotam::Algorithm;

pub const THRESHOLDS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Summary statistics of one algorithm's runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub trials: usize,
    pub diverged: usize,
    /// Median time to each of [`THRESHOLDS`]; `None` when the median run never gets there.
    pub time_to: [Option<f64>; 3],
    pub final_rel_error: Option<f64>,
}

impl AlgorithmSummary {
    pub fn from_runs(algorithm: Algorithm, runs: &[&RunTrace]) -> Self {
        let time_to = THRESHOLDS.map(|t| median_time_to_threshold(runs, Metric::RelError, t));
        let mut finals: Vec<f64> = runs
            .iter()
            .filter(|r| !r.diverged())
            .filter_map(|r| r.records.last())
            .map(|r| r.rel_error)
            .collect();
        AlgorithmSummary {
            algorithm,
            trials: runs.len(),
            diverged: runs.iter().filter(|r| r.diverged()).count(),
            time_to,
            final_rel_error: median(&mut finals),
        }
    }
}

/// Renders the table written to `summary.txt`.
pub fn render(rows: &[AlgorithmSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "median time to relative error (seconds, non-diverged trials)"
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<10} {:>6} {:>8} {:>12} {:>12} {:>12} {:>14}",
        "algorithm", "trials", "diverged", "<= 1e-2", "<= 1e-3", "<= 1e-4", "final median"
    );
    for r in rows {
        let t = |v: Option<f64>| v.map_or_else(|| "never".to_string(), |s| format!("{s:.4}"));
        let fin = r
            .final_rel_error
            .map_or_else(|| "n/a".to_string(), |e| format!("{e:.3e}"));
        let _ = writeln!(
            out,
            "{:<10} {:>6} {:>8} {:>12} {:>12} {:>12} {:>14}",
            r.algorithm.tag(),
            r.trials,
            r.diverged,
            t(r.time_to[0]),
            t(r.time_to[1]),
            t(r.time_to[2]),
            fin
        );
    }
    out
}
