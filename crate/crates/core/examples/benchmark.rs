//! Runs the default 20-trial campaign and prints per-algorithm medians.

use stotam::experiment::{median_time_to_threshold, run_campaign, Metric};
use stotam::{Algorithm, ExperimentConfig};

fn main() -> stotam::Result<()> {
    let config = ExperimentConfig::default();
    let campaign = run_campaign(&config)?;
    for algorithm in Algorithm::ALL {
        let runs = campaign.runs(algorithm);
        let finals: Vec<String> = runs
            .iter()
            .map(|r| format!("{:.1e}", r.records.last().map_or(f64::NAN, |x| x.rel_error)))
            .collect();
        println!("{algorithm}: final rel_error per trial [{}]", finals.join(", "));
        for thr in [1e-2, 1e-3, 1e-4] {
            let t = median_time_to_threshold(&runs, Metric::RelError, thr);
            println!("  median time to rel_error <= {thr:e}: {t:?}");
        }
        println!("  diverged: {}", campaign.divergence_count(algorithm));
    }
    Ok(())
}
