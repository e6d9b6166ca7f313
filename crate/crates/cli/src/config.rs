//! Flat `key = value` config files.
//!
//! Lines starting with `#` are comments. Keys missing from a file keep their
//! default value; unknown or repeated keys are rejected.

use std::fmt::Write as _;

use stotam::{Algorithm, Dims, ExperimentConfig};

use crate::error::{CliError, Result};

const KEYS: [&str; 16] = [
    "dims",
    "ranks",
    "m",
    "b",
    "mu_u1",
    "mu_u2",
    "mu_u3",
    "mu_tiht",
    "iters",
    "trials",
    "seed",
    "cadence",
    "algorithms",
    "exclude_metric_time",
    "early_stop",
    "threads",
];

fn triple((a, b, c): Dims) -> String {
    format!("{a},{b},{c}")
}

/// Renders a config in the canonical layout.
pub fn emit(config: &ExperimentConfig) -> String {
    let algorithms: Vec<&str> = config.algorithms.iter().map(|a| a.tag()).collect();
    let mut out = String::new();
    let mut line = |comment: &str, key: &str, value: String| {
        if !comment.is_empty() {
            let _ = writeln!(out, "# {comment}");
        }
        let _ = writeln!(out, "{key} = {value}");
    };
    line("tensor dimensions n1,n2,n3", "dims", triple(config.dims));
    line("multilinear rank r1,r2,r3", "ranks", triple(config.ranks));
    line("number of measurements", "m", config.m.to_string());
    line("mini-batch size", "b", config.b.to_string());
    line("factor stepsizes", "mu_u1", config.steps.mu_u[0].to_string());
    line("", "mu_u2", config.steps.mu_u[1].to_string());
    line("", "mu_u3", config.steps.mu_u[2].to_string());
    line(
        "hard-thresholding stepsize",
        "mu_tiht",
        config.steps.mu_tiht.to_string(),
    );
    line("iterations per run", "iters", config.iters.to_string());
    line("independent trials", "trials", config.trials.to_string());
    line("base seed", "seed", config.seed.to_string());
    line(
        "record metrics every this many iterations",
        "cadence",
        config.cadence.to_string(),
    );
    line(
        "comma-separated: stotam, stotiht",
        "algorithms",
        algorithms.join(","),
    );
    line(
        "pause the clock while metrics are evaluated",
        "exclude_metric_time",
        config.exclude_metric_time.to_string(),
    );
    line(
        "stop a run once the loss is negligible",
        "early_stop",
        config.early_stop.to_string(),
    );
    line(
        "worker threads, 0 = automatic",
        "threads",
        config.threads.to_string(),
    );
    out
}

/// Parses and validates a config file body.
pub fn parse(text: &str) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    let mut seen = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| CliError::Config(format!("line {}: {msg}", n + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(err(format!("unknown key '{key}'")));
        }
        if seen.contains(&key) {
            return Err(err(format!("duplicate key '{key}'")));
        }
        seen.push(key);
        set(&mut config, key, value).map_err(err)?;
    }
    config.validate()?;
    Ok(config)
}

/// Assigns one field from its textual value.
pub fn set(config: &mut ExperimentConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "dims" => config.dims = parse_triple(value)?,
        "ranks" => config.ranks = parse_triple(value)?,
        "m" => config.m = parse_num(key, value)?,
        "b" => config.b = parse_num(key, value)?,
        "mu_u1" => config.steps.mu_u[0] = parse_num(key, value)?,
        "mu_u2" => config.steps.mu_u[1] = parse_num(key, value)?,
        "mu_u3" => config.steps.mu_u[2] = parse_num(key, value)?,
        "mu_tiht" => config.steps.mu_tiht = parse_num(key, value)?,
        "iters" => config.iters = parse_num(key, value)?,
        "trials" => config.trials = parse_num(key, value)?,
        "seed" => config.seed = parse_num(key, value)?,
        "cadence" => config.cadence = parse_num(key, value)?,
        "algorithms" => config.algorithms = parse_algorithms(value)?,
        "exclude_metric_time" => config.exclude_metric_time = parse_num(key, value)?,
        "early_stop" => config.early_stop = parse_num(key, value)?,
        "threads" => config.threads = parse_num(key, value)?,
        other => return Err(format!("unknown key '{other}'")),
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value '{value}' for '{key}'"))
}

fn parse_triple(value: &str) -> std::result::Result<Dims, String> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    let nums = parts
        .iter()
        .map(|p| p.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>();
    match nums.as_deref() {
        Ok([a, b, c]) => Ok((*a, *b, *c)),
        _ => Err(format!("expected three comma-separated integers, got '{value}'")),
    }
}

/// Parses `stotam`, `stotiht`, `both`, or a comma-separated list.
pub fn parse_algorithms(value: &str) -> std::result::Result<Vec<Algorithm>, String> {
    if value.trim() == "both" {
        return Ok(Algorithm::ALL.to_vec());
    }
    let mut out = Vec::new();
    for tag in value.split(',').map(str::trim) {
        let a: Algorithm = tag.parse().map_err(|e: stotam::Error| e.to_string())?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}
