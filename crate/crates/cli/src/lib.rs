//! Command-line driver: config files, single trials, full benchmark
//! campaigns, CSV traces, summaries and SVG plots.

pub mod config;
pub mod error;
pub mod plot;
pub mod summary;
pub mod trace;

use std::fs;
use std::io::{BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use stotam::experiment::{run_campaign, run_trial, MedianCurve, Metric, RunTrace};
use stotam::{Algorithm, Dims, ExperimentConfig};

pub use error::{CliError, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "stotam",
    version,
    about = "Stochastic Tucker tensor recovery benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a config file with default values and any overrides applied.
    GenConfig {
        path: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a single trial and print its trace as CSV.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run every trial and write traces, a summary and plots.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Render plots from an existing trace file.
    Plot {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Flags that replace individual config fields.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, value_parser = parse_dims, value_name = "N1,N2,N3")]
    pub dims: Option<Dims>,
    #[arg(long, value_parser = parse_dims, value_name = "R1,R2,R3")]
    pub ranks: Option<Dims>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub b: Option<usize>,
    /// Set all four stepsizes at once.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub mu_u1: Option<f64>,
    #[arg(long)]
    pub mu_u2: Option<f64>,
    #[arg(long)]
    pub mu_u3: Option<f64>,
    #[arg(long)]
    pub mu_tiht: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cadence: Option<usize>,
    #[arg(long, value_parser = ["stotam", "stotiht", "both"])]
    pub algo: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_name = "BOOL")]
    pub exclude_metric_time: Option<bool>,
    #[arg(long, value_name = "BOOL")]
    pub early_stop: Option<bool>,
}

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let mut c = ExperimentConfig::default();
    config::set(&mut c, "dims", s)?;
    Ok(c.dims)
}

impl Overrides {
    pub fn apply(&self, c: &mut ExperimentConfig) {
        if let Some(v) = self.dims {
            c.dims = v;
        }
        if let Some(v) = self.ranks {
            c.ranks = v;
        }
        if let Some(v) = self.m {
            c.m = v;
        }
        if let Some(v) = self.b {
            c.b = v;
        }
        if let Some(v) = self.mu {
            c.steps = stotam::StepSizes::uniform(v);
        }
        for (k, v) in [self.mu_u1, self.mu_u2, self.mu_u3].into_iter().enumerate() {
            if let Some(v) = v {
                c.steps.mu_u[k] = v;
            }
        }
        if let Some(v) = self.mu_tiht {
            c.steps.mu_tiht = v;
        }
        if let Some(v) = self.iters {
            c.iters = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.cadence {
            c.cadence = v;
        }
        if let Some(v) = &self.algo {
            c.algorithms = config::parse_algorithms(v).expect("restricted by clap");
        }
        if let Some(v) = self.threads {
            c.threads = v;
        }
        if let Some(v) = self.exclude_metric_time {
            c.exclude_metric_time = v;
        }
        if let Some(v) = self.early_stop {
            c.early_stop = v;
        }
    }
}

/// Reads the config (or defaults), applies overrides and validates.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut c = match path {
        Some(p) => config::parse(&fs::read_to_string(p).map_err(|e| CliError::io(p, e))?)?,
        None => ExperimentConfig::default(),
    };
    overrides.apply(&mut c);
    c.validate()?;
    Ok(c)
}

/// Whether any run of a command diverged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Diverged,
}

impl Status {
    fn from_flag(diverged: bool) -> Self {
        if diverged {
            Status::Diverged
        } else {
            Status::Ok
        }
    }
}

/// Terminal styling that honours `NO_COLOR` and non-terminal stderr.
pub struct Style {
    color: bool,
}

impl Style {
    pub fn detect() -> Self {
        let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
        Style {
            color: !no_color && std::io::stderr().is_terminal(),
        }
    }

    fn paint(&self, text: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    pub fn warn(&self, text: &str) -> String {
        self.paint(text, "33")
    }

    pub fn error(&self, text: &str) -> String {
        self.paint(text, "31")
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Executes a parsed command. Data goes to `stdout`, status lines to `stderr`.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write, style: &Style) -> Result<Status> {
    match cli.command {
        Command::GenConfig { path, overrides } => {
            let c = load_config(None, &overrides)?;
            write_file(&path, &config::emit(&c))?;
            Ok(Status::Ok)
        }
        Command::Run {
            config,
            trial,
            overrides,
        } => {
            let c = load_config(config.as_deref(), &overrides)?;
            let outcome = run_trial(&c, trial)?;
            trace::write_records(&mut *stdout, outcome.records())?;
            let diverged: Vec<&RunTrace> = outcome.runs.iter().filter(|r| r.diverged()).collect();
            for r in &diverged {
                let _ = writeln!(
                    stderr,
                    "{}",
                    style.warn(&format!(
                        "{} diverged on trial {trial}: {}",
                        r.algorithm,
                        r.divergence.as_deref().unwrap_or("")
                    ))
                );
            }
            Ok(Status::from_flag(!diverged.is_empty()))
        }
        Command::Bench {
            config,
            out,
            overrides,
        } => {
            let c = load_config(config.as_deref(), &overrides)?;
            fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
            let campaign = run_campaign(&c)?;

            let csv_path = out.join("traces.csv");
            let file = fs::File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
            trace::write_records(BufWriter::new(file), campaign.records())?;

            let rows: Vec<summary::AlgorithmSummary> = c
                .algorithms
                .iter()
                .map(|&a| summary::AlgorithmSummary::from_runs(a, &campaign.runs(a)))
                .collect();
            let text = summary::render(&rows);
            write_file(&out.join("summary.txt"), &text)?;
            let series: Vec<plot::Series<'_>> = c
                .algorithms
                .iter()
                .filter_map(|&a| {
                    Some(plot::Series {
                        algorithm: a,
                        runs: campaign.runs(a),
                        median: campaign.median(a)?,
                    })
                })
                .collect();
            write_plots(&out, &series)?;

            let _ = write!(stdout, "{text}");
            let diverged: usize = rows.iter().map(|r| r.diverged).sum();
            if diverged > 0 {
                let _ = writeln!(stderr, "{}", style.warn(&format!("{diverged} run(s) diverged")));
            }
            let _ = writeln!(stderr, "wrote {}", out.display());
            Ok(Status::from_flag(diverged > 0))
        }
        Command::Plot { traces, out } => {
            let file = fs::File::open(&traces).map_err(|e| CliError::io(&traces, e))?;
            let records = trace::read_records(std::io::BufReader::new(file))?;
            fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
            let grouped: Vec<(Algorithm, Vec<RunTrace>)> = Algorithm::ALL
                .iter()
                .map(|&a| (a, trace::group_runs(&records, a)))
                .filter(|(_, runs)| !runs.is_empty())
                .collect();
            let medians: Vec<MedianCurve> = grouped
                .iter()
                .map(|(a, runs)| MedianCurve::from_runs(*a, &runs.iter().collect::<Vec<_>>()))
                .collect();
            let series: Vec<plot::Series<'_>> = grouped
                .iter()
                .zip(&medians)
                .map(|((a, runs), median)| plot::Series {
                    algorithm: *a,
                    runs: runs.iter().collect(),
                    median,
                })
                .collect();
            write_plots(&out, &series)?;
            let _ = writeln!(stderr, "wrote {}", out.display());
            Ok(Status::Ok)
        }
    }
}

fn write_plots(out: &Path, series: &[plot::Series<'_>]) -> Result<()> {
    write_file(&out.join("loss_vs_time.svg"), &plot::render(Metric::Loss, series))?;
    write_file(
        &out.join("relerr_vs_time.svg"),
        &plot::render(Metric::RelError, series),
    )
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let style = Style::detect();
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    let mut stderr = std::io::stderr();
    match execute(cli, &mut stdout, &mut stderr, &style) {
        Ok(Status::Ok) => EXIT_OK,
        Ok(Status::Diverged) => EXIT_DIVERGED,
        Err(e) => {
            let _ = writeln!(stderr, "{} {e}", style.error("error:"));
            EXIT_USAGE
        }
    }
}
