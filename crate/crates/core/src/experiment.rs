//! Seeded Monte Carlo benchmark: trial execution with a stopwatch that only
//! runs during algorithm work, trace collection and median-curve
//! aggregation over wall-clock time.
//!
//! # Seeds
//!
//! Every random stream of a trial is derived from `(base_seed, trial, stream)`
//! with SplitMix64 finalization:
//!
//! ```text
//! seed = mix(mix(base_seed + mix(trial)) ^ stream)
//! ```
//!
//! where `stream` is [`STREAM_TRUTH`], [`STREAM_ENSEMBLE`] or the
//! algorithm-specific batch-index stream. Ground truth and sensing ensemble
//! are shared by both algorithms within a trial; batch indices are not.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algorithms::{full_objective, relative_error, Algorithm, Solver, StepSizes};
use crate::error::{Error, Result};
use crate::model::{random_ground_truth, Ranks, TuckerFactors};
use crate::sensing::{MeasurementSet, MiniBatchPlan, SensingEnsemble};
use crate::tensor::{Dims, Tensor3};

pub const STREAM_TRUTH: u64 = 0x7472_7574_6800_0001;
pub const STREAM_ENSEMBLE: u64 = 0x656e_7365_6d00_0002;
pub const STREAM_STOTAM: u64 = 0x7374_6f74_616d_0003;
pub const STREAM_STOTIHT: u64 = 0x7374_6f74_6968_0004;

/// Loss below which a run may stop early when `early_stop` is set.
pub const EARLY_STOP_LOSS: f64 = 1e-16;

/// Number of points on the shared time grid of a [`MedianCurve`].
pub const MEDIAN_GRID_POINTS: usize = 200;

/// SplitMix64 output function.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base_seed: u64, trial: usize, stream: u64) -> u64 {
    mix(mix(base_seed.wrapping_add(mix(trial as u64))) ^ stream)
}

fn algorithm_stream(algorithm: Algorithm) -> u64 {
    match algorithm {
        Algorithm::StoTam => STREAM_STOTAM,
        Algorithm::StoTiht => STREAM_STOTIHT,
    }
}

/// Everything needed to reproduce a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dims: Dims,
    pub ranks: Ranks,
    pub m: usize,
    pub b: usize,
    pub steps: StepSizes,
    pub iters: usize,
    pub trials: usize,
    pub seed: u64,
    /// Record metrics every `cadence` iterations.
    pub cadence: usize,
    pub algorithms: Vec<Algorithm>,
    /// Pause the stopwatch while loss and error are evaluated.
    pub exclude_metric_time: bool,
    /// Stop a run once the full loss drops below [`EARLY_STOP_LOSS`].
    pub early_stop: bool,
    /// Worker threads for trial-level parallelism; 0 picks the rayon default.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    /// The 10 x 10 x 15, rank (2, 2, 2) benchmark: 400 measurements in
    /// batches of 40, all stepsizes 25, 20 trials.
    fn default() -> Self {
        Self {
            dims: (10, 10, 15),
            ranks: (2, 2, 2),
            m: 400,
            b: 40,
            steps: StepSizes::uniform(25.0),
            iters: 2000,
            trials: 20,
            seed: 2024,
            cadence: 1,
            algorithms: Algorithm::ALL.to_vec(),
            exclude_metric_time: true,
            early_stop: false,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let (n, r) = (self.dims, self.ranks);
        if n.0 == 0 || n.1 == 0 || n.2 == 0 {
            return bad(format!("dims must be positive, got {n:?}"));
        }
        if r.0 == 0 || r.1 == 0 || r.2 == 0 || r.0 > n.0 || r.1 > n.1 || r.2 > n.2 {
            return bad(format!("ranks {r:?} must satisfy 1 <= r_k <= n_k for dims {n:?}"));
        }
        if self.m == 0 {
            return bad("m must be >= 1".into());
        }
        if self.b == 0 || self.b > self.m {
            return bad(format!("batch size {} must be in 1..={}", self.b, self.m));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.cadence == 0 {
            return bad("cadence must be >= 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithm selected".into());
        }
        self.steps.validate()
    }

    pub fn plan(&self) -> Result<MiniBatchPlan> {
        MiniBatchPlan::new(self.m, self.b)
    }
}

/// One metric sample of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub trial: usize,
    pub algorithm: Algorithm,
    pub iter: usize,
    /// Cumulative algorithm time since initialization.
    pub elapsed_s: f64,
    pub loss: f64,
    pub rel_error: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Loss,
    RelError,
}

impl Metric {
    pub fn of(self, r: &TraceRecord) -> f64 {
        match self {
            Metric::Loss => r.loss,
            Metric::RelError => r.rel_error,
        }
    }
}

/// Records of one algorithm on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: Algorithm,
    pub records: Vec<TraceRecord>,
    /// Diagnostic when the run diverged; the trace stops at that point.
    pub divergence: Option<String>,
}

impl RunTrace {
    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }
}

/// All runs of one trial, in the order of `config.algorithms`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub runs: Vec<RunTrace>,
}

impl TrialOutcome {
    pub fn records(&self) -> impl Iterator<Item = &TraceRecord> {
        self.runs.iter().flat_map(|r| r.records.iter())
    }

    pub fn run(&self, algorithm: Algorithm) -> Option<&RunTrace> {
        self.runs.iter().find(|r| r.algorithm == algorithm)
    }
}

/// Ground truth, operator and measurements of a trial.
#[derive(Debug, Clone)]
pub struct Problem {
    pub truth: TuckerFactors,
    pub x_star: Tensor3,
    pub ensemble: SensingEnsemble,
    pub y: MeasurementSet,
}

pub fn generate_problem(config: &ExperimentConfig, trial: usize) -> Result<Problem> {
    let (truth, x_star) = random_ground_truth(
        config.dims,
        config.ranks,
        derive_seed(config.seed, trial, STREAM_TRUTH),
    )?;
    let ensemble = SensingEnsemble::gaussian(
        config.dims,
        config.m,
        derive_seed(config.seed, trial, STREAM_ENSEMBLE),
    )?;
    let y = ensemble.measure(&x_star)?;
    Ok(Problem {
        truth,
        x_star,
        ensemble,
        y,
    })
}

/// Runs one algorithm on a prepared problem, observing the state after
/// every iteration through `observe`.
pub fn run_algorithm(
    config: &ExperimentConfig,
    problem: &Problem,
    trial: usize,
    algorithm: Algorithm,
    mut observe: impl FnMut(&Solver),
) -> Result<RunTrace> {
    let plan = config.plan()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, trial, algorithm_stream(algorithm)));
    let (e, y) = (&problem.ensemble, &problem.y);

    let mut records = Vec::with_capacity(config.iters / config.cadence + 2);
    let mut elapsed = Duration::ZERO;
    let record = |solver: &Solver, elapsed: Duration| -> Result<TraceRecord> {
        let estimate = solver.estimate();
        Ok(TraceRecord {
            trial,
            algorithm,
            iter: solver.iteration(),
            elapsed_s: elapsed.as_secs_f64(),
            loss: full_objective(e, y, &estimate)?,
            rel_error: relative_error(&estimate, &problem.x_star)?,
            diverged: false,
        })
    };

    let mut solver = Solver::spectral(algorithm, e, y, config.ranks)?;
    observe(&solver);
    records.push(record(&solver, elapsed)?);
    let mut divergence = None;

    for t in 1..=config.iters {
        let started = Instant::now();
        let stepped = solver.step(e, y, &plan, &config.steps, config.ranks, &mut rng);
        elapsed += started.elapsed();
        if let Err(err) = stepped {
            divergence = Some(err.to_string());
            records.push(TraceRecord {
                trial,
                algorithm,
                iter: t,
                elapsed_s: elapsed.as_secs_f64(),
                loss: f64::NAN,
                rel_error: f64::NAN,
                diverged: true,
            });
            break;
        }
        observe(&solver);
        if t % config.cadence == 0 || t == config.iters {
            let metric_start = Instant::now();
            let rec = record(&solver, elapsed)?;
            if !config.exclude_metric_time {
                elapsed += metric_start.elapsed();
            }
            let bad = !(rec.loss.is_finite() && rec.rel_error.is_finite());
            let converged = config.early_stop && rec.loss < EARLY_STOP_LOSS;
            records.push(rec);
            if bad {
                divergence = Some(format!("non-finite metrics at iteration {t}"));
                break;
            }
            if converged {
                break;
            }
        }
    }
    if divergence.is_some() {
        records.iter_mut().for_each(|r| r.diverged = true);
    }
    Ok(RunTrace {
        algorithm,
        records,
        divergence,
    })
}

/// Executes every selected algorithm on trial `trial`.
pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialOutcome> {
    config.validate()?;
    let problem = generate_problem(config, trial)?;
    let runs = config
        .algorithms
        .iter()
        .map(|&a| run_algorithm(config, &problem, trial, a, |_| {}))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialOutcome { trial, runs })
}

/// Median over trials of one algorithm on a shared time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianCurve {
    pub algorithm: Algorithm,
    pub points: Vec<MedianPoint>,
    /// Trials that entered the median (diverged runs are excluded).
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianPoint {
    pub time: f64,
    pub loss: f64,
    pub rel_error: f64,
}

/// Exact median; averages the two middle values for even counts.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Last record at or before `time`.
pub fn carried_forward(records: &[TraceRecord], time: f64) -> Option<&TraceRecord> {
    let idx = records.partition_point(|r| r.elapsed_s <= time);
    idx.checked_sub(1).map(|i| &records[i])
}

impl MedianCurve {
    /// Aligns the runs by last-observation-carried-forward onto
    /// [`MEDIAN_GRID_POINTS`] uniform points in `[0, longest run]`. Points
    /// where fewer than half of the runs have an observation are omitted.
    pub fn from_runs(algorithm: Algorithm, runs: &[&RunTrace]) -> Self {
        let runs: Vec<&RunTrace> = runs.iter().copied().filter(|r| !r.diverged()).collect();
        let t_max = runs
            .iter()
            .filter_map(|r| r.records.last())
            .map(|r| r.elapsed_s)
            .fold(0.0, f64::max);
        let mut points = Vec::with_capacity(MEDIAN_GRID_POINTS);
        for g in 0..MEDIAN_GRID_POINTS {
            let time = t_max * g as f64 / (MEDIAN_GRID_POINTS - 1) as f64;
            let observed: Vec<&TraceRecord> = runs
                .iter()
                .filter_map(|r| carried_forward(&r.records, time))
                .collect();
            if observed.is_empty() || 2 * observed.len() < runs.len() {
                continue;
            }
            let mut loss: Vec<f64> = observed.iter().map(|r| r.loss).collect();
            let mut err: Vec<f64> = observed.iter().map(|r| r.rel_error).collect();
            points.push(MedianPoint {
                time,
                loss: median(&mut loss).expect("non-empty"),
                rel_error: median(&mut err).expect("non-empty"),
            });
        }
        MedianCurve {
            algorithm,
            points,
            trials: runs.len(),
        }
    }
}

/// First elapsed time at which `metric <= threshold`, or `None` if never.
pub fn time_to_threshold(records: &[TraceRecord], metric: Metric, threshold: f64) -> Option<f64> {
    records
        .iter()
        .find(|r| metric.of(r) <= threshold)
        .map(|r| r.elapsed_s)
}

/// Median time-to-threshold across non-diverged runs, counting runs that
/// never reach the threshold as infinitely slow. `None` when that median is
/// infinite or no runs are available.
pub fn median_time_to_threshold(runs: &[&RunTrace], metric: Metric, threshold: f64) -> Option<f64> {
    let mut times: Vec<f64> = runs
        .iter()
        .filter(|r| !r.diverged())
        .map(|r| time_to_threshold(&r.records, metric, threshold).unwrap_or(f64::INFINITY))
        .collect();
    median(&mut times).filter(|t| t.is_finite())
}

/// Every trial of a campaign plus per-algorithm medians.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub config: ExperimentConfig,
    pub outcomes: Vec<TrialOutcome>,
    pub medians: Vec<MedianCurve>,
}

impl Campaign {
    pub fn runs(&self, algorithm: Algorithm) -> Vec<&RunTrace> {
        self.outcomes.iter().filter_map(|o| o.run(algorithm)).collect()
    }

    pub fn median(&self, algorithm: Algorithm) -> Option<&MedianCurve> {
        self.medians.iter().find(|m| m.algorithm == algorithm)
    }

    pub fn divergence_count(&self, algorithm: Algorithm) -> usize {
        self.runs(algorithm).iter().filter(|r| r.diverged()).count()
    }

    pub fn records(&self) -> impl Iterator<Item = &TraceRecord> {
        self.outcomes.iter().flat_map(|o| o.records())
    }
}

/// Runs all trials (in parallel across trials) and aggregates medians.
pub fn run_campaign(config: &ExperimentConfig) -> Result<Campaign> {
    config.validate()?;
    let run_all = || -> Result<Vec<TrialOutcome>> {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, t))
            .collect()
    };
    let outcomes = if config.threads == 0 {
        run_all()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(run_all)?
    };
    let mut campaign = Campaign {
        config: config.clone(),
        outcomes,
        medians: Vec::new(),
    };
    campaign.medians = config
        .algorithms
        .iter()
        .map(|&a| MedianCurve::from_runs(a, &campaign.runs(a)))
        .collect();
    Ok(campaign)
}
