//! Low-Tucker-rank tensor recovery from Gaussian linear measurements.
//!
//! The crate provides StoTAM (stochastic Tucker alternating minimization),
//! the StoTIHT baseline, and a seeded Monte Carlo harness that records
//! convergence against algorithm wall-clock time.
//!
//! Modules build bottom-up: [`tensor`] holds the dense value types and
//! multilinear primitives, [`numerics`] the QR/least-squares/SVD kernels,
//! [`sensing`] the measurement operator, [`model`] Tucker factorizations,
//! [`algorithms`] the two solvers and [`experiment`] the benchmark runner.

pub mod algorithms;
pub mod error;
pub mod experiment;
pub mod model;
pub mod numerics;
pub mod sensing;
pub mod tensor;

pub use algorithms::{Algorithm, Solver, StepSizes, StoTamState, StoTihtState};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, MedianCurve, TraceRecord, TrialOutcome};
pub use model::{Ranks, TuckerFactors};
pub use sensing::{Batch, MeasurementSet, MiniBatchPlan, SensingEnsemble};
pub use tensor::{Dims, Matrix, Tensor3};
