#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use stotam::model::random_ground_truth;
use stotam::{Batch, Dims, Matrix, MeasurementSet, Ranks, SensingEnsemble, Tensor3, TuckerFactors};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_tensor(dims: Dims, rng: &mut ChaCha8Rng) -> Tensor3 {
    Tensor3::from_fn(dims, |_, _, _| StandardNormal.sample(&mut *rng))
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut *rng))
}

pub fn gaussian_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Random instance: ground truth, ensemble and measurements, all seeded.
pub struct Instance {
    pub truth: TuckerFactors,
    pub x_star: Tensor3,
    pub ensemble: SensingEnsemble,
    pub y: MeasurementSet,
}

pub fn instance(dims: Dims, ranks: Ranks, m: usize, seed: u64) -> Instance {
    let (truth, x_star) = random_ground_truth(dims, ranks, seed).unwrap();
    let ensemble = SensingEnsemble::gaussian(dims, m, seed ^ 0x5eed).unwrap();
    let y = ensemble.measure(&x_star).unwrap();
    Instance {
        truth,
        x_star,
        ensemble,
        y,
    }
}

/// A batch built from row-major rows and its measurements.
pub fn batch<'a>(dims: Dims, rows: &'a [f64], y: &'a [f64]) -> Batch<'a> {
    Batch::new(dims, rows, y).unwrap()
}
