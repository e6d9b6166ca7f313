//! Gaussian sensing operator, its adjoint and the mini-batch partition.

use std::io::{Read, Write};
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::tensor::{dot, Dims, Matrix, Tensor3};

const MAGIC: &[u8; 5] = b"TSNS1";

/// The linear map `X -> (<A_1, X>, ..., <A_m, X>)`.
///
/// Sensing tensors are kept as the rows of an `m x (n1 n2 n3)` matrix, each
/// row being the vectorized tensor. Rows are stored contiguously so that a
/// mini-batch is a plain slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingEnsemble {
    dims: Dims,
    m: usize,
    rows: Vec<f64>,
}

/// Measurement vector `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub y: Vec<f64>,
}

impl MeasurementSet {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

impl SensingEnsemble {
    /// Wraps `m` row-major rows, each a vectorized sensing tensor.
    pub fn from_rows(dims: Dims, m: usize, rows: Vec<f64>) -> Result<Self> {
        let width = dims.0 * dims.1 * dims.2;
        if rows.len() != m * width {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {m} sensing tensors of dims {dims:?}",
                rows.len()
            )));
        }
        Ok(Self { dims, m, rows })
    }

    /// Entries i.i.d. `N(0, 1/m)` drawn from a ChaCha8 stream seeded with
    /// `seed`, filled row by row.
    pub fn gaussian(dims: Dims, m: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::gaussian_from_rng(dims, m, &mut rng)
    }

    pub fn gaussian_from_rng(dims: Dims, m: usize, rng: &mut impl rand::Rng) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig("measurement count must be >= 1".into()));
        }
        let width = dims.0 * dims.1 * dims.2;
        let sd = (1.0 / m as f64).sqrt();
        let rows = (0..m * width)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z * sd
            })
            .collect();
        Ok(Self { dims, m, rows })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Number of measurements.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Length of a vectorized sensing tensor.
    pub fn width(&self) -> usize {
        self.dims.0 * self.dims.1 * self.dims.2
    }

    /// `vec(A_i)` for the 0-based measurement index `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.rows[i * w..(i + 1) * w]
    }

    /// The `i`-th sensing tensor (0-based).
    pub fn sensing_tensor(&self, i: usize) -> Tensor3 {
        Tensor3::devectorize(self.row(i).to_vec(), self.dims).expect("row has tensor length")
    }

    /// Row-major storage of the whole operator.
    pub fn rows_row_major(&self) -> &[f64] {
        &self.rows
    }

    /// The operator as an `m x (n1 n2 n3)` matrix.
    pub fn matrix(&self) -> Matrix {
        let w = self.width();
        Matrix::from_fn(self.m, w, |i, j| self.rows[i * w + j])
    }

    fn check_dims(&self, x: &Tensor3) -> Result<()> {
        if x.dims() != self.dims {
            return Err(Error::DimensionMismatch(format!(
                "tensor dims {:?}, operator expects {:?}",
                x.dims(),
                self.dims
            )));
        }
        Ok(())
    }

    /// `A(X)`, entry `i` being `<A_i, X>`.
    pub fn apply(&self, x: &Tensor3) -> Result<Vec<f64>> {
        self.check_dims(x)?;
        let v = x.vectorize();
        Ok(self.rows.chunks_exact(self.width()).map(|r| dot(r, v)).collect())
    }

    /// Noiseless measurements `y = A(X*)`.
    pub fn measure(&self, x_star: &Tensor3) -> Result<MeasurementSet> {
        Ok(MeasurementSet {
            y: self.apply(x_star)?,
        })
    }

    /// Spectral proxy `Z = (1/m) sum_i y_i A_i`.
    pub fn adjoint_proxy(&self, y: &MeasurementSet) -> Result<Tensor3> {
        if y.len() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "{} measurements for an operator with m = {}",
                y.len(),
                self.m
            )));
        }
        let mut z = vec![0.0; self.width()];
        adjoint_accumulate(&self.rows, self.width(), &y.y, &mut z);
        let inv_m = 1.0 / self.m as f64;
        z.iter_mut().for_each(|v| *v *= inv_m);
        Tensor3::devectorize(z, self.dims)
    }

    /// Rows and measurements of the 1-based batch `i` of `plan`.
    pub fn batch<'a>(&'a self, y: &'a MeasurementSet, plan: &MiniBatchPlan, i: usize) -> Result<Batch<'a>> {
        if plan.m() != self.m || y.len() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "plan covers {} measurements, operator has {}, y has {}",
                plan.m(),
                self.m,
                y.len()
            )));
        }
        let range = plan.range(i)?;
        let w = self.width();
        Ok(Batch {
            dims: self.dims,
            rows: &self.rows[range.start * w..range.end * w],
            y: &y.y[range],
        })
    }

    /// Writes the `TSNS1` binary layout: magic, three little-endian `u32`
    /// dims, little-endian `u64` m, then the row-major `f64` entries.
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        for n in [self.dims.0, self.dims.1, self.dims.2] {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        w.write_all(&(self.m as u64).to_le_bytes())?;
        for v in &self.rows {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let io = |e: std::io::Error| Error::Format(e.to_string());
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let mut u32buf = [0u8; 4];
        let mut dims = [0usize; 3];
        for d in &mut dims {
            r.read_exact(&mut u32buf).map_err(io)?;
            *d = u32::from_le_bytes(u32buf) as usize;
        }
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf).map_err(io)?;
        let m = u64::from_le_bytes(u64buf) as usize;
        let count = m
            .checked_mul(dims[0] * dims[1] * dims[2])
            .ok_or_else(|| Error::Format("ensemble size overflows".into()))?;
        let mut rows = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut u64buf).map_err(io)?;
            rows.push(f64::from_le_bytes(u64buf));
        }
        Self::from_rows((dims[0], dims[1], dims[2]), m, rows)
    }
}

fn adjoint_accumulate(rows: &[f64], width: usize, coeffs: &[f64], out: &mut [f64]) {
    for (row, &c) in rows.chunks_exact(width).zip(coeffs) {
        for (o, &a) in out.iter_mut().zip(row) {
            *o += c * a;
        }
    }
}

/// Partition of `[m]` into `ceil(m / b)` contiguous batches; the last one
/// may be shorter when `b` does not divide `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiniBatchPlan {
    m: usize,
    b: usize,
}

impl MiniBatchPlan {
    pub fn new(m: usize, b: usize) -> Result<Self> {
        if b == 0 || m == 0 || b > m {
            return Err(Error::InvalidConfig(format!(
                "batch size {b} incompatible with {m} measurements"
            )));
        }
        Ok(Self { m, b })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn batch_size(&self) -> usize {
        self.b
    }

    /// Number of batches `M`.
    pub fn count(&self) -> usize {
        self.m.div_ceil(self.b)
    }

    /// 0-based row range of the 1-based batch `i`.
    pub fn range(&self, i: usize) -> Result<Range<usize>> {
        let count = self.count();
        if i == 0 || i > count {
            return Err(Error::IndexOutOfRange { index: i, count });
        }
        Ok((i - 1) * self.b..(i * self.b).min(self.m))
    }
}

/// A borrowed mini-batch `(A_[i], y_[i])`.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    dims: Dims,
    rows: &'a [f64],
    y: &'a [f64],
}

impl<'a> Batch<'a> {
    /// Builds a batch from row-major rows and their measurements.
    pub fn new(dims: Dims, rows: &'a [f64], y: &'a [f64]) -> Result<Self> {
        let w = dims.0 * dims.1 * dims.2;
        if rows.len() != y.len() * w {
            return Err(Error::DimensionMismatch(format!(
                "{} row values for {} measurements of width {w}",
                rows.len(),
                y.len()
            )));
        }
        Ok(Self { dims, rows, y })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Actual number of rows `b'`.
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn width(&self) -> usize {
        self.dims.0 * self.dims.1 * self.dims.2
    }

    pub fn y(&self) -> &'a [f64] {
        self.y
    }

    pub fn row(&self, j: usize) -> &'a [f64] {
        let w = self.width();
        &self.rows[j * w..(j + 1) * w]
    }

    pub fn rows_row_major(&self) -> &'a [f64] {
        self.rows
    }

    pub fn sensing_tensor(&self, j: usize) -> Tensor3 {
        Tensor3::devectorize(self.row(j).to_vec(), self.dims).expect("row has tensor length")
    }

    /// `A_[i]` as a `b' x (n1 n2 n3)` matrix.
    pub fn matrix(&self) -> Matrix {
        let w = self.width();
        Matrix::from_fn(self.len(), w, |i, j| self.rows[i * w + j])
    }

    /// `A_[i] v`.
    pub fn apply_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.width() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for batch of width {}",
                v.len(),
                self.width()
            )));
        }
        Ok(self.rows.chunks_exact(self.width()).map(|r| dot(r, v)).collect())
    }

    /// `A_[i]^T c` as a tensor.
    pub fn adjoint(&self, c: &[f64]) -> Result<Tensor3> {
        if c.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for batch of {} rows",
                c.len(),
                self.len()
            )));
        }
        let mut out = vec![0.0; self.width()];
        adjoint_accumulate(self.rows, self.width(), c, &mut out);
        Tensor3::devectorize(out, self.dims)
    }

    /// `A_[i] vec(X) - y_[i]`.
    pub fn residual(&self, x: &Tensor3) -> Result<Vec<f64>> {
        if x.dims() != self.dims {
            return Err(Error::DimensionMismatch(format!(
                "tensor dims {:?}, batch expects {:?}",
                x.dims(),
                self.dims
            )));
        }
        let mut r = self.apply_vec(x.vectorize())?;
        r.iter_mut().zip(self.y).for_each(|(a, b)| *a -= b);
        Ok(r)
    }
}
