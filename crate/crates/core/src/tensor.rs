//! Dense third-order tensors, column-major matrices and the multilinear
//! primitives built on them.
//!
//! Tensors are stored flat with mode 1 varying fastest, so element
//! `(i1, i2, i3)` (0-based) lives at `i1 + i2*n1 + i3*n1*n2`. Unfoldings use
//! the Kolda–Bader column ordering: the remaining modes are enumerated in
//! increasing mode order with the lowest one varying fastest. Under this
//! convention
//!
//! ```text
//! vec(S x1 U1 x2 U2 x3 U3) = (U3 ⊗ U2 ⊗ U1) vec(S)
//! ```
//!
//! Modes are addressed 1-based (`1`, `2`, `3`) throughout the public API.

use crate::error::{Error, Result};

/// Shape of a third-order tensor.
pub type Dims = (usize, usize, usize);

pub(crate) fn dim(dims: Dims, k: usize) -> usize {
    match k {
        1 => dims.0,
        2 => dims.1,
        _ => dims.2,
    }
}

pub(crate) fn check_mode(k: usize) -> Result<()> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidMode(k))
    }
}

fn with_dim(dims: Dims, k: usize, n: usize) -> Dims {
    match k {
        1 => (n, dims.1, dims.2),
        2 => (dims.0, n, dims.2),
        _ => (dims.0, dims.1, n),
    }
}

/// Dense real matrix in column-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = 1.0;
        }
        m
    }

    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let mut m = Self::zeros(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.data[i + j * n_rows] = v;
            }
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Column-major storage.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Element at 0-based `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i + j * self.rows] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (l, &b) in other.col(j).iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.col(l)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply ({}x{})^T by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.cols, other.cols, |i, j| {
            dot(self.col(i), other.col(j))
        }))
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for {}x{} matrix",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * xj;
            }
        }
        Ok(out)
    }

    /// `self^T * x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for ({}x{})^T",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.cols).map(|j| dot(self.col(j), x)).collect())
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &Matrix) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        })
    }

    pub fn fro_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Kronecker product: block `(i, j)` of the result is `a[i, j] * b`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = Matrix::zeros(rows, cols);
    for ja in 0..a.cols {
        for jb in 0..b.cols {
            let dst = out.col_mut(ja * b.cols + jb);
            for ia in 0..a.rows {
                let s = a.get(ia, ja);
                let block = &mut dst[ia * b.rows..(ia + 1) * b.rows];
                for (d, &v) in block.iter_mut().zip(b.col(jb)) {
                    *d = s * v;
                }
            }
        }
    }
    out
}

/// Dense third-order tensor, mode 1 fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: Dims,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            data: vec![0.0; dims.0 * dims.1 * dims.2],
        }
    }

    /// Inverse of [`Tensor3::vectorize`].
    pub fn devectorize(data: Vec<f64>, dims: Dims) -> Result<Self> {
        if data.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::DimensionMismatch(format!(
                "{} values for tensor of dims {dims:?}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    /// Builds a tensor from a function of 0-based indices.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims.0 * dims.1 * dims.2);
        for i3 in 0..dims.2 {
            for i2 in 0..dims.1 {
                for i1 in 0..dims.0 {
                    data.push(f(i1, i2, i3));
                }
            }
        }
        Self { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    fn offset(&self, i1: usize, i2: usize, i3: usize) -> usize {
        i1 + self.dims.0 * (i2 + self.dims.1 * i3)
    }

    /// Element at 0-based `(i1, i2, i3)`.
    #[inline]
    pub fn get(&self, i1: usize, i2: usize, i3: usize) -> f64 {
        self.data[self.offset(i1, i2, i3)]
    }

    #[inline]
    pub fn set(&mut self, i1: usize, i2: usize, i3: usize, v: f64) {
        let o = self.offset(i1, i2, i3);
        self.data[o] = v;
    }

    /// Storage in mode-1-fastest order; equals `vec(unfold(X, 1))`.
    #[inline]
    pub fn vectorize(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        Tensor3 {
            dims: self.dims,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &Tensor3) -> Result<Tensor3> {
        same_dims(self, other)?;
        Ok(Tensor3 {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        self.add_scaled(-1.0, other)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn unfold(&self, k: usize) -> Result<Matrix> {
        unfold(self, k)
    }

    pub fn fro_norm(&self) -> f64 {
        fro_norm(self)
    }
}

fn same_dims(x: &Tensor3, y: &Tensor3) -> Result<()> {
    if x.dims != y.dims {
        return Err(Error::DimensionMismatch(format!(
            "tensor dims {:?} vs {:?}",
            x.dims, y.dims
        )));
    }
    Ok(())
}

/// Mode-`k` unfolding: an `n_k x (N / n_k)` matrix.
pub fn unfold(x: &Tensor3, k: usize) -> Result<Matrix> {
    check_mode(k)?;
    let (n1, n2, n3) = x.dims;
    let data = match k {
        1 => x.data.clone(),
        2 => {
            // row i2, column i1 + i3*n1
            let mut out = vec![0.0; x.len()];
            for i3 in 0..n3 {
                for i2 in 0..n2 {
                    for i1 in 0..n1 {
                        out[i2 + n2 * (i1 + n1 * i3)] = x.get(i1, i2, i3);
                    }
                }
            }
            out
        }
        _ => {
            // row i3, column i1 + i2*n1
            let mut out = vec![0.0; x.len()];
            let plane = n1 * n2;
            for i3 in 0..n3 {
                for p in 0..plane {
                    out[i3 + n3 * p] = x.data[p + plane * i3];
                }
            }
            out
        }
    };
    let rows = dim(x.dims, k);
    Ok(Matrix {
        rows,
        cols: x.len().checked_div(rows).unwrap_or(0),
        data,
    })
}

/// Inverse of [`unfold`].
pub fn fold(m: &Matrix, k: usize, dims: Dims) -> Result<Tensor3> {
    check_mode(k)?;
    let (n1, n2, n3) = dims;
    let nk = dim(dims, k);
    let total = n1 * n2 * n3;
    if m.rows != nk || m.rows * m.cols != total {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix cannot fold along mode {k} into {dims:?}",
            m.rows, m.cols
        )));
    }
    let mut x = Tensor3::zeros(dims);
    match k {
        1 => x.data.copy_from_slice(&m.data),
        2 => {
            for i3 in 0..n3 {
                for i2 in 0..n2 {
                    for i1 in 0..n1 {
                        x.set(i1, i2, i3, m.data[i2 + n2 * (i1 + n1 * i3)]);
                    }
                }
            }
        }
        _ => {
            let plane = n1 * n2;
            for i3 in 0..n3 {
                for p in 0..plane {
                    x.data[p + plane * i3] = m.data[i3 + n3 * p];
                }
            }
        }
    }
    Ok(x)
}

/// Mode-`k` product `X x_k U`, satisfying `unfold(result, k) = U * unfold(X, k)`.
pub fn mode_product(x: &Tensor3, u: &Matrix, k: usize) -> Result<Tensor3> {
    check_mode(k)?;
    let nk = dim(x.dims, k);
    if u.cols != nk {
        return Err(Error::DimensionMismatch(format!(
            "mode-{k} product needs {nk} columns, matrix is {}x{}",
            u.rows, u.cols
        )));
    }
    let (n1, n2, n3) = x.dims;
    let p = u.rows;
    let out_dims = with_dim(x.dims, k, p);
    let mut out = Tensor3::zeros(out_dims);
    match k {
        1 => {
            // each mode-1 fiber is a contiguous column
            for f in 0..n2 * n3 {
                let src = &x.data[f * n1..(f + 1) * n1];
                let dst = &mut out.data[f * p..(f + 1) * p];
                for (l, &s) in src.iter().enumerate() {
                    if s == 0.0 {
                        continue;
                    }
                    for (d, &a) in dst.iter_mut().zip(u.col(l)) {
                        *d += a * s;
                    }
                }
            }
        }
        2 => {
            for i3 in 0..n3 {
                let src = &x.data[i3 * n1 * n2..(i3 + 1) * n1 * n2];
                let dst = &mut out.data[i3 * n1 * p..(i3 + 1) * n1 * p];
                for l in 0..n2 {
                    let src_slab = &src[l * n1..(l + 1) * n1];
                    for (q, &a) in u.col(l).iter().enumerate() {
                        if a == 0.0 {
                            continue;
                        }
                        for (d, &s) in dst[q * n1..(q + 1) * n1].iter_mut().zip(src_slab) {
                            *d += a * s;
                        }
                    }
                }
            }
        }
        _ => {
            let plane = n1 * n2;
            for l in 0..n3 {
                let src = &x.data[l * plane..(l + 1) * plane];
                for (q, &a) in u.col(l).iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    for (d, &s) in out.data[q * plane..(q + 1) * plane].iter_mut().zip(src) {
                        *d += a * s;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Mode-`k` product with `U^T`, i.e. `X x_k U^T`, without forming the transpose.
pub fn mode_product_tr(x: &Tensor3, u: &Matrix, k: usize) -> Result<Tensor3> {
    check_mode(k)?;
    let nk = dim(x.dims, k);
    if u.rows != nk {
        return Err(Error::DimensionMismatch(format!(
            "transposed mode-{k} product needs {nk} rows, matrix is {}x{}",
            u.rows, u.cols
        )));
    }
    mode_product(x, &u.transpose(), k)
}

pub fn inner(x: &Tensor3, y: &Tensor3) -> Result<f64> {
    same_dims(x, y)?;
    Ok(dot(&x.data, &y.data))
}

pub fn fro_norm(x: &Tensor3) -> f64 {
    norm2(&x.data)
}

/// Dot product with four interleaved accumulators so the loop vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_to_eight() -> Tensor3 {
        Tensor3::devectorize((1..=8).map(f64::from).collect(), (2, 2, 2)).unwrap()
    }

    // Applies the Kolda–Bader column formula literally, with 1-based indices.
    fn unfold_oracle(x: &Tensor3, k: usize) -> Vec<Vec<f64>> {
        let (n1, n2, n3) = x.dims();
        let n = [n1, n2, n3];
        let nk = n[k - 1];
        let mut out = vec![vec![0.0; n1 * n2 * n3 / nk]; nk];
        for i1 in 1..=n1 {
            for i2 in 1..=n2 {
                for i3 in 1..=n3 {
                    let idx = [i1, i2, i3];
                    let mut j = 1;
                    for l in 1..=3 {
                        if l == k {
                            continue;
                        }
                        let jl: usize = (1..l).filter(|&m| m != k).map(|m| n[m - 1]).product();
                        j += (idx[l - 1] - 1) * jl;
                    }
                    out[idx[k - 1] - 1][j - 1] = x.get(i1 - 1, i2 - 1, i3 - 1);
                }
            }
        }
        out
    }

    fn as_rows(m: &Matrix) -> Vec<Vec<f64>> {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
            .collect()
    }

    #[test]
    fn unfold_small_examples() {
        let x = one_to_eight();
        let u1 = as_rows(&unfold(&x, 1).unwrap());
        assert_eq!(u1, vec![vec![1.0, 3.0, 5.0, 7.0], vec![2.0, 4.0, 6.0, 8.0]]);
        assert_eq!(u1, unfold_oracle(&x, 1));
        let u3 = as_rows(&unfold(&x, 3).unwrap());
        assert_eq!(u3, vec![vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0, 7.0, 8.0]]);
        assert_eq!(u3, unfold_oracle(&x, 3));
    }

    #[test]
    fn unfold_matches_index_oracle_on_rectangular_tensor() {
        let x = Tensor3::from_fn((3, 4, 5), |a, b, c| (a * 100 + b * 10 + c) as f64);
        for k in 1..=3 {
            assert_eq!(as_rows(&unfold(&x, k).unwrap()), unfold_oracle(&x, k));
        }
    }

    #[test]
    fn unfold_zero_and_bad_mode() {
        let z = Tensor3::zeros((3, 3, 3));
        for k in 1..=3 {
            let m = unfold(&z, k).unwrap();
            assert_eq!(m.shape(), (3, 9));
            assert!(m.as_slice().iter().all(|&v| v == 0.0));
        }
        assert_eq!(unfold(&z, 0), Err(Error::InvalidMode(0)));
        assert_eq!(unfold(&z, 4), Err(Error::InvalidMode(4)));
    }

    #[test]
    fn fold_examples() {
        let m = Matrix::from_rows(&[&[1.0, 3.0, 5.0, 7.0], &[2.0, 4.0, 6.0, 8.0]]).unwrap();
        assert_eq!(fold(&m, 1, (2, 2, 2)).unwrap(), one_to_eight());
        let x = Tensor3::from_fn((3, 4, 5), |a, b, c| (a + 7 * b) as f64 - 0.5 * c as f64);
        assert_eq!(fold(&unfold(&x, 2).unwrap(), 2, x.dims()).unwrap(), x);
        assert_eq!(
            fold(&Matrix::zeros(4, 15), 2, (3, 4, 5)).unwrap(),
            Tensor3::zeros((3, 4, 5))
        );
        assert!(matches!(
            fold(&Matrix::zeros(3, 15), 2, (3, 4, 5)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn mode_product_identity_and_scaling() {
        let x = Tensor3::from_fn((3, 4, 5), |a, b, c| (a as f64).sin() + (b * c) as f64);
        for k in 1..=3 {
            let n = dim(x.dims(), k);
            assert_eq!(mode_product(&x, &Matrix::identity(n), k).unwrap(), x);
            assert_eq!(
                mode_product(&x, &Matrix::identity(n).scale(2.0), k).unwrap(),
                x.scale(2.0)
            );
        }
        assert!(mode_product(&x, &Matrix::identity(4), 1).is_err());
    }

    #[test]
    fn mode_product_matches_unfolding_definition() {
        let x = Tensor3::from_fn((3, 4, 5), |a, b, c| ((a + 2 * b + 3 * c) as f64).cos());
        let u = Matrix::from_fn(2, 3, |i, j| (i as f64) - 0.3 * (j as f64) + 0.1);
        let direct = mode_product(&x, &u, 1).unwrap();
        let oracle = fold(&u.matmul(&unfold(&x, 1).unwrap()).unwrap(), 1, (2, 4, 5)).unwrap();
        assert_eq!(direct.dims(), (2, 4, 5));
        let diff = direct.sub(&oracle).unwrap().fro_norm();
        assert!(diff <= 1e-14 * oracle.fro_norm());
    }

    #[test]
    fn inner_and_norm_examples() {
        let x = one_to_eight();
        assert_eq!(inner(&x, &Tensor3::zeros((2, 2, 2))).unwrap(), 0.0);
        assert_eq!(inner(&x, &x).unwrap(), 204.0);
        assert_eq!(fro_norm(&Tensor3::zeros((2, 3, 4))), 0.0);
        let mut single = Tensor3::zeros((2, 3, 4));
        single.set(1, 2, 3, -3.0);
        assert_eq!(fro_norm(&single), 3.0);
        assert!(inner(&x, &Tensor3::zeros((2, 2, 3))).is_err());
    }

    #[test]
    fn vectorize_is_storage_order() {
        let x = one_to_eight();
        assert_eq!(x.vectorize(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(x.vectorize(), unfold(&x, 1).unwrap().as_slice());
        assert!(Tensor3::devectorize(vec![0.0; 7], (2, 2, 2)).is_err());
    }

    #[test]
    fn kron_examples() {
        assert_eq!(
            kron(&Matrix::identity(2), &Matrix::identity(3)),
            Matrix::identity(6)
        );
        let a = Matrix::from_rows(&[&[1.0, 2.0]]).unwrap();
        let b = Matrix::from_rows(&[&[3.0], &[4.0]]).unwrap();
        let expected = Matrix::from_rows(&[&[3.0, 6.0], &[4.0, 8.0]]).unwrap();
        assert_eq!(kron(&a, &b), expected);
        let z = kron(&a, &Matrix::zeros(2, 3));
        assert_eq!(z, Matrix::zeros(2, 6));
    }

    #[test]
    fn matrix_products_agree() {
        let a = Matrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 - 2.0);
        let b = Matrix::from_fn(4, 2, |i, j| (i as f64) * 0.5 - j as f64);
        assert_eq!(a.tr_matmul(&b).unwrap(), a.transpose().matmul(&b).unwrap());
        let x = [1.0, -2.0, 0.5, 3.0];
        assert_eq!(a.tr_matvec(&x).unwrap(), a.transpose().matvec(&x).unwrap());
    }
}
