//! Dense kernels: sign-fixed thin QR, minimum-norm least squares and
//! leading left singular vectors.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{dot, Matrix};

/// Relative threshold on `|R[i,i]| / ‖A‖_F` below which a QR factorization is
/// reported as rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Gram-matrix condition number above which least squares falls back to the
/// SVD route.
pub const GRAM_COND_LIMIT: f64 = 1e8;

/// Householder reflectors and the (unsigned) `R` of an `m x n` matrix, `m >= n`.
struct Householder {
    // reflector vectors stored in the lower part of `qr`, R in the upper part
    qr: Matrix,
    diag: Vec<f64>,
    betas: Vec<f64>,
}

fn householder(a: &Matrix) -> Householder {
    let (m, n) = a.shape();
    let mut qr = a.clone();
    let mut diag = vec![0.0; n];
    let mut betas = vec![0.0; n];
    for j in 0..n {
        let col = &qr.col(j)[j..];
        let alpha = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha == 0.0 {
            diag[j] = 0.0;
            betas[j] = 0.0;
            continue;
        }
        let x0 = col[0];
        let r = if x0 > 0.0 { -alpha } else { alpha };
        // v = x - r e1, normalized so that H = I - beta v v^T
        let v0 = x0 - r;
        {
            let c = &mut qr.col_mut(j)[j..];
            c[0] = v0;
        }
        let vnorm2 = {
            let c = &qr.col(j)[j..];
            c.iter().map(|v| v * v).sum::<f64>()
        };
        let beta = 2.0 / vnorm2;
        betas[j] = beta;
        diag[j] = r;
        for l in j + 1..n {
            let s = {
                let v = &qr.col(j)[j..];
                let c = &qr.col(l)[j..];
                dot(v, c) * beta
            };
            let data = qr.as_mut_slice();
            for i in j..m {
                data[i + l * m] -= s * data[i + j * m];
            }
        }
    }
    Householder { qr, diag, betas }
}

impl Householder {
    /// Applies `Q^T` to a vector in place.
    fn apply_qt(&self, y: &mut [f64]) {
        let n = self.diag.len();
        for j in 0..n {
            if self.betas[j] == 0.0 {
                continue;
            }
            let v = &self.qr.col(j)[j..];
            let s = dot(v, &y[j..]) * self.betas[j];
            for (yi, vi) in y[j..].iter_mut().zip(v) {
                *yi -= s * vi;
            }
        }
    }

    fn thin_q(&self) -> Matrix {
        let (m, n) = self.qr.shape();
        let mut q = Matrix::zeros(m, n);
        for c in 0..n {
            q.set(c, c, 1.0);
        }
        // Q = H_0 H_1 ... H_{n-1} [I; 0], applied right to left
        for j in (0..n).rev() {
            if self.betas[j] == 0.0 {
                continue;
            }
            let v = &self.qr.col(j)[j..];
            for c in j..n {
                let col = &mut q.col_mut(c)[j..];
                let s = dot(v, col) * self.betas[j];
                for (x, vi) in col.iter_mut().zip(v) {
                    *x -= s * vi;
                }
            }
        }
        q
    }

    fn r(&self) -> Matrix {
        let n = self.diag.len();
        Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => self.qr.get(i, j),
            std::cmp::Ordering::Equal => self.diag[i],
            std::cmp::Ordering::Greater => 0.0,
        })
    }
}

/// Thin QR factorization `A = Q R` of a tall matrix with `Q` of size
/// `rows x cols` and `R` upper triangular with nonnegative diagonal.
///
/// Returns [`Error::RankDeficient`] when a diagonal entry of `R` falls below
/// `RANK_TOL * ‖A‖_F`.
pub fn thin_qr(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "thin QR needs rows >= cols, got {m}x{n}"
        )));
    }
    let threshold = RANK_TOL * a.fro_norm();
    let h = householder(a);
    if let Some((index, &value)) = h
        .diag
        .iter()
        .enumerate()
        .find(|(_, d)| d.abs() <= threshold || !d.is_finite())
    {
        return Err(Error::RankDeficient {
            index,
            value: value.abs(),
            threshold,
        });
    }
    let mut q = h.thin_q();
    let mut r = h.r();
    for i in 0..n {
        if h.diag[i] < 0.0 {
            for v in q.col_mut(i) {
                *v = -*v;
            }
            for j in i..n {
                r.set(i, j, -r.get(i, j));
            }
        }
    }
    Ok((q, r))
}

/// Minimum-norm least-squares solution `x = A^+ y`.
///
/// Tall systems whose Gram matrix is well conditioned are solved through
/// Householder QR; everything else (wide, rank deficient, ill conditioned)
/// goes through the SVD.
pub fn lstsq_minnorm(a: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for {m}x{n} system",
            y.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if m >= n {
        let h = householder(a);
        let dmax = h.diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
        let dmin = h.diag.iter().fold(f64::INFINITY, |acc, d| acc.min(d.abs()));
        if dmin > 0.0 && (dmax / dmin).powi(2) < GRAM_COND_LIMIT {
            let mut qty = y.to_vec();
            h.apply_qt(&mut qty);
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                let mut s = qty[i];
                for (j, xj) in x.iter().enumerate().skip(i + 1) {
                    s -= h.qr.get(i, j) * xj;
                }
                x[i] = s / h.diag[i];
            }
            return Ok(x);
        }
    }
    Ok(lstsq_svd(a, y))
}

fn to_nalgebra(a: &Matrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(a.rows(), a.cols(), a.as_slice())
}

fn lstsq_svd(a: &Matrix, y: &[f64]) -> Vec<f64> {
    let (m, n) = a.shape();
    let svd = to_nalgebra(a).svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |acc, s| acc.max(*s));
    let cutoff = f64::EPSILON * m.max(n) as f64 * smax;
    let mut x = vec![0.0; n];
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            continue;
        }
        let coef = u.column(k).iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / s;
        for (xi, v) in x.iter_mut().zip(vt.row(k).iter()) {
            *xi += coef * v;
        }
    }
    x
}

/// The `r` leading left singular vectors of `m`, as an `m.rows() x r`
/// matrix with orthonormal columns.
pub fn top_left_singular_vectors(m: &Matrix, r: usize) -> Result<Matrix> {
    let limit = m.rows().min(m.cols());
    if r > limit {
        return Err(Error::RankOutOfRange { rank: r, size: limit });
    }
    if r == 0 {
        return Ok(Matrix::zeros(m.rows(), 0));
    }
    if !m.is_finite() {
        return Err(Error::DimensionMismatch(
            "singular vectors of a non-finite matrix".into(),
        ));
    }
    let svd = nalgebra::SVD::try_new(to_nalgebra(m), true, false, f64::EPSILON, 0)
        .expect("unbounded SVD iteration converges on finite input");
    let u = svd.u.expect("left singular vectors requested");
    Ok(Matrix::from_fn(m.rows(), r, |i, j| u[(i, j)]))
}
