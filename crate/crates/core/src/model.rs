//! Tucker factorizations: reconstruction, truncated HOSVD, QR retraction and
//! random ground truth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{thin_qr, top_left_singular_vectors};
use crate::tensor::{mode_product, mode_product_tr, unfold, Dims, Matrix, Tensor3};

/// Tolerance on `‖U^T U - I‖_F` for factor matrices.
pub const STIEFEL_TOL: f64 = 1e-10;

/// Multilinear rank `(r1, r2, r3)`.
pub type Ranks = (usize, usize, usize);

/// Core tensor with three orthonormal factor matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerFactors {
    core: Tensor3,
    factors: [Matrix; 3],
}

/// `‖U^T U - I‖_F`.
pub fn orthonormality_defect(u: &Matrix) -> f64 {
    let g = u.tr_matmul(u).expect("U^T U is always defined");
    g.add_scaled(-1.0, &Matrix::identity(u.cols()))
        .expect("square Gram matrix")
        .fro_norm()
}

impl TuckerFactors {
    /// Validates shapes and the orthonormality of each factor.
    pub fn new(core: Tensor3, factors: [Matrix; 3]) -> Result<Self> {
        let r = core.dims();
        for (k, (u, rk)) in factors.iter().zip([r.0, r.1, r.2]).enumerate() {
            if u.cols() != rk {
                return Err(Error::DimensionMismatch(format!(
                    "factor {} has {} columns, core rank is {rk}",
                    k + 1,
                    u.cols()
                )));
            }
            if rk > u.rows() {
                return Err(Error::RankOutOfRange {
                    rank: rk,
                    size: u.rows(),
                });
            }
            let defect = orthonormality_defect(u);
            if defect.is_nan() || defect > STIEFEL_TOL {
                return Err(Error::DimensionMismatch(format!(
                    "factor {} is not orthonormal (defect {defect:e})",
                    k + 1
                )));
            }
        }
        Ok(Self { core, factors })
    }

    pub fn core(&self) -> &Tensor3 {
        &self.core
    }

    pub fn factors(&self) -> &[Matrix; 3] {
        &self.factors
    }

    /// Factor `U_k` for `k` in 1..=3.
    pub fn factor(&self, k: usize) -> &Matrix {
        &self.factors[k - 1]
    }

    pub fn ranks(&self) -> Ranks {
        self.core.dims()
    }

    pub fn ambient_dims(&self) -> Dims {
        (
            self.factors[0].rows(),
            self.factors[1].rows(),
            self.factors[2].rows(),
        )
    }

    pub fn into_parts(self) -> (Tensor3, [Matrix; 3]) {
        (self.core, self.factors)
    }

    /// `S x1 U1 x2 U2 x3 U3`.
    pub fn reconstruct(&self) -> Tensor3 {
        tucker_product(&self.core, &self.factors).expect("validated shapes")
    }

    /// Largest orthonormality defect over the three factors.
    pub fn max_orthonormality_defect(&self) -> f64 {
        self.factors.iter().map(orthonormality_defect).fold(0.0, f64::max)
    }
}

/// `S x1 U1 x2 U2 x3 U3` for arbitrary (not necessarily orthonormal) factors.
pub fn tucker_product(core: &Tensor3, factors: &[Matrix; 3]) -> Result<Tensor3> {
    let t = mode_product(core, &factors[0], 1)?;
    let t = mode_product(&t, &factors[1], 2)?;
    mode_product(&t, &factors[2], 3)
}

/// `X x1 U1^T x2 U2^T x3 U3^T`.
pub fn project_core(x: &Tensor3, factors: &[Matrix; 3]) -> Result<Tensor3> {
    let t = mode_product_tr(x, &factors[0], 1)?;
    let t = mode_product_tr(&t, &factors[1], 2)?;
    mode_product_tr(&t, &factors[2], 3)
}

/// Classic truncated HOSVD: independent SVDs of the three unfoldings of `x`.
pub fn hosvd_truncate(x: &Tensor3, ranks: Ranks) -> Result<TuckerFactors> {
    let dims = x.dims();
    for (r, n) in [(ranks.0, dims.0), (ranks.1, dims.1), (ranks.2, dims.2)] {
        if r > n {
            return Err(Error::RankOutOfRange { rank: r, size: n });
        }
    }
    let factors = [
        top_left_singular_vectors(&unfold(x, 1)?, ranks.0)?,
        top_left_singular_vectors(&unfold(x, 2)?, ranks.1)?,
        top_left_singular_vectors(&unfold(x, 3)?, ranks.2)?,
    ];
    let core = project_core(x, &factors)?;
    Ok(TuckerFactors { core, factors })
}

/// Rank-`r` Tucker approximation `H_r(X)` as a full tensor.
pub fn hosvd_project(x: &Tensor3, ranks: Ranks) -> Result<Tensor3> {
    Ok(hosvd_truncate(x, ranks)?.reconstruct())
}

/// Q factor of the sign-fixed thin QR of `u_tilde`.
pub fn qr_retraction(u_tilde: &Matrix) -> Result<Matrix> {
    thin_qr(u_tilde).map(|(q, _)| q)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Random in-model tensor: standard Gaussian core, factors obtained by
/// orthonormalizing standard Gaussian matrices. The stream is consumed in
/// the order core, `U1`, `U2`, `U3`.
pub fn random_ground_truth(dims: Dims, ranks: Ranks, seed: u64) -> Result<(TuckerFactors, Tensor3)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_ground_truth_from_rng(dims, ranks, &mut rng)
}

pub fn random_ground_truth_from_rng(
    dims: Dims,
    ranks: Ranks,
    rng: &mut ChaCha8Rng,
) -> Result<(TuckerFactors, Tensor3)> {
    for (r, n) in [(ranks.0, dims.0), (ranks.1, dims.1), (ranks.2, dims.2)] {
        if r > n || r == 0 {
            return Err(Error::RankOutOfRange { rank: r, size: n });
        }
    }
    let core = Tensor3::from_fn(ranks, |_, _, _| StandardNormal.sample(&mut *rng));
    let mut factor = |n, r| qr_retraction(&gaussian_matrix(n, r, rng));
    let factors = [
        factor(dims.0, ranks.0)?,
        factor(dims.1, ranks.1)?,
        factor(dims.2, ranks.2)?,
    ];
    let tucker = TuckerFactors::new(core, factors)?;
    let x = tucker.reconstruct();
    Ok((tucker, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::kron;

    fn rel(a: &Tensor3, b: &Tensor3) -> f64 {
        a.sub(b).unwrap().fro_norm() / b.fro_norm()
    }

    #[test]
    fn reconstruct_with_identity_factors_returns_core() {
        let core = Tensor3::from_fn((2, 3, 2), |a, b, c| (a + 2 * b) as f64 - c as f64);
        let f = TuckerFactors::new(
            core.clone(),
            [Matrix::identity(2), Matrix::identity(3), Matrix::identity(2)],
        )
        .unwrap();
        assert_eq!(f.reconstruct(), core);
    }

    #[test]
    fn reconstruct_zero_core() {
        let (f, _) = random_ground_truth((4, 5, 6), (2, 2, 3), 3).unwrap();
        let (_, factors) = f.into_parts();
        let z = TuckerFactors::new(Tensor3::zeros((2, 2, 3)), factors).unwrap();
        assert_eq!(z.reconstruct(), Tensor3::zeros((4, 5, 6)));
    }

    #[test]
    fn reconstruct_matches_kronecker() {
        let (f, x) = random_ground_truth((4, 3, 5), (2, 3, 2), 11).unwrap();
        let [u1, u2, u3] = f.factors();
        let k = kron(u3, &kron(u2, u1));
        let v = k.matvec(f.core().vectorize()).unwrap();
        let err: f64 = v
            .iter()
            .zip(x.vectorize())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-12 * x.fro_norm());
    }

    #[test]
    fn new_rejects_bad_factors() {
        let core = Tensor3::zeros((2, 2, 2));
        let bad = Matrix::from_fn(3, 2, |i, j| (i + j) as f64);
        assert!(TuckerFactors::new(core.clone(), [bad, Matrix::identity(2), Matrix::identity(2)]).is_err());
        assert!(TuckerFactors::new(
            core,
            [Matrix::identity(3), Matrix::identity(2), Matrix::identity(2)]
        )
        .is_err());
    }

    #[test]
    fn hosvd_of_in_model_tensor_is_exact() {
        for seed in 0..5 {
            let (_, x) = random_ground_truth((10, 10, 15), (2, 2, 2), seed).unwrap();
            let h = hosvd_truncate(&x, (2, 2, 2)).unwrap();
            assert!(rel(&h.reconstruct(), &x) <= 1e-10);
            assert!(h.max_orthonormality_defect() <= STIEFEL_TOL);
        }
    }

    #[test]
    fn hosvd_of_zero() {
        let h = hosvd_truncate(&Tensor3::zeros((3, 4, 5)), (2, 2, 2)).unwrap();
        assert_eq!(h.core(), &Tensor3::zeros((2, 2, 2)));
        assert!(h.max_orthonormality_defect() <= STIEFEL_TOL);
        assert!(matches!(
            hosvd_truncate(&Tensor3::zeros((3, 4, 5)), (4, 1, 1)),
            Err(Error::RankOutOfRange { rank: 4, size: 3 })
        ));
    }

    #[test]
    fn ground_truth_is_deterministic_and_low_rank() {
        let (fa, xa) = random_ground_truth((10, 10, 15), (2, 2, 2), 42).unwrap();
        let (fb, xb) = random_ground_truth((10, 10, 15), (2, 2, 2), 42).unwrap();
        assert_eq!(fa, fb);
        assert_eq!(xa, xb);
        for u in fa.factors() {
            assert!(orthonormality_defect(u) <= 1e-12);
        }
        for k in 1..=3 {
            let m = unfold(&xa, k).unwrap();
            let sv = nalgebra::DMatrix::from_column_slice(m.rows(), m.cols(), m.as_slice()).singular_values();
            let mut s: Vec<f64> = sv.iter().copied().collect();
            s.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert!(s[1] > 1e-8, "mode {k}: {s:?}");
            assert!(s[2] < 1e-10, "mode {k}: {s:?}");
        }
    }

    #[test]
    fn retraction_examples() {
        let (f, _) = random_ground_truth((10, 8, 6), (2, 3, 2), 5).unwrap();
        let u = f.factor(1);
        let same = qr_retraction(u).unwrap();
        assert!(same.add_scaled(-1.0, u).unwrap().fro_norm() <= 1e-12);
        let scaled = qr_retraction(&u.scale(5.0)).unwrap();
        assert!(scaled.add_scaled(-1.0, u).unwrap().fro_norm() <= 1e-12);
        assert!(matches!(
            qr_retraction(&Matrix::zeros(4, 2)),
            Err(Error::RankDeficient { .. })
        ));
    }
}
