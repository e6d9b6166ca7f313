//! StoTAM and the StoTIHT baseline.
//!
//! Both minimize the least-squares loss
//!
//! ```text
//! F(X) = 1/(2m) ‖y - A(X)‖²,   f_i(X) = 1/(2b') ‖y_[i] - A_[i] vec(X)‖²
//! ```
//!
//! over mini-batches drawn uniformly with replacement. StoTAM works on the
//! Tucker factors directly: a closed-form least-squares core update followed
//! by a gradient step on each factor and a QR retraction back to the Stiefel
//! manifold. StoTIHT takes a gradient step on the full tensor and projects
//! with a truncated HOSVD.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{hosvd_project, hosvd_truncate, qr_retraction, Ranks, TuckerFactors};
use crate::numerics::lstsq_minnorm;
use crate::sensing::{Batch, MeasurementSet, MiniBatchPlan, SensingEnsemble};
use crate::tensor::{check_mode, dim, dot, kron, mode_product_tr, unfold, Matrix, Tensor3};

/// Fixed stepsizes: one per factor for StoTAM and one for StoTIHT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes {
    pub mu_u: [f64; 3],
    pub mu_tiht: f64,
}

impl StepSizes {
    pub fn uniform(mu: f64) -> Self {
        Self {
            mu_u: [mu; 3],
            mu_tiht: mu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .mu_u
            .iter()
            .chain(std::iter::once(&self.mu_tiht))
            .all(|&m| m.is_finite() && m > 0.0)
        {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "stepsizes must be positive and finite, got {self:?}"
            )))
        }
    }
}

impl Default for StepSizes {
    fn default() -> Self {
        Self::uniform(25.0)
    }
}

/// `F(X) = 1/(2m) ‖y - A(X)‖²`.
pub fn full_objective(e: &SensingEnsemble, y: &MeasurementSet, x: &Tensor3) -> Result<f64> {
    if y.len() != e.m() {
        return Err(Error::DimensionMismatch(format!(
            "{} measurements for operator with m = {}",
            y.len(),
            e.m()
        )));
    }
    let ax = e.apply(x)?;
    let ss: f64 = ax.iter().zip(&y.y).map(|(a, b)| (b - a).powi(2)).sum();
    Ok(ss / (2.0 * e.m() as f64))
}

/// `f_i(X) = 1/(2b') ‖y_b - A_b vec(X)‖²` with `b'` the actual batch size.
pub fn minibatch_objective(batch: &Batch<'_>, x: &Tensor3) -> Result<f64> {
    let r = batch.residual(x)?;
    Ok(r.iter().map(|v| v * v).sum::<f64>() / (2.0 * batch.len() as f64))
}

/// `‖X* - X̂‖_F / ‖X*‖_F`.
pub fn relative_error(x_hat: &Tensor3, x_star: &Tensor3) -> Result<f64> {
    let denom = x_star.fro_norm();
    if denom == 0.0 {
        return Err(Error::ZeroGroundTruth);
    }
    Ok(x_star.sub(x_hat)?.fro_norm() / denom)
}

/// Truncated HOSVD of the proxy `(1/m) A*(y)`.
pub fn spectral_init(e: &SensingEnsemble, y: &MeasurementSet, ranks: Ranks) -> Result<TuckerFactors> {
    hosvd_truncate(&e.adjoint_proxy(y)?, ranks)
}

fn check_factor_rows(batch: &Batch<'_>, factors: &[Matrix; 3]) -> Result<()> {
    let dims = batch.dims();
    if (factors[0].rows(), factors[1].rows(), factors[2].rows()) != dims {
        return Err(Error::DimensionMismatch(format!(
            "factor rows do not match batch dims {dims:?}"
        )));
    }
    Ok(())
}

/// `A_b (U3 ⊗ U2 ⊗ U1)`, a `b' x r1 r2 r3` matrix.
///
/// Row `j` is `vec(A_j x1 U1^T x2 U2^T x3 U3^T)`. Each row is contracted
/// along mode 3 first (contiguous `n1 n2` planes), then mode 1, then mode 2,
/// so the Kronecker product is never formed.
pub fn core_design(batch: &Batch<'_>, factors: &[Matrix; 3]) -> Result<Matrix> {
    check_factor_rows(batch, factors)?;
    let (n1, n2, _) = batch.dims();
    let [u1, u2, u3] = factors;
    let (r1, r2, r3) = (u1.cols(), u2.cols(), u3.cols());
    let plane = n1 * n2;
    let rr = r1 * r2 * r3;
    let b = batch.len();

    let mut out = Matrix::zeros(b, rr);
    // t3: (n1, n2, r3), t1: (r1, n2, r3)
    let mut t3 = vec![0.0; plane * r3];
    let mut t1 = vec![0.0; r1 * n2 * r3];
    for j in 0..b {
        let row = batch.row(j);
        t3.iter_mut().for_each(|v| *v = 0.0);
        for (i3, src) in row.chunks_exact(plane).enumerate() {
            for q in 0..r3 {
                let w = u3.get(i3, q);
                for (d, &a) in t3[q * plane..(q + 1) * plane].iter_mut().zip(src) {
                    *d += w * a;
                }
            }
        }
        for (f, fiber) in t3.chunks_exact(n1).enumerate() {
            for a in 0..r1 {
                t1[a + r1 * f] = dot(u1.col(a), fiber);
            }
        }
        for q in 0..r3 {
            for c in 0..r2 {
                let w = u2.col(c);
                for a in 0..r1 {
                    let mut acc = 0.0;
                    for (i2, &wv) in w.iter().enumerate() {
                        acc += wv * t1[a + r1 * (i2 + n2 * q)];
                    }
                    out.set(j, a + r1 * (c + r2 * q), acc);
                }
            }
        }
    }
    Ok(out)
}

/// Same matrix as [`core_design`], built by materializing `U3 ⊗ U2 ⊗ U1`.
pub fn core_design_kron(batch: &Batch<'_>, factors: &[Matrix; 3]) -> Result<Matrix> {
    check_factor_rows(batch, factors)?;
    let u_kron = kron(&factors[2], &kron(&factors[1], &factors[0]));
    let b = batch.len();
    Ok(Matrix::from_fn(b, u_kron.cols(), |j, c| {
        dot(batch.row(j), u_kron.col(c))
    }))
}

/// Closed-form core update `s = (A_b U_kron)^+ y_b`, reshaped to `(r1, r2, r3)`.
pub fn core_update(batch: &Batch<'_>, factors: &[Matrix; 3]) -> Result<Tensor3> {
    let design = core_design(batch, factors)?;
    let s = lstsq_minnorm(&design, batch.y())?;
    Tensor3::devectorize(s, (factors[0].cols(), factors[1].cols(), factors[2].cols()))
}

fn other_modes(k: usize) -> (usize, usize) {
    match k {
        1 => (2, 3),
        2 => (1, 3),
        _ => (1, 2),
    }
}

/// The `n_k r_k x b'` matrix whose column `j` is
/// `vec(A_j^(k) W_k S^(k)^T)` with `W_1 = U3 ⊗ U2`, `W_2 = U3 ⊗ U1`,
/// `W_3 = U2 ⊗ U1`.
pub fn omega_matrix(k: usize, batch: &Batch<'_>, core: &Tensor3, factors: &[Matrix; 3]) -> Result<Matrix> {
    check_mode(k)?;
    let (a, b) = other_modes(k);
    let w = kron(&factors[b - 1], &factors[a - 1]);
    let s_k = unfold(core, k)?;
    let right = w.matmul(&s_k.transpose())?;
    let nk = dim(batch.dims(), k);
    let rk = factors[k - 1].cols();
    let mut omega = Matrix::zeros(nk * rk, batch.len());
    for j in 0..batch.len() {
        let a_k = unfold(&batch.sensing_tensor(j), k)?;
        let col = a_k.matmul(&right)?;
        omega.col_mut(j).copy_from_slice(col.as_slice());
    }
    Ok(omega)
}

/// Gradient of `f_i(S x1 U1 x2 U2 x3 U3)` with respect to `U_k`, given
/// `adj = A_b^T r` for the batch residual `r`.
fn factor_gradient_from_adjoint(
    k: usize,
    adj: &Tensor3,
    core: &Tensor3,
    factors: &[Matrix; 3],
    batch_len: usize,
) -> Result<Matrix> {
    // unfold_k(G) (U_b ⊗ U_a) = unfold_k(G x_a U_a^T x_b U_b^T)
    let (a, b) = other_modes(k);
    let reduced = mode_product_tr(adj, &factors[a - 1], a)?;
    let reduced = mode_product_tr(&reduced, &factors[b - 1], b)?;
    let g = unfold(&reduced, k)?.matmul(&unfold(core, k)?.transpose())?;
    Ok(g.scale(1.0 / batch_len as f64))
}

/// `∇_{U_k} f_i = (1/b') Ω_k (A_b U_kron s - y_b)`, as an `n_k x r_k` matrix.
///
/// Evaluated by contracting the back-projected residual `A_b^T r` with the
/// other two factors, which equals `Ω_k r` without forming `Ω_k`.
pub fn factor_gradient(k: usize, batch: &Batch<'_>, core: &Tensor3, factors: &[Matrix; 3]) -> Result<Matrix> {
    check_mode(k)?;
    let design = core_design(batch, factors)?;
    let mut r = design.matvec(core.vectorize())?;
    r.iter_mut().zip(batch.y()).for_each(|(a, b)| *a -= b);
    let adj = batch.adjoint(&r)?;
    factor_gradient_from_adjoint(k, &adj, core, factors, batch.len())
}

/// StoTAM iterate `(S^t, {U_k^t})`.
#[derive(Debug, Clone, PartialEq)]
pub struct StoTamState {
    pub factors: TuckerFactors,
    pub iteration: usize,
}

impl StoTamState {
    pub fn new(factors: TuckerFactors) -> Self {
        Self {
            factors,
            iteration: 0,
        }
    }

    pub fn estimate(&self) -> Tensor3 {
        self.factors.reconstruct()
    }
}

fn diverged(iteration: usize, reason: impl Into<String>) -> Error {
    Error::Diverged {
        iteration,
        reason: reason.into(),
    }
}

/// One StoTAM step on a given mini-batch.
///
/// All three factor gradients are taken at the new core and the old factors
/// before any retraction.
pub fn stotam_step(state: &StoTamState, batch: &Batch<'_>, steps: &StepSizes) -> Result<StoTamState> {
    let t = state.iteration;
    let factors = state.factors.factors();
    let design = core_design(batch, factors)?;
    let s = lstsq_minnorm(&design, batch.y())?;
    if s.iter().any(|v| !v.is_finite()) {
        return Err(diverged(t, "non-finite core"));
    }
    let core = Tensor3::devectorize(s, state.factors.ranks())?;
    let mut r = design.matvec(core.vectorize())?;
    r.iter_mut().zip(batch.y()).for_each(|(a, b)| *a -= b);
    let adj = batch.adjoint(&r)?;

    let mut next: [Option<Matrix>; 3] = [None, None, None];
    for k in 1..=3 {
        let grad = factor_gradient_from_adjoint(k, &adj, &core, factors, batch.len())?;
        let u_tilde = factors[k - 1].add_scaled(-steps.mu_u[k - 1], &grad)?;
        if !u_tilde.is_finite() {
            return Err(diverged(t, format!("non-finite factor U{k}")));
        }
        let u = qr_retraction(&u_tilde).map_err(|e| diverged(t, format!("retraction of U{k}: {e}")))?;
        next[k - 1] = Some(u);
    }
    let [u1, u2, u3] = next.map(|u| u.expect("all modes updated"));
    Ok(StoTamState {
        factors: TuckerFactors::new(core, [u1, u2, u3])?,
        iteration: t + 1,
    })
}

/// Draws `i_t` uniformly from `[M]` and performs one StoTAM step.
pub fn stotam_iteration(
    state: &StoTamState,
    e: &SensingEnsemble,
    y: &MeasurementSet,
    plan: &MiniBatchPlan,
    steps: &StepSizes,
    rng: &mut impl Rng,
) -> Result<StoTamState> {
    let i = rng.random_range(1..=plan.count());
    stotam_step(state, &e.batch(y, plan, i)?, steps)
}

/// StoTIHT iterate `X^t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StoTihtState {
    pub x: Tensor3,
    pub iteration: usize,
}

impl StoTihtState {
    pub fn new(x: Tensor3) -> Self {
        Self { x, iteration: 0 }
    }
}

/// `∇f_i(X) = (1/b') A_b^T (A_b vec(X) - y_b)`.
pub fn stotiht_gradient(batch: &Batch<'_>, x: &Tensor3) -> Result<Tensor3> {
    let r = batch.residual(x)?;
    Ok(batch.adjoint(&r)?.scale(1.0 / batch.len() as f64))
}

/// `X^{t+1} = H_r(X^t - mu ∇f_i(X^t))` on a given batch.
pub fn stotiht_step(state: &StoTihtState, batch: &Batch<'_>, mu: f64, ranks: Ranks) -> Result<StoTihtState> {
    let t = state.iteration;
    let grad = stotiht_gradient(batch, &state.x)?;
    let stepped = state.x.add_scaled(-mu, &grad)?;
    if !stepped.is_finite() {
        return Err(diverged(t, "non-finite gradient step"));
    }
    Ok(StoTihtState {
        x: hosvd_project(&stepped, ranks)?,
        iteration: t + 1,
    })
}

/// Draws `i_t` uniformly from `[M]` and performs one StoTIHT step.
pub fn stotiht_iteration(
    state: &StoTihtState,
    e: &SensingEnsemble,
    y: &MeasurementSet,
    plan: &MiniBatchPlan,
    mu: f64,
    ranks: Ranks,
    rng: &mut impl Rng,
) -> Result<StoTihtState> {
    let i = rng.random_range(1..=plan.count());
    stotiht_step(state, &e.batch(y, plan, i)?, mu, ranks)
}

/// Which recovery method to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    StoTam,
    StoTiht,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::StoTam, Algorithm::StoTiht];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::StoTam => "stotam",
            Algorithm::StoTiht => "stotiht",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stotam" => Ok(Algorithm::StoTam),
            "stotiht" => Ok(Algorithm::StoTiht),
            other => Err(Error::InvalidConfig(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Running state of either method behind a common interface.
#[derive(Debug, Clone)]
pub enum Solver {
    StoTam(StoTamState),
    StoTiht(StoTihtState),
}

impl Solver {
    /// Both methods start from the same spectral estimate.
    pub fn spectral(
        algorithm: Algorithm,
        e: &SensingEnsemble,
        y: &MeasurementSet,
        ranks: Ranks,
    ) -> Result<Self> {
        let init = spectral_init(e, y, ranks)?;
        Ok(match algorithm {
            Algorithm::StoTam => Solver::StoTam(StoTamState::new(init)),
            Algorithm::StoTiht => Solver::StoTiht(StoTihtState::new(init.reconstruct())),
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Solver::StoTam(_) => Algorithm::StoTam,
            Solver::StoTiht(_) => Algorithm::StoTiht,
        }
    }

    pub fn iteration(&self) -> usize {
        match self {
            Solver::StoTam(s) => s.iteration,
            Solver::StoTiht(s) => s.iteration,
        }
    }

    pub fn estimate(&self) -> Tensor3 {
        match self {
            Solver::StoTam(s) => s.estimate(),
            Solver::StoTiht(s) => s.x.clone(),
        }
    }

    pub fn step(
        &mut self,
        e: &SensingEnsemble,
        y: &MeasurementSet,
        plan: &MiniBatchPlan,
        steps: &StepSizes,
        ranks: Ranks,
        rng: &mut impl Rng,
    ) -> Result<()> {
        match self {
            Solver::StoTam(s) => *s = stotam_iteration(s, e, y, plan, steps, rng)?,
            Solver::StoTiht(s) => *s = stotiht_iteration(s, e, y, plan, steps.mu_tiht, ranks, rng)?,
        }
        Ok(())
    }
}
