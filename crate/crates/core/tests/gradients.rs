//! Finite-difference, Ω-matrix and optimality oracles for the solver updates.

mod common;

use common::{batch, gaussian_matrix, gaussian_tensor, gaussian_vec, instance, norm, rel_diff, rng};
use stotam::algorithms::{
    core_design, core_design_kron, core_update, factor_gradient, minibatch_objective, omega_matrix,
    stotiht_gradient,
};
use stotam::model::tucker_product;
use stotam::tensor::{kron, unfold};
use stotam::{Matrix, SensingEnsemble, Tensor3};

const DIMS: (usize, usize, usize) = (4, 4, 4);
const RANKS: (usize, usize, usize) = (2, 2, 2);
const H: f64 = 1e-6;

fn random_problem(seed: u64, b: usize) -> (SensingEnsemble, Vec<f64>, Tensor3, [Matrix; 3]) {
    let mut g = rng(seed);
    let e = SensingEnsemble::gaussian_from_rng(DIMS, b, &mut g).unwrap();
    let y = gaussian_vec(b, &mut g);
    let core = gaussian_tensor(RANKS, &mut g);
    let factors = [
        gaussian_matrix(DIMS.0, RANKS.0, &mut g),
        gaussian_matrix(DIMS.1, RANKS.1, &mut g),
        gaussian_matrix(DIMS.2, RANKS.2, &mut g),
    ];
    (e, y, core, factors)
}

fn objective_at(e: &SensingEnsemble, y: &[f64], core: &Tensor3, factors: &[Matrix; 3]) -> f64 {
    let x = tucker_product(core, factors).unwrap();
    minibatch_objective(&batch(DIMS, e.rows_row_major(), y), &x).unwrap()
}

#[test]
fn factor_gradient_matches_central_differences() {
    for seed in 0..10 {
        let (e, y, core, factors) = random_problem(seed, 8);
        let bt = batch(DIMS, e.rows_row_major(), &y);
        for k in 1..=3 {
            let grad = factor_gradient(k, &bt, &core, &factors).unwrap();
            let u = &factors[k - 1];
            let mut fd = Matrix::zeros(u.rows(), u.cols());
            for i in 0..u.rows() {
                for j in 0..u.cols() {
                    let mut plus = factors.clone();
                    let mut minus = factors.clone();
                    plus[k - 1].set(i, j, u.get(i, j) + H);
                    minus[k - 1].set(i, j, u.get(i, j) - H);
                    let d = objective_at(&e, &y, &core, &plus) - objective_at(&e, &y, &core, &minus);
                    fd.set(i, j, d / (2.0 * H));
                }
            }
            let err = rel_diff(grad.as_slice(), fd.as_slice());
            assert!(err <= 1e-6, "seed {seed} mode {k}: {err:e}");
        }
    }
}

#[test]
fn stotiht_gradient_matches_central_differences() {
    for seed in 0..10 {
        let (e, y, _, _) = random_problem(seed + 100, 8);
        let bt = batch(DIMS, e.rows_row_major(), &y);
        let x = gaussian_tensor(DIMS, &mut rng(seed));
        let grad = stotiht_gradient(&bt, &x).unwrap();
        let mut fd = vec![0.0; x.len()];
        for (idx, g) in fd.iter_mut().enumerate() {
            let mut p = x.vectorize().to_vec();
            let mut m = p.clone();
            p[idx] += H;
            m[idx] -= H;
            let fp = minibatch_objective(&bt, &Tensor3::devectorize(p, DIMS).unwrap()).unwrap();
            let fm = minibatch_objective(&bt, &Tensor3::devectorize(m, DIMS).unwrap()).unwrap();
            *g = (fp - fm) / (2.0 * H);
        }
        let err = rel_diff(grad.vectorize(), &fd);
        assert!(err <= 1e-6, "seed {seed}: {err:e}");
    }
}

#[test]
fn factor_gradient_equals_omega_times_residual() {
    for seed in 0..10 {
        let (e, y, core, factors) = random_problem(seed + 200, 8);
        let bt = batch(DIMS, e.rows_row_major(), &y);
        let design = core_design_kron(&bt, &factors).unwrap();
        let mut r = design.matvec(core.vectorize()).unwrap();
        r.iter_mut().zip(&y).for_each(|(a, b)| *a -= b);
        for k in 1..=3 {
            let omega = omega_matrix(k, &bt, &core, &factors).unwrap();
            assert_eq!(omega.shape(), (DIMS.0 * 2, 8));
            let via_omega: Vec<f64> = omega.matvec(&r).unwrap().iter().map(|v| v / 8.0).collect();
            let grad = factor_gradient(k, &bt, &core, &factors).unwrap();
            assert!(
                rel_diff(grad.as_slice(), &via_omega) <= 1e-12,
                "seed {seed} mode {k}"
            );
        }
    }
}

#[test]
fn omega_columns_match_direct_definition() {
    let (e, y, core, [u1, u2, u3]) = random_problem(7, 5);
    let bt = batch(DIMS, e.rows_row_major(), &y);
    let factors = [u1.clone(), u2.clone(), u3.clone()];
    let weights = [kron(&u3, &u2), kron(&u3, &u1), kron(&u2, &u1)];
    for (k, w) in (1..=3).zip(weights) {
        let omega = omega_matrix(k, &bt, &core, &factors).unwrap();
        for j in 0..5 {
            let a_k = unfold(&e.sensing_tensor(j), k).unwrap();
            let col = a_k
                .matmul(&w)
                .unwrap()
                .matmul(&unfold(&core, k).unwrap().transpose())
                .unwrap();
            assert!(rel_diff(omega.col(j), col.as_slice()) <= 1e-12);
        }
    }
}

#[test]
fn omega_of_zero_core_and_scalar_tucker() {
    let (e, y, _, factors) = random_problem(3, 4);
    let bt = batch(DIMS, e.rows_row_major(), &y);
    let zero = omega_matrix(2, &bt, &Tensor3::zeros(RANKS), &factors).unwrap();
    assert!(zero.as_slice().iter().all(|&v| v == 0.0));

    let e1 = |n| Matrix::from_fn(n, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let unit = [e1(4), e1(4), e1(4)];
    let s = Tensor3::devectorize(vec![2.5], (1, 1, 1)).unwrap();
    let omega = omega_matrix(1, &bt, &s, &unit).unwrap();
    for j in 0..4 {
        let a = e.sensing_tensor(j);
        let expected: Vec<f64> = (0..4).map(|i| 2.5 * a.get(i, 0, 0)).collect();
        assert!(rel_diff(omega.col(j), &expected) <= 1e-15);
    }
}

#[test]
fn factor_gradient_is_affine_in_measurements() {
    let (e, y, core, factors) = random_problem(11, 8);
    let c = -1.7;
    let yc: Vec<f64> = y.iter().map(|v| c * v).collect();
    for k in 1..=3 {
        let g = factor_gradient(k, &batch(DIMS, e.rows_row_major(), &y), &core, &factors).unwrap();
        let gc = factor_gradient(k, &batch(DIMS, e.rows_row_major(), &yc), &core, &factors).unwrap();
        let omega = omega_matrix(k, &batch(DIMS, e.rows_row_major(), &y), &core, &factors).unwrap();
        let shift = omega.matvec(&y).unwrap();
        let expected: Vec<f64> = g
            .as_slice()
            .iter()
            .zip(&shift)
            .map(|(a, s)| a + (c - 1.0) * (-1.0 / 8.0) * s)
            .collect();
        assert!(rel_diff(gc.as_slice(), &expected) <= 1e-12);
    }
}

#[test]
fn factor_gradient_vanishes_at_exact_fit() {
    let inst = instance(DIMS, RANKS, 8, 5);
    let bt = batch(DIMS, inst.ensemble.rows_row_major(), &inst.y.y);
    let (core, factors) = inst.truth.clone().into_parts();
    for k in 1..=3 {
        let g = factor_gradient(k, &bt, &core, &factors).unwrap();
        assert!(g.fro_norm() <= 1e-12 * norm(&inst.y.y));
    }
    let g = stotiht_gradient(&bt, &inst.x_star).unwrap();
    assert!(g.fro_norm() <= 1e-12 * norm(&inst.y.y));
}

#[test]
fn stotiht_gradient_at_zero_is_scaled_adjoint() {
    let (e, y, _, _) = random_problem(19, 6);
    let bt = batch(DIMS, e.rows_row_major(), &y);
    let g = stotiht_gradient(&bt, &Tensor3::zeros(DIMS)).unwrap();
    let mut expected = Tensor3::zeros(DIMS);
    for (j, &yj) in y.iter().enumerate() {
        expected = expected.add_scaled(-yj / 6.0, &e.sensing_tensor(j)).unwrap();
    }
    assert!(rel_diff(g.vectorize(), expected.vectorize()) <= 1e-12);
}

#[test]
fn contraction_design_matches_kronecker_design() {
    for seed in 0..20 {
        let (e, y, _, factors) = random_problem(seed + 300, 9);
        let bt = batch(DIMS, e.rows_row_major(), &y);
        let a = core_design(&bt, &factors).unwrap();
        let b = core_design_kron(&bt, &factors).unwrap();
        assert_eq!(a.shape(), (9, 8));
        assert!(rel_diff(a.as_slice(), b.as_slice()) <= 1e-12);
    }
    // rectangular dims and unequal ranks
    let mut g = rng(1);
    let dims = (3, 5, 4);
    let e = SensingEnsemble::gaussian_from_rng(dims, 6, &mut g).unwrap();
    let y = gaussian_vec(6, &mut g);
    let factors = [
        gaussian_matrix(3, 1, &mut g),
        gaussian_matrix(5, 3, &mut g),
        gaussian_matrix(4, 2, &mut g),
    ];
    let bt = batch(dims, e.rows_row_major(), &y);
    let a = core_design(&bt, &factors).unwrap();
    let b = core_design_kron(&bt, &factors).unwrap();
    assert!(rel_diff(a.as_slice(), b.as_slice()) <= 1e-12);
}

#[test]
fn core_update_recovers_consistent_core() {
    for seed in 0..10 {
        let inst = instance((5, 4, 6), (2, 2, 2), 12, seed);
        let bt = batch((5, 4, 6), inst.ensemble.rows_row_major(), &inst.y.y);
        let s = core_update(&bt, inst.truth.factors()).unwrap();
        assert!(rel_diff(s.vectorize(), inst.truth.core().vectorize()) <= 1e-8);
    }
}

#[test]
fn core_update_of_zero_measurements() {
    let (e, _, _, factors) = random_problem(2, 40);
    let zeros = vec![0.0; 40];
    let s = core_update(&batch(DIMS, e.rows_row_major(), &zeros), &factors).unwrap();
    assert!(s.vectorize().iter().all(|&v| v == 0.0));
}

#[test]
fn benchmark_scale_design_is_40_by_8() {
    let inst = instance((10, 10, 15), (2, 2, 2), 400, 1);
    let plan = stotam::MiniBatchPlan::new(400, 40).unwrap();
    let bt = inst.ensemble.batch(&inst.y, &plan, 1).unwrap();
    assert_eq!(core_design(&bt, inst.truth.factors()).unwrap().shape(), (40, 8));
}
