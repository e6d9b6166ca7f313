mod common;

use common::{gaussian_matrix, gaussian_tensor, rel_diff, rng};
use proptest::prelude::*;
use stotam::model::tucker_product;
use stotam::tensor::{dot, fold, fro_norm, inner, kron, mode_product, unfold};
use stotam::{Matrix, Tensor3};

fn dims_strategy() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..6, 1usize..6, 1usize..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fold_inverts_unfold(dims in dims_strategy(), k in 1usize..=3, seed in any::<u64>()) {
        let x = gaussian_tensor(dims, &mut rng(seed));
        let back = fold(&unfold(&x, k).unwrap(), k, dims).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn devectorize_inverts_vectorize(dims in dims_strategy(), seed in any::<u64>()) {
        let x = gaussian_tensor(dims, &mut rng(seed));
        let back = Tensor3::devectorize(x.vectorize().to_vec(), dims).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn inner_matches_vectorized_dot(dims in dims_strategy(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let x = gaussian_tensor(dims, &mut g);
        let y = gaussian_tensor(dims, &mut g);
        let naive: f64 = x.vectorize().iter().zip(y.vectorize()).map(|(a, b)| a * b).sum();
        let got = inner(&x, &y).unwrap();
        prop_assert!((got - naive).abs() <= 1e-12 * fro_norm(&x) * fro_norm(&y));
        prop_assert!((got - dot(x.vectorize(), y.vectorize())).abs() <= 1e-12 * fro_norm(&x) * fro_norm(&y));
    }

    #[test]
    fn mode_products_commute(dims in dims_strategy(), k in 1usize..=3, l in 1usize..=3, p in 1usize..5, q in 1usize..5, seed in any::<u64>()) {
        prop_assume!(k != l);
        let n = [dims.0, dims.1, dims.2];
        let mut g = rng(seed);
        let x = gaussian_tensor(dims, &mut g);
        let u = gaussian_matrix(p, n[k - 1], &mut g);
        let v = gaussian_matrix(q, n[l - 1], &mut g);
        let a = mode_product(&mode_product(&x, &u, k).unwrap(), &v, l).unwrap();
        let b = mode_product(&mode_product(&x, &v, l).unwrap(), &u, k).unwrap();
        prop_assert!(rel_diff(a.vectorize(), b.vectorize()) <= 1e-12 || fro_norm(&b) == 0.0);
    }

    #[test]
    fn mode_product_matches_unfolded_multiply(dims in dims_strategy(), k in 1usize..=3, p in 1usize..5, seed in any::<u64>()) {
        let n = [dims.0, dims.1, dims.2];
        let mut g = rng(seed);
        let x = gaussian_tensor(dims, &mut g);
        let u = gaussian_matrix(p, n[k - 1], &mut g);
        let got = unfold(&mode_product(&x, &u, k).unwrap(), k).unwrap();
        let want = u.matmul(&unfold(&x, k).unwrap()).unwrap();
        prop_assert!(rel_diff(got.as_slice(), want.as_slice()) <= 1e-12);
    }
}

fn tucker_case(seed: u64) -> (Tensor3, [Matrix; 3]) {
    let mut g = rng(seed);
    let dims = (
        2 + (seed % 4) as usize,
        3 + (seed % 3) as usize,
        2 + (seed % 5) as usize,
    );
    let ranks = (1 + (seed % 2) as usize, 1 + (seed % 3) as usize, 2);
    let core = gaussian_tensor(ranks, &mut g);
    let factors = [
        gaussian_matrix(dims.0, ranks.0, &mut g),
        gaussian_matrix(dims.1, ranks.1, &mut g),
        gaussian_matrix(dims.2, ranks.2, &mut g),
    ];
    (core, factors)
}

#[test]
fn tucker_vectorization_identity() {
    for seed in 0..120 {
        let (core, [u1, u2, u3]) = tucker_case(seed);
        let x = tucker_product(&core, &[u1.clone(), u2.clone(), u3.clone()]).unwrap();
        let via_kron = kron(&u3, &kron(&u2, &u1)).matvec(core.vectorize()).unwrap();
        assert!(rel_diff(x.vectorize(), &via_kron) <= 1e-12, "seed {seed}");
    }
}

#[test]
fn unfolding_factorization_identities() {
    for seed in 0..120 {
        let (core, [u1, u2, u3]) = tucker_case(seed);
        let x = tucker_product(&core, &[u1.clone(), u2.clone(), u3.clone()]).unwrap();
        let cases = [
            (1, &u1, kron(&u3, &u2)),
            (2, &u2, kron(&u3, &u1)),
            (3, &u3, kron(&u2, &u1)),
        ];
        for (k, u, w) in cases {
            let rhs = u
                .matmul(&unfold(&core, k).unwrap())
                .unwrap()
                .matmul(&w.transpose())
                .unwrap();
            let lhs = unfold(&x, k).unwrap();
            assert!(
                rel_diff(lhs.as_slice(), rhs.as_slice()) <= 1e-12,
                "seed {seed} mode {k}"
            );
        }
    }
}

#[test]
fn fro_norm_matches_extended_precision_sum() {
    // compensated (Neumaier) summation as the high-precision reference
    for seed in 0..20 {
        let x = gaussian_tensor((7, 5, 9), &mut rng(seed));
        let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
        for v in x.vectorize() {
            let term = v * v;
            let t = sum + term;
            comp += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
        }
        let reference = (sum + comp).sqrt();
        assert!((fro_norm(&x) - reference).abs() <= 1e-14 * reference);
    }
}
