mod common;

use std::sync::Arc;

use msvi::{gen_random_affine, gen_random_walk_socp, l2_inner, lipschitz_estimate, AffineOperator, Error, MonotoneOperator};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::random_space;

/// Spectral norm from the eigenvalues of MᵀM.
fn spectral_norm(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let gram = m.transpose() * &m;
    SymmetricEigen::new(gram).eigenvalues.max().max(0.0).sqrt()
}

/// Monotone but not symmetric: AᵀA plus a skew part.
fn random_monotone_rows<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let s: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[k][i] * a[k][j]).sum::<f64>() + s[i][j] - s[j][i])
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lipschitz_matches_eigen_oracle(seed in any::<u64>()) {
        let inst = gen_random_affine(4, 2, 3, seed).unwrap();
        let oracle = (0..4).map(|i| spectral_norm(&inst.operator.matrix_rows(i))).fold(0.0, f64::max);
        prop_assert!((lipschitz_estimate(&inst.operator) - oracle).abs() <= 1e-6 * oracle.max(1.0));
    }

    #[test]
    fn nonsymmetric_lipschitz_matches_oracle(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, 3);
        let matrices: Vec<_> = (0..3).map(|_| random_monotone_rows(&mut rng, n)).collect();
        let op = AffineOperator::from_rows(space, &matrices, &vec![vec![0.0; n]; 3]).unwrap();
        let oracle = matrices.iter().map(|m| spectral_norm(m)).fold(0.0, f64::max);
        prop_assert!((lipschitz_estimate(&op) - oracle).abs() <= 1e-6 * oracle.max(1.0));
    }

    #[test]
    fn generated_operators_are_monotone(seed in any::<u64>()) {
        let inst = gen_random_affine(6, 2, 2, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let x = common::random_vector(&mut rng, &inst.filtration, 3.0);
        let y = common::random_vector(&mut rng, &inst.filtration, 3.0);
        let fx = inst.operator.evaluate(&x).unwrap();
        let fy = inst.operator.evaluate(&y).unwrap();
        let gap = l2_inner(&fx.sub(&fy).unwrap(), &x.sub(&y).unwrap()).unwrap();
        prop_assert!(gap >= -1e-12);
        let lip = inst.operator.lipschitz();
        let image = msvi::l2_norm(&fx.sub(&fy).unwrap());
        prop_assert!(image <= lip * msvi::l2_norm(&x.sub(&y).unwrap()) * (1.0 + 1e-9));
    }
}

#[test]
fn walk_operator_is_monotone_rank_one() {
    let inst = gen_random_walk_socp(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let x = common::random_vector(&mut rng, &inst.filtration, 2.0);
        let y = common::random_vector(&mut rng, &inst.filtration, 2.0);
        let fx = inst.operator.evaluate(&x).unwrap();
        let fy = inst.operator.evaluate(&y).unwrap();
        assert!(l2_inner(&fx.sub(&fy).unwrap(), &x.sub(&y).unwrap()).unwrap() >= -1e-12);
    }
    for atom in 0..inst.atom_count() {
        let rows = inst.operator.matrix_rows(atom);
        let m = DMatrix::from_fn(2, 2, |i, j| rows[i][j]);
        assert!(m.rank(1e-12) <= 1);
    }
}

#[test]
fn indefinite_operator_is_rejected() {
    let space = Arc::new(msvi::SampleSpace::uniform(1).unwrap());
    let err = AffineOperator::from_rows(space, &[vec![vec![1.0, 0.0], vec![0.0, -0.5]]], &[vec![0.0, 0.0]]).unwrap_err();
    assert!(matches!(err, Error::Validation(_)), "{err:?}");
}
