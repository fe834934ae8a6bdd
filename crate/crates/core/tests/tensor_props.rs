use proptest::prelude::*;
use ttcone::linalg::{numerical_rank, DEFAULT_RANK_TOL};
use ttcone::random::random_tt;
use ttcone::{
    left_orthogonalize, matricize, rank_profile, tensorize, tt_evaluate, tt_product, tt_svd,
    DenseTensor, Gaussian, TTTensor,
};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..4, 1..5)
}

fn tensor_strategy() -> impl Strategy<Value = DenseTensor> {
    dims_strategy().prop_flat_map(|dims| {
        let n: usize = dims.iter().product();
        prop::collection::vec(-10.0f64..10.0, n)
            .prop_map(move |data| DenseTensor::new(dims.clone(), data).unwrap())
    })
}

/// Entry-by-entry evaluation with explicit loops over every bond index.
fn brute_force(t: &TTTensor) -> DenseTensor {
    let dims = t.dims();
    let d = dims.len();
    let total: usize = dims.iter().product();
    let mut out = vec![0.0; total];
    let mut idx = vec![0usize; d];
    for (flat, entry) in out.iter_mut().enumerate() {
        let mut rem = flat;
        for i in (0..d).rev() {
            idx[i] = rem % dims[i];
            rem /= dims[i];
        }
        // row vector through the chain
        let mut row = vec![1.0];
        for (c, core) in t.cores().iter().enumerate() {
            let mut next = vec![0.0; core.right()];
            for (a, ra) in row.iter().enumerate() {
                for (b, nb) in next.iter_mut().enumerate() {
                    *nb += ra * core.get(a, idx[c], b);
                }
            }
            row = next;
        }
        *entry = row[0];
    }
    DenseTensor::new(dims, out).unwrap()
}

proptest! {
    #[test]
    fn matricize_then_tensorize_is_identity(t in tensor_strategy()) {
        for split in 1..t.order() {
            let m = matricize(&t, split).unwrap();
            prop_assert_eq!(m.rows() * m.cols(), t.len());
            prop_assert_eq!(&tensorize(&m.matrix, t.dims()).unwrap(), &t);
        }
    }

    #[test]
    fn cauchy_schwarz(a in tensor_strategy(), seed in 0u64..1000) {
        let mut g = Gaussian::new(seed);
        let b = DenseTensor::new(a.dims().to_vec(), g.vec(a.len())).unwrap();
        let ip = a.inner(&b).unwrap();
        prop_assert!(ip.abs() <= a.norm() * b.norm() * (1.0 + 1e-12) + 1e-300);
        prop_assert!((a.inner(&a).unwrap() - a.norm().powi(2)).abs() <= 1e-10 * a.norm().powi(2).max(1.0));
    }

    #[test]
    fn tt_product_is_associative(
        n1 in 1usize..4, k1 in 1usize..3, n2 in 1usize..4, k2 in 1usize..3, n3 in 1usize..4,
        seed in 0u64..1000,
    ) {
        let mut g = Gaussian::new(seed);
        let a = DenseTensor::new(vec![n1, k1], g.vec(n1 * k1)).unwrap();
        let b = DenseTensor::new(vec![k1, n2, k2], g.vec(k1 * n2 * k2)).unwrap();
        let c = DenseTensor::new(vec![k2, n3], g.vec(k2 * n3)).unwrap();
        let left = tt_product(&tt_product(&a, &b).unwrap(), &c).unwrap();
        let right = tt_product(&a, &tt_product(&b, &c).unwrap()).unwrap();
        prop_assert!(left.distance(&right).unwrap() <= 1e-12 * left.norm().max(1.0));
    }

    #[test]
    fn evaluation_matches_brute_force(
        dims in prop::collection::vec(1usize..4, 2..5),
        seed in 0u64..1000,
    ) {
        let ranks: Vec<usize> = (1..dims.len()).map(|i| 1 + (seed as usize + i) % 3).collect();
        let mut g = Gaussian::new(seed);
        let t = random_tt(&dims, &ranks, &mut g).unwrap();
        let fast = tt_evaluate(&t);
        prop_assert!(fast.distance(&brute_force(&t)).unwrap() <= 1e-12 * fast.norm().max(1.0));
    }

    #[test]
    fn left_orthogonalize_preserves_value(
        dims in prop::collection::vec(1usize..4, 2..5),
        seed in 0u64..1000,
    ) {
        let ranks: Vec<usize> = (1..dims.len()).map(|i| 1 + (seed as usize * 7 + i) % 3).collect();
        let mut g = Gaussian::new(seed);
        let t = random_tt(&dims, &ranks, &mut g).unwrap();
        let q = left_orthogonalize(&t);
        prop_assert!(q.check_left_orthogonal(1e-12).is_ok());
        let before = tt_evaluate(&t);
        prop_assert!(tt_evaluate(&q).distance(&before).unwrap() <= 1e-12 * before.norm().max(1.0));
    }

    #[test]
    fn tt_svd_is_exact_at_full_rank(t in tensor_strategy()) {
        prop_assume!(t.order() >= 2);
        let big = vec![100; t.order() - 1];
        let out = tt_svd(&t, &big, DEFAULT_RANK_TOL).unwrap();
        prop_assert!(out.tensor.check_left_orthogonal(1e-10).is_ok());
        let back = tt_evaluate(&out.tensor);
        prop_assert!(back.distance(&t).unwrap() <= 1e-10 * t.norm().max(1.0));
        prop_assert_eq!(out.tensor.ranks(), rank_profile(&t, DEFAULT_RANK_TOL).ranks);
    }
}

#[test]
fn tt_ranks_bound_matricization_ranks() {
    for seed in 0..20 {
        let dims = [3, 2, 4, 3];
        let ranks = [2, 3, 2];
        let mut g = Gaussian::new(seed);
        let t = random_tt(&dims, &ranks, &mut g).unwrap();
        let profile = rank_profile(&tt_evaluate(&t), DEFAULT_RANK_TOL);
        assert!(profile.bounded_by(&ranks));
        // generic Gaussian cores attain the bonds
        assert_eq!(profile.ranks, ranks.to_vec());
    }
}

#[test]
fn numerical_rank_examples() {
    use nalgebra::DMatrix;
    assert_eq!(numerical_rank(&DMatrix::identity(3, 3), DEFAULT_RANK_TOL), 3);
    assert_eq!(numerical_rank(&DMatrix::zeros(3, 4), DEFAULT_RANK_TOL), 0);
    let outer = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
    assert_eq!(numerical_rank(&outer, DEFAULT_RANK_TOL), 1);
    let mut tiny = DMatrix::identity(2, 2);
    tiny[(1, 1)] = 1e-15;
    assert_eq!(numerical_rank(&tiny, DEFAULT_RANK_TOL), 1);
}
