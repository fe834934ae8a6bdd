use proptest::prelude::*;
use ttcone::io::{cone_from_json, cone_to_json, dense_from_json, dense_to_json, tt_from_json, tt_to_json};
use ttcone::random::{random_base, random_tt};
use ttcone::{random_cone_vector, DenseTensor, Gaussian};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(f64::MIN_POSITIVE),
        Just(-0.0),
        Just(5e-324),
        Just(f64::MAX),
    ]
}

proptest! {
    #[test]
    fn dense_records_round_trip_bit_exact(
        dims in prop::collection::vec(1usize..4, 1..4),
        pool in prop::collection::vec(finite(), 27),
    ) {
        let n: usize = dims.iter().product();
        let t = DenseTensor::new(dims, pool[..n].to_vec()).unwrap();
        let back = dense_from_json(&dense_to_json(&t).unwrap()).unwrap();
        for (a, b) in t.data().iter().zip(back.data()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn tt_records_round_trip(seed in 0u64..500, d in 1usize..5) {
        let mut g = Gaussian::new(seed);
        let dims: Vec<usize> = (0..d).map(|i| 1 + (seed as usize + i) % 3).collect();
        let ranks: Vec<usize> = (1..d).map(|i| 1 + (seed as usize * 3 + i) % 2).collect();
        if d == 1 {
            let core = g.core(1, dims[0], 1);
            let t = ttcone::TTTensor::new(vec![core], ttcone::Orthogonality::None).unwrap();
            prop_assert_eq!(tt_from_json(&tt_to_json(&t).unwrap()).unwrap(), t);
        } else {
            let t = random_tt(&dims, &ranks, &mut g).unwrap();
            prop_assert_eq!(tt_from_json(&tt_to_json(&t).unwrap()).unwrap(), t);
        }
    }

    #[test]
    fn cone_records_round_trip(seed in 0u64..200, d in 2usize..5) {
        let dims: Vec<usize> = (0..d).map(|i| 2 + (seed as usize + i) % 3).collect();
        let ranks = vec![1; d - 1];
        let slack: Vec<usize> = (0..d - 1).map(|i| (seed as usize + i) % 3).collect();
        let base = random_base(&dims, &ranks, seed).unwrap();
        let v = random_cone_vector(&base, &slack, seed).unwrap();
        prop_assert_eq!(cone_from_json(&cone_to_json(&v).unwrap()).unwrap(), v);
    }
}
