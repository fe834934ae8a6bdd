use ttcone::linalg::{projector_onto_range, Tolerance};
use ttcone::random::random_base;
use ttcone::tt_cone::{attainable_slack, max_term_coherence, TermLabel};
use ttcone::verify::{invariant_suite, INVARIANT_TOL};
use ttcone::{
    random_cone_vector, random_dense, rank_profile, tc_evaluate, tc_extract, tc_membership,
    tc_orthogonal_terms, Core, DenseTensor, Error, TangentConeVector,
};

fn tol() -> Tolerance {
    Tolerance::default()
}

/// Sum over bond paths of one chain, by explicit index loops.
fn brute_chain(cores: &[Core]) -> DenseTensor {
    let dims: Vec<usize> = cores.iter().map(Core::mode).collect();
    let total: usize = dims.iter().product();
    let mut data = vec![0.0; total];
    for (flat, slot) in data.iter_mut().enumerate() {
        let mut idx = vec![0; dims.len()];
        let mut rem = flat;
        for i in (0..dims.len()).rev() {
            idx[i] = rem % dims[i];
            rem /= dims[i];
        }
        let mut row = vec![1.0];
        for (c, core) in cores.iter().enumerate() {
            let mut next = vec![0.0; core.right()];
            for (a, ra) in row.iter().enumerate() {
                for (b, nb) in next.iter_mut().enumerate() {
                    *nb += ra * core.get(a, idx[c], b);
                }
            }
            row = next;
        }
        *slot = row.first().copied().unwrap_or(0.0);
    }
    DenseTensor::new(dims, data).unwrap()
}

/// Term-by-term dense expansion of the block product, built from the raw
/// blocks without the block assembly used by the library.
fn expansion_oracle(v: &TangentConeVector) -> DenseTensor {
    let d = v.order();
    let a = v.base().cores();
    let mut sum = DenseTensor::zeros(&v.base().dims()).unwrap();
    for p in 0..d {
        let mut chain = a.to_vec();
        chain[p] = v.x_blocks()[p].clone();
        sum = sum.add(&brute_chain(&chain)).unwrap();
    }
    for first in 0..d {
        for last in first + 1..d {
            let mut chain = a.to_vec();
            chain[first] = v.u_blocks()[first].clone();
            chain[first + 1..last].clone_from_slice(&v.z_blocks()[first..last - 1]);
            chain[last] = v.v_blocks()[last - 1].clone();
            sum = sum.add(&brute_chain(&chain)).unwrap();
        }
    }
    sum
}

#[test]
fn evaluation_matches_term_expansion() {
    for seed in 0..10 {
        let base = random_base(&[3, 3, 3], &[1, 1], seed).unwrap();
        let v = random_cone_vector(&base, &[1, 1], seed + 50).unwrap();
        let x = tc_evaluate(&v);
        assert!(x.distance(&expansion_oracle(&v)).unwrap() <= 1e-12 * x.norm());
    }
    let base = random_base(&[2, 3, 2, 3, 2], &[2, 2, 2, 2], 3).unwrap();
    let v = random_cone_vector(&base, &[2, 1, 2, 1], 4).unwrap();
    let x = tc_evaluate(&v);
    assert!(x.distance(&expansion_oracle(&v)).unwrap() <= 1e-12 * x.norm());
}

#[test]
fn terms_are_ordered_by_line() {
    let base = random_base(&[3, 3, 3, 3], &[1, 2, 1], 1).unwrap();
    let v = random_cone_vector(&base, &[1, 1, 1], 1).unwrap();
    let labels: Vec<TermLabel> = tc_orthogonal_terms(&v).iter().map(|t| t.label).collect();
    assert_eq!(labels.len(), 10);
    let lines: Vec<usize> = labels.iter().map(|l| l.line).collect();
    assert_eq!(lines, vec![1, 1, 1, 1, 2, 2, 2, 3, 3, 4]);
    for l in &labels {
        assert_eq!(l.last - l.first + 1, l.line);
    }
}

#[test]
fn round_trip_across_orders() {
    let cases: [(&[usize], &[usize], &[usize]); 4] = [
        (&[3, 3, 3], &[1, 1], &[1, 1]),
        (&[2, 3, 4, 3], &[2, 2, 1], &[1, 2, 1]),
        (&[4, 2, 3, 2, 4], &[2, 2, 2, 2], &[2, 1, 1, 2]),
        (&[3, 4, 4, 3], &[1, 2, 1], &[2, 2, 2]),
    ];
    for (i, (dims, ranks, slack)) in cases.iter().enumerate() {
        for seed in 0..10 {
            let base = random_base(dims, ranks, seed).unwrap();
            let v0 = random_cone_vector(&base, slack, seed * 31 + i as u64).unwrap();
            let x = tc_evaluate(&v0);
            let v = tc_extract(&base, &x, slack, &tol()).unwrap();
            let back = tc_evaluate(&v);
            assert!(back.relative_error(&x).unwrap() <= 1e-9, "case {i} seed {seed}");
            assert_eq!(v.effective_slack(), v0.effective_slack());
            let again = tc_extract(&base, &back, slack, &tol()).unwrap();
            assert!(tc_evaluate(&again).relative_error(&back).unwrap() <= 1e-9);
            assert!(invariant_suite(&v).passes(INVARIANT_TOL));
        }
    }
}

#[test]
fn extracted_channels_match_generated_subspaces() {
    // gauge-free comparison: U_i^R column spaces and the row spaces of the
    // V channel products agree between generator and extraction
    for seed in 0..10 {
        let base = random_base(&[3, 3, 3, 3], &[1, 2, 1], seed).unwrap();
        let slack = [2, 1, 2];
        let v0 = random_cone_vector(&base, &slack, seed).unwrap();
        let v = tc_extract(&base, &tc_evaluate(&v0), &slack, &tol()).unwrap();
        let p = |m: &nalgebra::DMatrix<f64>| projector_onto_range(m, 1e-12);
        let u0 = v0.u_blocks()[0].unfold_trailing();
        let u1 = v.u_blocks()[0].unfold_trailing();
        assert!((p(&u0) - p(&u1)).norm() <= 1e-9, "seed {seed}");
        let last0 = v0.v_blocks()[2].unfold_leading();
        let last1 = v.v_blocks()[2].unfold_leading();
        assert!((p(&last0.transpose()) - p(&last1.transpose())).norm() <= 1e-9);
    }
}

#[test]
fn membership_agrees_with_extraction() {
    let mut disagreements = 0;
    let mut outside = 0;
    for seed in 0..120u64 {
        let dims: &[usize] = if seed % 2 == 0 { &[3, 3, 3] } else { &[2, 3, 3, 2] };
        let ranks: &[usize] = if seed % 2 == 0 { &[1, 2] } else { &[2, 2, 2] };
        let slack: Vec<usize> = (0..dims.len() - 1).map(|i| (seed as usize + i) % 3).collect();
        let base = random_base(dims, ranks, seed).unwrap();
        let x = tc_evaluate(&random_cone_vector(&base, &slack, seed).unwrap());
        let x = if seed % 3 == 0 {
            x.add(&random_dense(dims, seed + 1000).unwrap()).unwrap()
        } else {
            x
        };
        let member = tc_membership(&base, &x, &slack, &tol()).unwrap().member();
        let extracted = tc_extract(&base, &x, &slack, &tol());
        match &extracted {
            Err(Error::NotInCone { .. }) => outside += 1,
            Err(e) => panic!("seed {seed}: {e}"),
            Ok(_) => {}
        }
        if member != extracted.is_ok() {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0);
    assert!(outside > 10);
}

#[test]
fn perturbation_leaves_the_cone() {
    let base = random_base(&[3, 3, 3], &[1, 1], 2).unwrap();
    let x = tc_evaluate(&random_cone_vector(&base, &[0, 0], 3).unwrap());
    let y = x.add(&random_dense(&[3, 3, 3], 4).unwrap()).unwrap();
    let m = tc_membership(&base, &y, &[0, 0], &tol()).unwrap();
    assert!(!m.member());
    for cert in &m.splits {
        // independent check: residual rank read from the spectrum
        let above = cert.spectrum.iter().filter(|s| **s > cert.threshold).count();
        assert_eq!(above, cert.rank);
        assert!(cert.rank > 0);
    }
}

#[test]
fn cone_is_closed_under_real_scaling() {
    for seed in 0..20 {
        let base = random_base(&[2, 3, 3, 2], &[2, 2, 2], seed).unwrap();
        let slack = [1, 2, 1];
        let x = tc_evaluate(&random_cone_vector(&base, &slack, seed).unwrap());
        let reference = tc_membership(&base, &x, &slack, &tol()).unwrap();
        assert!(reference.member());
        for lambda in [-1.0, 2.5, -0.01] {
            let m = tc_membership(&base, &x.scaled(lambda), &slack, &tol()).unwrap();
            assert!(m.member());
            assert_eq!(m.ranks(), reference.ranks());
            let v = tc_extract(&base, &x.scaled(lambda), &slack, &tol()).unwrap();
            assert_eq!(v.effective_slack(), reference.ranks());
        }
    }
}

#[test]
fn membership_is_monotone_in_slack() {
    for seed in 0..20 {
        let base = random_base(&[3, 3, 3], &[1, 1], seed).unwrap();
        let x = tc_evaluate(&random_cone_vector(&base, &[1, 1], seed).unwrap())
            .add(&random_dense(&[3, 3, 3], seed).unwrap().scaled(0.1))
            .unwrap();
        let ranks = tc_membership(&base, &x, &[0, 0], &tol()).unwrap().ranks();
        for s1 in 0..3 {
            for s2 in 0..3 {
                let m = tc_membership(&base, &x, &[s1, s2], &tol()).unwrap().member();
                assert_eq!(m, s1 >= ranks[0] && s2 >= ranks[1]);
            }
        }
    }
}

#[test]
fn extraction_from_dense_curve_direction() {
    // finite difference of the curve is (up to O(h)) the cone vector; the
    // base point itself extracts with empty channels
    let base = random_base(&[3, 4, 3], &[2, 2], 5).unwrap();
    let a = ttcone::tt_evaluate(&base);
    let v = tc_extract(&base, &a.scaled(-3.0), &[0, 0], &tol()).unwrap();
    assert!(tc_evaluate(&v).relative_error(&a.scaled(-3.0)).unwrap() <= 1e-12);
    assert_eq!(rank_profile(&a, 1e-12).ranks, vec![2, 2]);
}

#[test]
fn generated_vectors_pass_invariants_at_desk_scale() {
    let mut count = 0;
    for d in 3..=5usize {
        for n in 2..=4usize {
            for k in 1..=2usize {
                if k > n {
                    continue;
                }
                for s in 0..=2usize {
                    let dims = vec![n; d];
                    let ranks = vec![k; d - 1];
                    let base = random_base(&dims, &ranks, (d * 100 + n * 10 + k) as u64).unwrap();
                    let v = random_cone_vector(&base, &vec![s; d - 1], s as u64).unwrap();
                    assert_eq!(v.effective_slack(), attainable_slack(&dims, &ranks, &vec![s; d - 1]));
                    let suite = invariant_suite(&v);
                    assert!(suite.passes(INVARIANT_TOL), "{dims:?} {ranks:?} {s}: {suite:?}");
                    assert!(max_term_coherence(&tc_orthogonal_terms(&v)) <= INVARIANT_TOL);
                    count += 1;
                }
            }
        }
    }
    assert_eq!(count, 54);
}
