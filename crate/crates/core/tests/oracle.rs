mod common;

use common::*;
use proptest::prelude::*;
use solgeo::counting::certify_count_2xor;
use solgeo::instance::{Hypergraph, Predicate, SignedClause, SignedHypergraph, XorClause, XorInstance};
use solgeo::oracle::*;
use solgeo::{Certificate, Error};

fn triangle(rhs: [i8; 3]) -> XorInstance {
    let clauses = [[0u32, 1], [1, 2], [0, 2]].iter().zip(rhs).map(|(v, b)| XorClause { vars: v.to_vec(), rhs: b }).collect();
    XorInstance::new(2, 3, clauses).unwrap()
}

fn count_of(r: &OracleResult) -> u64 {
    match r.value {
        OracleValue::Count { count, .. } => count,
        _ => unreachable!(),
    }
}

#[test]
fn gaussian_triangle_examples() {
    let even = gaussian_count(&triangle([1, 1, 1]));
    assert_eq!((even.rank, even.solvable, even.count()), (2, true, Some(2)));
    let odd = gaussian_count(&triangle([1, 1, -1]));
    assert_eq!((odd.solvable, odd.count(), odd.log2_count()), (false, Some(0), None));
    let flipped = gaussian_count(&triangle([-1, -1, 1]));
    assert_eq!(flipped.count(), Some(2));
    assert_eq!(count_of(&brute_count(Constraints::Xor(&triangle([1, 1, -1])), 0.0).unwrap()), 0);
}

#[test]
fn gaussian_agrees_with_enumeration() {
    for seed in 0..1000u64 {
        let k = 2 + seed as usize % 3;
        let n = 4 + seed as usize % 9;
        let m = 1 + seed as usize % 14;
        let i = signing_of(&distinct_hypergraph(k, n, m, seed), seed);
        let g = gaussian_count(&i);
        assert_eq!(g.count(), Some(count_of(&brute_count(Constraints::Xor(&i), 0.0).unwrap()) as u128), "seed {seed}");
    }
}

#[test]
fn xor_paths_agree() {
    let xor = Predicate::xor(3).unwrap();
    for seed in 0..30u64 {
        let s = random_signed(3, 9, 20, seed);
        let i = XorInstance::from_signed(&s);
        let a = violation_histogram(Constraints::Csp { instance: &s, predicate: &xor }).unwrap();
        let b = xor_violation_histogram(&i).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().sum::<u64>(), 1 << 9);
    }
}

#[test]
fn histogram_matches_direct_evaluation() {
    let sat = Predicate::ksat(3).unwrap();
    let s = random_signed(3, 8, 25, 7);
    let h = violation_histogram(Constraints::Csp { instance: &s, predicate: &sat }).unwrap();
    let mut direct = vec![0u64; 26];
    for mask in 0..1u32 << 8 {
        let frac = solgeo::instance::evaluate(&s, &sat, &assignment(8, mask)).unwrap();
        direct[((1.0 - frac) * 25.0).round() as usize] += 1;
    }
    assert_eq!(h, direct);
}

#[test]
fn empty_and_oversized_inputs_rejected() {
    let empty = XorInstance::new(3, 5, vec![]).unwrap();
    assert!(brute_count(Constraints::Xor(&empty), 0.0).is_err());
    let big = signing_of(&distinct_hypergraph(3, 30, 10, 0), 0);
    assert!(brute_count(Constraints::Xor(&big), 0.0).is_err());
    assert!(brute_sk_opt_and_count(&solgeo::instance::sample_goe(19, 0).unwrap(), 0.1).is_err());
}

#[test]
fn oracle_output_is_reproducible() {
    let i = signing_of(&distinct_hypergraph(3, 10, 30, 2), 2);
    let a = brute_count(Constraints::Xor(&i), 0.1).unwrap();
    assert!(a.runtime_ms.is_none());
    let json = solgeo::instance::canonical_json(&a);
    assert_eq!(json, solgeo::instance::canonical_json(&brute_count(Constraints::Xor(&i), 0.1).unwrap()));
    assert!(json.contains("\"type\": \"count\""));
    let back: OracleResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back, a);
}

#[test]
fn cluster_oracle_small_example() {
    // x0 x1 = 1 and x1 x2 = 1: solutions are ±(1,1,1).
    let i = XorInstance::new(
        2,
        3,
        vec![XorClause { vars: vec![0, 1], rhs: 1 }, XorClause { vars: vec![1, 2], rhs: 1 }],
    )
    .unwrap();
    let OracleValue::Clusters { solutions, distance_histogram, cover_size, .. } =
        brute_clusters(Constraints::Xor(&i), 0.0, 0.0).unwrap().value
    else {
        unreachable!()
    };
    assert_eq!(solutions, 2);
    assert_eq!(distance_histogram, vec![0, 0, 0, 1]);
    assert_eq!(cover_size, 2);
}

#[test]
fn max_bias_small_example() {
    // One clause x0 x1 = −1 on three variables.
    let i = XorInstance::new(2, 3, vec![XorClause { vars: vec![0, 1], rhs: -1 }]).unwrap();
    let OracleValue::MaxBias { max_abs_sum_by_violations, max_abs_sum, .. } = brute_max_bias(Constraints::Xor(&i), 0.0).unwrap().value
    else {
        unreachable!()
    };
    assert_eq!(max_abs_sum_by_violations, vec![1, 3]);
    assert_eq!(max_abs_sum, 1);
}

#[test]
fn verification_semantics() {
    let g = complete_graph(6);
    let h = Hypergraph::new(2, 6, g.edges().iter().map(|&(u, v)| vec![u, v]).collect()).unwrap();
    let cert = certify_count_2xor(&h, 0.0).unwrap();
    let i = signing_of(&h, 1);
    let oracle = brute_count(Constraints::Xor(&i), 0.0).unwrap();
    assert_eq!(verify_certificate(&Certificate::Count(cert.clone()), &oracle).unwrap().verdict, Verdict::Sound);

    let mut tampered = cert.clone();
    tampered.log2_bound = -1.0;
    let all_plus = XorInstance::from_signing(&h, &[1; 15]).unwrap();
    let o = brute_count(Constraints::Xor(&all_plus), 0.0).unwrap();
    assert_eq!(verify_certificate(&Certificate::Count(tampered), &o).unwrap().verdict, Verdict::Violated);

    let other = brute_count(Constraints::Xor(&signing_of(&distinct_hypergraph(2, 6, 15, 9), 0)), 0.0).unwrap();
    assert_eq!(verify_certificate(&Certificate::Count(cert.clone()), &other).unwrap().verdict, Verdict::Inapplicable);

    let bias = brute_max_bias(Constraints::Xor(&i), 0.0).unwrap();
    assert!(matches!(verify_certificate(&Certificate::Count(cert), &bias), Err(Error::KindMismatch(_))));
}

#[test]
fn signed_csp_hash_binds_certificate() {
    let sat = Predicate::ksat(3).unwrap();
    let s = SignedHypergraph::new(3, 6, vec![SignedClause { vars: vec![0, 1, 2], signs: vec![1, 1, 1] }]).unwrap();
    let o = brute_count(Constraints::Csp { instance: &s, predicate: &sat }, 0.0).unwrap();
    assert_eq!(count_of(&o), 56);
    let cert = solgeo::counting::certify_count_ksat(&s, 0.0, 0.05).unwrap();
    assert_eq!(cert.instance_sha256, o.instance_sha256);
}

#[test]
fn independent_set_oracle_matches_enumeration() {
    for seed in 0..10u64 {
        let g = solgeo::instance::sample_regular_graph(14, 3, seed).unwrap();
        let mut best = 0;
        let mut large = 0u64;
        for mask in 0u32..1 << 14 {
            if g.edges().iter().any(|&(u, v)| mask >> u & 1 == 1 && mask >> v & 1 == 1) {
                continue;
            }
            best = best.max(mask.count_ones() as usize);
            large += u64::from(mask.count_ones() >= 5);
        }
        let OracleValue::IndependentSets { independence_number, count, .. } = brute_independent_sets(&g, 5).unwrap().value else {
            unreachable!()
        };
        assert_eq!((independence_number, count), (best, large));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn budgets_are_histogram_prefixes(seed in any::<u64>(), eta in 0.0f64..1.0) {
        let i = signing_of(&distinct_hypergraph(3, 9, 15, seed), seed);
        let r = brute_count(Constraints::Xor(&i), eta).unwrap();
        let OracleValue::Count { budget, count, histogram, .. } = r.value else { unreachable!() };
        prop_assert_eq!(budget, solgeo::instance::violation_budget(eta, 15));
        prop_assert_eq!(count, histogram[..=budget as usize].iter().sum::<u64>());
    }
}
