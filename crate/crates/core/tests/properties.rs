use clusterlab::bounds::{domination_holds, product_inequality_check};
use clusterlab::contour::{alternating_sum, contour_identity_rhs, ContourSpec};
use clusterlab::dissection::{box_limits, build_chunks, classify_occupation, compute_cap, evaluate_tree, split_t, WeightProfile};
use clusterlab::model::enumerate_occupations;
use clusterlab::partition::{eval_z, eval_z_by_weight};
use clusterlab::verify::{random_partition_instance, rng_for};
use dashu_ratio::RBig;
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_occupation_lies_in_exactly_one_chunk(seed in any::<u64>()) {
        let (params, couplings) = random_partition_instance(&mut rng_for(seed, 0)).unwrap();
        let tree = build_chunks(&params, &couplings, 1_000_000).unwrap();
        for alpha in enumerate_occupations(&params.indices(), params.budget()) {
            let holders: Vec<_> = tree.iter().filter(|c| c.contains(&alpha, params.budget())).collect();
            prop_assert_eq!(holders.len(), 1);
            prop_assert_eq!(holders[0].key(), classify_occupation(&alpha, &couplings, &params));
        }
    }

    #[test]
    fn chunk_values_reassemble_z(seed in any::<u64>()) {
        let (params, couplings) = random_partition_instance(&mut rng_for(seed, 1)).unwrap();
        let tree = build_chunks(&params, &couplings, 1_000_000).unwrap();
        let values = evaluate_tree(&tree, &params, &couplings);
        let z = eval_z(&params, &couplings, 10_000_000).unwrap().value;
        prop_assert_eq!(&eval_z_by_weight(&params, &couplings), &z);
        prop_assert_eq!(split_t(&tree, &values).total(), z);
    }

    #[test]
    fn boxes_fit_the_remaining_budget(
        residual in prop::collection::btree_set(2u32..9, 1..5),
        remaining in 0u64..60,
        eps in 0.1f64..3.0,
    ) {
        let residual: Vec<u32> = residual.into_iter().collect();
        let profile = WeightProfile::new(&residual, eps);
        let cap = compute_cap(&residual, &profile, remaining).unwrap();
        let limits = box_limits(cap, &profile, &residual, remaining);
        let used: u64 = limits.iter().map(|(&i, &m)| i as u64 * m).sum();
        prop_assert!(used <= remaining);
    }

    #[test]
    fn terms_are_dominated_by_q(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (params, couplings) = random_partition_instance(&mut rng_for(seed, 2)).unwrap();
        let all: Vec<_> = enumerate_occupations(&params.indices(), params.budget()).collect();
        prop_assert!(domination_holds(pick.get(&all), &params, &couplings));
    }

    #[test]
    fn product_inequality_on_the_simplex(raw in prop::collection::vec(0.0f64..1.0, 1..10), mass in 0.0f64..1.0) {
        let total: f64 = raw.iter().sum::<f64>().max(1e-12);
        let x: Vec<f64> = raw.iter().map(|v| v * mass / total).collect();
        prop_assert!(product_inequality_check(&x).unwrap().holds);
    }

    #[test]
    fn identity_for_random_activity(a in 0.1f64..20.0, n in 0u64..9) {
        let one = |_: Complex64| Complex64::new(1.0, 0.0);
        let sum = alternating_sum(a, n, one);
        let integral = contour_identity_rhs(a, n, one, &ContourSpec::hugging(n)).unwrap();
        prop_assert!((integral - sum).abs() <= (1e-10 * sum.abs()).max(1e-12));
    }
}

#[test]
fn zero_couplings_give_unit_partition_function() {
    let params = clusterlab::ModelParams::new(40, RBig::ONE / RBig::from(4u8), RBig::ONE, 5, 1.0).unwrap();
    let couplings = clusterlab::CouplingSequence::zero(&RBig::ONE);
    assert_eq!(eval_z(&params, &couplings, 1000).unwrap().value, RBig::ONE);
}
