use clusterlab::bounds::eval_q_exact;
use clusterlab::model::enumerate_occupations;
use clusterlab::numeric::{float_to_f64, pow_rational, to_float};
use clusterlab::partition::{beta, beta_tilde, eval_z, eval_z_ordered, factorized_z, TermTable};
use clusterlab::verify::{random_partition_instance, rng_for};
use clusterlab::{CouplingSequence, ModelParams};
use dashu_ratio::RBig;

fn abs(x: RBig) -> RBig {
    if x < RBig::ZERO {
        -x
    } else {
        x
    }
}

#[test]
fn enumeration_order_does_not_change_z() {
    for k in 0..20 {
        let (params, couplings) = random_partition_instance(&mut rng_for(99, k)).unwrap();
        let mut order = params.indices();
        let forward = eval_z_ordered(&params, &couplings, &order, 10_000_000).unwrap();
        order.reverse();
        let backward = eval_z_ordered(&params, &couplings, &order, 10_000_000).unwrap();
        assert_eq!(forward.value, backward.value);
        assert_eq!(forward.term_count, backward.term_count);
    }
}

#[test]
fn admissible_and_complementary_fill_the_bounding_box() {
    for k in 0..20 {
        let (params, couplings) = random_partition_instance(&mut rng_for(100, k)).unwrap();
        if params.imax() > 4 || params.budget() > 10 {
            continue;
        }
        let table = TermTable::new(&params, &couplings);
        let budget = params.budget();
        // Walk the full box αᵢ ≤ budget/i and keep the overweight corner.
        let mut complementary = RBig::ZERO;
        let indices = params.indices();
        let mut alpha = vec![0u64; indices.len()];
        loop {
            let weight: u64 = indices.iter().zip(&alpha).map(|(&i, &a)| i as u64 * a).sum();
            if weight > budget {
                complementary += indices.iter().zip(&alpha).fold(RBig::ONE, |acc, (&i, &a)| acc * table.term(i, a));
            }
            let mut slot = 0;
            while slot < alpha.len() && alpha[slot] == budget / indices[slot] as u64 {
                alpha[slot] = 0;
                slot += 1;
            }
            if slot == alpha.len() {
                break;
            }
            alpha[slot] += 1;
        }
        let z = eval_z(&params, &couplings, 10_000_000).unwrap().value;
        assert_eq!(z + complementary, factorized_z(&params, &couplings));
    }
}

#[test]
fn beta_factorises_through_p_power() {
    let params = ModelParams::new(60, RBig::ONE / RBig::from(5u8), RBig::ONE, 4, 1.0).unwrap();
    for w in 0..=params.budget() {
        let b = float_to_f64(&beta(&params, w, 200).unwrap());
        let p_w = to_float(&pow_rational(params.p(), w as u32), 200);
        let bt = float_to_f64(&(beta_tilde(&params, w, 200).unwrap() * p_w));
        assert!((b - bt).abs() <= 1e-14 * b.abs(), "w = {w}");
    }
}

#[test]
fn raising_imax_adds_at_most_the_new_q_mass() {
    let r = RBig::ONE;
    for imax in 3..6u32 {
        let low = ModelParams::new(48, RBig::ONE / RBig::from(4u8), r.clone(), imax, 1.0).unwrap();
        let high = low.with_imax(imax + 1).unwrap();
        let couplings = CouplingSequence::alternating(&r, imax + 1);
        let z_low = eval_z(&low, &couplings, 10_000_000).unwrap().value;
        let z_high = eval_z(&high, &couplings, 10_000_000).unwrap().value;
        let new_mass = enumerate_occupations(&high.indices(), high.budget())
            .filter(|a| a.get(imax + 1) > 0)
            .fold(RBig::ZERO, |acc, a| acc + eval_q_exact(&a, &high));
        assert!(abs(z_high - z_low) <= new_mass);
    }
}
