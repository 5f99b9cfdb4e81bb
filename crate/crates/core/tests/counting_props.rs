use num_bigint::BigInt;

use tripound::counting::{
    count_arrangements_bruteforce, count_matchings_bruteforce, enumerate_matchings, eval_phi,
    ordering_factor, PhiParams, PhiVariant,
};
use tripound::harness::all_instances;
use tripound::model::Instance;

#[test]
fn ordered_unordered_identity() {
    for n in (0..=8).step_by(2) {
        for inst in all_instances(n) {
            let arr = count_arrangements_bruteforce(&inst).unwrap();
            let mat = count_matchings_bruteforce(&inst).unwrap();
            assert_eq!(arr, mat * ordering_factor(n), "{}", inst.to_text());
            assert_eq!(mat as usize, enumerate_matchings(&inst).unwrap().len());
        }
    }
}

#[test]
fn unconstrained_count_is_factorial() {
    for n in (0..=8).step_by(2) {
        let names: Vec<String> = (0..n).map(|e| format!("e{e}")).collect();
        let inst = Instance::new(&names, &[]).unwrap();
        let fact: u64 = (1..=n as u64).product();
        assert_eq!(count_arrangements_bruteforce(&inst).unwrap(), fact);
    }
}

#[test]
fn adding_a_pair_never_increases_counts() {
    for n in (2..=8).step_by(2) {
        let names: Vec<String> = (0..n).map(|e| format!("e{e}")).collect();
        for inst in all_instances(n) {
            let pairs = inst.forbidden().to_vec();
            let free: Vec<usize> = (0..n).filter(|&e| inst.partner_of(e).is_none()).collect();
            if free.len() < 2 {
                continue;
            }
            let mut more = pairs.clone();
            more.push((free[0], free[1]));
            let bigger = Instance::new(&names, &more).unwrap();
            assert!(
                count_arrangements_bruteforce(&bigger).unwrap()
                    <= count_arrangements_bruteforce(&inst).unwrap()
            );
            assert!(
                count_matchings_bruteforce(&bigger).unwrap()
                    <= count_matchings_bruteforce(&inst).unwrap()
            );
        }
    }
}

/// Direct substitution into both readings of the series, computed with
/// exact rational arithmetic outside this crate and frozen here.
/// Columns: (e, i, even-step, unit-step).
const PHI_GOLDEN: &[(u64, u64, i64, i64)] = &[
    (0, 0, 1, 1),
    (0, 1, 1, 1),
    (0, 2, 1, 1),
    (0, 3, 1, 1),
    (1, 0, -1, -1),
    (1, 1, -1, -1),
    (1, 2, -3, -3),
    (1, 3, -11, -11),
    (2, 0, -2, -2),
    (2, 1, -2, -2),
    (2, 2, -6, -6),
    (2, 3, -22, -22),
    (3, 0, -24, -24),
    (3, 1, -24, -24),
    (3, 2, -54, -54),
    (3, 3, -174, -174),
    (4, 0, -752, -872),
    (4, 1, -752, -872),
    (4, 2, -1528, -1768),
    (4, 3, -4632, -5352),
    (5, 0, -41722, -6682),
    (5, 1, -41722, -6682),
    (5, 2, -83564, -13484),
    (5, 3, -250932, -40692),
    (6, 0, -3710988, -92628),
    (6, 1, -3710988, -92628),
    (6, 2, -7422696, -185976),
    (6, 3, -22269528, -559368),
];

#[test]
fn phi_golden_values() {
    for &(e, i, even, unit) in PHI_GOLDEN {
        assert_eq!(
            eval_phi(&PhiParams::new(e, i, PhiVariant::EvenStep)),
            BigInt::from(even),
            "even-step e={e} i={i}"
        );
        assert_eq!(
            eval_phi(&PhiParams::new(e, i, PhiVariant::UnitStep)),
            BigInt::from(unit),
            "unit-step e={e} i={i}"
        );
    }
}

#[test]
fn phi_is_total_for_large_inputs() {
    let v = eval_phi(&PhiParams::new(60, 30, PhiVariant::UnitStep));
    assert!(v < BigInt::from(0));
    let v = eval_phi(&PhiParams {
        e: 9,
        i: 1,
        a_start: 5,
        variant: PhiVariant::EvenStep,
    });
    assert!(v < BigInt::from(0));
}
