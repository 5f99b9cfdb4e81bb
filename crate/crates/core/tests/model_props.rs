use proptest::prelude::*;

use tripound::harness::all_instances;
use tripound::model::{check_pairing, parse_instance, Instance, Pairing};

/// Validity straight from the definition: the flattened rows are a
/// permutation of 0..n and no row matches a declared pair in either order.
fn valid_by_definition(inst: &Instance, p: &Pairing) -> bool {
    let n = inst.n();
    let mut flat = p.flattened();
    flat.sort_unstable();
    if flat != (0..n).collect::<Vec<_>>() {
        return false;
    }
    p.rows.iter().all(|&(x, y)| {
        !inst
            .forbidden()
            .iter()
            .any(|&(u, v)| (u, v) == (x, y) || (v, u) == (x, y))
    })
}

#[test]
fn check_pairing_agrees_with_definition_exhaustively() {
    for n in [0usize, 2, 4, 6] {
        let rows = n / 2;
        let total = n.pow(n as u32);
        for inst in all_instances(n) {
            for code in 0..total.max(1) {
                let mut c = code;
                let mut flat = Vec::with_capacity(n);
                for _ in 0..n {
                    flat.push(c % n.max(1));
                    c /= n.max(1);
                }
                let p = Pairing::new((0..rows).map(|r| (flat[2 * r], flat[2 * r + 1])).collect());
                assert_eq!(
                    check_pairing(&inst, &p).is_valid(),
                    valid_by_definition(&inst, &p),
                    "{:?} {:?}",
                    inst.to_text(),
                    p
                );
            }
        }
    }
}

fn arb_instance() -> impl Strategy<Value = Instance> {
    (0usize..12)
        .prop_flat_map(|half| {
            let n = 2 * half;
            (
                Just(n),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                0..=half,
            )
        })
        .prop_map(|(n, perm, i)| {
            let names: Vec<String> = (0..n).map(|j| format!("x{j}")).collect();
            let pairs: Vec<_> = (0..i).map(|k| (perm[2 * k], perm[2 * k + 1])).collect();
            Instance::new(&names, &pairs).unwrap()
        })
}

proptest! {
    #[test]
    fn partner_map_is_symmetric(inst in arb_instance()) {
        for &(u, v) in inst.forbidden() {
            prop_assert_eq!(inst.partner_of(u), Some(v));
            prop_assert_eq!(inst.partner_of(v), Some(u));
        }
        let paired = (0..inst.n()).filter(|&e| inst.partner_of(e).is_some()).count();
        prop_assert_eq!(paired, 2 * inst.forbidden().len());
    }

    #[test]
    fn text_format_round_trips(inst in arb_instance()) {
        let text = inst.to_text();
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.to_text(), text);
    }
}
