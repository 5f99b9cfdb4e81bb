//! One line per acceptance criterion: `PASS`/`FAIL`, elapsed time, detail.
//! Run with `cargo test -p tripound --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;

use tripound::bap::{bundled_tripound, run_bap, BapState};
use tripound::counting::{
    compare_counts, count_arrangements_bruteforce, count_matchings_bruteforce, enumerate_matchings,
    ordering_factor, PhiVariant,
};
use tripound::harness::{
    all_instances, determinism_check, gen_instance, measure_scaling, GenSpec, Lcg,
};
use tripound::model::{check_pairing, parse_instance, Instance};
use tripound::sat::{decode, dpll_solve, encode, write_dimacs, SatResult};
use tripound::tripound::{feasibility_threshold, tripound_solve, Mode, ScanMode};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn seeded(count: usize, max_n: usize, seed: u64) -> Vec<Instance> {
    let mut rng = Lcg::new(seed);
    (0..count)
        .map(|_| {
            let n = 2 * (1 + rng.below((max_n / 2) as u32) as usize);
            let i = rng.below((n / 4) as u32 + 1) as usize;
            gen_instance(&GenSpec {
                n,
                i,
                seed: rng.next_u32() as u64,
                incompatibles_first: false,
            })
            .unwrap()
        })
        .collect()
}

fn exhaustive(max_n: usize) -> impl Iterator<Item = Instance> {
    (0..=max_n).step_by(2).flat_map(all_instances)
}

fn oracle_soundness() -> Outcome {
    let mut count = 0;
    let mut sat = 0;
    for inst in exhaustive(8) {
        let feasible = !enumerate_matchings(&inst).unwrap().is_empty();
        let (f, vm) = encode(&inst);
        match dpll_solve(&f) {
            SatResult::Sat(model) => {
                ensure(feasible, || {
                    format!("SAT but no matching: {}", inst.to_text())
                })?;
                let p = decode(&model, &vm).map_err(|e| e.to_string())?;
                ensure(check_pairing(&inst, &p).is_valid(), || {
                    format!("decoded pairing invalid: {}", inst.to_text())
                })?;
                sat += 1;
            }
            SatResult::Unsat => ensure(!feasible, || {
                format!("UNSAT but matching exists: {}", inst.to_text())
            })?,
        }
        count += 1;
    }
    Ok(format!("{count} instances, {sat} satisfiable"))
}

fn tripound_soundness() -> Outcome {
    let random = seeded(1000, 40, 1);
    for inst in &random {
        let (p, _) =
            tripound_solve(inst, Mode::Faithful, ScanMode::Linear).map_err(|e| e.to_string())?;
        ensure(check_pairing(inst, &p).is_valid(), || {
            format!("invalid: {}", inst.to_text())
        })?;
    }
    let mut count = 0;
    for inst in exhaustive(8) {
        let ok = tripound_solve(&inst, Mode::Faithful, ScanMode::Linear).is_ok();
        ensure(
            ok == feasibility_threshold(inst.n(), inst.forbidden().len()),
            || format!("threshold mismatch: {}", inst.to_text()),
        )?;
        count += 1;
    }
    Ok(format!(
        "{} random valid, threshold exact on {count}",
        random.len()
    ))
}

fn extended_completeness() -> Outcome {
    let mut count = 0;
    let mut fallbacks = 0;
    for inst in exhaustive(10) {
        let feasible = count_matchings_bruteforce(&inst).unwrap() > 0;
        match tripound_solve(&inst, Mode::Extended, ScanMode::Linear) {
            Ok((p, t)) => {
                ensure(feasible && check_pairing(&inst, &p).is_valid(), || {
                    format!("unexpected success: {}", inst.to_text())
                })?;
                fallbacks += t.fallback_used as usize;
            }
            Err(e) => ensure(!feasible, || format!("{e}: {}", inst.to_text()))?,
        }
        count += 1;
    }
    Ok(format!("{count} instances, {fallbacks} via fallback"))
}

fn bap_equivalence() -> Outcome {
    let prog = bundled_tripound();
    let instances = seeded(200, 40, 2);
    for inst in &instances {
        let (native, _) =
            tripound_solve(inst, Mode::Faithful, ScanMode::Linear).map_err(|e| e.to_string())?;
        let (state, _) =
            run_bap(&prog, BapState::from_instance(inst)).map_err(|e| e.to_string())?;
        let d = state.matrix("D").and_then(|d| d.to_pairing());
        ensure(d.as_ref() == Some(&native), || {
            format!("D differs: {}", inst.to_text())
        })?;
    }
    Ok(format!("{} instances row-for-row", instances.len()))
}

fn counting_ground_truth() -> Outcome {
    let mut count = 0;
    for inst in exhaustive(8) {
        let arr = count_arrangements_bruteforce(&inst).unwrap();
        let mat = count_matchings_bruteforce(&inst).unwrap();
        ensure(arr == mat * ordering_factor(inst.n()), || {
            format!(
                "{arr} != {mat} x {}: {}",
                ordering_factor(inst.n()),
                inst.to_text()
            )
        })?;
        count += 1;
    }
    let n4 = parse_instance("elements a b c d\nincompatible a b\n").unwrap();
    let arr = count_arrangements_bruteforce(&n4).unwrap();
    let mat = count_matchings_bruteforce(&n4).unwrap();
    ensure(arr == 16 && mat == 2, || {
        format!("n=4 single pair: {arr} / {mat}")
    })?;
    Ok(format!(
        "identity on {count} instances; n=4 single pair 16 / 2"
    ))
}

fn series_verdict() -> Outcome {
    let mut agree = 0;
    let mut disagree = 0;
    for n in [2, 4, 6, 8] {
        for inst in all_instances(n) {
            for variant in [PhiVariant::EvenStep, PhiVariant::UnitStep] {
                let r = compare_counts(&inst, variant).map_err(|e| e.to_string())?;
                ensure(
                    r.agree == (r.phi == BigInt::from(r.brute_arrangements)),
                    || "agreement flag inconsistent".into(),
                )?;
                if r.agree {
                    agree += 1;
                } else {
                    disagree += 1;
                }
            }
        }
    }
    let n2 = parse_instance("elements a b\nincompatible a b\n").unwrap();
    let r = compare_counts(&n2, PhiVariant::EvenStep).map_err(|e| e.to_string())?;
    ensure(
        r.phi == BigInt::from(-2) && r.brute_arrangements == 0 && !r.agree,
        || format!("n=2 blocked: phi {} brute {}", r.phi, r.brute_arrangements),
    )?;
    Ok(format!(
        "{agree} cases agree, {disagree} disagree (expected); n=2 blocked phi -2 vs 0"
    ))
}

fn polynomial_scaling() -> Outcome {
    let sizes: Vec<usize> = (6..=12).map(|k| 1usize << k).collect();
    let linear = measure_scaling(&sizes, ScanMode::Linear, 1).map_err(|e| e.to_string())?;
    let indexed = measure_scaling(&sizes, ScanMode::Indexed, 1).map_err(|e| e.to_string())?;
    let detail = format!(
        "linear slope {:.3} (resid {:.3}), indexed slope {:.3} (resid {:.3})",
        linear.slope, linear.max_residual, indexed.slope, indexed.max_residual
    );
    ensure((1.7..=2.3).contains(&linear.slope), || {
        format!("linear out of band: {detail}")
    })?;
    ensure(indexed.slope <= 1.3, || {
        format!("indexed too steep: {detail}")
    })?;
    ensure(
        linear.max_residual <= 0.3 && indexed.max_residual <= 0.3,
        || format!("residual too large: {detail}"),
    )?;
    Ok(detail)
}

fn determinism() -> Outcome {
    let instances = seeded(50, 40, 3);
    for inst in &instances {
        let v = determinism_check(inst, 3);
        ensure(v.passed(), || format!("{v:?}: {}", inst.to_text()))?;
    }
    Ok(format!("{} instances x 3 runs identical", instances.len()))
}

fn bit_exactness() -> Outcome {
    let golden = include_str!("golden/n4_single_pair.cnf");
    let inst = parse_instance("elements a b c d\nincompatible a b\n").unwrap();
    let (f, _) = encode(&inst);
    ensure(f.var_count == 6 && f.clauses.len() == 17, || {
        format!("{} vars, {} clauses", f.var_count, f.clauses.len())
    })?;
    ensure(write_dimacs(&f) == golden, || {
        "DIMACS differs from golden".into()
    })?;
    for inst in seeded(100, 40, 4).iter().chain(all_instances(6).iter()) {
        let text = inst.to_text();
        let back = parse_instance(&text).map_err(|e| e.to_string())?;
        ensure(&back == inst && back.to_text() == text, || {
            format!("round trip: {text}")
        })?;
    }
    Ok("golden DIMACS byte-identical; instance text round-trips".into())
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "oracle soundness",
        budget: Duration::from_secs(30),
        check: oracle_soundness,
    },
    Criterion {
        id: 2,
        name: "tripound soundness",
        budget: Duration::from_secs(10),
        check: tripound_soundness,
    },
    Criterion {
        id: 3,
        name: "extended completeness",
        budget: Duration::from_secs(60),
        check: extended_completeness,
    },
    Criterion {
        id: 4,
        name: "matrix-program equivalence",
        budget: Duration::from_secs(10),
        check: bap_equivalence,
    },
    Criterion {
        id: 5,
        name: "counting ground truth",
        budget: Duration::from_secs(10),
        check: counting_ground_truth,
    },
    Criterion {
        id: 6,
        name: "series verdict",
        budget: Duration::from_secs(5),
        check: series_verdict,
    },
    Criterion {
        id: 7,
        name: "polynomial scaling",
        budget: Duration::from_secs(60),
        check: polynomial_scaling,
    },
    Criterion {
        id: 8,
        name: "determinism",
        budget: Duration::from_secs(10),
        check: determinism,
    },
    Criterion {
        id: 9,
        name: "bit-exactness",
        budget: Duration::from_secs(1),
        check: bit_exactness,
    },
];

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for c in CRITERIA {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => {
                Err(format!("{detail}; over budget {:?}", c.budget))
            }
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "[{tag}] {:>2} {:<28} {:>8.2?}  {detail}",
            c.id, c.name, elapsed
        );
        if outcome.is_err() {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
