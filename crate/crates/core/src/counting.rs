//! Legal-arrangement counting: the literal series formula and the brute-force
//! counters it is measured against.
//!
//! An *arrangement* is an ordered row-major placement of all elements into
//! the `n/2 x 2` matrix with no incompatible row. A *matching* is the
//! unordered analogue. The two are related by `(n/2)! * 2^(n/2)`.

use num_bigint::BigInt;
use thiserror::Error;

use crate::model::{ElementId, Instance, Pairing};

pub const MAX_ARRANGEMENT_N: usize = 10;
pub const MAX_MATCHING_COUNT_N: usize = 16;
pub const MAX_MATCHING_ENUM_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("{what} needs n <= {limit}, got {n}")]
    SizeLimit {
        what: &'static str,
        n: usize,
        limit: usize,
    },
}

fn check_size(what: &'static str, n: usize, limit: usize) -> Result<(), CountError> {
    if n > limit {
        Err(CountError::SizeLimit { what, n, limit })
    } else {
        Ok(())
    }
}

/// Counts ordered placements by enumerating permutations, rejecting a branch
/// as soon as a completed row is incompatible.
pub fn count_arrangements_bruteforce(inst: &Instance) -> Result<u64, CountError> {
    let n = inst.n();
    check_size("arrangement count", n, MAX_ARRANGEMENT_N)?;
    let mut slots = Vec::with_capacity(n);
    let mut used = vec![false; n];
    Ok(arrange(inst, &mut slots, &mut used))
}

fn arrange(inst: &Instance, slots: &mut Vec<ElementId>, used: &mut [bool]) -> u64 {
    let n = inst.n();
    if slots.len() == n {
        return 1;
    }
    let mut total = 0;
    for e in 0..n {
        if used[e] {
            continue;
        }
        if slots.len() % 2 == 1 && inst.is_forbidden(slots[slots.len() - 1], e) {
            continue;
        }
        used[e] = true;
        slots.push(e);
        total += arrange(inst, slots, used);
        slots.pop();
        used[e] = false;
    }
    total
}

/// Counts perfect matchings that avoid every incompatible pair.
pub fn count_matchings_bruteforce(inst: &Instance) -> Result<u64, CountError> {
    let n = inst.n();
    check_size("matching count", n, MAX_MATCHING_COUNT_N)?;
    let mut matched = vec![false; n];
    let mut count = 0u64;
    walk_matchings(inst, &mut matched, &mut Vec::new(), &mut |_| count += 1);
    Ok(count)
}

/// All valid matchings. The smallest unmatched element is paired with each
/// eligible partner in ascending order, recursively.
pub fn enumerate_matchings(inst: &Instance) -> Result<Vec<Pairing>, CountError> {
    let n = inst.n();
    check_size("matching enumeration", n, MAX_MATCHING_ENUM_N)?;
    let mut matched = vec![false; n];
    let mut out = Vec::new();
    walk_matchings(inst, &mut matched, &mut Vec::new(), &mut |rows| {
        out.push(Pairing::new(rows.to_vec()))
    });
    Ok(out)
}

type Row = (ElementId, ElementId);

fn walk_matchings(
    inst: &Instance,
    matched: &mut [bool],
    rows: &mut Vec<Row>,
    emit: &mut dyn FnMut(&[Row]),
) {
    let Some(first) = matched.iter().position(|&m| !m) else {
        emit(rows);
        return;
    };
    matched[first] = true;
    for other in first + 1..matched.len() {
        if matched[other] || inst.is_forbidden(first, other) {
            continue;
        }
        matched[other] = true;
        rows.push((first, other));
        walk_matchings(inst, matched, rows, emit);
        rows.pop();
        matched[other] = false;
    }
    matched[first] = false;
}

/// Which reading of the series to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhiVariant {
    /// `a` advances by 2; the first term uses multiplier `e`, later terms
    /// `e - a/2`; stops once the multiplier reaches zero.
    EvenStep,
    /// Summation index runs `a = a_start ..= e` in unit steps with term
    /// multiplier `e - (a+2)/2` truncated toward zero.
    UnitStep,
}

impl PhiVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            PhiVariant::EvenStep => "even-step",
            PhiVariant::UnitStep => "unit-step",
        }
    }
}

impl std::str::FromStr for PhiVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even-step" => Ok(PhiVariant::EvenStep),
            "unit-step" => Ok(PhiVariant::UnitStep),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhiParams {
    /// Element count.
    pub e: u64,
    /// Incompatible pair count.
    pub i: u64,
    pub a_start: u64,
    pub variant: PhiVariant,
}

impl PhiParams {
    pub fn new(e: u64, i: u64, variant: PhiVariant) -> Self {
        Self {
            e,
            i,
            a_start: 2,
            variant,
        }
    }
}

fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::from(1), |acc, x| acc * x)
}

/// Evaluates the legal-arrangement series as written. The result is signed
/// and may well be negative; no correction is attempted.
pub fn eval_phi(p: &PhiParams) -> BigInt {
    let e = BigInt::from(p.e);
    let i_fact = factorial(p.i);
    let a0 = p.a_start.max(2);
    let mut phi = factorial(p.e);
    match p.variant {
        PhiVariant::EvenStep => {
            phi -= factorial(a0) * &i_fact * &e;
            let mut a = a0 + 2;
            loop {
                let m = p.e as i128 - (a / 2) as i128;
                if m <= 0 {
                    break;
                }
                phi -= factorial(a) * &i_fact * BigInt::from(m);
                a += 2;
            }
        }
        PhiVariant::UnitStep => {
            phi -= factorial(a0) * &i_fact * &e;
            let mut a = a0;
            while a <= p.e {
                // e - (a+2)/2, truncated toward zero
                let m = (2 * p.e as i128 - (a + 2) as i128) / 2;
                phi -= factorial(a + 2) * &i_fact * BigInt::from(m);
                a += 1;
            }
        }
    }
    phi
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountReport {
    pub variant: PhiVariant,
    pub phi: BigInt,
    pub brute_arrangements: u64,
    pub brute_matchings: u64,
    pub agree: bool,
    /// `arrangements == matchings * (n/2)! * 2^(n/2)`
    pub identity_holds: bool,
}

impl CountReport {
    /// Aligned `key = value` lines.
    pub fn to_text(&self) -> String {
        let rows = [
            ("variant", self.variant.as_str().to_string()),
            ("phi", self.phi.to_string()),
            ("brute_arrangements", self.brute_arrangements.to_string()),
            ("brute_matchings", self.brute_matchings.to_string()),
            ("agree", self.agree.to_string()),
            ("identity_holds", self.identity_holds.to_string()),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter()
            .map(|(k, v)| format!("{k:<width$} = {v}\n"))
            .collect()
    }
}

/// Row permutations times within-row swaps.
pub fn ordering_factor(n: usize) -> u64 {
    let rows = (n / 2) as u64;
    (1..=rows).product::<u64>() * (1u64 << rows)
}

pub fn compare_counts(inst: &Instance, variant: PhiVariant) -> Result<CountReport, CountError> {
    let n = inst.n();
    let brute_arrangements = count_arrangements_bruteforce(inst)?;
    let brute_matchings = count_matchings_bruteforce(inst)?;
    let phi = eval_phi(&PhiParams::new(
        n as u64,
        inst.forbidden().len() as u64,
        variant,
    ));
    Ok(CountReport {
        variant,
        agree: phi == BigInt::from(brute_arrangements),
        phi,
        brute_arrangements,
        brute_matchings,
        identity_holds: brute_arrangements == brute_matchings * ordering_factor(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;

    fn inst(text: &str) -> Instance {
        parse_instance(text).unwrap()
    }

    #[test]
    fn arrangements_small() {
        assert_eq!(
            count_arrangements_bruteforce(&inst("elements a b c d\n")),
            Ok(24)
        );
        assert_eq!(
            count_arrangements_bruteforce(&inst("elements a b c d\nincompatible a b\n")),
            Ok(16)
        );
        assert_eq!(
            count_arrangements_bruteforce(&inst("elements a b\nincompatible a b\n")),
            Ok(0)
        );
    }

    #[test]
    fn matchings_small() {
        assert_eq!(
            count_matchings_bruteforce(&inst("elements a b c d\n")),
            Ok(3)
        );
        let one = inst("elements a b c d\nincompatible a b\n");
        assert_eq!(count_matchings_bruteforce(&one), Ok(2));
        assert_eq!(
            enumerate_matchings(&one).unwrap(),
            vec![
                Pairing::new(vec![(0, 2), (1, 3)]),
                Pairing::new(vec![(0, 3), (1, 2)])
            ]
        );
        assert_eq!(
            count_matchings_bruteforce(&inst("elements a b\nincompatible a b\n")),
            Ok(0)
        );
    }

    #[test]
    fn empty_universe_has_one_matching() {
        let empty = inst("elements\n");
        assert_eq!(count_matchings_bruteforce(&empty), Ok(1));
        assert_eq!(count_arrangements_bruteforce(&empty), Ok(1));
    }

    #[test]
    fn size_limits() {
        let names: Vec<String> = (0..12).map(|j| format!("e{j}")).collect();
        let big = Instance::new(&names, &[]).unwrap();
        assert!(matches!(
            count_arrangements_bruteforce(&big),
            Err(CountError::SizeLimit { limit: 10, .. })
        ));
        assert!(matches!(
            enumerate_matchings(&big),
            Err(CountError::SizeLimit { limit: 10, .. })
        ));
        // 11!! = 10395
        assert_eq!(count_matchings_bruteforce(&big), Ok(10395));
        let names: Vec<String> = (0..18).map(|j| format!("e{j}")).collect();
        let huge = Instance::new(&names, &[]).unwrap();
        assert!(count_matchings_bruteforce(&huge).is_err());
    }

    #[test]
    fn phi_substitutions() {
        use PhiVariant::*;
        assert_eq!(eval_phi(&PhiParams::new(2, 0, EvenStep)), BigInt::from(-2));
        assert_eq!(eval_phi(&PhiParams::new(2, 1, EvenStep)), BigInt::from(-2));
        assert_eq!(eval_phi(&PhiParams::new(0, 0, EvenStep)), BigInt::from(1));
        assert_eq!(eval_phi(&PhiParams::new(0, 0, UnitStep)), BigInt::from(1));
    }

    #[test]
    fn report_n2_disagrees() {
        let r = compare_counts(
            &inst("elements a b\nincompatible a b\n"),
            PhiVariant::EvenStep,
        )
        .unwrap();
        assert_eq!(r.phi, BigInt::from(-2));
        assert_eq!(r.brute_arrangements, 0);
        assert!(!r.agree);
        assert!(r.identity_holds);
        assert!(r.to_text().contains("agree              = false\n"));
    }
}
