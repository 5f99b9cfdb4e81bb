//! The three-phase Tripound pairing procedure, instrumented with primitive
//! step counters.
//!
//! * Phase a writes the incompatible elements (pair by pair, first member
//!   then second) down column 0 of `D`.
//! * Phase b strips the incompatible elements from `S`, leaving the free list.
//! * Phase c fills column 1 of the phase-a rows from the free list, then
//!   fills whole rows with the remaining free elements.
//!
//! A primitive step is one matrix cell read, one cell write, or one
//! comparison. Faithful mode fails when the free list runs dry (exactly when
//! `4i > n`); extended mode then hands the instance to the SAT path.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{check_pairing, ElementId, Instance, Pairing};
use crate::sat::{decode, dpll_solve, encode, DecodeError, SatResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Faithful,
    Extended,
}

/// How phase b decides whether an element of `S` is incompatible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanMode {
    /// Scan a working copy of the incompatible list, deleting each hit.
    Linear,
    /// Constant-time partner lookup.
    Indexed,
    /// Slice the incompatibles off the head of `S` when they are declared
    /// first, in pair order. Otherwise behaves as `Linear`.
    Prefix,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Faithful => "faithful",
            Mode::Extended => "extended",
        }
    }
}

impl ScanMode {
    pub const ALL: [ScanMode; 3] = [ScanMode::Linear, ScanMode::Indexed, ScanMode::Prefix];

    pub fn as_str(self) -> &'static str {
        match self {
            ScanMode::Linear => "linear",
            ScanMode::Indexed => "indexed",
            ScanMode::Prefix => "prefix",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "faithful" => Ok(Mode::Faithful),
            "extended" => Ok(Mode::Extended),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

impl FromStr for ScanMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(ScanMode::Linear),
            "indexed" => Ok(ScanMode::Indexed),
            "prefix" => Ok(ScanMode::Prefix),
            other => Err(format!("unknown scan mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripoundTrace {
    /// Length of `S`.
    pub k: usize,
    /// Incompatible elements placed in column 0.
    pub a: usize,
    /// Free-list length after phase b.
    pub free_after_b: usize,
    pub steps_phase_a: u64,
    pub steps_phase_b: u64,
    pub steps_phase_c: u64,
    pub scan: ScanMode,
    pub mode: Mode,
    /// Phase b of a prefix scan found `S` not incompatibles-first.
    pub prefix_fell_back: bool,
    pub fallback_used: bool,
}

impl TripoundTrace {
    pub fn total_steps(&self) -> u64 {
        self.steps_phase_a + self.steps_phase_b + self.steps_phase_c
    }

    /// Flat `key=value` block, one counter per line.
    pub fn to_text(&self) -> String {
        format!(
            "mode={}\nscan={}\nk={}\na={}\nfree_after_b={}\nsteps_phase_a={}\n\
             steps_phase_b={}\nsteps_phase_c={}\nsteps_total={}\n\
             prefix_fell_back={}\nfallback_used={}\n",
            self.mode.as_str(),
            self.scan.as_str(),
            self.k,
            self.a,
            self.free_after_b,
            self.steps_phase_a,
            self.steps_phase_b,
            self.steps_phase_c,
            self.total_steps(),
            self.prefix_fell_back,
            self.fallback_used,
        )
    }
}

impl fmt::Display for TripoundTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("free elements exhausted: column 1 needs {needed}, only {available} free")]
    InsufficientFreeElements { needed: usize, available: usize },
    #[error("no valid pairing exists")]
    Infeasible,
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("fallback produced an invalid pairing")]
    InvalidFallback,
}

/// True iff faithful mode can place every element: the phase-a rows must
/// fit in the `n/2` rows of `D`.
pub fn feasibility_threshold(n: usize, i: usize) -> bool {
    4 * i <= n
}

#[derive(Default)]
struct Steps(u64);

impl Steps {
    fn read(&mut self) {
        self.0 += 1;
    }
    fn write(&mut self) {
        self.0 += 1;
    }
    fn compare(&mut self) {
        self.0 += 1;
    }
}

/// Phase a: the incompatible list `L` and column 0 of `D`.
fn phase_a(
    inst: &Instance,
    steps: &mut Steps,
) -> (Vec<ElementId>, Vec<(ElementId, Option<ElementId>)>) {
    let incompatibles: Vec<ElementId> =
        inst.forbidden().iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut d = Vec::with_capacity(inst.n() / 2);
    for &x in &incompatibles {
        steps.read();
        steps.write();
        d.push((x, None));
    }
    (incompatibles, d)
}

fn strip_linear(
    s_list: &[ElementId],
    incompatibles: &[ElementId],
    steps: &mut Steps,
) -> Vec<ElementId> {
    // tau: working copy of the incompatible list
    let mut tau = Vec::with_capacity(incompatibles.len());
    for &x in incompatibles {
        steps.read();
        steps.write();
        tau.push(x);
    }
    let mut free = Vec::new();
    for &s in s_list {
        steps.read();
        let mut hit = None;
        for (j, &t) in tau.iter().enumerate() {
            steps.compare();
            if t == s {
                hit = Some(j);
                break;
            }
        }
        match hit {
            Some(j) => {
                // shrink the search area
                tau.remove(j);
                steps.write();
            }
            None => {
                free.push(s);
                steps.write();
            }
        }
    }
    free
}

fn strip_indexed(inst: &Instance, s_list: &[ElementId], steps: &mut Steps) -> Vec<ElementId> {
    let mut free = Vec::new();
    for &s in s_list {
        steps.read();
        steps.read();
        steps.compare();
        if inst.partner_of(s).is_none() {
            free.push(s);
            steps.write();
        }
    }
    free
}

/// Returns `None` if `S` does not open with the incompatible list.
fn strip_prefix(
    s_list: &[ElementId],
    incompatibles: &[ElementId],
    steps: &mut Steps,
) -> Option<Vec<ElementId>> {
    let a = incompatibles.len();
    if a > s_list.len() {
        return None;
    }
    for (&s, &x) in s_list.iter().zip(incompatibles) {
        steps.read();
        steps.read();
        steps.compare();
        if s != x {
            return None;
        }
    }
    let mut free = Vec::with_capacity(s_list.len() - a);
    for &s in &s_list[a..] {
        steps.read();
        steps.write();
        free.push(s);
    }
    Some(free)
}

fn phase_c(
    n: usize,
    mut d: Vec<(ElementId, Option<ElementId>)>,
    free: &[ElementId],
    steps: &mut Steps,
) -> Result<Pairing, SolveError> {
    let mut next = free.iter().copied();
    let mut take = |steps: &mut Steps| {
        let e = next.next();
        if e.is_some() {
            steps.read();
        }
        e
    };
    let placed = d.len();
    for row in d.iter_mut() {
        let Some(e) = take(steps) else {
            return Err(SolveError::InsufficientFreeElements {
                needed: placed,
                available: free.len(),
            });
        };
        steps.write();
        row.1 = Some(e);
    }
    let mut rows: Vec<(ElementId, ElementId)> =
        d.into_iter().map(|(l, r)| (l, r.unwrap())).collect();
    for _ in placed..n / 2 {
        let (Some(l), Some(r)) = (take(steps), take(steps)) else {
            // unreachable for valid instances: the slot count balances
            return Err(SolveError::InsufficientFreeElements {
                needed: n - placed,
                available: free.len(),
            });
        };
        steps.write();
        steps.write();
        rows.push((l, r));
    }
    Ok(Pairing::new(rows))
}

/// Runs the faithful procedure, returning the trace even when phase c fails.
fn run_phases(
    inst: &Instance,
    scan: ScanMode,
    mode: Mode,
) -> (Result<Pairing, SolveError>, TripoundTrace) {
    let n = inst.n();
    let s_list: Vec<ElementId> = (0..n).collect();

    let mut sa = Steps::default();
    let (incompatibles, d) = phase_a(inst, &mut sa);

    let mut sb = Steps::default();
    let mut prefix_fell_back = false;
    let free = match scan {
        ScanMode::Linear => strip_linear(&s_list, &incompatibles, &mut sb),
        ScanMode::Indexed => strip_indexed(inst, &s_list, &mut sb),
        ScanMode::Prefix => match strip_prefix(&s_list, &incompatibles, &mut sb) {
            Some(free) => free,
            None => {
                prefix_fell_back = true;
                strip_linear(&s_list, &incompatibles, &mut sb)
            }
        },
    };

    let mut sc = Steps::default();
    let trace_base = |sc: u64| TripoundTrace {
        k: n,
        a: incompatibles.len(),
        free_after_b: free.len(),
        steps_phase_a: sa.0,
        steps_phase_b: sb.0,
        steps_phase_c: sc,
        scan,
        mode,
        prefix_fell_back,
        fallback_used: false,
    };
    let result = phase_c(n, d, &free, &mut sc);
    (result, trace_base(sc.0))
}

/// Pairs every element of `inst` so no row holds an incompatible pair.
pub fn tripound_solve(
    inst: &Instance,
    mode: Mode,
    scan: ScanMode,
) -> Result<(Pairing, TripoundTrace), SolveError> {
    let (result, mut trace) = run_phases(inst, scan, mode);
    match (result, mode) {
        (Ok(p), _) => Ok((p, trace)),
        (Err(e), Mode::Faithful) => Err(e),
        (Err(SolveError::InsufficientFreeElements { .. }), Mode::Extended) => {
            trace.fallback_used = true;
            let p = solve_via_sat(inst)?;
            Ok((p, trace))
        }
        (Err(e), Mode::Extended) => Err(e),
    }
}

/// Encode, run DPLL, decode.
pub fn solve_via_sat(inst: &Instance) -> Result<Pairing, SolveError> {
    let (formula, vm) = encode(inst);
    match dpll_solve(&formula) {
        SatResult::Unsat => Err(SolveError::Infeasible),
        SatResult::Sat(model) => {
            let p = decode(&model, &vm)?;
            if !check_pairing(inst, &p).is_valid() {
                return Err(SolveError::InvalidFallback);
            }
            Ok(p)
        }
    }
}
