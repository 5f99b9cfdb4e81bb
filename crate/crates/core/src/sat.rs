//! Propositional encoding of a pairing instance, DIMACS output, a small
//! deterministic DPLL solver, and model decoding.
//!
//! One variable per unordered element pair; `var(u, v)` is true when `u`
//! and `v` share a row. Clauses, in this order:
//!
//! 1. a negative unit per incompatible pair, in declaration order;
//! 2. an at-least-one clause per element, elements ascending;
//! 3. pairwise at-most-one clauses per element, elements ascending.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{ElementId, Instance, Pairing};

/// Signed DIMACS literal.
pub type Lit = i32;

/// Bijection between unordered element pairs `u < v` and variables
/// `1..=n(n-1)/2`, enumerated row by row of the upper triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarMap {
    n: usize,
    pairs: Vec<(ElementId, ElementId)>,
}

impl VarMap {
    pub fn new(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                pairs.push((u, v));
            }
        }
        Self { n, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn var_count(&self) -> usize {
        self.pairs.len()
    }

    /// `u*n - u(u+1)/2 + (v - u)` for the ordered pair `(min, max)`.
    pub fn var(&self, a: ElementId, b: ElementId) -> u32 {
        assert!(
            a != b && a < self.n && b < self.n,
            "no variable for ({a}, {b})"
        );
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        (u * self.n - u * (u + 1) / 2 + (v - u)) as u32
    }

    pub fn pair_of(&self, var: u32) -> (ElementId, ElementId) {
        self.pairs[var as usize - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CnfFormula {
    pub var_count: usize,
    pub clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    /// Clause evaluation under a full assignment, independent of the solver.
    pub fn is_satisfied_by(&self, assignment: &Assignment) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| assignment.lit_value(l)))
    }
}

/// Builds the pairing CNF for `inst`.
pub fn encode(inst: &Instance) -> (CnfFormula, VarMap) {
    let n = inst.n();
    let vm = VarMap::new(n);
    let mut clauses = Vec::new();

    for &(u, v) in inst.forbidden() {
        clauses.push(vec![-(vm.var(u, v) as Lit)]);
    }
    for e in 0..n {
        clauses.push(
            (0..n)
                .filter(|&x| x != e)
                .map(|x| vm.var(e, x) as Lit)
                .collect(),
        );
    }
    for e in 0..n {
        let partners: Vec<ElementId> = (0..n).filter(|&x| x != e).collect();
        for (j, &x) in partners.iter().enumerate() {
            for &y in &partners[j + 1..] {
                clauses.push(vec![-(vm.var(e, x) as Lit), -(vm.var(e, y) as Lit)]);
            }
        }
    }

    (
        CnfFormula {
            var_count: vm.var_count(),
            clauses,
        },
        vm,
    )
}

/// Standard DIMACS CNF text.
pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.var_count, f.clauses.len());
    for clause in &f.clauses {
        for lit in clause {
            write!(out, "{lit} ").unwrap();
        }
        out.push_str("0\n");
    }
    out
}

/// Truth values for variables `1..=var_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    pub fn value(&self, var: u32) -> bool {
        self.0[var as usize - 1]
    }

    pub fn lit_value(&self, lit: Lit) -> bool {
        let v = self.value(lit.unsigned_abs());
        if lit > 0 {
            v
        } else {
            !v
        }
    }

    pub fn true_vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u32 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Assignment),
    Unsat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DpllStats {
    pub decisions: u64,
    pub propagations: u64,
    pub backtracks: u64,
}

/// Runs DPLL: unit propagation to fixpoint, branching on the lowest
/// unassigned variable with TRUE first, chronological backtracking.
/// Variables left unassigned once every clause is satisfied read FALSE.
pub fn dpll_solve(f: &CnfFormula) -> SatResult {
    dpll_solve_with_stats(f).0
}

pub fn dpll_solve_with_stats(f: &CnfFormula) -> (SatResult, DpllStats) {
    let mut solver = Dpll::new(f);
    let result = if solver.search() {
        SatResult::Sat(Assignment(
            solver.values.iter().map(|v| v.unwrap_or(false)).collect(),
        ))
    } else {
        SatResult::Unsat
    };
    (result, solver.stats)
}

enum ClauseState {
    Satisfied,
    Conflict,
    Unit(Lit),
    Open,
}

struct Dpll<'a> {
    formula: &'a CnfFormula,
    values: Vec<Option<bool>>,
    trail: Vec<u32>,
    stats: DpllStats,
}

impl<'a> Dpll<'a> {
    fn new(formula: &'a CnfFormula) -> Self {
        Self {
            formula,
            values: vec![None; formula.var_count],
            trail: Vec::new(),
            stats: DpllStats::default(),
        }
    }

    fn lit(&self, lit: Lit) -> Option<bool> {
        self.values[lit.unsigned_abs() as usize - 1].map(|v| v == (lit > 0))
    }

    fn assign(&mut self, lit: Lit) {
        let var = lit.unsigned_abs();
        self.values[var as usize - 1] = Some(lit > 0);
        self.trail.push(var);
    }

    fn undo_to(&mut self, mark: usize) {
        for var in self.trail.drain(mark..) {
            self.values[var as usize - 1] = None;
        }
    }

    fn clause_state(&self, clause: &[Lit]) -> ClauseState {
        let mut unassigned = None;
        let mut open = 0;
        for &l in clause {
            match self.lit(l) {
                Some(true) => return ClauseState::Satisfied,
                Some(false) => {}
                None => {
                    open += 1;
                    unassigned = Some(l);
                }
            }
        }
        match (open, unassigned) {
            (0, _) => ClauseState::Conflict,
            (1, Some(l)) => ClauseState::Unit(l),
            _ => ClauseState::Open,
        }
    }

    /// Propagates units until nothing changes. Returns false on conflict.
    fn propagate(&mut self) -> bool {
        let formula = self.formula;
        loop {
            let mut changed = false;
            for clause in &formula.clauses {
                match self.clause_state(clause) {
                    ClauseState::Conflict => return false,
                    ClauseState::Unit(l) => {
                        self.assign(l);
                        self.stats.propagations += 1;
                        changed = true;
                    }
                    ClauseState::Satisfied | ClauseState::Open => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn all_satisfied(&self) -> bool {
        self.formula
            .clauses
            .iter()
            .all(|c| matches!(self.clause_state(c), ClauseState::Satisfied))
    }

    fn search(&mut self) -> bool {
        if !self.propagate() {
            return false;
        }
        if self.all_satisfied() {
            return true;
        }
        let Some(idx) = self.values.iter().position(Option::is_none) else {
            return false;
        };
        let var = idx as Lit + 1;
        for lit in [var, -var] {
            let mark = self.trail.len();
            self.stats.decisions += 1;
            self.assign(lit);
            if self.search() {
                return true;
            }
            self.undo_to(mark);
            self.stats.backtracks += 1;
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("model does not form a perfect pairing: {0}")]
    MalformedModel(String),
}

/// Reads the rows of a pairing off a model, in ascending variable order.
pub fn decode(assignment: &Assignment, vm: &VarMap) -> Result<Pairing, DecodeError> {
    let n = vm.n();
    let mut used = vec![false; n];
    let mut rows = Vec::with_capacity(n / 2);
    for var in assignment.true_vars() {
        if var as usize > vm.var_count() {
            return Err(DecodeError::MalformedModel(format!(
                "variable {var} out of range"
            )));
        }
        let (u, v) = vm.pair_of(var);
        for e in [u, v] {
            if used[e] {
                return Err(DecodeError::MalformedModel(format!(
                    "element #{e} matched twice"
                )));
            }
            used[e] = true;
        }
        rows.push((u, v));
    }
    if let Some(e) = used.iter().position(|&b| !b) {
        return Err(DecodeError::MalformedModel(format!(
            "element #{e} unmatched"
        )));
    }
    Ok(Pairing::new(rows))
}
