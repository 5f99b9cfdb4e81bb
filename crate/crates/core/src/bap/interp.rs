use std::collections::BTreeMap;

use super::ast::*;
use super::BapError;
use crate::model::{Instance, Pairing};

pub const DEFAULT_STEP_CAP: u64 = 10_000_000;

/// Nested machine operations deeper than this are rejected.
const MAX_CALL_DEPTH: usize = 64;

pub type Cell = Option<i64>;

/// Fixed-width grid of integer cells. Writing one row past the end appends
/// a row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    width: usize,
    rows: Vec<Vec<Cell>>,
}

impl Matrix {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            rows: Vec::new(),
        }
    }

    pub fn from_rows(width: usize, rows: Vec<Vec<i64>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.len(), width, "row width mismatch");
                r.into_iter().map(Some).collect()
            })
            .collect();
        Self { width, rows }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn get(&self, row: usize, col: usize) -> Option<Cell> {
        self.rows.get(row).and_then(|r| r.get(col)).copied()
    }

    /// Reads a two-column grid as pairing rows. Fails on empty or negative
    /// cells.
    pub fn to_pairing(&self) -> Option<Pairing> {
        if self.width != 2 {
            return None;
        }
        self.rows
            .iter()
            .map(|r| match (r[0], r[1]) {
                (Some(l), Some(r)) if l >= 0 && r >= 0 => Some((l as usize, r as usize)),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Pairing::new)
    }

    /// One line per row; cells rendered by `name`, empty cells as `_`.
    pub fn render(&self, name: impl Fn(i64) -> String) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map(&name).unwrap_or_else(|| "_".to_string()))
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BapState {
    pub matrices: BTreeMap<String, Matrix>,
    pub scalars: BTreeMap<String, i64>,
    pub steps: u64,
    pub step_cap: u64,
}

impl Default for BapState {
    fn default() -> Self {
        Self {
            matrices: BTreeMap::new(),
            scalars: BTreeMap::new(),
            steps: 0,
            step_cap: DEFAULT_STEP_CAP,
        }
    }
}

impl BapState {
    pub fn with_matrix(mut self, name: &str, m: Matrix) -> Self {
        self.matrices.insert(name.to_string(), m);
        self
    }

    pub fn with_step_cap(mut self, cap: u64) -> Self {
        self.step_cap = cap;
        self
    }

    /// Loads an instance: `S` holds one element id per row, `I` holds
    /// `[x y]` and `[y x]` per incompatible pair. `D` (two columns), `T` and
    /// `F` (one column each) start empty.
    pub fn from_instance(inst: &Instance) -> Self {
        let s = (0..inst.n()).map(|e| vec![e as i64]).collect();
        let i = inst
            .forbidden()
            .iter()
            .flat_map(|&(x, y)| [vec![x as i64, y as i64], vec![y as i64, x as i64]])
            .collect();
        BapState::default()
            .with_matrix("S", Matrix::from_rows(1, s))
            .with_matrix("I", Matrix::from_rows(2, i))
            .with_matrix("D", Matrix::new(2))
            .with_matrix("T", Matrix::new(1))
            .with_matrix("F", Matrix::new(1))
    }

    pub fn matrix(&self, name: &str) -> Option<&Matrix> {
        self.matrices.get(name)
    }
}

/// Executes `prog` from `initial`, returning the final state and its step
/// count.
pub fn run_bap(prog: &BapProgram, initial: BapState) -> Result<(BapState, u64), BapError> {
    run_bap_profiled(prog, initial).map(|(state, steps, _)| (state, steps))
}

/// Like [`run_bap`], also returning the steps spent in each top-level
/// statement that ran.
pub fn run_bap_profiled(
    prog: &BapProgram,
    initial: BapState,
) -> Result<(BapState, u64, Vec<u64>), BapError> {
    for name in prog.matrix_names() {
        if !initial.matrices.contains_key(&name) {
            return Err(BapError::UndefinedMatrix { name });
        }
    }
    let mut m = Machine {
        prog,
        state: initial,
        depth: 0,
    };
    let mut profile = Vec::with_capacity(prog.statements.len());
    for stmt in &prog.statements {
        let before = m.state.steps;
        let flow = m.exec(stmt)?;
        profile.push(m.state.steps - before);
        if let Flow::Halt = flow {
            break;
        }
    }
    let steps = m.state.steps;
    Ok((m.state, steps, profile))
}

enum Flow {
    Next,
    Halt,
}

struct Machine<'p> {
    prog: &'p BapProgram,
    state: BapState,
    depth: usize,
}

impl Machine<'_> {
    fn tick(&mut self, span: Span) -> Result<(), BapError> {
        if self.state.steps >= self.state.step_cap {
            return Err(BapError::StepCapExceeded {
                cap: self.state.step_cap,
                span,
            });
        }
        self.state.steps += 1;
        Ok(())
    }

    fn exec_seq(&mut self, body: &[Stmt]) -> Result<Flow, BapError> {
        for s in body {
            if let Flow::Halt = self.exec(s)? {
                return Ok(Flow::Halt);
            }
        }
        Ok(Flow::Next)
    }

    fn exec(&mut self, stmt: &Stmt) -> Result<Flow, BapError> {
        let span = stmt.span;
        match &stmt.kind {
            StmtKind::Assign { target, value } => {
                let v = self.eval(value, span)?;
                match target {
                    LValue::Scalar(name) => {
                        self.state.scalars.insert(name.clone(), v);
                    }
                    LValue::Cell { matrix, row, col } => {
                        let r = self.eval(row, span)?;
                        let c = self.eval(col, span)?;
                        self.write_cell(matrix, r, c, v, span)?;
                    }
                }
                Ok(Flow::Next)
            }
            StmtKind::Loop { guard, body } => {
                while self.test(guard, span)? {
                    if let Flow::Halt = self.exec_seq(body)? {
                        return Ok(Flow::Halt);
                    }
                }
                Ok(Flow::Next)
            }
            StmtKind::Cond { guard, body } => {
                if self.test(guard, span)? {
                    self.exec_seq(body)
                } else {
                    Ok(Flow::Next)
                }
            }
            StmtKind::Machine { op, .. } => {
                let def = self
                    .prog
                    .operator(op)
                    .ok_or_else(|| BapError::UndefinedOperator {
                        name: op.clone(),
                        span,
                    })?;
                if self.depth >= MAX_CALL_DEPTH {
                    return Err(BapError::CallDepth {
                        name: op.clone(),
                        span,
                    });
                }
                self.depth += 1;
                let flow = self.exec_seq(&def.body);
                self.depth -= 1;
                flow
            }
            StmtKind::HaltIf { guard } => {
                if self.test(guard, span)? {
                    Ok(Flow::Halt)
                } else {
                    Ok(Flow::Next)
                }
            }
            StmtKind::Seq(items) => self.exec_seq(items),
        }
    }

    /// `&` short-circuits; `xor` evaluates both sides.
    fn test(&mut self, guard: &Guard, span: Span) -> Result<bool, BapError> {
        match guard {
            Guard::Compare { rel, lhs, rhs } => {
                let l = self.eval(lhs, span)?;
                let r = self.eval(rhs, span)?;
                self.tick(span)?;
                Ok(match rel {
                    Rel::Lt => l < r,
                    Rel::Le => l <= r,
                    Rel::Gt => l > r,
                    Rel::Ge => l >= r,
                    Rel::Eq => l == r,
                })
            }
            Guard::Member {
                value,
                matrix,
                negated,
            } => {
                let v = self.eval(value, span)?;
                let cells: Vec<i64> = self
                    .matrix(matrix)?
                    .rows
                    .iter()
                    .flatten()
                    .filter_map(|c| *c)
                    .collect();
                let mut found = false;
                for c in cells {
                    self.tick(span)?;
                    if c == v {
                        found = true;
                        break;
                    }
                }
                Ok(found != *negated)
            }
            Guard::Logic { op, lhs, rhs } => match op {
                Connective::And => Ok(self.test(lhs, span)? && self.test(rhs, span)?),
                Connective::Xor => {
                    let l = self.test(lhs, span)?;
                    let r = self.test(rhs, span)?;
                    Ok(l != r)
                }
            },
        }
    }

    fn matrix(&self, name: &str) -> Result<&Matrix, BapError> {
        self.state
            .matrices
            .get(name)
            .ok_or_else(|| BapError::UndefinedMatrix {
                name: name.to_string(),
            })
    }

    fn eval(&mut self, expr: &Expr, span: Span) -> Result<i64, BapError> {
        match expr {
            Expr::Int(v) => Ok(*v),
            Expr::Scalar(name) => {
                self.state
                    .scalars
                    .get(name)
                    .copied()
                    .ok_or_else(|| BapError::UndefinedScalar {
                        name: name.clone(),
                        span,
                    })
            }
            Expr::Length(name) => Ok(self.matrix(name)?.len() as i64),
            Expr::Cell { matrix, row, col } => {
                let r = self.eval(row, span)?;
                let c = self.eval(col, span)?;
                self.read_cell(matrix, r, c, span)
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs, span)?;
                let r = self.eval(rhs, span)?;
                let out = match op {
                    BinOp::Add => l.checked_add(r),
                    BinOp::Sub => l.checked_sub(r),
                    BinOp::Mul => l.checked_mul(r),
                    BinOp::Div if r == 0 => {
                        return Err(BapError::Arithmetic {
                            message: "division by zero".into(),
                            span,
                        })
                    }
                    // truncates toward zero
                    BinOp::Div => l.checked_div(r),
                };
                out.ok_or_else(|| BapError::Arithmetic {
                    message: format!("overflow in {l} {} {r}", op.symbol()),
                    span,
                })
            }
        }
    }

    fn read_cell(&mut self, name: &str, r: i64, c: i64, span: Span) -> Result<i64, BapError> {
        let m = self.matrix(name)?;
        let oob = || BapError::IndexOutOfBounds {
            matrix: name.to_string(),
            row: r,
            col: c,
            span,
        };
        if r < 0 || c < 0 {
            return Err(oob());
        }
        let cell = m.get(r as usize, c as usize).ok_or_else(oob)?;
        self.tick(span)?;
        cell.ok_or_else(|| BapError::EmptyCell {
            matrix: name.to_string(),
            row: r,
            col: c,
            span,
        })
    }

    fn write_cell(
        &mut self,
        name: &str,
        r: i64,
        c: i64,
        v: i64,
        span: Span,
    ) -> Result<(), BapError> {
        let oob = || BapError::IndexOutOfBounds {
            matrix: name.to_string(),
            row: r,
            col: c,
            span,
        };
        let m = self.matrix(name)?;
        if r < 0 || c < 0 || c as usize >= m.width || r as usize > m.len() {
            return Err(oob());
        }
        self.tick(span)?;
        let m = self.state.matrices.get_mut(name).expect("checked above");
        if r as usize == m.rows.len() {
            m.rows.push(vec![None; m.width]);
        }
        m.rows[r as usize][c as usize] = Some(v);
        Ok(())
    }
}
