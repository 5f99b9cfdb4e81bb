//! An executable ASCII form of the Boolean Algebraic Program notation for
//! matrix machines, and a transcription of the Tripound procedure in it.
//!
//! | notation      | ASCII          |
//! |---------------|----------------|
//! | for-all loop  | `forall`       |
//! | exclusive or  | `xor`          |
//! | member of     | `in`, `notin`  |
//! | machine op    | `<M\| op Lang>`|
//! | always-and    | `\`            |
//! | row count     | `$X$`          |
//! | subscript     | `X_(row, col)` |
//!
//! Loops never increment anything implicitly. A step cap turns a loop whose
//! guard never changes into [`BapError::StepCapExceeded`].

mod ast;
mod interp;
mod lexer;
mod parser;

use thiserror::Error;

pub use ast::{
    BapProgram, BinOp, Connective, Expr, Guard, LValue, OperatorDef, Rel, Span, Stmt, StmtKind,
};
pub use interp::{run_bap, run_bap_profiled, BapState, Cell, Matrix, DEFAULT_STEP_CAP};
pub use parser::parse_bap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BapError {
    #[error("{span}: syntax error: {message}")]
    Syntax { span: Span, message: String },
    #[error("{span}: undefined operator `{name}`")]
    UndefinedOperator { name: String, span: Span },
    #[error("matrix `{name}` is not declared in the initial state")]
    UndefinedMatrix { name: String },
    #[error("{span}: scalar `{name}` read before assignment")]
    UndefinedScalar { name: String, span: Span },
    #[error("{span}: step cap {cap} exceeded")]
    StepCapExceeded { cap: u64, span: Span },
    #[error("{span}: index ({row}, {col}) out of bounds for matrix `{matrix}`")]
    IndexOutOfBounds {
        matrix: String,
        row: i64,
        col: i64,
        span: Span,
    },
    #[error("{span}: cell ({row}, {col}) of matrix `{matrix}` is empty")]
    EmptyCell {
        matrix: String,
        row: i64,
        col: i64,
        span: Span,
    },
    #[error("{span}: {message}")]
    Arithmetic { message: String, span: Span },
    #[error("{span}: operator `{name}` nested too deeply")]
    CallDepth { name: String, span: Span },
}

/// Source of the bundled Tripound transcription.
pub const TRIPOUND_SOURCE: &str = include_str!("../../programs/tripound.bap");

/// The bundled Tripound program, parsed.
pub fn bundled_tripound() -> BapProgram {
    parse_bap(TRIPOUND_SOURCE).expect("bundled program parses")
}
