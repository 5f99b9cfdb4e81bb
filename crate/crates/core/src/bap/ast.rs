use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Scalar(String),
    /// `$M$`, the row count of a matrix.
    Length(String),
    Cell {
        matrix: String,
        row: Box<Expr>,
        col: Box<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
            Rel::Eq => "==",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connective {
    And,
    Xor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    Compare {
        rel: Rel,
        lhs: Expr,
        rhs: Expr,
    },
    /// `x in M` / `x notin M`: linear search over every cell of `M`.
    Member {
        value: Expr,
        matrix: String,
        negated: bool,
    },
    Logic {
        op: Connective,
        lhs: Box<Guard>,
        rhs: Box<Guard>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LValue {
    Scalar(String),
    Cell {
        matrix: String,
        row: Expr,
        col: Expr,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Assign {
        target: LValue,
        value: Expr,
    },
    /// `forall (g) => body`
    Loop {
        guard: Guard,
        body: Vec<Stmt>,
    },
    /// `g => body`
    Cond {
        guard: Guard,
        body: Vec<Stmt>,
    },
    /// `<M| op lang>`
    Machine {
        op: String,
        lang: String,
    },
    HaltIf {
        guard: Guard,
    },
    /// Two or more statements joined by `\`.
    Seq(Vec<Stmt>),
}

/// A statement and where it was written. Positions are not part of program
/// identity, so equality ignores the span.
#[derive(Debug, Clone)]
pub struct Stmt {
    pub span: Span,
    pub kind: StmtKind,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Stmt {}

#[derive(Debug, Clone)]
pub struct OperatorDef {
    pub name: String,
    pub span: Span,
    pub body: Vec<Stmt>,
}

impl PartialEq for OperatorDef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.body == other.body
    }
}

impl Eq for OperatorDef {}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BapProgram {
    pub statements: Vec<Stmt>,
    /// `name *: ...` definitions, in source order.
    pub operator_defs: Vec<OperatorDef>,
}

impl BapProgram {
    pub fn operator(&self, name: &str) -> Option<&OperatorDef> {
        self.operator_defs.iter().find(|d| d.name == name)
    }

    /// Every matrix name the program mentions, sorted and deduplicated.
    pub fn matrix_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        let all = self
            .statements
            .iter()
            .chain(self.operator_defs.iter().flat_map(|d| d.body.iter()));
        for stmt in all {
            collect_stmt(stmt, &mut names);
        }
        names.sort();
        names.dedup();
        names
    }
}

fn collect_stmt(stmt: &Stmt, out: &mut Vec<String>) {
    match &stmt.kind {
        StmtKind::Assign { target, value } => {
            if let LValue::Cell { matrix, row, col } = target {
                out.push(matrix.clone());
                collect_expr(row, out);
                collect_expr(col, out);
            }
            collect_expr(value, out);
        }
        StmtKind::Loop { guard, body } | StmtKind::Cond { guard, body } => {
            collect_guard(guard, out);
            body.iter().for_each(|s| collect_stmt(s, out));
        }
        StmtKind::Machine { lang, .. } => out.push(lang.clone()),
        StmtKind::HaltIf { guard } => collect_guard(guard, out),
        StmtKind::Seq(items) => items.iter().for_each(|s| collect_stmt(s, out)),
    }
}

fn collect_guard(guard: &Guard, out: &mut Vec<String>) {
    match guard {
        Guard::Compare { lhs, rhs, .. } => {
            collect_expr(lhs, out);
            collect_expr(rhs, out);
        }
        Guard::Member { value, matrix, .. } => {
            collect_expr(value, out);
            out.push(matrix.clone());
        }
        Guard::Logic { lhs, rhs, .. } => {
            collect_guard(lhs, out);
            collect_guard(rhs, out);
        }
    }
}

fn collect_expr(expr: &Expr, out: &mut Vec<String>) {
    match expr {
        Expr::Int(_) | Expr::Scalar(_) => {}
        Expr::Length(m) => out.push(m.clone()),
        Expr::Cell { matrix, row, col } => {
            out.push(matrix.clone());
            collect_expr(row, out);
            collect_expr(col, out);
        }
        Expr::Binary { lhs, rhs, .. } => {
            collect_expr(lhs, out);
            collect_expr(rhs, out);
        }
    }
}

// Printing. Nested binary nodes are always parenthesized so the output
// re-parses to the same tree.

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Scalar(name) => f.write_str(name),
            Expr::Length(m) => write!(f, "${m}$"),
            Expr::Cell { matrix, row, col } => write!(f, "{matrix}_({row}, {col})"),
            Expr::Binary { op, lhs, rhs } => {
                write_operand(f, lhs)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, rhs)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    if matches!(e, Expr::Binary { .. }) {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Compare { rel, lhs, rhs } => write!(f, "{lhs} {} {rhs}", rel.symbol()),
            Guard::Member {
                value,
                matrix,
                negated,
            } => write!(
                f,
                "{value} {} {matrix}",
                if *negated { "notin" } else { "in" }
            ),
            Guard::Logic { op, lhs, rhs } => {
                let sym = match op {
                    Connective::And => "&",
                    Connective::Xor => "xor",
                };
                write!(f, "({lhs}) {sym} ({rhs})")
            }
        }
    }
}

impl fmt::Display for LValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LValue::Scalar(name) => f.write_str(name),
            LValue::Cell { matrix, row, col } => write!(f, "{matrix}_({row}, {col})"),
        }
    }
}

fn write_seq(f: &mut fmt::Formatter<'_>, body: &[Stmt]) -> fmt::Result {
    for (j, s) in body.iter().enumerate() {
        if j > 0 {
            f.write_str(" \\ ")?;
        }
        write!(f, "{s}")?;
    }
    Ok(())
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            StmtKind::Assign { target, value } => write!(f, "{target} = {value}"),
            StmtKind::Loop { guard, body } => {
                write!(f, "forall ({guard}) => ")?;
                write_seq(f, body)
            }
            StmtKind::Cond { guard, body } => {
                write!(f, "({guard}) => ")?;
                write_seq(f, body)
            }
            StmtKind::Machine { op, lang } => write!(f, "<M| {op} {lang}>"),
            StmtKind::HaltIf { guard } => write!(f, "halt if {guard}"),
            StmtKind::Seq(items) => write_seq(f, items),
        }
    }
}

impl fmt::Display for BapProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for def in &self.operator_defs {
            write!(f, "{} *: ", def.name)?;
            write_seq(f, &def.body)?;
            f.write_str(";\n")?;
        }
        for stmt in &self.statements {
            writeln!(f, "{stmt};")?;
        }
        Ok(())
    }
}
