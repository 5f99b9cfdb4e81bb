use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::BapError;

/// Parses program text. Operator definitions are hoisted and every machine
/// operation must name a defined operator.
pub fn parse_bap(src: &str) -> Result<BapProgram, BapError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut program = BapProgram::default();

    while p.peek() != &Tok::Eof {
        if let (Tok::Ident(name), Tok::Defines) = (p.peek().clone(), p.peek_at(1)) {
            let span = p.span();
            p.pos += 2;
            let body = p.seq()?;
            p.expect(Tok::Semi)?;
            if program.operator(&name).is_some() {
                return Err(BapError::Syntax {
                    span,
                    message: format!("operator `{name}` defined twice"),
                });
            }
            program.operator_defs.push(OperatorDef { name, span, body });
            continue;
        }
        let span = p.span();
        let mut seq = p.seq()?;
        p.expect(Tok::Semi)?;
        let stmt = if seq.len() == 1 {
            seq.pop().unwrap()
        } else {
            Stmt {
                span,
                kind: StmtKind::Seq(seq),
            }
        };
        program.statements.push(stmt);
    }

    check_operators(&program)?;
    Ok(program)
}

fn check_operators(program: &BapProgram) -> Result<(), BapError> {
    fn walk(stmt: &Stmt, program: &BapProgram) -> Result<(), BapError> {
        match &stmt.kind {
            StmtKind::Machine { op, .. } if program.operator(op).is_none() => {
                Err(BapError::UndefinedOperator {
                    name: op.clone(),
                    span: stmt.span,
                })
            }
            StmtKind::Loop { body, .. } | StmtKind::Cond { body, .. } | StmtKind::Seq(body) => {
                body.iter().try_for_each(|s| walk(s, program))
            }
            _ => Ok(()),
        }
    }
    program
        .statements
        .iter()
        .chain(program.operator_defs.iter().flat_map(|d| d.body.iter()))
        .try_for_each(|s| walk(s, program))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> BapError {
        BapError::Syntax {
            span: self.span(),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), BapError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<String, BapError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => Err(self.error("identifier")),
        }
    }

    /// stmt { "\" stmt }
    fn seq(&mut self) -> Result<Vec<Stmt>, BapError> {
        let mut out = vec![self.stmt()?];
        while *self.peek() == Tok::Backslash {
            self.bump();
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, BapError> {
        let span = self.span();
        let kind = match self.peek() {
            Tok::Forall => {
                self.bump();
                let guard = self.guard()?;
                self.expect(Tok::Arrow)?;
                let body = self.seq()?;
                StmtKind::Loop { guard, body }
            }
            Tok::Halt => {
                self.bump();
                self.expect(Tok::If)?;
                StmtKind::HaltIf {
                    guard: self.guard()?,
                }
            }
            Tok::Lt => {
                self.bump();
                match self.ident()? {
                    m if m == "M" => {}
                    other => {
                        return Err(BapError::Syntax {
                            span,
                            message: format!("machine operations use `<M| ...>`, found `{other}`"),
                        })
                    }
                }
                self.expect(Tok::Pipe)?;
                let op = self.ident()?;
                let lang = self.ident()?;
                self.expect(Tok::Gt)?;
                StmtKind::Machine { op, lang }
            }
            _ => {
                let save = self.pos;
                match self.lvalue() {
                    Ok(target) if *self.peek() == Tok::Assign => {
                        self.bump();
                        let value = self.expr()?;
                        StmtKind::Assign { target, value }
                    }
                    _ => {
                        self.pos = save;
                        let guard = self.guard()?;
                        self.expect(Tok::Arrow)?;
                        let body = self.seq()?;
                        StmtKind::Cond { guard, body }
                    }
                }
            }
        };
        Ok(Stmt { span, kind })
    }

    fn lvalue(&mut self) -> Result<LValue, BapError> {
        let name = self.ident()?;
        if *self.peek() == Tok::CellOpen {
            let (row, col) = self.cell_index()?;
            Ok(LValue::Cell {
                matrix: name,
                row,
                col,
            })
        } else {
            Ok(LValue::Scalar(name))
        }
    }

    fn cell_index(&mut self) -> Result<(Expr, Expr), BapError> {
        self.expect(Tok::CellOpen)?;
        let row = self.expr()?;
        self.expect(Tok::Comma)?;
        let col = self.expr()?;
        self.expect(Tok::RParen)?;
        Ok((row, col))
    }

    fn guard(&mut self) -> Result<Guard, BapError> {
        let mut lhs = self.guard_atom()?;
        loop {
            let op = match self.peek() {
                Tok::Amp => Connective::And,
                Tok::Xor => Connective::Xor,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.guard_atom()?;
            lhs = Guard::Logic {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn guard_atom(&mut self) -> Result<Guard, BapError> {
        if *self.peek() == Tok::LParen {
            // a parenthesized guard, or a comparison whose left side
            // starts with a parenthesized expression
            let save = self.pos;
            self.bump();
            if let Ok(g) = self.guard() {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(g);
                }
            }
            self.pos = save;
        }
        let lhs = self.expr()?;
        let rel = match self.peek() {
            Tok::Lt => Rel::Lt,
            Tok::Le => Rel::Le,
            Tok::Gt => Rel::Gt,
            Tok::Ge => Rel::Ge,
            Tok::EqEq => Rel::Eq,
            Tok::In | Tok::NotIn => {
                let negated = self.bump() == Tok::NotIn;
                let matrix = self.ident()?;
                return Ok(Guard::Member {
                    value: lhs,
                    matrix,
                    negated,
                });
            }
            _ => return Err(self.error("comparison")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Guard::Compare { rel, lhs, rhs })
    }

    /// term { op term }, evaluated left to right with no precedence.
    fn expr(&mut self) -> Result<Expr, BapError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn term(&mut self) -> Result<Expr, BapError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Dollar => {
                self.bump();
                let name = self.ident()?;
                self.expect(Tok::Dollar)?;
                Ok(Expr::Length(name))
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::CellOpen {
                    let (row, col) = self.cell_index()?;
                    Ok(Expr::Cell {
                        matrix: name,
                        row: Box::new(row),
                        col: Box::new(col),
                    })
                } else {
                    Ok(Expr::Scalar(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.error("expression")),
        }
    }
}
