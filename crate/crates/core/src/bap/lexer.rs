use super::ast::Span;
use super::BapError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Forall,
    Xor,
    In,
    NotIn,
    Halt,
    If,
    Dollar,
    /// `_(` directly after an identifier.
    CellOpen,
    LParen,
    RParen,
    Comma,
    Semi,
    Backslash,
    Plus,
    Minus,
    Star,
    Slash,
    /// `*:`
    Defines,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Assign,
    Arrow,
    Amp,
    Pipe,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer {v}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Forall => "forall",
            Tok::Xor => "xor",
            Tok::In => "in",
            Tok::NotIn => "notin",
            Tok::Halt => "halt",
            Tok::If => "if",
            Tok::Dollar => "$",
            Tok::CellOpen => "_(",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Backslash => "\\",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Defines => "*:",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Assign => "=",
            Tok::Arrow => "=>",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, BapError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut pos = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! bump {
        () => {{
            if chars[pos] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            pos += 1;
        }};
    }

    while pos < chars.len() {
        let c = chars[pos];
        let span = Span { line, col };
        let next = chars.get(pos + 1).copied();

        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && next == Some('/') {
            while pos < chars.len() && chars[pos] != '\n' {
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = pos;
            while pos < chars.len() && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '_') {
                // `_(` closes the identifier and opens a cell reference
                if chars[pos] == '_' && chars.get(pos + 1) == Some(&'(') {
                    break;
                }
                bump!();
            }
            let word: String = chars[start..pos].iter().collect();
            let tok = match word.as_str() {
                "forall" => Tok::Forall,
                "xor" => Tok::Xor,
                "in" => Tok::In,
                "notin" => Tok::NotIn,
                "halt" => Tok::Halt,
                "if" => Tok::If,
                _ => Tok::Ident(word),
            };
            out.push(Token { tok, span });
            if pos + 1 < chars.len() && chars[pos] == '_' && chars[pos + 1] == '(' {
                let span = Span { line, col };
                bump!();
                bump!();
                out.push(Token {
                    tok: Tok::CellOpen,
                    span,
                });
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = pos;
            while pos < chars.len() && chars[pos].is_ascii_digit() {
                bump!();
            }
            let digits: String = chars[start..pos].iter().collect();
            let value = digits.parse::<i64>().map_err(|_| BapError::Syntax {
                span,
                message: format!("integer literal `{digits}` out of range"),
            })?;
            out.push(Token {
                tok: Tok::Int(value),
                span,
            });
            continue;
        }

        let (tok, width) = match (c, next) {
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('=', Some('>')) => (Tok::Arrow, 2),
            ('*', Some(':')) => (Tok::Defines, 2),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('=', _) => (Tok::Assign, 1),
            ('*', _) => (Tok::Star, 1),
            ('$', _) => (Tok::Dollar, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('\\', _) => (Tok::Backslash, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('/', _) => (Tok::Slash, 1),
            ('&', _) => (Tok::Amp, 1),
            ('|', _) => (Tok::Pipe, 1),
            _ => {
                return Err(BapError::Syntax {
                    span,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        for _ in 0..width {
            bump!();
        }
        out.push(Token { tok, span });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}
