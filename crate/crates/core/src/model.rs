//! Problem data model: named elements, disjoint incompatible pairs, and the
//! two-column pairing matrix produced by every solver.
//!
//! The validity predicate [`check_pairing`] is ground truth for the rest of
//! the crate. Solvers are never trusted to certify their own output.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Dense element id, assigned in declaration order.
pub type ElementId = usize;

/// Ordered element names with a reverse lookup.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElementTable {
    names: Vec<String>,
    index: HashMap<String, ElementId>,
}

impl ElementTable {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<ElementId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: ElementId) -> &str {
        &self.names[id]
    }

    fn push(&mut self, name: &str) -> Result<ElementId, InstanceError> {
        if self.index.contains_key(name) {
            return Err(InstanceError::DuplicateElement(name.to_string()));
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }
}

/// Structural problems with an instance, independent of where it came from.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}` in incompatible pair")]
    UnknownElementInPair(String),
    #[error("element `{0}` appears in two incompatible pairs")]
    ElementInTwoPairs(String),
    #[error("element `{0}` is paired with itself")]
    SelfPair(String),
    #[error("odd element count {0}; a two-column matrix needs an even universe")]
    OddElementCount(usize),
}

/// Instance file errors. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: InstanceError },
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Invalid { line, .. } | ParseError::Syntax { line, .. } => *line,
        }
    }
}

/// Element universe plus disjoint incompatible pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    table: ElementTable,
    forbidden: Vec<(ElementId, ElementId)>,
    partner: Vec<Option<ElementId>>,
}

impl Instance {
    /// Builds an instance from element names and forbidden pairs given by id.
    pub fn new<S: AsRef<str>>(
        names: &[S],
        forbidden: &[(ElementId, ElementId)],
    ) -> Result<Self, InstanceError> {
        let mut b = Builder::default();
        for name in names {
            b.element(name.as_ref())?;
        }
        b.finish_elements()?;
        for &(u, v) in forbidden {
            let (nu, nv) = match (b.table.names.get(u), b.table.names.get(v)) {
                (Some(nu), Some(nv)) => (nu.clone(), nv.clone()),
                (None, _) => return Err(InstanceError::UnknownElementInPair(format!("#{u}"))),
                (_, None) => return Err(InstanceError::UnknownElementInPair(format!("#{v}"))),
            };
            b.pair(&nu, &nv)?;
        }
        Ok(b.build())
    }

    pub fn table(&self) -> &ElementTable {
        &self.table
    }

    pub fn n(&self) -> usize {
        self.table.len()
    }

    /// Forbidden pairs in declaration order.
    pub fn forbidden(&self) -> &[(ElementId, ElementId)] {
        &self.forbidden
    }

    pub fn partner_of(&self, e: ElementId) -> Option<ElementId> {
        self.partner[e]
    }

    pub fn is_forbidden(&self, u: ElementId, v: ElementId) -> bool {
        self.partner[u] == Some(v)
    }

    pub fn name(&self, id: ElementId) -> &str {
        self.table.name(id)
    }

    /// Renders the instance in the text format accepted by [`parse_instance`].
    pub fn to_text(&self) -> String {
        let mut out = String::from("elements");
        for name in self.table.names() {
            out.push(' ');
            out.push_str(name);
        }
        out.push('\n');
        for &(u, v) in &self.forbidden {
            out.push_str(&format!("incompatible {} {}\n", self.name(u), self.name(v)));
        }
        out
    }
}

#[derive(Default)]
struct Builder {
    table: ElementTable,
    forbidden: Vec<(ElementId, ElementId)>,
    partner: Vec<Option<ElementId>>,
}

impl Builder {
    fn element(&mut self, name: &str) -> Result<(), InstanceError> {
        self.table.push(name)?;
        self.partner.push(None);
        Ok(())
    }

    fn finish_elements(&self) -> Result<(), InstanceError> {
        if self.table.len() % 2 == 1 {
            return Err(InstanceError::OddElementCount(self.table.len()));
        }
        Ok(())
    }

    fn pair(&mut self, a: &str, b: &str) -> Result<(), InstanceError> {
        let u = self
            .table
            .index_of(a)
            .ok_or_else(|| InstanceError::UnknownElementInPair(a.to_string()))?;
        let v = self
            .table
            .index_of(b)
            .ok_or_else(|| InstanceError::UnknownElementInPair(b.to_string()))?;
        if u == v {
            return Err(InstanceError::SelfPair(a.to_string()));
        }
        for (id, name) in [(u, a), (v, b)] {
            if self.partner[id].is_some() {
                return Err(InstanceError::ElementInTwoPairs(name.to_string()));
            }
        }
        self.partner[u] = Some(v);
        self.partner[v] = Some(u);
        self.forbidden.push((u, v));
        Ok(())
    }

    fn build(self) -> Instance {
        Instance {
            table: self.table,
            forbidden: self.forbidden,
            partner: self.partner,
        }
    }
}

/// Parses the instance text format.
///
/// ```text
/// # comment
/// elements a b c d
/// incompatible a b
/// ```
///
/// Exactly one `elements` line must precede any `incompatible` line.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut b = Builder::default();
    let mut seen_elements = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut words = content.split_whitespace();
        let Some(keyword) = words.next() else {
            continue;
        };
        let invalid = |source| ParseError::Invalid { line, source };
        let syntax = |message: &str| ParseError::Syntax {
            line,
            message: message.to_string(),
        };
        match keyword {
            "elements" => {
                if seen_elements {
                    return Err(syntax("second `elements` line"));
                }
                seen_elements = true;
                for w in words {
                    b.element(w).map_err(invalid)?;
                }
                b.finish_elements().map_err(invalid)?;
            }
            "incompatible" => {
                if !seen_elements {
                    return Err(syntax("`incompatible` before `elements`"));
                }
                let toks: Vec<&str> = words.collect();
                if toks.len() != 2 {
                    return Err(syntax("`incompatible` takes exactly two elements"));
                }
                b.pair(toks[0], toks[1]).map_err(invalid)?;
            }
            other => return Err(syntax(&format!("unknown directive `{other}`"))),
        }
    }
    if !seen_elements {
        let line = text.lines().count().max(1);
        return Err(ParseError::Syntax {
            line,
            message: "missing `elements` line".to_string(),
        });
    }
    Ok(b.build())
}

/// The N x 2 output matrix, one row per pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Pairing {
    pub rows: Vec<(ElementId, ElementId)>,
}

impl Pairing {
    pub fn new(rows: Vec<(ElementId, ElementId)>) -> Self {
        Self { rows }
    }

    /// Row-major flattening of the matrix.
    pub fn flattened(&self) -> Vec<ElementId> {
        self.rows.iter().flat_map(|&(l, r)| [l, r]).collect()
    }

    /// One `<left> <right>` line per row, in row order.
    pub fn to_text(&self, inst: &Instance) -> String {
        let mut out = String::new();
        for &(l, r) in &self.rows {
            out.push_str(inst.name(l));
            out.push(' ');
            out.push_str(inst.name(r));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// The row holds an incompatible pair.
    ForbiddenRow { row: usize },
    /// The element occurs more than once.
    Reused { element: ElementId },
    /// The element never occurs.
    Missing { element: ElementId },
    /// The row references an id outside the universe.
    OutOfRange { row: usize, element: ElementId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ForbiddenRow { row } => write!(f, "row {row} holds an incompatible pair"),
            Violation::Reused { element } => write!(f, "element #{element} used more than once"),
            Violation::Missing { element } => write!(f, "element #{element} missing"),
            Violation::OutOfRange { row, element } => {
                write!(f, "row {row} references unknown element #{element}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every row avoids the incompatible pairs and that each element
/// appears exactly once. Row order and within-row order are irrelevant.
pub fn check_pairing(inst: &Instance, p: &Pairing) -> Verdict {
    let n = inst.n();
    let mut uses = vec![0usize; n];
    let mut violations = Vec::new();
    for (row, &(l, r)) in p.rows.iter().enumerate() {
        let mut in_range = true;
        for e in [l, r] {
            if e >= n {
                violations.push(Violation::OutOfRange { row, element: e });
                in_range = false;
            } else {
                uses[e] += 1;
            }
        }
        if in_range && inst.is_forbidden(l, r) {
            violations.push(Violation::ForbiddenRow { row });
        }
    }
    for (element, &count) in uses.iter().enumerate() {
        match count {
            0 => violations.push(Violation::Missing { element }),
            1 => {}
            _ => violations.push(Violation::Reused { element }),
        }
    }
    Verdict { violations }
}
