//! Boolean formulas over an ordered variable universe.
//!
//! Text syntax, tightest binding first:
//!
//! ```text
//! !a        negation
//! a & b     conjunction      (left-associative)
//! a | b     disjunction      (left-associative)
//! a -> b    implication      (right-associative)
//! a <-> b   equivalence      (left-associative)
//! ```
//!
//! plus `true`, `false`, parentheses and `#` line comments.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Maximum nesting depth accepted by the parser.
pub const MAX_PARSE_DEPTH: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniverseError {
    #[error("invalid variable identifier {0:?}")]
    InvalidName(String),
    #[error("duplicate variable {0:?}")]
    Duplicate(String),
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Returns true if `name` is usable as a variable identifier.
pub fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if is_ident_start(c) => {}
        _ => return false,
    }
    chars.all(is_ident_char) && name != "true" && name != "false"
}

/// Ordered set of distinct variable names. A variable's index is its
/// position here and is the default BDD order position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VarUniverse {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl VarUniverse {
    pub fn new<I, S>(names: I) -> Result<Self, UniverseError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut universe = VarUniverse::default();
        for name in names {
            universe.push(name.into())?;
        }
        Ok(universe)
    }

    /// Appends a variable and returns its index.
    pub fn push(&mut self, name: String) -> Result<usize, UniverseError> {
        if !valid_identifier(&name) {
            return Err(UniverseError::InvalidName(name));
        }
        if self.index.contains_key(&name) {
            return Err(UniverseError::Duplicate(name));
        }
        let idx = self.names.len();
        self.index.insert(name.clone(), idx);
        self.names.push(name);
        Ok(idx)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Boolean formula AST. Variables are indices into a [`VarUniverse`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Var(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(idx: usize) -> Self {
        Formula::Var(idx)
    }

    pub fn literal(idx: usize, value: bool) -> Self {
        if value {
            Formula::Var(idx)
        } else {
            Formula::Var(idx).not()
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, rhs: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn iff(self, rhs: Formula) -> Self {
        Formula::Iff(Box::new(self), Box::new(rhs))
    }

    /// Balanced conjunction; the empty conjunction is `true` and a single
    /// operand is returned unchanged.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        balanced(items.into_iter().collect(), true)
    }

    /// Balanced disjunction; the empty disjunction is `false`.
    pub fn disjunction<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        balanced(items.into_iter().collect(), false)
    }

    /// Largest variable index plus one, or 0 for a closed formula.
    pub fn var_bound(&self) -> usize {
        match self {
            Formula::Const(_) => 0,
            Formula::Var(v) => v + 1,
            Formula::Not(a) => a.var_bound(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.var_bound().max(b.var_bound())
            }
        }
    }

    pub fn eval(&self, x: &Instance) -> bool {
        self.eval_with(&|v| x.get(v))
    }

    pub fn eval_with(&self, value: &dyn Fn(usize) -> bool) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Var(v) => value(*v),
            Formula::Not(a) => !a.eval_with(value),
            Formula::And(a, b) => a.eval_with(value) && b.eval_with(value),
            Formula::Or(a, b) => a.eval_with(value) || b.eval_with(value),
            Formula::Implies(a, b) => !a.eval_with(value) || b.eval_with(value),
            Formula::Iff(a, b) => a.eval_with(value) == b.eval_with(value),
        }
    }

    /// Renders with full parenthesisation of binary connectives so that
    /// `parse(render(f))` gives back `f` exactly.
    pub fn render(&self, universe: &VarUniverse) -> String {
        let mut out = String::new();
        self.render_into(universe, &mut out);
        out
    }

    fn render_into(&self, universe: &VarUniverse, out: &mut String) {
        let (op, a, b) = match self {
            Formula::Const(true) => return out.push_str("true"),
            Formula::Const(false) => return out.push_str("false"),
            Formula::Var(v) => return out.push_str(universe.name(*v)),
            Formula::Not(a) => {
                out.push('!');
                return a.render_into(universe, out);
            }
            Formula::And(a, b) => ("&", a, b),
            Formula::Or(a, b) => ("|", a, b),
            Formula::Implies(a, b) => ("->", a, b),
            Formula::Iff(a, b) => ("<->", a, b),
        };
        out.push('(');
        a.render_into(universe, out);
        out.push(' ');
        out.push_str(op);
        out.push(' ');
        b.render_into(universe, out);
        out.push(')');
    }
}

fn balanced(mut items: Vec<Formula>, conj: bool) -> Formula {
    match items.len() {
        0 => Formula::Const(conj),
        1 => items.pop().unwrap(),
        n => {
            let right = items.split_off(n / 2);
            let (l, r) = (balanced(items, conj), balanced(right, conj));
            if conj {
                l.and(r)
            } else {
                l.or(r)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("instance assigns {got} variables, universe has {expected}")]
    Length { expected: usize, got: usize },
    #[error("invalid bit {0:?} (expected 0 or 1)")]
    BadBit(String),
    #[error("unknown variable {0:?} in instance")]
    UnknownVariable(String),
    #[error("variable {0:?} assigned twice")]
    Repeated(String),
    #[error("variable {0:?} not assigned")]
    Missing(String),
    #[error("label {label:?} does not match the universe order {expected:?}")]
    LabelMismatch { label: String, expected: String },
    #[error("malformed instance {0:?}")]
    Malformed(String),
}

/// Total assignment of the universe's variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance {
    bits: Vec<bool>,
}

impl Instance {
    pub fn new(bits: Vec<bool>) -> Self {
        Instance { bits }
    }

    /// Decodes `code` with variable 0 as the most significant bit.
    pub fn from_index(code: usize, n: usize) -> Self {
        let bits = (0..n).map(|v| (code >> (n - 1 - v)) & 1 == 1).collect();
        Instance { bits }
    }

    pub fn to_index(&self) -> usize {
        self.bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, var: usize) -> bool {
        self.bits[var]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn set(&mut self, var: usize, value: bool) {
        self.bits[var] = value;
    }

    /// Bitstring in universe order, e.g. `0011`.
    pub fn bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Parses one of
    ///
    /// * a bare bitstring in universe order (`0011`);
    /// * `LABEL=bits`, where `LABEL` must be the concatenation of the
    ///   universe's names in order (`LKPA=0011`);
    /// * a comma list assigning every variable (`L=0,K=0,P=1,A=1`).
    pub fn parse(text: &str, universe: &VarUniverse) -> Result<Self, InstanceError> {
        let text = text.trim();
        let n = universe.len();
        if text.contains(',') {
            return Self::parse_assignments(text, universe);
        }
        let bits_text = match text.split_once('=') {
            None => text,
            Some((label, bits)) => {
                let label = label.trim();
                let bits = bits.trim();
                if n == 1 && universe.index_of(label) == Some(0) {
                    bits
                } else {
                    let expected = universe.names().concat();
                    if label != expected {
                        return Err(InstanceError::LabelMismatch {
                            label: label.to_string(),
                            expected,
                        });
                    }
                    bits
                }
            }
        };
        let bits = bits_text
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(InstanceError::BadBit(other.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if bits.len() != n {
            return Err(InstanceError::Length {
                expected: n,
                got: bits.len(),
            });
        }
        Ok(Instance { bits })
    }

    fn parse_assignments(text: &str, universe: &VarUniverse) -> Result<Self, InstanceError> {
        let mut bits: Vec<Option<bool>> = vec![None; universe.len()];
        for part in text.split(',') {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| InstanceError::Malformed(part.to_string()))?;
            let name = name.trim();
            let idx = universe
                .index_of(name)
                .ok_or_else(|| InstanceError::UnknownVariable(name.to_string()))?;
            let value = match value.trim() {
                "0" => false,
                "1" => true,
                other => return Err(InstanceError::BadBit(other.to_string())),
            };
            if bits[idx].replace(value).is_some() {
                return Err(InstanceError::Repeated(name.to_string()));
            }
        }
        let bits = bits
            .into_iter()
            .enumerate()
            .map(|(i, b)| b.ok_or_else(|| InstanceError::Missing(universe.name(i).to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Instance { bits })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown variable {name:?}")]
    UnknownVariable { line: usize, column: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier {s:?}"),
            Tok::True => f.write_str("'true'"),
            Tok::False => f.write_str("'false'"),
            Tok::Not => f.write_str("'!'"),
            Tok::And => f.write_str("'&'"),
            Tok::Or => f.write_str("'|'"),
            Tok::Implies => f.write_str("'->'"),
            Tok::Iff => f.write_str("'<->'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    let syntax = |line, column, message: String| ParseError::Syntax { line, column, message };
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        let tok = match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
                continue;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            '!' => {
                bump(&mut chars);
                Tok::Not
            }
            '&' => {
                bump(&mut chars);
                Tok::And
            }
            '|' => {
                bump(&mut chars);
                Tok::Or
            }
            '(' => {
                bump(&mut chars);
                Tok::LParen
            }
            ')' => {
                bump(&mut chars);
                Tok::RParen
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::Implies
                } else {
                    return Err(syntax(tl, tc, "expected '->'".into()));
                }
            }
            '<' => {
                bump(&mut chars);
                if chars.peek() == Some(&'-') {
                    bump(&mut chars);
                    if chars.peek() == Some(&'>') {
                        bump(&mut chars);
                        Tok::Iff
                    } else {
                        return Err(syntax(tl, tc, "expected '<->'".into()));
                    }
                } else {
                    return Err(syntax(tl, tc, "expected '<->'".into()));
                }
            }
            c if is_ident_start(c) => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    ident.push(c);
                    bump(&mut chars);
                }
                match ident.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(ident),
                }
            }
            other => return Err(syntax(tl, tc, format!("unexpected character {other:?}"))),
        };
        out.push(Spanned {
            tok,
            line: tl,
            column: tc,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

/// How the parser resolves identifiers.
enum Names<'u> {
    Fixed(&'u VarUniverse),
    Infer(VarUniverse),
}

struct Parser<'u> {
    toks: Vec<Spanned>,
    pos: usize,
    depth: usize,
    names: Names<'u>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn advance(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: String) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            message,
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_PARSE_DEPTH {
            return Err(self.error_here(format!("nesting deeper than {MAX_PARSE_DEPTH}")));
        }
        Ok(())
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.advance();
            let rhs = self.implication()?;
            lhs = lhs.iff(rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let lhs = self.disjunction()?;
        let out = if *self.peek() == Tok::Implies {
            self.advance();
            let rhs = self.implication()?;
            lhs.implies(rhs)
        } else {
            lhs
        };
        self.depth -= 1;
        Ok(out)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.advance();
            let rhs = self.conjunction()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.advance();
            let rhs = self.unary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let out = if *self.peek() == Tok::Not {
            self.advance();
            self.unary()?.not()
        } else {
            self.atom()?
        };
        self.depth -= 1;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let t = self.advance();
        match t.tok {
            Tok::True => Ok(Formula::Const(true)),
            Tok::False => Ok(Formula::Const(false)),
            Tok::LParen => {
                let inner = self.iff()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error_here(format!("expected ')', found {}", self.peek())));
                }
                self.advance();
                Ok(inner)
            }
            Tok::Ident(name) => {
                let idx = match &mut self.names {
                    Names::Fixed(u) => u.index_of(&name).ok_or(ParseError::UnknownVariable {
                        line: t.line,
                        column: t.column,
                        name,
                    })?,
                    Names::Infer(u) => match u.index_of(&name) {
                        Some(i) => i,
                        None => u.push(name).expect("lexer yields valid identifiers"),
                    },
                };
                Ok(Formula::Var(idx))
            }
            other => Err(ParseError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("expected a variable, constant or '(', found {other}"),
            }),
        }
    }

    fn finish(&mut self) -> Result<Formula, ParseError> {
        let f = self.iff()?;
        if *self.peek() != Tok::Eof {
            return Err(self.error_here(format!("unexpected {}", self.peek())));
        }
        Ok(f)
    }
}

/// Parses `text` against a fixed universe.
pub fn parse(text: &str, universe: &VarUniverse) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        depth: 0,
        names: Names::Fixed(universe),
    };
    p.finish()
}

/// Parses `text`, collecting variables in first-occurrence order.
pub fn parse_infer(text: &str) -> Result<(VarUniverse, Formula), ParseError> {
    parse_extending(text, VarUniverse::default())
}

/// Parses `text`, appending any variable not yet in `universe`.
pub fn parse_extending(text: &str, universe: VarUniverse) -> Result<(VarUniverse, Formula), ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        depth: 0,
        names: Names::Infer(universe),
    };
    let f = p.finish()?;
    match p.names {
        Names::Infer(u) => Ok((u, f)),
        Names::Fixed(_) => unreachable!(),
    }
}
