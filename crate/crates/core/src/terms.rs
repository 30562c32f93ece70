//! Terms over the common-meadow signature and its ring/meadow subsignatures.
//!
//! A [`Term`] is built from `0`, `1`, `bot`, variables, `+`, unary `-`, `*`
//! and `/`. Integer numerals `n >= 2` are kept as a compact [`Term::Num`]
//! node standing for the left-nested sum `1 + 1 + ... + 1`; use
//! [`Term::expand_numerals`] when the unfolded form is needed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// A term over `Σ_cm`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Zero,
    One,
    Bot,
    /// Integer numeral `n >= 2`, shorthand for `1 + 1 + ... + 1`.
    Num(BigUint),
    Var(String),
    Add(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Div(Box<Term>, Box<Term>),
}

/// The four signatures, ordered by inclusion of their term languages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignatureTag {
    /// `0, 1, +, -, *`
    Ring,
    /// ring signature plus `bot`
    RingBot,
    /// ring signature plus `/`
    Meadow,
    /// everything
    CommonMeadow,
}

#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    /// Canonical numeral node for a natural number.
    pub fn nat(n: impl Into<BigUint>) -> Term {
        let n = n.into();
        if n.is_zero() {
            Term::Zero
        } else if n.is_one() {
            Term::One
        } else {
            Term::Num(n)
        }
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Term, b: Term) -> Term {
        Term::Div(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Term) -> Term {
        Term::Neg(Box::new(a))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Zero | Term::One | Term::Bot | Term::Num(_) | Term::Var(_) => 1,
            Term::Neg(a) => 1 + a.size(),
            Term::Add(a, b) | Term::Mul(a, b) | Term::Div(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Zero | Term::One | Term::Bot | Term::Num(_) | Term::Var(_) => 0,
            Term::Neg(a) => 1 + a.depth(),
            Term::Add(a, b) | Term::Mul(a, b) | Term::Div(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Term::Zero | Term::One | Term::Bot | Term::Num(_) | Term::Var(_))
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Zero | Term::One | Term::Bot | Term::Num(_) | Term::Var(_) => vec![],
            Term::Neg(a) => vec![a],
            Term::Add(a, b) | Term::Mul(a, b) | Term::Div(a, b) => vec![a, b],
        }
    }

    pub fn contains_bot(&self) -> bool {
        match self {
            Term::Bot => true,
            _ => self.children().into_iter().any(Term::contains_bot),
        }
    }

    pub fn contains_div(&self) -> bool {
        match self {
            Term::Div(..) => true,
            _ => self.children().into_iter().any(Term::contains_div),
        }
    }

    /// Whether the term lies in the term language of `sig`.
    pub fn is_pure(&self, sig: SignatureTag) -> bool {
        match sig {
            SignatureTag::Ring => !self.contains_bot() && !self.contains_div(),
            SignatureTag::RingBot => !self.contains_div(),
            SignatureTag::Meadow => !self.contains_bot(),
            SignatureTag::CommonMeadow => true,
        }
    }

    /// The smallest signature whose term language contains this term.
    pub fn signature(&self) -> SignatureTag {
        match (self.contains_bot(), self.contains_div()) {
            (false, false) => SignatureTag::Ring,
            (true, false) => SignatureTag::RingBot,
            (false, true) => SignatureTag::Meadow,
            (true, true) => SignatureTag::CommonMeadow,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            _ => {
                for c in self.children() {
                    c.collect_vars(out);
                }
            }
        }
    }

    /// Replace every [`Term::Num`] by its left-nested sum of ones.
    pub fn expand_numerals(&self) -> Term {
        match self {
            Term::Num(n) => {
                let mut acc = Term::add(Term::One, Term::One);
                let mut k = BigUint::from(2u32);
                while &k < n {
                    acc = Term::add(acc, Term::One);
                    k += 1u32;
                }
                acc
            }
            Term::Zero | Term::One | Term::Bot | Term::Var(_) => self.clone(),
            Term::Neg(a) => Term::neg(a.expand_numerals()),
            Term::Add(a, b) => Term::add(a.expand_numerals(), b.expand_numerals()),
            Term::Mul(a, b) => Term::mul(a.expand_numerals(), b.expand_numerals()),
            Term::Div(a, b) => Term::div(a.expand_numerals(), b.expand_numerals()),
        }
    }

    /// Simultaneous substitution of variables.
    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(x) => map.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::Zero | Term::One | Term::Bot | Term::Num(_) => self.clone(),
            Term::Neg(a) => Term::neg(a.substitute(map)),
            Term::Add(a, b) => Term::add(a.substitute(map), b.substitute(map)),
            Term::Mul(a, b) => Term::mul(a.substitute(map), b.substitute(map)),
            Term::Div(a, b) => Term::div(a.substitute(map), b.substitute(map)),
        }
    }

    /// Subterm at a path of child indices (`0` = left/only child, `1` = right).
    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(self);
        };
        self.children().get(i).and_then(|c| c.at(rest))
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Term> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(self);
        };
        let child = match (self, i) {
            (Term::Neg(a), 0) => a,
            (Term::Add(a, _) | Term::Mul(a, _) | Term::Div(a, _), 0) => a,
            (Term::Add(_, b) | Term::Mul(_, b) | Term::Div(_, b), 1) => b,
            _ => return None,
        };
        child.at_mut(rest)
    }

    /// All positions in pre-order (root first, then left to right).
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_positions(&mut path, &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        for (i, c) in self.children().into_iter().enumerate() {
            path.push(i);
            c.collect_positions(path, out);
            path.pop();
        }
    }
}

/// Numeral denoting an exact rational.
///
/// Integers map to `0`, `1`, `n`, or `-(n)`; proper fractions in lowest
/// terms to `n/m` or `-(n/m)`.
pub fn numeral_of(q: &BigRational) -> Term {
    let positive = |n: &BigInt| Term::nat(n.abs().to_biguint().expect("absolute value"));
    let body = if q.is_integer() {
        positive(q.numer())
    } else {
        Term::div(positive(q.numer()), positive(q.denom()))
    };
    if q.is_negative() {
        Term::neg(body)
    } else {
        body
    }
}

/// Numeral for an integer.
pub fn int_numeral(n: &BigInt) -> Term {
    let body = Term::nat(n.magnitude().clone());
    if n.sign() == Sign::Minus {
        Term::neg(body)
    } else {
        body
    }
}

/// An equation `lhs = rhs`. The two sides may mention different variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Equation { lhs, rhs }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut vars = self.lhs.free_vars();
        vars.extend(self.rhs.free_vars());
        vars
    }

    pub fn flipped(&self) -> Equation {
        Equation::new(self.rhs.clone(), self.lhs.clone())
    }

    /// A balanced equation has the same variables on both sides.
    pub fn is_balanced(&self) -> bool {
        self.lhs.free_vars() == self.rhs.free_vars()
    }

    pub fn size(&self) -> usize {
        self.lhs.size() + self.rhs.size()
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

/// Canonical one-line rendering; `parse(&print(t))` returns `t`.
pub fn print(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}

fn write_term(t: &Term, out: &mut String) {
    match t {
        Term::Zero => out.push('0'),
        Term::One => out.push('1'),
        Term::Bot => out.push_str("bot"),
        Term::Num(n) => out.push_str(&n.to_string()),
        Term::Var(x) => out.push_str(x),
        Term::Neg(a) => {
            out.push('-');
            write_wrapped(a, !a.is_leaf(), out);
        }
        Term::Add(a, b) => {
            write_wrapped(a, matches!(**a, Term::Neg(_)), out);
            out.push_str(" + ");
            write_wrapped(b, matches!(**b, Term::Neg(_) | Term::Add(..)), out);
        }
        Term::Mul(a, b) => {
            write_wrapped(a, matches!(**a, Term::Neg(_) | Term::Add(..) | Term::Div(..)), out);
            out.push_str(" * ");
            write_wrapped(b, !b.is_leaf(), out);
        }
        Term::Div(a, b) => {
            write_wrapped(a, !a.is_leaf(), out);
            out.push('/');
            write_wrapped(b, !b.is_leaf(), out);
        }
    }
}

fn write_wrapped(t: &Term, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_term(t, out);
        out.push(')');
    } else {
        write_term(t, out);
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown token {token:?} at position {pos}")]
    UnknownToken { pos: usize, token: char },
    #[error("syntax error at position {pos}: expected {expected}, found {found}")]
    Syntax {
        pos: usize,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<ParseError>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigUint),
    Ident(String),
    Bot,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Eq,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Ident(x) => write!(f, "{x:?}"),
            Tok::Bot => f.write_str("bot"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Eq => f.write_str("'='"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = pos;
            while let Some(&(i, d)) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            let n: BigUint = text[pos..end].parse().expect("ascii digits");
            toks.push((pos, Tok::Int(n)));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = pos;
            while let Some(&(i, d)) = chars.peek() {
                if !(d.is_alphanumeric() || d == '_' || d == '\'') {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            let word = &text[pos..end];
            let tok = if word == "bot" {
                Tok::Bot
            } else {
                Tok::Ident(word.to_string())
            };
            toks.push((pos, tok));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '=' => Tok::Eq,
            '⊥' => Tok::Bot,
            '·' => Tok::Star,
            _ => return Err(ParseError::UnknownToken { pos, token: c }),
        };
        toks.push((pos, tok));
        chars.next();
    }
    toks.push((text.len(), Tok::End));
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &'static str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            expected,
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn sum(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.prod()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = Term::add(acc, self.prod()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = Term::add(acc, Term::neg(self.prod()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn prod(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = Term::mul(acc, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    acc = Term::div(acc, self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Term::neg(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::nat(n))
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(Term::Var(x))
            }
            Tok::Bot => {
                self.bump();
                Ok(Term::Bot)
            }
            Tok::LParen => {
                self.bump();
                let t = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => Err(self.error("a term")),
        }
    }
}

/// Parse a term. See the crate README for the grammar.
pub fn parse(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let t = p.sum()?;
    p.expect(Tok::End, "end of input")?;
    Ok(t)
}

/// Parse an equation `lhs = rhs`.
pub fn parse_equation(text: &str) -> Result<Equation, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let lhs = p.sum()?;
    p.expect(Tok::Eq, "'='")?;
    let rhs = p.sum()?;
    p.expect(Tok::End, "end of input")?;
    Ok(Equation::new(lhs, rhs))
}

/// Parse an equation file: one equation per line, `#` starts a comment.
/// Returns each equation with its 1-based line number.
pub fn parse_equation_file(text: &str) -> Result<Vec<(usize, Equation)>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let eq = parse_equation(line).map_err(|e| ParseError::Line {
            line: i + 1,
            source: Box::new(e),
        })?;
        out.push((i + 1, eq));
    }
    Ok(out)
}
