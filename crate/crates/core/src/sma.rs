//! The SMA text format: atlases, connections, cocycles and 1-form cocycles.
//!
//! A document is a list of bracketed blocks, each followed by lines:
//!
//! ```text
//! [meta]
//! name = fix_ns2
//!
//! [chart 0]
//! even x
//! odd t1 t2
//!
//! [overlap 0 1]
//! invertible x
//! y = 1*x^-1 + 1*x^-3*t1*t2
//! ```
//!
//! Parsing happens in two layers. [`parse_document`] is purely syntactic and
//! total; the `*_from_document` functions interpret blocks against charts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::atlas::{Atlas, TransitionMap};
use crate::builders::OmegaCocycle;
use crate::coeffring::{write_sum, Rational};
use crate::connection::{ChristoffelData, Tensor21};
use crate::error::{Error, Result};
use crate::grassmann::{ChartSignature, SuperElement};
use crate::svector::VectorField;

/// Maximum nesting of parentheses and unary minus.
pub const MAX_DEPTH: usize = 256;
/// Maximum absolute value of an exponent.
pub const MAX_POWER: i32 = 64;

/// Expression tree. Sums and products are n-ary so long inputs stay shallow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    /// `d/dx`
    Deriv(String),
    /// `d(x)`
    Form(String),
    Neg(Box<Expr>),
    /// Terms with a "subtract" flag; the first flag is always false.
    Sum(Vec<(bool, Expr)>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    fn is_atom(&self) -> bool {
        matches!(
            self,
            Expr::Num(_) | Expr::Var(_) | Expr::Deriv(_) | Expr::Form(_)
        )
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Sum(_) | Expr::Product(_) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => write!(f, "{r}"),
            Expr::Var(n) => write!(f, "{n}"),
            Expr::Deriv(n) => write!(f, "d/d{n}"),
            Expr::Form(n) => write!(f, "d({n})"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_factor(f, e)
            }
            Expr::Sum(terms) => {
                for (k, (neg, t)) in terms.iter().enumerate() {
                    if k > 0 {
                        f.write_str(if *neg { " - " } else { " + " })?;
                    }
                    match t {
                        Expr::Sum(_) => write!(f, "({t})")?,
                        _ => write!(f, "{t}")?,
                    }
                }
                Ok(())
            }
            Expr::Product(fs) => {
                for (k, x) in fs.iter().enumerate() {
                    if k > 0 {
                        f.write_str("*")?;
                    }
                    write_factor(f, x)?;
                }
                Ok(())
            }
            Expr::Pow(b, k) => {
                if b.is_atom() {
                    write!(f, "{b}^{k}")
                } else {
                    write!(f, "({b})^{k}")
                }
            }
        }
    }
}

/// Right-hand side of a key line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntryValue {
    Expr(Expr),
    /// Raw text, used in `[meta]`.
    Text(String),
}

/// One line of a block: leading words, optionally `= value`.
#[derive(Clone, Debug)]
pub struct Entry {
    pub line: usize,
    pub words: Vec<String>,
    pub value: Option<EntryValue>,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words && self.value == other.value
    }
}

impl Eq for Entry {}

#[derive(Clone, Debug)]
pub struct Block {
    pub line: usize,
    pub kind: String,
    pub args: Vec<usize>,
    pub entries: Vec<Entry>,
}

impl PartialEq for Block {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.args == other.args && self.entries == other.entries
    }
}

impl Eq for Block {}

impl Block {
    fn section(&self) -> String {
        let mut s = self.kind.clone();
        for a in &self.args {
            s.push_str(&format!(" {a}"));
        }
        s
    }

    fn semantic(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Semantic {
            line,
            section: self.section(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SmaDocument {
    pub blocks: Vec<Block>,
}

impl SmaDocument {
    pub fn blocks_of<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Block> + 'a {
        self.blocks.iter().filter(move |b| b.kind == kind)
    }
}

impl fmt::Display for SmaDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            writeln!(f, "[{}]", b.section())?;
            for e in &b.entries {
                f.write_str(&e.words.join(" "))?;
                match &e.value {
                    Some(EntryValue::Expr(x)) => writeln!(f, " = {x}")?,
                    Some(EntryValue::Text(t)) => writeln!(f, " = {t}")?,
                    None => writeln!(f)?,
                }
            }
        }
        Ok(())
    }
}

const KINDS: [&str; 6] = ["meta", "chart", "overlap", "connection", "cocycle", "omega"];

// ---------------------------------------------------------------- lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Num(Rational),
    Deriv(String),
    Form(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eq,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name `{n}`"),
            Tok::Num(r) => format!("number `{r}`"),
            Tok::Deriv(n) => format!("`d/d{n}`"),
            Tok::Form(n) => format!("`d({n})`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Comma => "`,`".into(),
        }
    }
}

fn parse_error(line: usize, column: usize, message: impl Into<String>, expected: &[&str]) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric()
}

/// Tokens with their 1-based columns.
fn lex(text: &str, line: usize) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let name_at = |i: usize| -> (String, usize) {
        let mut j = i;
        while j < chars.len() && is_name_char(chars[j]) {
            j += 1;
        }
        (chars[i..j].iter().collect(), j)
    };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == ' ' || c == '\t' || c == '\r' {
            i += 1;
            continue;
        }
        if is_name_start(c) {
            let (name, j) = name_at(i);
            if name == "d" && j < chars.len() && chars[j] == '/' {
                if j + 2 < chars.len() && chars[j + 1] == 'd' && is_name_start(chars[j + 2]) {
                    let (target, k) = name_at(j + 2);
                    out.push((Tok::Deriv(target), col));
                    i = k;
                    continue;
                }
                return Err(parse_error(
                    line,
                    j + 2,
                    "malformed derivative",
                    &["`d/d<name>`"],
                ));
            }
            if name == "d" && j < chars.len() && chars[j] == '(' {
                let k = j + 1;
                if k < chars.len() && is_name_start(chars[k]) {
                    let (target, m) = name_at(k);
                    if m < chars.len() && chars[m] == ')' {
                        out.push((Tok::Form(target), col));
                        i = m + 1;
                        continue;
                    }
                    return Err(parse_error(line, m + 1, "malformed differential", &["`)`"]));
                }
                return Err(parse_error(
                    line,
                    k + 1,
                    "malformed differential",
                    &["name"],
                ));
            }
            out.push((Tok::Name(name), col));
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let mut text: String = chars[i..j].iter().collect();
            if j < chars.len() && chars[j] == '/' {
                let k = j + 1;
                let mut m = k;
                while m < chars.len() && chars[m].is_ascii_digit() {
                    m += 1;
                }
                if m == k {
                    return Err(parse_error(line, k + 1, "incomplete fraction", &["digits"]));
                }
                let den: String = chars[k..m].iter().collect();
                if den.bytes().all(|b| b == b'0') {
                    return Err(parse_error(line, k + 1, "zero denominator", &[]));
                }
                text = format!("{text}/{den}");
                j = m;
            }
            let r: Rational = text
                .parse()
                .map_err(|_| parse_error(line, col, "bad number", &[]))?;
            out.push((Tok::Num(r), col));
            i = j;
            continue;
        }
        let t = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '=' => Tok::Eq,
            ',' => Tok::Comma,
            _ => {
                return Err(parse_error(
                    line,
                    col,
                    format!("unexpected character {c:?}"),
                    &["name", "number", "operator"],
                ))
            }
        };
        out.push((t, col));
        i += 1;
    }
    Ok(out)
}

// --------------------------------------------------------------- parser

struct Cursor<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    end_col: usize,
}

const OPERAND: [&str; 6] = ["number", "name", "`d/d<name>`", "`d(<name>)`", "`(`", "`-`"];

impl Cursor<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn found(&self) -> String {
        self.peek()
            .map(|t| t.describe())
            .unwrap_or_else(|| "end of line".into())
    }

    fn fail(&self, message: &str, expected: &[&str]) -> Error {
        parse_error(
            self.line,
            self.col(),
            format!("{message}, found {}", self.found()),
            expected,
        )
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self, depth: usize) -> Result<Expr> {
        if depth > MAX_DEPTH {
            return Err(self.fail("expression nested too deeply", &[]));
        }
        let mut terms = vec![(false, self.term(depth)?)];
        loop {
            let neg = match self.peek() {
                Some(Tok::Plus) => false,
                Some(Tok::Minus) => true,
                _ => break,
            };
            self.pos += 1;
            terms.push((neg, self.term(depth)?));
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term").1
        } else {
            Expr::Sum(terms)
        })
    }

    fn term(&mut self, depth: usize) -> Result<Expr> {
        let mut fs = vec![self.unary(depth)?];
        while self.eat(&Tok::Star) {
            fs.push(self.unary(depth)?);
        }
        Ok(if fs.len() == 1 {
            fs.pop().expect("one factor")
        } else {
            Expr::Product(fs)
        })
    }

    fn unary(&mut self, depth: usize) -> Result<Expr> {
        if depth > MAX_DEPTH {
            return Err(self.fail("expression nested too deeply", &[]));
        }
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary(depth + 1)?)));
        }
        let base = self.atom(depth)?;
        if self.eat(&Tok::Caret) {
            let k = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32> {
        let paren = self.eat(&Tok::LParen);
        let neg = self.eat(&Tok::Minus);
        let col = self.col();
        let k = match self.peek() {
            Some(Tok::Num(r)) => {
                let v = r.to_i64().ok_or_else(|| {
                    parse_error(self.line, col, "exponent must be an integer", &["integer"])
                })?;
                self.pos += 1;
                v
            }
            _ => return Err(self.fail("expected an exponent", &["integer", "`-`"])),
        };
        if k > MAX_POWER as i64 {
            return Err(parse_error(
                self.line,
                col,
                format!("exponent exceeds {MAX_POWER}"),
                &[],
            ));
        }
        if paren && !self.eat(&Tok::RParen) {
            return Err(self.fail("unclosed exponent", &["`)`"]));
        }
        let k = k as i32;
        Ok(if neg { -k } else { k })
    }

    fn atom(&mut self, depth: usize) -> Result<Expr> {
        let t = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(self.fail("expected an operand", &OPERAND)),
        };
        let e = match t {
            Tok::Num(r) => Expr::Num(r),
            Tok::Name(n) => Expr::Var(n),
            Tok::Deriv(n) => Expr::Deriv(n),
            Tok::Form(n) => Expr::Form(n),
            Tok::LParen => {
                self.pos += 1;
                let inner = self.expr(depth + 1)?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.fail("unclosed parenthesis", &["`)`", "`+`", "`-`", "`*`"]));
                }
                return Ok(inner);
            }
            _ => return Err(self.fail("expected an operand", &OPERAND)),
        };
        self.pos += 1;
        Ok(e)
    }
}

/// Parse a single expression.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = lex(text, 1)?;
    parse_tokens(&toks, 1, text.chars().count() + 1)
}

fn parse_tokens(toks: &[(Tok, usize)], line: usize, end_col: usize) -> Result<Expr> {
    let mut c = Cursor {
        toks,
        pos: 0,
        line,
        end_col,
    };
    let e = c.expr(0)?;
    if c.pos < toks.len() {
        return Err(c.fail(
            "unexpected token",
            &["`+`", "`-`", "`*`", "`^`", "end of line"],
        ));
    }
    Ok(e)
}

fn parse_header(
    toks: &[(Tok, usize)],
    line: usize,
    end_col: usize,
) -> Result<(String, Vec<usize>)> {
    let mut c = Cursor {
        toks,
        pos: 1,
        line,
        end_col,
    };
    let kind = match c.peek() {
        Some(Tok::Name(n)) => n.clone(),
        _ => return Err(c.fail("expected a section name", &KINDS)),
    };
    c.pos += 1;
    let paren = c.eat(&Tok::LParen);
    let mut args = Vec::new();
    loop {
        match c.peek() {
            Some(Tok::Num(r)) => {
                let v = r
                    .to_i64()
                    .filter(|v| *v >= 0 && *v < 1 << 20)
                    .ok_or_else(|| c.fail("section arguments are chart indices", &["integer"]))?;
                args.push(v as usize);
                c.pos += 1;
                c.eat(&Tok::Comma);
            }
            _ => break,
        }
    }
    if paren && !c.eat(&Tok::RParen) {
        return Err(c.fail("unclosed argument list", &["integer", "`)`"]));
    }
    if !c.eat(&Tok::RBracket) {
        return Err(c.fail("unterminated section header", &["integer", "`]`"]));
    }
    if c.pos < toks.len() {
        return Err(c.fail("trailing text after section header", &["end of line"]));
    }
    Ok((kind, args))
}

/// Parse raw bytes; invalid UTF-8 is reported at its position.
pub fn parse_bytes(bytes: &[u8]) -> Result<SmaDocument> {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse_document(s),
        Err(e) => {
            let good = &bytes[..e.valid_up_to()];
            let line = 1 + good.iter().filter(|b| **b == b'\n').count();
            let start = good
                .iter()
                .rposition(|b| *b == b'\n')
                .map(|p| p + 1)
                .unwrap_or(0);
            let column = 1 + String::from_utf8_lossy(&good[start..]).chars().count();
            Err(parse_error(line, column, "invalid UTF-8", &[]))
        }
    }
}

/// Syntactic parse. Never panics; every input gives a document or an error
/// with a position.
pub fn parse_document(text: &str) -> Result<SmaDocument> {
    let mut doc = SmaDocument::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if body.trim().is_empty() {
            continue;
        }
        let end_col = body.chars().count() + 1;
        let in_meta = doc.blocks.last().map(|b| b.kind == "meta").unwrap_or(false);
        if in_meta && !body.trim_start().starts_with('[') {
            let block = doc.blocks.last_mut().expect("meta block");
            let (key, value) = match body.split_once('=') {
                Some((k, v)) => (k, Some(v.trim())),
                None => (body, None),
            };
            let toks = lex(key, line)?;
            let mut words = Vec::new();
            for (t, col) in toks {
                match t {
                    Tok::Name(n) => words.push(n),
                    other => {
                        return Err(parse_error(
                            line,
                            col,
                            format!("unexpected {}", other.describe()),
                            &["name"],
                        ))
                    }
                }
            }
            if words.is_empty() {
                return Err(parse_error(line, 1, "expected a key", &["name"]));
            }
            let value = match value {
                Some("") => {
                    return Err(parse_error(line, end_col, "missing value", &["text"]));
                }
                Some(v) => Some(EntryValue::Text(v.to_string())),
                None => None,
            };
            block.entries.push(Entry { line, words, value });
            continue;
        }
        let toks = lex(body, line)?;
        if toks.first().map(|t| &t.0) == Some(&Tok::LBracket) {
            let (kind, args) = parse_header(&toks, line, end_col)?;
            doc.blocks.push(Block {
                line,
                kind,
                args,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(block) = doc.blocks.last_mut() else {
            return Err(parse_error(
                line,
                toks[0].1,
                "expected a section header",
                &["`[`"],
            ));
        };
        let mut words = Vec::new();
        let mut pos = 0;
        while pos < toks.len() {
            match &toks[pos].0 {
                Tok::Name(n) => words.push(n.clone()),
                Tok::Num(r) => match r.to_i64() {
                    Some(v) if v >= 0 => words.push(v.to_string()),
                    _ => {
                        return Err(parse_error(
                            line,
                            toks[pos].1,
                            "keys use names and indices",
                            &["name", "integer"],
                        ))
                    }
                },
                _ => break,
            }
            pos += 1;
        }
        if words.is_empty() {
            return Err(parse_error(line, toks[0].1, "expected a key", &["name"]));
        }
        let value = if pos == toks.len() {
            None
        } else if toks[pos].0 == Tok::Eq {
            Some(EntryValue::Expr(parse_tokens(
                &toks[pos + 1..],
                line,
                end_col,
            )?))
        } else {
            return Err(parse_error(
                line,
                toks[pos].1,
                format!("unexpected {}", toks[pos].0.describe()),
                &["name", "`=`", "end of line"],
            ));
        };
        block.entries.push(Entry { line, words, value });
    }
    Ok(doc)
}

// ------------------------------------------------------------ evaluation

#[derive(Clone, Debug)]
enum Value {
    Fun(SuperElement),
    Field(VectorField),
    /// Components along `d(x_μ)` of the even coordinates.
    Form(Vec<SuperElement>),
}

struct Evaluator<'a> {
    ring: &'a Arc<ChartSignature>,
    block: &'a Block,
    line: usize,
}

impl Evaluator<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        self.block.semantic(self.line, message)
    }

    fn wrap<T>(&self, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            e @ Error::Semantic { .. } => e,
            e => self.err(e.to_string()),
        })
    }

    fn coord(&self, name: &str) -> Result<usize> {
        self.ring
            .coord_index(name)
            .ok_or_else(|| self.err(format!("undeclared variable `{name}`")))
    }

    fn eval(&self, e: &Expr) -> Result<Value> {
        Ok(match e {
            Expr::Num(r) => Value::Fun(SuperElement::constant(self.ring, r.clone())),
            Expr::Var(n) => Value::Fun(SuperElement::coordinate(self.ring, self.coord(n)?)),
            Expr::Deriv(n) => Value::Field(VectorField::partial(self.ring, self.coord(n)?)),
            Expr::Form(n) => {
                let k = self.coord(n)?;
                if k >= self.ring.p() {
                    return Err(self.err(format!("`d({n})` needs an even coordinate")));
                }
                let mut w = vec![SuperElement::zero(self.ring); self.ring.p()];
                w[k] = SuperElement::one(self.ring);
                Value::Form(w)
            }
            Expr::Neg(x) => self.neg(self.eval(x)?),
            Expr::Sum(terms) => {
                let mut acc: Option<Value> = None;
                for (neg, t) in terms {
                    let mut v = self.eval(t)?;
                    if *neg {
                        v = self.neg(v);
                    }
                    acc = Some(match acc {
                        None => v,
                        Some(a) => self.add(a, v)?,
                    });
                }
                acc.ok_or_else(|| self.err("empty sum"))?
            }
            Expr::Product(fs) => {
                let mut acc: Option<Value> = None;
                for x in fs {
                    let v = self.eval(x)?;
                    acc = Some(match acc {
                        None => v,
                        Some(a) => self.mul(a, v)?,
                    });
                }
                acc.ok_or_else(|| self.err("empty product"))?
            }
            Expr::Pow(b, k) => match self.eval(b)? {
                Value::Fun(f) => Value::Fun(self.wrap(f.pow(*k))?),
                _ => return Err(self.err("only functions can be raised to a power")),
            },
        })
    }

    fn neg(&self, v: Value) -> Value {
        match v {
            Value::Fun(f) => Value::Fun(f.neg()),
            Value::Field(x) => Value::Field(x.neg()),
            Value::Form(w) => Value::Form(w.iter().map(|f| f.neg()).collect()),
        }
    }

    fn add(&self, a: Value, b: Value) -> Result<Value> {
        Ok(match (a, b) {
            (Value::Fun(f), Value::Fun(g)) => Value::Fun(self.wrap(f.checked_add(&g))?),
            (Value::Field(u), Value::Field(v)) => Value::Field(self.wrap(u.checked_add(&v))?),
            (Value::Form(u), Value::Form(v)) => Value::Form(
                u.iter()
                    .zip(&v)
                    .map(|(f, g)| self.wrap(f.checked_add(g)))
                    .collect::<Result<_>>()?,
            ),
            (Value::Fun(f), other) | (other, Value::Fun(f)) if f.is_zero() => other,
            _ => {
                return Err(self.err("cannot add a function, a vector field and a 1-form together"))
            }
        })
    }

    fn mul(&self, a: Value, b: Value) -> Result<Value> {
        Ok(match (a, b) {
            (Value::Fun(f), Value::Fun(g)) => Value::Fun(self.wrap(f.super_mul(&g))?),
            (Value::Fun(f), Value::Field(v)) => Value::Field(self.wrap(v.mul_function(&f))?),
            (Value::Fun(f), Value::Form(w)) => Value::Form(
                w.iter()
                    .map(|g| self.wrap(f.super_mul(g)))
                    .collect::<Result<_>>()?,
            ),
            (Value::Field(v), Value::Fun(f)) if f.is_even() => {
                Value::Field(self.wrap(v.mul_function(&f))?)
            }
            (Value::Form(w), Value::Fun(f)) if f.is_even() => Value::Form(
                w.iter()
                    .map(|g| self.wrap(g.super_mul(&f)))
                    .collect::<Result<_>>()?,
            ),
            (Value::Field(_), Value::Fun(_)) | (Value::Form(_), Value::Fun(_)) => {
                return Err(self.err("odd factors must precede `d/d` and `d(..)` tokens"))
            }
            _ => return Err(self.err("cannot multiply two vector fields or forms")),
        })
    }

    fn function(&self, e: &Expr) -> Result<SuperElement> {
        match self.eval(e)? {
            Value::Fun(f) => Ok(f),
            _ => Err(self.err("expected a function")),
        }
    }

    fn field(&self, e: &Expr) -> Result<VectorField> {
        match self.eval(e)? {
            Value::Field(v) => Ok(v),
            Value::Fun(f) if f.is_zero() => Ok(VectorField::zero(self.ring)),
            _ => Err(self.err("expected a vector field")),
        }
    }

    fn form(&self, e: &Expr) -> Result<Vec<SuperElement>> {
        match self.eval(e)? {
            Value::Form(w) => Ok(w),
            Value::Fun(f) if f.is_zero() => Ok(vec![SuperElement::zero(self.ring); self.ring.p()]),
            _ => Err(self.err("expected a 1-form")),
        }
    }
}

fn expr_of<'a>(block: &Block, e: &'a Entry) -> Result<&'a Expr> {
    match &e.value {
        Some(EntryValue::Expr(x)) => Ok(x),
        _ => Err(block.semantic(e.line, format!("`{}` needs `= <expr>`", e.words.join(" ")))),
    }
}

fn invertible_mask(block: &Block, e: &Entry, sig: &ChartSignature) -> Result<u64> {
    if e.value.is_some() {
        return Err(block.semantic(e.line, "`invertible` takes a list of names"));
    }
    let mut mask = 0u64;
    for n in &e.words[1..] {
        match sig.coord_index(n) {
            Some(k) if k < sig.p() => mask |= 1 << k,
            Some(_) => {
                return Err(
                    block.semantic(e.line, format!("odd coordinate `{n}` cannot be invertible"))
                )
            }
            None => return Err(block.semantic(e.line, format!("undeclared variable `{n}`"))),
        }
    }
    Ok(mask)
}

fn arity(block: &Block, n: usize) -> Result<()> {
    if block.args.len() != n {
        return Err(block.semantic(
            block.line,
            format!(
                "[{}] takes {n} index argument(s), got {}",
                block.kind,
                block.args.len()
            ),
        ));
    }
    Ok(())
}

fn check_kinds(doc: &SmaDocument) -> Result<()> {
    for b in &doc.blocks {
        if !KINDS.contains(&b.kind.as_str()) {
            return Err(b.semantic(b.line, format!("unknown section `{}`", b.kind)));
        }
    }
    Ok(())
}

/// The atlas described by the `[meta]`, `[chart]` and `[overlap]` blocks.
pub fn atlas_from_document(doc: &SmaDocument) -> Result<Atlas> {
    check_kinds(doc)?;
    let mut name = "atlas".to_string();
    for b in doc.blocks_of("meta") {
        for e in &b.entries {
            match (e.words.as_slice(), &e.value) {
                ([k], Some(EntryValue::Text(t))) if k == "name" => name = t.clone(),
                _ => {
                    return Err(
                        b.semantic(e.line, format!("unknown meta key `{}`", e.words.join(" ")))
                    )
                }
            }
        }
    }
    let mut chart_blocks: BTreeMap<usize, &Block> = BTreeMap::new();
    for b in doc.blocks_of("chart") {
        arity(b, 1)?;
        if chart_blocks.insert(b.args[0], b).is_some() {
            return Err(b.semantic(b.line, format!("chart {} declared twice", b.args[0])));
        }
    }
    if chart_blocks.is_empty() {
        return Err(Error::Semantic {
            line: 0,
            section: "document".into(),
            message: "no charts".into(),
        });
    }
    let mut charts = Vec::new();
    for (pos, (&i, b)) in chart_blocks.iter().enumerate() {
        if i != pos {
            return Err(b.semantic(b.line, format!("chart {pos} is missing")));
        }
        let (mut even, mut odd, mut inv) = (Vec::new(), Vec::new(), Vec::new());
        for e in &b.entries {
            let dest = match e.words[0].as_str() {
                "even" => &mut even,
                "odd" => &mut odd,
                "invertible" => &mut inv,
                w => return Err(b.semantic(e.line, format!("unknown chart key `{w}`"))),
            };
            if e.value.is_some() {
                return Err(b.semantic(e.line, format!("`{}` takes a list of names", e.words[0])));
            }
            dest.extend(e.words[1..].iter().cloned());
        }
        let inv_refs: Vec<&str> = inv.iter().map(|s| s.as_str()).collect();
        for n in &inv {
            if !even.contains(n) {
                return Err(b.semantic(
                    b.line,
                    format!("invertible `{n}` is not an even coordinate"),
                ));
            }
        }
        let sig = ChartSignature::from_names(i, even, odd, &inv_refs)
            .map_err(|e| b.semantic(b.line, e.to_string()))?;
        charts.push(sig);
    }
    let mut transitions = Vec::new();
    let mut seen = BTreeSet::new();
    for b in doc.blocks_of("overlap") {
        arity(b, 2)?;
        let (i, j) = (b.args[0], b.args[1]);
        if i >= charts.len() || j >= charts.len() || i == j {
            return Err(b.semantic(b.line, format!("bad overlap ({i},{j})")));
        }
        if !seen.insert((i, j)) {
            return Err(b.semantic(b.line, format!("overlap ({i},{j}) given twice")));
        }
        let (src, tgt) = (&charts[i], &charts[j]);
        let mut ring = src.clone();
        for e in b.entries.iter().filter(|e| e.words[0] == "invertible") {
            ring = ring.extended(invertible_mask(b, e, src)?);
        }
        let mut images: Vec<Option<SuperElement>> = vec![None; tgt.dim()];
        for e in b.entries.iter().filter(|e| e.words[0] != "invertible") {
            if e.words.len() != 1 {
                return Err(b.semantic(
                    e.line,
                    format!("unknown overlap key `{}`", e.words.join(" ")),
                ));
            }
            let target = &e.words[0];
            let k = tgt.coord_index(target).ok_or_else(|| {
                b.semantic(
                    e.line,
                    format!("`{target}` is not a coordinate of chart {j}"),
                )
            })?;
            let ev = Evaluator {
                ring: &ring,
                block: b,
                line: e.line,
            };
            let f = ev.function(expr_of(b, e)?)?;
            let want = tgt.coord_parity(k);
            if !f.is_zero() && f.parity() != Some(want) {
                let got = match f.parity() {
                    Some(p) => format!("{p:?}").to_lowercase(),
                    None => "inhomogeneous".into(),
                };
                return Err(b.semantic(
                    e.line,
                    format!(
                        "parity mismatch: `{target}` is {} but its image is {got}",
                        format!("{want:?}").to_lowercase()
                    ),
                ));
            }
            if images[k].replace(f).is_some() {
                return Err(b.semantic(e.line, format!("`{target}` assigned twice")));
            }
        }
        let mut full = Vec::new();
        for (k, im) in images.into_iter().enumerate() {
            match im {
                Some(f) => full.push(f),
                None => {
                    return Err(b.semantic(b.line, format!("no image for `{}`", tgt.coord_name(k))));
                }
            }
        }
        let t =
            TransitionMap::new(&ring, tgt, full).map_err(|e| b.semantic(b.line, e.to_string()))?;
        transitions.push(t);
    }
    Atlas::new(name, charts, transitions).map_err(|e| Error::Semantic {
        line: 0,
        section: "document".into(),
        message: e.to_string(),
    })
}

/// Parse text straight to an atlas.
pub fn parse_atlas(text: &str) -> Result<Atlas> {
    atlas_from_document(&parse_document(text)?)
}

/// Christoffel symbols from `[connection i]` blocks. Charts without a block
/// get the flat connection.
pub fn connections_from_document(
    doc: &SmaDocument,
    atlas: &Atlas,
) -> Result<BTreeMap<usize, ChristoffelData>> {
    check_kinds(doc)?;
    let mut out = BTreeMap::new();
    for b in doc.blocks_of("connection") {
        arity(b, 1)?;
        let i = b.args[0];
        if i >= atlas.charts().len() {
            return Err(b.semantic(b.line, format!("no chart {i}")));
        }
        let sig = atlas.chart(i);
        let mut ring = sig.clone();
        for e in b.entries.iter().filter(|e| e.words[0] == "invertible") {
            ring = ring.extended(invertible_mask(b, e, sig)?);
        }
        let mut gamma = Tensor21::zero(&ring);
        let mut set = BTreeSet::new();
        for e in b.entries.iter().filter(|e| e.words[0] != "invertible") {
            if e.words.len() != 4 || e.words[0] != "gamma" {
                return Err(b.semantic(e.line, "expected `gamma A B C = <expr>`"));
            }
            let idx: Vec<usize> = e.words[1..]
                .iter()
                .map(|n| {
                    ring.coord_index(n)
                        .ok_or_else(|| b.semantic(e.line, format!("undeclared variable `{n}`")))
                })
                .collect::<Result<_>>()?;
            if !set.insert(idx.clone()) {
                return Err(b.semantic(e.line, "entry given twice"));
            }
            let ev = Evaluator {
                ring: &ring,
                block: b,
                line: e.line,
            };
            let f = ev.function(expr_of(b, e)?)?;
            gamma
                .set(idx[0], idx[1], idx[2], f)
                .map_err(|err| b.semantic(e.line, err.to_string()))?;
        }
        let c = ChristoffelData::new(gamma).map_err(|err| b.semantic(b.line, err.to_string()))?;
        if out.insert(i, c).is_some() {
            return Err(b.semantic(b.line, format!("connection on chart {i} given twice")));
        }
    }
    for (i, s) in atlas.charts().iter().enumerate() {
        out.entry(i).or_insert_with(|| ChristoffelData::flat(s));
    }
    Ok(out)
}

/// `(i, j, line, expr)` for every cocycle-style entry of the given kind.
fn overlap_entries<'a>(
    doc: &'a SmaDocument,
    kind: &'a str,
) -> Result<Vec<(&'a Block, usize, usize, usize, &'a Expr)>> {
    check_kinds(doc)?;
    let mut out = Vec::new();
    for b in doc.blocks_of(kind) {
        if b.args.len() != 0 && b.args.len() != 2 {
            return Err(b.semantic(b.line, format!("[{kind}] takes 0 or 2 index arguments")));
        }
        for e in &b.entries {
            if e.words[0] != "entry" {
                return Err(b.semantic(e.line, format!("unknown key `{}`", e.words[0])));
            }
            let (i, j) = match (b.args.as_slice(), &e.words[1..]) {
                ([i, j], []) => (*i, *j),
                ([], [i, j]) => {
                    let parse = |s: &String| {
                        s.parse::<usize>()
                            .map_err(|_| b.semantic(e.line, format!("`{s}` is not a chart index")))
                    };
                    (parse(i)?, parse(j)?)
                }
                _ => {
                    return Err(
                        b.semantic(e.line, "expected `entry = <expr>` or `entry i j = <expr>`")
                    )
                }
            };
            out.push((b, e.line, i, j, expr_of(b, e)?));
        }
    }
    Ok(out)
}

/// Vector-field cochain from `[cocycle]` blocks, in the overlap rings.
pub fn cocycle_from_document(
    doc: &SmaDocument,
    atlas: &Atlas,
) -> Result<BTreeMap<(usize, usize), VectorField>> {
    let mut out = BTreeMap::new();
    for (b, line, i, j, x) in overlap_entries(doc, "cocycle")? {
        let t = atlas
            .transition(i, j)
            .map_err(|e| b.semantic(line, e.to_string()))?;
        let ev = Evaluator {
            ring: t.source_sig(),
            block: b,
            line,
        };
        if out.insert((i, j), ev.field(x)?).is_some() {
            return Err(b.semantic(line, format!("entry ({i},{j}) given twice")));
        }
    }
    Ok(out)
}

/// 1-form cochain from `[omega]` blocks on a reduced atlas. Missing overlaps
/// are zero.
pub fn omega_from_document(doc: &SmaDocument, reduced: &Atlas) -> Result<OmegaCocycle> {
    if doc.blocks_of("omega").next().is_none() {
        return Err(Error::Semantic {
            line: 0,
            section: "document".into(),
            message: "no [omega] section".into(),
        });
    }
    let mut w = OmegaCocycle::zero(reduced)?;
    let mut seen = BTreeSet::new();
    for (b, line, i, j, x) in overlap_entries(doc, "omega")? {
        if i >= j || !w.entries.contains_key(&(i, j)) {
            return Err(b.semantic(line, format!("({i},{j}) is not a declared overlap")));
        }
        if !seen.insert((i, j)) {
            return Err(b.semantic(line, format!("entry ({i},{j}) given twice")));
        }
        let ring = reduced.transition(i, j)?.source_sig().clone();
        let ev = Evaluator {
            ring: &ring,
            block: b,
            line,
        };
        let comps = ev.form(x)?;
        if comps.iter().any(|f| f.terms().keys().any(|m| *m != 0)) {
            return Err(b.semantic(line, "1-form coefficients must be even functions"));
        }
        w.entries
            .insert((i, j), comps.iter().map(|f| f.body()).collect());
    }
    Ok(w)
}

// ------------------------------------------------------------- rendering

struct Items(Vec<(Rational, String)>);

impl fmt::Display for Items {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sum(f, &self.0)
    }
}

fn names_of(sig: &ChartSignature, mask: u64) -> Vec<&str> {
    (0..sig.p())
        .filter(|k| mask & (1 << k) != 0)
        .map(|k| sig.coord_name(k))
        .collect()
}

/// Canonical text of an atlas.
pub fn render_atlas(a: &Atlas) -> String {
    let mut s = format!("[meta]\nname = {}\n", a.name());
    for c in a.charts() {
        s.push_str(&format!("\n[chart {}]\n", c.chart()));
        if c.p() > 0 {
            s.push_str(&format!("even {}\n", c.even_names().join(" ")));
        }
        if c.q() > 0 {
            s.push_str(&format!("odd {}\n", c.odd_names().join(" ")));
        }
        let inv = names_of(c, c.invertible_mask());
        if !inv.is_empty() {
            s.push_str(&format!("invertible {}\n", inv.join(" ")));
        }
    }
    let mut maps: Vec<&TransitionMap> = a.declared().collect();
    maps.extend(a.explicit_inverses());
    for t in maps {
        s.push_str(&format!("\n[overlap {} {}]\n", t.source(), t.target()));
        let ring = t.source_sig();
        let chart = a.chart(t.source());
        let extra = names_of(ring, ring.invertible_mask() & !chart.invertible_mask());
        if !extra.is_empty() {
            s.push_str(&format!("invertible {}\n", extra.join(" ")));
        }
        for (k, im) in t.images().iter().enumerate() {
            s.push_str(&format!("{} = {im}\n", t.target_sig().coord_name(k)));
        }
    }
    s
}

/// `[connection i]` blocks listing the nonzero Christoffel symbols.
pub fn render_connections(a: &Atlas, conns: &BTreeMap<usize, ChristoffelData>) -> String {
    let mut s = String::new();
    for (i, c) in conns {
        if !s.is_empty() {
            s.push('\n');
        }
        s.push_str(&format!("[connection {i}]\n"));
        let ring = c.sig();
        let extra = names_of(
            ring,
            ring.invertible_mask() & !a.chart(*i).invertible_mask(),
        );
        if !extra.is_empty() {
            s.push_str(&format!("invertible {}\n", extra.join(" ")));
        }
        for (x, y, z, g) in c.gamma().entries() {
            s.push_str(&format!("gamma {x} {y} {z} = {g}\n"));
        }
    }
    s
}

/// `[cocycle i j]` blocks.
pub fn render_cocycle(entries: &BTreeMap<(usize, usize), VectorField>) -> String {
    let mut s = String::new();
    for ((i, j), v) in entries {
        if !s.is_empty() {
            s.push('\n');
        }
        s.push_str(&format!("[cocycle {i} {j}]\nentry = {v}\n"));
    }
    s
}

/// Canonical rendering of a 1-form `Σ w_μ d(x_μ)`.
pub fn render_form(sig: &Arc<ChartSignature>, w: &[SuperElement]) -> String {
    let mut items = Vec::new();
    for (k, f) in w.iter().enumerate() {
        items.extend(f.render_items(&format!("d({})", sig.coord_name(k))));
    }
    Items(items).to_string()
}

/// `[omega i j]` blocks.
pub fn render_omega(w: &OmegaCocycle) -> Result<String> {
    let mut s = String::new();
    for (&(i, j), comps) in &w.entries {
        let ring = w.reduced.transition(i, j)?.source_sig().clone();
        let fs: Vec<SuperElement> = comps
            .iter()
            .map(|f| Ok(SuperElement::from_poly(&ring, 0, f.with_ctx(ring.ctx())?)))
            .collect::<Result<_>>()?;
        if !s.is_empty() {
            s.push('\n');
        }
        s.push_str(&format!(
            "[omega {i} {j}]\nentry = {}\n",
            render_form(&ring, &fs)
        ));
    }
    Ok(s)
}
