//! A small language for relation expressions and inclusion statements.
//!
//! ```text
//! stmt := expr (("<=" | "=") expr)?
//! expr := meet
//! meet := comp ("&" comp)*
//! comp := atom (";" atom)*
//! atom := NAME | "delta" | "nabla" | "~" atom
//!       | "alt" "(" expr "," expr "," INT ")" | "(" expr ")"
//! ```
//!
//! `~` binds tightest, then `;`, then `&`. The characters `∘`, `∧` and `≤`
//! are accepted for `;`, `&` and `<=`, and `Δ`, `∇` for `delta`, `nabla`.
//! `alt(R, S, n)` is the alternating composite `R ; S ; R ; ...` with `n`
//! factors, and `alt(R, S, 0)` is `delta`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::relation::{alternating_composite, BinaryRelation};

/// Byte range in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug)]
pub enum Node {
    Name(String),
    Delta,
    Nabla,
    Opposite(Box<Expr>),
    Compose(Box<Expr>, Box<Expr>),
    Meet(Box<Expr>, Box<Expr>),
    Alt(Box<Expr>, Box<Expr>, usize),
}

/// An expression node with its source span. Equality ignores spans.
#[derive(Clone, Debug)]
pub struct Expr {
    pub node: Node,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.node, &other.node) {
            (Node::Name(a), Node::Name(b)) => a == b,
            (Node::Delta, Node::Delta) | (Node::Nabla, Node::Nabla) => true,
            (Node::Opposite(a), Node::Opposite(b)) => a == b,
            (Node::Compose(a, b), Node::Compose(c, d)) | (Node::Meet(a, b), Node::Meet(c, d)) => a == c && b == d,
            (Node::Alt(a, b, n), Node::Alt(c, d, m)) => n == m && a == c && b == d,
            _ => false,
        }
    }
}

impl Eq for Expr {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Expr(Expr),
    Leq(Expr, Expr),
    Equal(Expr, Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Int(u64),
    Delta,
    Nabla,
    Alt,
    Tilde,
    Semi,
    Amp,
    Le,
    Eq,
    LParen,
    RParen,
    Comma,
    Minus,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name '{n}'"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::End => "end of input".into(),
            other => format!("'{}'", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Name(_) => "NAME",
            Tok::Int(_) => "INT",
            Tok::Delta => "delta",
            Tok::Nabla => "nabla",
            Tok::Alt => "alt",
            Tok::Tilde => "~",
            Tok::Semi => ";",
            Tok::Amp => "&",
            Tok::Le => "<=",
            Tok::Eq => "=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Minus => "-",
            Tok::End => "end of input",
        }
    }
}

fn syntax(offset: usize, msg: impl Into<String>, expected: &[&str]) -> Error {
    Error::Syntax {
        offset,
        msg: msg.into(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '~' => Some(Tok::Tilde),
            ';' | '∘' => Some(Tok::Semi),
            '&' | '∧' => Some(Tok::Amp),
            '≤' => Some(Tok::Le),
            '=' => Some(Tok::Eq),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '-' => Some(Tok::Minus),
            'Δ' => Some(Tok::Delta),
            '∇' => Some(Tok::Nabla),
            _ => None,
        };
        if let Some(tok) = single {
            chars.next();
            out.push((tok, Span { start, end: start + c.len_utf8() }));
            continue;
        }
        if c == '<' {
            chars.next();
            match chars.peek() {
                Some(&(_, '=')) => {
                    chars.next();
                    out.push((Tok::Le, Span { start, end: start + 2 }));
                    continue;
                }
                _ => return Err(syntax(start, "expected '<='", &["<="])),
            }
        }
        if c.is_ascii_digit() {
            let mut end = start;
            while let Some(&(i, d)) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                end = i + 1;
                chars.next();
            }
            let value = text[start..end]
                .parse()
                .map_err(|_| syntax(start, "integer literal too large", &["INT"]))?;
            out.push((Tok::Int(value), Span { start, end }));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = start;
            while let Some(&(i, d)) = chars.peek() {
                if !(d.is_alphanumeric() || d == '_' || d == '\'') {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            let word = &text[start..end];
            let tok = match word {
                "delta" => Tok::Delta,
                "nabla" => Tok::Nabla,
                "alt" => Tok::Alt,
                _ => Tok::Name(word.to_string()),
            };
            out.push((tok, Span { start, end }));
            continue;
        }
        return Err(syntax(start, format!("unexpected character '{c}'"), &[]));
    }
    out.push((Tok::End, Span { start: text.len(), end: text.len() }));
    Ok(out)
}

const ATOM_START: &[&str] = &["NAME", "delta", "nabla", "~", "alt", "("];

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> Error {
        syntax(self.span().start, format!("unexpected {}", self.peek().describe()), expected)
    }

    fn expect(&mut self, tok: Tok) -> Result<Span> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&[tok.symbol()]))
        }
    }

    fn statement(&mut self) -> Result<Statement> {
        let lhs = self.meet()?;
        let stmt = match self.peek() {
            Tok::Le => {
                self.bump();
                Statement::Leq(lhs, self.meet()?)
            }
            Tok::Eq => {
                self.bump();
                Statement::Equal(lhs, self.meet()?)
            }
            Tok::End => Statement::Expr(lhs),
            _ => return Err(self.unexpected(&["&", ";", "<=", "=", "end of input"])),
        };
        if *self.peek() != Tok::End {
            return Err(self.unexpected(&["&", ";", "end of input"]));
        }
        Ok(stmt)
    }

    fn meet(&mut self) -> Result<Expr> {
        let mut lhs = self.comp()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.comp()?;
            let span = Span { start: lhs.span.start, end: rhs.span.end };
            lhs = Expr { node: Node::Meet(Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn comp(&mut self) -> Result<Expr> {
        let mut lhs = self.atom()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            let rhs = self.atom()?;
            let span = Span { start: lhs.span.start, end: rhs.span.end };
            lhs = Expr { node: Node::Compose(Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Name(name) => {
                self.bump();
                Ok(Expr { node: Node::Name(name), span: start })
            }
            Tok::Delta => {
                self.bump();
                Ok(Expr { node: Node::Delta, span: start })
            }
            Tok::Nabla => {
                self.bump();
                Ok(Expr { node: Node::Nabla, span: start })
            }
            Tok::Tilde => {
                self.bump();
                let inner = self.atom()?;
                let span = Span { start: start.start, end: inner.span.end };
                Ok(Expr { node: Node::Opposite(Box::new(inner)), span })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.meet()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected(&["&", ";", ")"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Alt => {
                self.bump();
                self.expect(Tok::LParen)?;
                let r = self.meet()?;
                if *self.peek() != Tok::Comma {
                    return Err(self.unexpected(&["&", ";", ","]));
                }
                self.bump();
                let s = self.meet()?;
                if *self.peek() != Tok::Comma {
                    return Err(self.unexpected(&["&", ";", ","]));
                }
                self.bump();
                let n = match self.peek() {
                    Tok::Int(n) => *n,
                    Tok::Minus => {
                        return Err(syntax(self.span().start, "alternation length must be a non-negative integer", &["INT"]))
                    }
                    _ => return Err(self.unexpected(&["INT"])),
                };
                let n = usize::try_from(n).map_err(|_| syntax(self.span().start, "integer literal too large", &["INT"]))?;
                self.bump();
                let end = self.expect(Tok::RParen)?;
                Ok(Expr {
                    node: Node::Alt(Box::new(r), Box::new(s), n),
                    span: Span { start: start.start, end: end.end },
                })
            }
            _ => Err(self.unexpected(ATOM_START)),
        }
    }
}

/// Parses a statement: an expression, optionally compared with `<=` or `=`.
pub fn parse(text: &str) -> Result<Statement> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    p.statement()
}

/// Parses a single expression.
pub fn parse_expr(text: &str) -> Result<Expr> {
    match parse(text)? {
        Statement::Expr(e) => Ok(e),
        _ => Err(syntax(0, "expected an expression, found a statement", &[])),
    }
}

fn print_expr(e: &Expr, min_prec: u8, out: &mut String) {
    let (prec, body) = match &e.node {
        Node::Name(n) => (3, n.clone()),
        Node::Delta => (3, "delta".to_string()),
        Node::Nabla => (3, "nabla".to_string()),
        Node::Opposite(c) => {
            let mut s = "~".to_string();
            print_expr(c, 3, &mut s);
            (3, s)
        }
        Node::Alt(r, s, n) => {
            let mut b = "alt(".to_string();
            print_expr(r, 1, &mut b);
            b.push_str(", ");
            print_expr(s, 1, &mut b);
            b.push_str(&format!(", {n})"));
            (3, b)
        }
        Node::Compose(l, r) => {
            let mut b = String::new();
            print_expr(l, 2, &mut b);
            b.push_str(" ; ");
            print_expr(r, 3, &mut b);
            (2, b)
        }
        Node::Meet(l, r) => {
            let mut b = String::new();
            print_expr(l, 1, &mut b);
            b.push_str(" & ");
            print_expr(r, 2, &mut b);
            (1, b)
        }
    };
    if prec < min_prec {
        out.push('(');
        out.push_str(&body);
        out.push(')');
    } else {
        out.push_str(&body);
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        print_expr(self, 1, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Expr(e) => write!(f, "{e}"),
            Statement::Leq(l, r) => write!(f, "{l} <= {r}"),
            Statement::Equal(l, r) => write!(f, "{l} = {r}"),
        }
    }
}

/// Result of evaluating a statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Relation(BinaryRelation),
    Bool(bool),
}

/// Named relations on a common carrier.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub carrier: usize,
    pub bindings: HashMap<String, BinaryRelation>,
}

impl Env {
    pub fn new(carrier: usize) -> Self {
        Env {
            carrier,
            bindings: HashMap::new(),
        }
    }

    pub fn bind(&mut self, name: impl Into<String>, rel: BinaryRelation) -> &mut Self {
        self.bindings.insert(name.into(), rel);
        self
    }
}

fn mismatch(e: &Expr, what: &str, l: &BinaryRelation, r: &BinaryRelation) -> Error {
    Error::DimensionMismatch(format!(
        "{what} of {}x{} and {}x{} relations at bytes {}..{} ('{e}')",
        l.rows(),
        l.cols(),
        r.rows(),
        r.cols(),
        e.span.start,
        e.span.end
    ))
}

pub fn eval_expr(e: &Expr, env: &Env) -> Result<BinaryRelation> {
    match &e.node {
        Node::Name(n) => env.bindings.get(n).cloned().ok_or_else(|| Error::Unbound {
            name: n.clone(),
            offset: e.span.start,
        }),
        Node::Delta => Ok(BinaryRelation::diagonal(env.carrier)),
        Node::Nabla => Ok(BinaryRelation::full(env.carrier)),
        Node::Opposite(c) => Ok(eval_expr(c, env)?.opposite()),
        Node::Compose(l, r) => {
            let (l, r) = (eval_expr(l, env)?, eval_expr(r, env)?);
            l.compose(&r).map_err(|_| mismatch(e, "composite", &l, &r))
        }
        Node::Meet(l, r) => {
            let (l, r) = (eval_expr(l, env)?, eval_expr(r, env)?);
            l.meet(&r).map_err(|_| mismatch(e, "meet", &l, &r))
        }
        Node::Alt(l, r, n) => {
            let (l, r) = (eval_expr(l, env)?, eval_expr(r, env)?);
            if *n == 0 {
                return Ok(BinaryRelation::diagonal(env.carrier));
            }
            alternating_composite(&l, &r, *n).map_err(|_| mismatch(e, "alternating composite", &l, &r))
        }
    }
}

/// Evaluates a statement: a relation for a bare expression, a truth value
/// for an inclusion or equation.
pub fn evaluate(stmt: &Statement, env: &Env) -> Result<Value> {
    match stmt {
        Statement::Expr(e) => Ok(Value::Relation(eval_expr(e, env)?)),
        Statement::Leq(l, r) => {
            let (a, b) = (eval_expr(l, env)?, eval_expr(r, env)?);
            Ok(Value::Bool(a.leq(&b).map_err(|_| mismatch(l, "inclusion", &a, &b))?))
        }
        Statement::Equal(l, r) => {
            let (a, b) = (eval_expr(l, env)?, eval_expr(r, env)?);
            if a.rows() != b.rows() || a.cols() != b.cols() {
                return Err(mismatch(l, "equation", &a, &b));
            }
            Ok(Value::Bool(a == b))
        }
    }
}

/// Parses and evaluates in one step.
pub fn eval_str(text: &str, env: &Env) -> Result<Value> {
    evaluate(&parse(text)?, env)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn name(n: &str) -> Expr {
        Expr { node: Node::Name(n.into()), span: Span { start: 0, end: 0 } }
    }

    fn bin(f: fn(Box<Expr>, Box<Expr>) -> Node, a: Expr, b: Expr) -> Expr {
        Expr { node: f(Box::new(a), Box::new(b)), span: Span { start: 0, end: 0 } }
    }

    #[test]
    fn parses_jonsson_inclusion() {
        let s = parse("R & (S ; T) <= alt(R & S, R & T, 2)").unwrap();
        let lhs = bin(Node::Meet, name("R"), bin(Node::Compose, name("S"), name("T")));
        let rhs = Expr {
            node: Node::Alt(
                Box::new(bin(Node::Meet, name("R"), name("S"))),
                Box::new(bin(Node::Meet, name("R"), name("T"))),
                2,
            ),
            span: Span { start: 0, end: 0 },
        };
        assert_eq!(s, Statement::Leq(lhs, rhs));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("~ R ; S").unwrap();
        let op = Expr { node: Node::Opposite(Box::new(name("R"))), span: Span { start: 0, end: 0 } };
        assert_eq!(e, bin(Node::Compose, op, name("S")));
        let e = parse_expr("A & B ; C").unwrap();
        assert_eq!(e, bin(Node::Meet, name("A"), bin(Node::Compose, name("B"), name("C"))));
        assert_eq!(parse("R ∧ S ∘ T ≤ T").unwrap(), parse("R & S ; T <= T").unwrap());
    }

    #[test]
    fn negative_alt_length_is_rejected() {
        match parse("alt(R, S, -1)") {
            Err(Error::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 10);
                assert_eq!(expected, vec!["INT".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let Err(Error::Syntax { offset, expected, .. }) = parse("R & ") else { panic!() };
        assert_eq!(offset, 4);
        assert!(expected.contains(&"NAME".to_string()));
        assert!(matches!(parse("R $ S"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("(R ; S"), Err(Error::Syntax { offset: 6, .. })));
        assert!(matches!(parse("R < S"), Err(Error::Syntax { offset: 2, .. })));
    }

    #[test]
    fn spans_cover_source() {
        let e = parse_expr("  R ; ~S").unwrap();
        assert_eq!(e.span, Span { start: 2, end: 8 });
    }

    #[test]
    fn printer_round_trips() {
        for text in [
            "R & (S ; T) <= alt(R & S, R & T, 2)",
            "~(R ; S) = ~S ; ~R",
            "(A & B) ; C",
            "A ; (B ; C)",
            "A & (B & C)",
            "~~R",
            "alt((R ; S) & T, delta, 0) = nabla",
            "R & S <= T",
        ] {
            let ast = parse(text).unwrap();
            let printed = ast.to_string();
            assert_eq!(parse(&printed).unwrap(), ast, "{text} -> {printed}");
        }
    }

    #[test]
    fn evaluation_examples() {
        let mut env = Env::new(3);
        let r = BinaryRelation::from_pairs(3, 3, [(0, 1), (1, 2)]).unwrap();
        env.bind("R", r.clone());
        assert_eq!(eval_str("delta ; R = R", &env).unwrap(), Value::Bool(true));
        assert_eq!(eval_str("alt(R, R, 0) = delta", &env).unwrap(), Value::Bool(true));
        assert_eq!(eval_str("R ; R", &env).unwrap(), Value::Relation(r.compose(&r).unwrap()));
        assert_eq!(eval_str("R <= nabla", &env).unwrap(), Value::Bool(true));
        assert!(matches!(eval_str("R ; Q", &env), Err(Error::Unbound { offset: 4, .. })));
        env.bind("W", BinaryRelation::empty(3, 2));
        assert!(matches!(eval_str("W ; W", &env), Err(Error::DimensionMismatch(_))));
    }
}
