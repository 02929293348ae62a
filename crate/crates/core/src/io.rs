//! Text formats for algebras and relations.
//!
//! An algebra file starts with `size N` and lists each operation as
//! `op NAME ARITY` followed by its `N^ARITY` table entries in row-major order,
//! whitespace separated and free to span lines. A relation file starts with
//! `rel NAME on N` and lists one `a b` pair per line. In both formats `#`
//! starts a comment that runs to the end of the line.

use std::fmt::Write as _;
use std::path::Path;

use crate::algebra::{table_len, FiniteAlgebra, Operation};
use crate::error::{Error, Result};
use crate::relation::BinaryRelation;

fn format_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format { line, msg: msg.into() }
}

/// Tokens with their 1-based line numbers, comments removed.
fn tokens(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .flat_map(|(i, line)| {
            let line = line.split('#').next().unwrap_or("");
            line.split_whitespace().map(move |t| (i + 1, t))
        })
        .collect()
}

fn number(tok: Option<(usize, &str)>, last_line: usize, what: &str) -> Result<(usize, usize)> {
    match tok {
        None => Err(format_err(last_line, format!("unexpected end of input, expected {what}"))),
        Some((line, t)) => t
            .parse()
            .map(|v| (line, v))
            .map_err(|_| format_err(line, format!("expected {what}, found '{t}'"))),
    }
}

pub fn parse_algebra(text: &str) -> Result<FiniteAlgebra> {
    let toks = tokens(text);
    let last_line = text.lines().count().max(1);
    let mut it = toks.into_iter().peekable();
    match it.next() {
        Some((_, "size")) => {}
        Some((line, t)) => return Err(format_err(line, format!("expected 'size', found '{t}'"))),
        None => return Err(format_err(1, "empty algebra file")),
    }
    let (size_line, size) = number(it.next(), last_line, "carrier size")?;
    if size == 0 {
        return Err(format_err(size_line, "carrier size must be positive"));
    }
    let mut ops = Vec::new();
    while let Some((line, t)) = it.next() {
        if t != "op" {
            return Err(format_err(line, format!("expected 'op', found '{t}'")));
        }
        let name = match it.next() {
            Some((_, n)) => n.to_string(),
            None => return Err(format_err(line, "missing operation name")),
        };
        let (_, arity) = number(it.next(), last_line, "arity")?;
        let len = table_len(size, arity).map_err(|e| format_err(line, e.to_string()))?;
        let mut table = Vec::with_capacity(len);
        for _ in 0..len {
            let (entry_line, v) = match it.peek() {
                Some(&(_, "op")) | None => {
                    return Err(format_err(
                        it.peek().map_or(last_line, |t| t.0),
                        format!("operation {name} needs {len} entries, found {}", table.len()),
                    ))
                }
                _ => number(it.next(), last_line, "table entry")?,
            };
            if v >= size {
                return Err(format_err(entry_line, format!("entry {v} is outside the carrier of size {size}")));
            }
            table.push(v);
        }
        ops.push(Operation::new(name, arity, table, size).map_err(|e| format_err(line, e.to_string()))?);
    }
    FiniteAlgebra::new(size, ops)
}

pub fn format_algebra(alg: &FiniteAlgebra) -> String {
    let mut out = format!("size {}\n", alg.size());
    for op in alg.ops() {
        let _ = writeln!(out, "op {} {}", op.name(), op.arity());
        let row = alg.size().max(1);
        for chunk in op.table().chunks(row) {
            let line: Vec<String> = chunk.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}

pub fn load_algebra(path: &Path) -> Result<FiniteAlgebra> {
    parse_algebra(&std::fs::read_to_string(path)?)
}

/// A named relation read from a relation file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedRelation {
    pub name: String,
    pub relation: BinaryRelation,
}

pub fn parse_relation(text: &str) -> Result<NamedRelation> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| format_err(1, "empty relation file"))?;
    let words: Vec<&str> = header.split_whitespace().collect();
    let (name, size) = match words.as_slice() {
        ["rel", name, "on", n] => (
            name.to_string(),
            n.parse::<usize>()
                .map_err(|_| format_err(hline, format!("expected carrier size, found '{n}'")))?,
        ),
        _ => return Err(format_err(hline, "expected 'rel NAME on N'")),
    };
    let mut rel = BinaryRelation::empty(size, size);
    for (line, l) in lines {
        let nums: Vec<&str> = l.split_whitespace().collect();
        let [a, b] = nums.as_slice() else {
            return Err(format_err(line, "expected a pair 'a b'"));
        };
        let parse = |t: &str| -> Result<usize> {
            let v: usize = t.parse().map_err(|_| format_err(line, format!("expected an element, found '{t}'")))?;
            if v >= size {
                return Err(format_err(line, format!("element {v} is outside the carrier of size {size}")));
            }
            Ok(v)
        };
        rel.insert(parse(a)?, parse(b)?);
    }
    Ok(NamedRelation { name, relation: rel })
}

pub fn format_relation(name: &str, rel: &BinaryRelation) -> String {
    let mut out = format!("rel {name} on {}\n", rel.rows());
    for (a, b) in rel.pairs() {
        let _ = writeln!(out, "{a} {b}");
    }
    out
}

pub fn load_relation(path: &Path) -> Result<NamedRelation> {
    parse_relation(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn algebra_round_trip() {
        for entry in corpus::builtin_corpus() {
            let text = format_algebra(&entry.algebra);
            let back = parse_algebra(&text).unwrap();
            assert_eq!(back.size(), entry.algebra.size());
            assert_eq!(back.ops(), entry.algebra.ops(), "{}", entry.name);
        }
    }

    #[test]
    fn parses_comments_and_constants() {
        let text = "# Z2\nsize 2\nop add 2\n0 1 # row 0\n1 0\nop zero 0\n0\n";
        let alg = parse_algebra(text).unwrap();
        assert_eq!(alg.size(), 2);
        assert_eq!(alg.apply(0, &[1, 1]), 0);
        assert_eq!(alg.apply(1, &[]), 0);
    }

    #[test]
    fn errors_report_lines() {
        let cases = [
            ("", 1),
            ("size two", 1),
            ("size 2\nop f 2\n0 1\n1", 4),
            ("size 2\nop f 1\n0 5", 3),
            ("size 2\nfoo", 2),
            ("size 2\nop f 1\n0\nop g 1\n0 0", 4),
        ];
        for (text, line) in cases {
            match parse_algebra(text) {
                Err(Error::Format { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn relation_round_trip() {
        let rel = BinaryRelation::from_pairs(4, 4, [(0, 1), (2, 3), (3, 3)]).unwrap();
        let text = format_relation("S", &rel);
        let back = parse_relation(&text).unwrap();
        assert_eq!(back.name, "S");
        assert_eq!(back.relation, rel);
        assert!(matches!(parse_relation("rel S on 2\n0 2"), Err(Error::Format { line: 2, .. })));
        assert!(matches!(parse_relation("relation S"), Err(Error::Format { line: 1, .. })));
    }
}
