//! Text form of a derivation.
//!
//! ```text
//! log      := header "\n" (record "\n")*
//! header   := "order" (" " name)*
//! record   := rule " | obdd " diagram
//! rule     := "a " clause | "c " line " " line | "p " line " " name | "s " line
//! diagram  := "F" | "T" | node (" " node)*
//! node     := level ":" ref ":" ref        (lo child, then hi child)
//! ref      := "F" | "T" | index            (index of an earlier node of this diagram)
//! ```
//!
//! Lines and clauses are 0-based. Levels index the header order. The root of
//! a diagram is its last node. Blank lines are skipped; anything else that
//! does not match the grammar, including extra tokens, is an error.

use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use thiserror::Error;

use super::{Derivation, Line, Rule};
use crate::obdd::{SerNode, Serialized};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("proof log line {line}: {msg}")]
pub struct LogError {
    pub line: usize,
    pub msg: String,
}

fn write_ref(out: &mut String, r: u32) {
    match r {
        0 => out.push('F'),
        1 => out.push('T'),
        k => write!(out, "{}", k - 2).unwrap(),
    }
}

fn write_diagram(out: &mut String, s: &Serialized) {
    if s.nodes.is_empty() {
        write_ref(out, s.root);
        return;
    }
    assert_eq!(s.root as usize, s.nodes.len() + 1, "root must be the last node");
    for (k, n) in s.nodes.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        write!(out, "{}:", n.level).unwrap();
        write_ref(out, n.lo);
        out.push(':');
        write_ref(out, n.hi);
    }
}

pub fn write_log(d: &Derivation) -> String {
    let mut out = String::from("order");
    for name in &d.order {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for line in &d.lines {
        match line.rule {
            Rule::Axiom(c) => write!(out, "a {c}"),
            Rule::Conjunction(a, b) => write!(out, "c {a} {b}"),
            Rule::Projection(a, l) => write!(out, "p {a} {}", d.order[l as usize]),
            Rule::Subsumption(a) => write!(out, "s {a}"),
        }
        .unwrap();
        out.push_str(" | obdd ");
        write_diagram(&mut out, &line.obdd);
        out.push('\n');
    }
    out
}

fn parse_ref(tok: &str, limit: u32) -> Option<u32> {
    match tok {
        "F" => Some(0),
        "T" => Some(1),
        _ => {
            let k: u32 = tok.parse().ok()?;
            (k < limit).then_some(k + 2)
        }
    }
}

fn parse_diagram(toks: &[&str]) -> Result<Serialized, String> {
    match toks {
        [] => Err("empty diagram".into()),
        ["F"] => Ok(Serialized::constant(false)),
        ["T"] => Ok(Serialized::constant(true)),
        _ => {
            let mut nodes = Vec::with_capacity(toks.len());
            for (k, tok) in toks.iter().enumerate() {
                let parts: Vec<&str> = tok.split(':').collect();
                let [level, lo, hi] = parts.as_slice() else {
                    return Err(format!("bad node {tok:?}"));
                };
                let level = level.parse().map_err(|_| format!("bad level in {tok:?}"))?;
                let lo = parse_ref(lo, k as u32).ok_or_else(|| format!("bad child in {tok:?}"))?;
                let hi = parse_ref(hi, k as u32).ok_or_else(|| format!("bad child in {tok:?}"))?;
                nodes.push(SerNode { level, lo, hi });
            }
            let root = nodes.len() as u32 + 1;
            Ok(Serialized { nodes, root })
        }
    }
}

fn parse_index(tok: &str) -> Result<usize, String> {
    tok.parse().map_err(|_| format!("bad index {tok:?}"))
}

pub fn parse_log(text: &str) -> Result<Derivation, LogError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (h_no, header) = lines.next().ok_or(LogError { line: 1, msg: "missing header".into() })?;
    let mut htoks = header.split_whitespace();
    if htoks.next() != Some("order") {
        return Err(LogError { line: h_no + 1, msg: "header must start with `order`".into() });
    }
    let order: Vec<String> = htoks.map(String::from).collect();
    let level_of: FxHashMap<&str, u32> =
        order.iter().enumerate().map(|(k, n)| (n.as_str(), k as u32)).collect();
    if level_of.len() != order.len() {
        return Err(LogError { line: h_no + 1, msg: "duplicate name in order".into() });
    }
    let mut out = Vec::new();
    for (k, raw) in lines {
        let err = |msg: String| LogError { line: k + 1, msg };
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let bar = toks.iter().position(|&t| t == "|").ok_or_else(|| err("missing `| obdd`".into()))?;
        if toks.get(bar + 1) != Some(&"obdd") {
            return Err(err("expected `obdd` after `|`".into()));
        }
        let rule = match &toks[..bar] {
            ["a", c] => Rule::Axiom(parse_index(c).map_err(err)?),
            ["c", a, b] => Rule::Conjunction(parse_index(a).map_err(err)?, parse_index(b).map_err(err)?),
            ["p", a, name] => {
                let l = *level_of.get(name).ok_or_else(|| err(format!("unknown variable {name}")))?;
                Rule::Projection(parse_index(a).map_err(err)?, l)
            }
            ["s", a] => Rule::Subsumption(parse_index(a).map_err(err)?),
            _ => return Err(err("bad rule".into())),
        };
        let obdd = parse_diagram(&toks[bar + 2..]).map_err(err)?;
        out.push(Line { rule, obdd });
    }
    Ok(Derivation { order, lines: out })
}
