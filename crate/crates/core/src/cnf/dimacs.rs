//! DIMACS CNF and the role-tag sidecar.
//!
//! The writer records the generator in a `c family <tag> <param>` comment,
//! which the parser picks up again. Sidecar lines are `<dimacs-int> <role-tag>`.

use std::fmt::Write as _;

use rustc_hash::FxHashSet;

use super::{Cnf, CnfError, Family, Role};
use crate::var::Lit;

fn err(line: usize, msg: impl Into<String>) -> CnfError {
    CnfError::Parse { line, msg: msg.into() }
}

pub fn write_dimacs(cnf: &Cnf) -> String {
    let mut out = String::new();
    if cnf.family != Family::Plain {
        writeln!(out, "c family {}", cnf.family).unwrap();
    }
    writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len()).unwrap();
    for c in &cnf.clauses {
        for l in c {
            write!(out, "{} ", l.dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<Cnf, CnfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut family = Family::Plain;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                if let Some(tag) = rest.trim().strip_prefix("family ") {
                    family = tag.parse().map_err(|e: String| err(line_no, e))?;
                }
                continue;
            }
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(line_no, "second problem line"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["p", "cnf", v, c] => {
                    let v = v.parse().map_err(|_| err(line_no, "bad variable count"))?;
                    let c = c.parse().map_err(|_| err(line_no, "bad clause count"))?;
                    header = Some((v, c));
                }
                _ => return Err(err(line_no, "expected `p cnf <vars> <clauses>`")),
            }
            continue;
        }
        let (num_vars, _) = header.ok_or_else(|| err(line_no, "clause before problem line"))?;
        for tok in line.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| err(line_no, format!("bad literal {tok:?}")))?;
            if x == 0 {
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if x.unsigned_abs() as usize > num_vars {
                return Err(err(line_no, format!("literal {x} exceeds {num_vars} variables")));
            }
            let lit = Lit::from_dimacs(x).ok_or_else(|| err(line_no, format!("bad literal {x}")))?;
            if !current.contains(&lit) {
                current.push(lit);
            }
        }
    }
    let (num_vars, num_clauses) = header.ok_or_else(|| err(last_line, "missing problem line"))?;
    if !current.is_empty() {
        return Err(err(last_line, "last clause is not terminated by 0"));
    }
    if clauses.len() != num_clauses {
        return Err(err(
            last_line,
            format!("header declares {num_clauses} clauses, found {}", clauses.len()),
        ));
    }
    let mut cnf = Cnf::plain(num_vars, clauses);
    cnf.family = family;
    Ok(cnf)
}

pub fn write_name_map(cnf: &Cnf) -> String {
    let mut out = String::new();
    for (k, r) in cnf.roles.iter().enumerate() {
        writeln!(out, "{} {}", k + 1, r).unwrap();
    }
    out
}

/// Applies a sidecar to `cnf`. Unlisted variables keep their current tag.
pub fn parse_name_map(cnf: &mut Cnf, text: &str) -> Result<(), CnfError> {
    let mut roles = cnf.roles.clone();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [idx, tag] = parts.as_slice() else {
            return Err(err(line_no, "expected `<dimacs-int> <role-tag>`"));
        };
        let idx: usize = idx.parse().map_err(|_| err(line_no, format!("bad index {idx:?}")))?;
        if idx == 0 || idx > cnf.num_vars {
            return Err(err(line_no, format!("index {idx} out of range")));
        }
        roles[idx - 1] = tag.parse::<Role>().map_err(|e| err(line_no, e))?;
    }
    let mut seen = FxHashSet::default();
    for r in &roles {
        if !seen.insert(*r) {
            return Err(err(0, format!("tag {r} used twice")));
        }
    }
    cnf.roles = roles;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{gen_match, gen_php};

    #[test]
    fn roundtrip_with_names() {
        for cnf in [gen_match(2).unwrap(), gen_php(3).unwrap()] {
            let mut back = parse_dimacs(&write_dimacs(&cnf)).unwrap();
            assert_eq!(back.family, cnf.family);
            parse_name_map(&mut back, &write_name_map(&cnf)).unwrap();
            assert_eq!(back, cnf);
        }
    }

    #[test]
    fn multi_line_clauses_and_comments() {
        let cnf = parse_dimacs("c hello\np cnf 3 2\n1 -2\n 3 0 -1 0\n").unwrap();
        assert_eq!(cnf.clauses.len(), 2);
        assert_eq!(cnf.clauses[0].len(), 3);
    }

    #[test]
    fn malformed_inputs_report_lines() {
        let cases = [
            ("p cnf 2 1\n1 3 0\n", 2),
            ("p cnf 2 1\n1 x 0\n", 2),
            ("1 2 0\n", 1),
            ("p cnf 2 2\n1 2 0\n", 2),
            ("p cnf 2 1\n1 2\n", 2),
            ("p cnf 2\n", 1),
            ("p cnf 2 1\np cnf 2 1\n", 2),
        ];
        for (text, line) in cases {
            match parse_dimacs(text) {
                Err(CnfError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn name_map_errors() {
        let mut cnf = parse_dimacs("p cnf 2 1\n1 2 0\n").unwrap();
        assert!(parse_name_map(&mut cnf, "1 y1_1\n2 y1_1\n").is_err());
        assert!(parse_name_map(&mut cnf, "3 y1_1\n").is_err());
        assert!(matches!(
            parse_name_map(&mut cnf, "1 y1_1\n2 bogus\n"),
            Err(CnfError::Parse { line: 2, .. })
        ));
    }
}
