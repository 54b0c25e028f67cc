//! From IndMatch_m refutations to Match_m refutations.
//!
//! Fix the permutation bits to the pattern `α` whose member is `π⁻¹`, then
//! rename every `y^j_u` to `y^j_{π(u)}`. Each line becomes its restricted,
//! renamed function. Lines whose function turned into TRUE disappear, a line
//! equal to one of its antecedents is replaced by it, and a projection of a
//! permutation bit becomes a subsumption. Lines no longer reachable from the
//! final one are pruned. None of these steps can grow a diagram.

use rustc_hash::FxHashMap;
use thiserror::Error;

use super::{Derivation, Line, Rule};
use crate::cnf::{perm_bits, Cnf, Family, MatchLayout, PermFamily, Role};
use crate::obdd::{NodeRef, ObddError, ObddStore, SerNode, Serialized, VarOrder};
use crate::var::Lit;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("source formula is not IndMatch")]
    NotIndMatch,
    #[error("target formula is not Match_{0}")]
    TargetMismatch(usize),
    #[error("permutation is not a member of the family")]
    NotInFamily,
    #[error("order entry {0} is not a variable of the source")]
    UnknownName(String),
    #[error("restricted axiom {0} has no counterpart in the target")]
    MissingClause(usize),
    #[error("the final line became TRUE")]
    RootVanished,
    #[error(transparent)]
    Obdd(#[from] ObddError),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mapped {
    True,
    Line(usize),
}

/// Restricts and renames `d`, a refutation of `source` (IndMatch_m), into a
/// refutation of `target` (Match_m) under `pi`.
pub fn restrict_and_rename(
    d: &Derivation,
    source: &Cnf,
    target: &Cnf,
    pi: &[u32],
) -> Result<Derivation, TransformError> {
    let Family::IndMatch { m } = source.family else {
        return Err(TransformError::NotIndMatch);
    };
    if target.family != (Family::Match { m }) {
        return Err(TransformError::TargetMismatch(m));
    }
    let fam = PermFamily::new(m).map_err(|_| TransformError::NotIndMatch)?;
    let t = fam.index_of(pi).ok_or(TransformError::NotInFamily)?;
    let alpha = fam.inverse(t);
    let bit = |b: u32| alpha >> b & 1 == 1;
    let rename = |r: Role| match r {
        Role::Vertex { slot, vertex } => Role::Vertex { slot, vertex: pi[vertex as usize] },
        other => other,
    };

    // Old level -> new level, or the fixed value of a permutation bit.
    let lay = MatchLayout::new(m);
    let mut level_map: Vec<Result<u32, bool>> = Vec::with_capacity(d.order.len());
    let mut new_names = Vec::new();
    let mut new_vars = Vec::new();
    for name in &d.order {
        let role: Role = name.parse().map_err(|_| TransformError::UnknownName(name.clone()))?;
        match role {
            Role::Perm { bit: b } => level_map.push(Err(bit(b))),
            _ => {
                let r = rename(role);
                let v = lay.var_of(r).ok_or_else(|| TransformError::UnknownName(name.clone()))?;
                level_map.push(Ok(new_vars.len() as u32));
                new_vars.push(v);
                new_names.push(r.to_string());
            }
        }
    }
    let order = VarOrder::new(new_vars)?;
    let mut store = ObddStore::new(order);

    let clause_index: FxHashMap<Vec<Lit>, usize> = target
        .clauses
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut c = c.clone();
            c.sort();
            (c, i)
        })
        .collect();
    let map_clause = |c: &[Lit]| -> Option<Vec<Lit>> {
        let mut out = Vec::new();
        for &l in c {
            match source.roles[l.var().index()] {
                Role::Perm { bit: b } => {
                    if bit(b) != l.is_negated() {
                        return None;
                    }
                }
                r => out.push(Lit::new(lay.var_of(rename(r))?, l.is_negated())),
            }
        }
        out.sort();
        Some(out)
    };

    let mut lines: Vec<Line> = Vec::new();
    let mut funcs: Vec<NodeRef> = Vec::new();
    let mut mapped: Vec<Mapped> = Vec::with_capacity(d.lines.len());
    for line in &d.lines {
        let f = store.import_mapped(&line.obdd, |l| level_map[l as usize])?;
        let func_of = |x: Mapped, funcs: &[NodeRef]| match x {
            Mapped::True => NodeRef::TRUE,
            Mapped::Line(i) => funcs[i],
        };
        let alias = |x: Mapped, funcs: &[NodeRef]| x != Mapped::True && func_of(x, funcs) == f;
        let rule = if f.is_true() {
            None
        } else {
            match line.rule {
                Rule::Axiom(c) => {
                    let lits = map_clause(&source.clauses[c]).ok_or(TransformError::MissingClause(c))?;
                    let k = *clause_index.get(&lits).ok_or(TransformError::MissingClause(c))?;
                    Some(Err(Rule::Axiom(k)))
                }
                Rule::Conjunction(a, b) => {
                    let (ma, mb) = (mapped[a], mapped[b]);
                    if alias(ma, &funcs) {
                        Some(Ok(ma))
                    } else if alias(mb, &funcs) {
                        Some(Ok(mb))
                    } else {
                        match (ma, mb) {
                            (Mapped::Line(i), Mapped::Line(j)) => Some(Err(Rule::Conjunction(i, j))),
                            _ => unreachable!("a conjunction with a TRUE side equals the other side"),
                        }
                    }
                }
                Rule::Projection(a, level) => {
                    let ma = mapped[a];
                    let Mapped::Line(i) = ma else { unreachable!("projection of TRUE is TRUE") };
                    if alias(ma, &funcs) {
                        Some(Ok(ma))
                    } else {
                        match level_map[level as usize] {
                            Ok(nl) => Some(Err(Rule::Projection(i, nl))),
                            Err(_) => Some(Err(Rule::Subsumption(i))),
                        }
                    }
                }
                Rule::Subsumption(a) => {
                    let ma = mapped[a];
                    let Mapped::Line(i) = ma else { unreachable!("TRUE only implies TRUE") };
                    if alias(ma, &funcs) {
                        Some(Ok(ma))
                    } else {
                        Some(Err(Rule::Subsumption(i)))
                    }
                }
            }
        };
        mapped.push(match rule {
            None => Mapped::True,
            Some(Ok(target)) => target,
            Some(Err(rule)) => {
                lines.push(Line { rule, obdd: store.export(f)? });
                funcs.push(f);
                Mapped::Line(lines.len() - 1)
            }
        });
    }
    let root = match mapped.last() {
        Some(Mapped::Line(r)) => *r,
        _ => return Err(TransformError::RootVanished),
    };
    Ok(Derivation { order: new_names, lines: prune(lines, root) })
}

/// The converse direction for one pattern: lifts `d`, a refutation of
/// `target` (Match_m), to a derivation from `source` (IndMatch_m) of the
/// clause "the permutation bits differ from `α`", where `α` is the pattern
/// [`restrict_and_rename`] fixes for `pi`. Permutation bits go on top of the
/// order and every `y^j_u` becomes `y^j_{π⁻¹(u)}`, so each line `f` becomes
/// `f' ∨ [z != α]` and restricting the result under `pi` gives back `d`.
/// Axioms of types 1 to 4 enter unguarded and are weakened by Subsumption.
pub fn lift_match_derivation(
    d: &Derivation,
    target: &Cnf,
    source: &Cnf,
    pi: &[u32],
) -> Result<Derivation, TransformError> {
    let Family::IndMatch { m } = source.family else {
        return Err(TransformError::NotIndMatch);
    };
    if target.family != (Family::Match { m }) {
        return Err(TransformError::TargetMismatch(m));
    }
    let fam = PermFamily::new(m).map_err(|_| TransformError::NotIndMatch)?;
    let t = fam.index_of(pi).ok_or(TransformError::NotInFamily)?;
    let alpha = fam.inverse(t);
    let sigma = fam.get(alpha);
    let l = perm_bits(fam.len()) as u32;

    let mut order: Vec<String> = (0..l).map(|bit| Role::Perm { bit }.to_string()).collect();
    for name in &d.order {
        let role: Role = name.parse().map_err(|_| TransformError::UnknownName(name.clone()))?;
        let r = match role {
            Role::Vertex { slot, vertex } => Role::Vertex { slot, vertex: sigma[vertex as usize] },
            other => other,
        };
        order.push(r.to_string());
    }
    let vars = order
        .iter()
        .map(|n| source.var_by_name(n).ok_or_else(|| TransformError::UnknownName(n.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut store = ObddStore::new(VarOrder::new(vars)?);
    let lift_var = |v: crate::var::Var| -> Option<crate::var::Var> {
        let r = match target.roles[v.index()] {
            Role::Vertex { slot, vertex } => Role::Vertex { slot, vertex: sigma[vertex as usize] },
            other => other,
        };
        source.var_by_name(&r.to_string())
    };
    let clause_index: FxHashMap<Vec<Lit>, usize> = source
        .clauses
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut c = c.clone();
            c.sort();
            (c, i)
        })
        .collect();
    let guard: Vec<Lit> = (0..l).map(|b| Lit::new(crate::var::Var(b), alpha >> b & 1 == 1)).collect();

    let mut lines = Vec::with_capacity(d.lines.len());
    let mut new_index = Vec::with_capacity(d.lines.len());
    for line in &d.lines {
        let obdd = guarded(&line.obdd, l, alpha);
        let rule = match line.rule {
            Rule::Axiom(c) => {
                let mut lits = Vec::new();
                for &x in &target.clauses[c] {
                    let v = lift_var(x.var()).ok_or(TransformError::MissingClause(c))?;
                    lits.push(Lit::new(v, x.is_negated()));
                }
                let mut with_guard = [guard.clone(), lits.clone()].concat();
                with_guard.sort();
                if let Some(&i) = clause_index.get(&with_guard) {
                    Rule::Axiom(i)
                } else {
                    lits.sort();
                    let i = *clause_index.get(&lits).ok_or(TransformError::MissingClause(c))?;
                    let f = store.build_clause(&source.clauses[i])?;
                    lines.push(Line { rule: Rule::Axiom(i), obdd: store.export(f)? });
                    Rule::Subsumption(lines.len() - 1)
                }
            }
            Rule::Conjunction(a, b) => Rule::Conjunction(new_index[a], new_index[b]),
            Rule::Projection(a, level) => Rule::Projection(new_index[a], level + l),
            Rule::Subsumption(a) => Rule::Subsumption(new_index[a]),
        };
        lines.push(Line { rule, obdd });
        new_index.push(lines.len() - 1);
    }
    Ok(Derivation { order, lines })
}

/// `f ∨ [z != α]` with the `l` permutation bits on levels `0..l` above `f`.
fn guarded(f: &Serialized, l: u32, alpha: usize) -> Serialized {
    if f.is_true() {
        return Serialized::constant(true);
    }
    let mut nodes: Vec<SerNode> =
        f.nodes.iter().map(|n| SerNode { level: n.level + l, lo: n.lo, hi: n.hi }).collect();
    let mut below = f.root;
    for b in (0..l).rev() {
        let (lo, hi) = if alpha >> b & 1 == 1 { (1, below) } else { (below, 1) };
        nodes.push(SerNode { level: b, lo, hi });
        below = nodes.len() as u32 + 1;
    }
    Serialized { nodes, root: below }
}

/// Keeps the lines the root depends on, in their original order.
fn prune(lines: Vec<Line>, root: usize) -> Vec<Line> {
    let mut keep = vec![false; lines.len()];
    keep[root] = true;
    for i in (0..=root).rev() {
        if keep[i] {
            for a in lines[i].rule.antecedents() {
                keep[a] = true;
            }
        }
    }
    let mut new_index = vec![usize::MAX; lines.len()];
    let mut out = Vec::new();
    for (i, mut line) in lines.into_iter().enumerate().take(root + 1) {
        if !keep[i] {
            continue;
        }
        line.rule = match line.rule {
            Rule::Axiom(c) => Rule::Axiom(c),
            Rule::Conjunction(a, b) => Rule::Conjunction(new_index[a], new_index[b]),
            Rule::Projection(a, l) => Rule::Projection(new_index[a], l),
            Rule::Subsumption(a) => Rule::Subsumption(new_index[a]),
        };
        new_index[i] = out.len();
        out.push(line);
    }
    out
}
