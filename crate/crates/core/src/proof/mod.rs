//! Tree-like OBDD derivations and their checker.
//!
//! Every line records the diagram it asserts as a [`Serialized`] level list,
//! so the checker rebuilds everything in its own store and never relies on
//! the producer's memo tables.

mod log;
mod mutate;
mod transform;

use std::fmt;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::cnf::Cnf;
use crate::obdd::{node_cap_from_env, NodeRef, ObddError, ObddStore, Serialized, VarOrder};
use crate::var::Var;

pub use log::{parse_log, write_log, LogError};
pub use mutate::{mutate, Mutation};
pub use transform::{lift_match_derivation, restrict_and_rename, TransformError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// The clause with this index.
    Axiom(usize),
    Conjunction(usize, usize),
    /// Existential projection of the variable at this level.
    Projection(usize, u32),
    /// Any function implied by the antecedent.
    Subsumption(usize),
}

impl Rule {
    pub fn antecedents(&self) -> Vec<usize> {
        match *self {
            Rule::Axiom(_) => vec![],
            Rule::Conjunction(a, b) => vec![a, b],
            Rule::Projection(a, _) | Rule::Subsumption(a) => vec![a],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub rule: Rule,
    pub obdd: Serialized,
}

/// Lines over one variable order, given by variable names top to bottom.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Derivation {
    pub order: Vec<String>,
    pub lines: Vec<Line>,
}

impl Derivation {
    /// Sum of the line sizes, terminals included.
    pub fn size(&self) -> usize {
        self.lines.iter().map(|l| l.obdd.size()).sum()
    }

    /// Largest single line.
    pub fn max_line_size(&self) -> usize {
        self.lines.iter().map(|l| l.obdd.size()).max().unwrap_or(0)
    }

    pub fn ends_in_false(&self) -> bool {
        self.lines.last().is_some_and(|l| l.obdd.is_false())
    }

    /// Longest antecedent chain from the last line down to an axiom, in edges.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.lines.len()];
        for (i, l) in self.lines.iter().enumerate() {
            depth[i] = l.rule.antecedents().iter().map(|&a| depth[a] + 1).max().unwrap_or(0);
        }
        depth.last().copied().unwrap_or(0)
    }
}

/// Why a derivation was rejected.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("order does not match the formula: {0}")]
    OrderMismatch(String),
    #[error("antecedent {0} does not precede the line")]
    DanglingAntecedent(usize),
    #[error("line {ante} already used as an antecedent by line {first_use}")]
    ReusedAntecedent { ante: usize, first_use: usize },
    #[error("clause {0} does not exist")]
    UnknownClause(usize),
    #[error("level {0} is outside the order")]
    UnknownLevel(u32),
    #[error("malformed diagram: {0}")]
    MalformedObdd(String),
    #[error("diagram is not reduced")]
    NonCanonical,
    #[error("derivation has no lines")]
    Empty,
    #[error("diagram differs from the cited clause")]
    AxiomMismatch,
    #[error("diagram differs from the conjunction of its antecedents")]
    ConjunctionMismatch,
    #[error("diagram differs from the projection of its antecedent")]
    ProjectionMismatch,
    #[error("antecedent does not imply the asserted function")]
    SubsumptionFails,
    #[error("final line is not FALSE")]
    NotRefutation,
    #[error("checker ran out of nodes")]
    Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Structural,
    Semantic,
    Resource,
}

impl Violation {
    pub fn kind(&self) -> ViolationKind {
        use Violation::*;
        match self {
            OrderMismatch(_) | DanglingAntecedent(_) | ReusedAntecedent { .. } | UnknownClause(_)
            | UnknownLevel(_) | MalformedObdd(_) | NonCanonical | Empty => ViolationKind::Structural,
            AxiomMismatch | ConjunctionMismatch | ProjectionMismatch | SubsumptionFails
            | NotRefutation => ViolationKind::Semantic,
            Budget => ViolationKind::Resource,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub line: Option<usize>,
    pub violation: Violation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub ok: bool,
    pub failure: Option<Failure>,
}

impl Verdict {
    fn pass() -> Verdict {
        Verdict { ok: true, failure: None }
    }

    fn fail(line: Option<usize>, violation: Violation) -> Verdict {
        Verdict { ok: false, failure: Some(Failure { line, violation }) }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "ok"),
            Some(Failure { line: Some(l), violation }) => {
                write!(f, "{:?} error at line {l}: {violation}", violation.kind())
            }
            Some(Failure { line: None, violation }) => write!(f, "{:?} error: {violation}", violation.kind()),
        }
    }
}

/// The store order named by `names`, which must list every formula variable once.
pub fn order_for(cnf: &Cnf, names: &[String]) -> Result<VarOrder, Violation> {
    if names.len() != cnf.num_vars {
        return Err(Violation::OrderMismatch(format!(
            "{} names for {} variables",
            names.len(),
            cnf.num_vars
        )));
    }
    let by_name: FxHashMap<String, Var> =
        (0..cnf.num_vars as u32).map(|v| (cnf.name(Var(v)), Var(v))).collect();
    let vars = names
        .iter()
        .map(|n| by_name.get(n).copied().ok_or_else(|| Violation::OrderMismatch(format!("unknown variable {n}"))))
        .collect::<Result<Vec<_>, _>>()?;
    VarOrder::new(vars).map_err(|e| Violation::OrderMismatch(e.to_string()))
}

fn structural_pass(cnf: &Cnf, d: &Derivation) -> Result<(), (usize, Violation)> {
    let mut used_by: Vec<Option<usize>> = vec![None; d.lines.len()];
    for (i, line) in d.lines.iter().enumerate() {
        for a in line.rule.antecedents() {
            if a >= i {
                return Err((i, Violation::DanglingAntecedent(a)));
            }
            if let Some(first_use) = used_by[a] {
                return Err((i, Violation::ReusedAntecedent { ante: a, first_use }));
            }
            used_by[a] = Some(i);
        }
        match line.rule {
            Rule::Axiom(c) if c >= cnf.clauses.len() => return Err((i, Violation::UnknownClause(c))),
            Rule::Projection(_, l) if l as usize >= d.order.len() => {
                return Err((i, Violation::UnknownLevel(l)))
            }
            _ => {}
        }
    }
    Ok(())
}

fn obdd_violation(e: ObddError) -> Violation {
    match e {
        ObddError::NodeCap(_) => Violation::Budget,
        ObddError::OrderViolation { .. } => Violation::MalformedObdd("children not below parent".into()),
        other => Violation::MalformedObdd(other.to_string()),
    }
}

/// Checks every line of `d` against its rule. Does not require a final FALSE.
pub fn check_derivation(cnf: &Cnf, d: &Derivation) -> Verdict {
    check(cnf, d, false)
}

/// [`check_derivation`] plus the requirement that the last line is FALSE.
pub fn check_refutation(cnf: &Cnf, d: &Derivation) -> Verdict {
    check(cnf, d, true)
}

fn check(cnf: &Cnf, d: &Derivation, refutation: bool) -> Verdict {
    let order = match order_for(cnf, &d.order) {
        Ok(o) => o,
        Err(v) => return Verdict::fail(None, v),
    };
    if d.lines.is_empty() {
        return Verdict::fail(None, Violation::Empty);
    }
    if let Err((i, v)) = structural_pass(cnf, d) {
        return Verdict::fail(Some(i), v);
    }
    let mut store = ObddStore::with_cap(order, node_cap_from_env());
    let mut refs: Vec<NodeRef> = Vec::with_capacity(d.lines.len());
    for (i, line) in d.lines.iter().enumerate() {
        match check_line(cnf, &mut store, &refs, line) {
            Ok(r) => refs.push(r),
            Err(v) => return Verdict::fail(Some(i), v),
        }
        if store.memo_len() > 1 << 21 {
            store.clear_memo();
        }
    }
    if refutation && !refs.last().unwrap().is_false() {
        return Verdict::fail(Some(d.lines.len() - 1), Violation::NotRefutation);
    }
    Verdict::pass()
}

fn check_line(cnf: &Cnf, store: &mut ObddStore, refs: &[NodeRef], line: &Line) -> Result<NodeRef, Violation> {
    let claimed = store.import(&line.obdd).map_err(obdd_violation)?;
    let size = store.size(claimed).map_err(obdd_violation)?;
    let inner = if claimed.is_terminal() { 0 } else { size - 2 };
    if size != line.obdd.size() || inner != line.obdd.nodes.len() {
        return Err(Violation::NonCanonical);
    }
    let ok = match line.rule {
        Rule::Axiom(c) => {
            let f = store.build_clause(&cnf.clauses[c]).map_err(obdd_violation)?;
            (f == claimed).then_some(()).ok_or(Violation::AxiomMismatch)
        }
        Rule::Conjunction(a, b) => {
            let f = store.and(refs[a], refs[b]).map_err(obdd_violation)?;
            (f == claimed).then_some(()).ok_or(Violation::ConjunctionMismatch)
        }
        Rule::Projection(a, level) => {
            let var = store.order().var_at(level);
            let f = store.exists(refs[a], var).map_err(obdd_violation)?;
            (f == claimed).then_some(()).ok_or(Violation::ProjectionMismatch)
        }
        Rule::Subsumption(a) => {
            let ok = store.implies(refs[a], claimed).map_err(obdd_violation)?;
            ok.then_some(()).ok_or(Violation::SubsumptionFails)
        }
    };
    ok.map(|_| claimed)
}
