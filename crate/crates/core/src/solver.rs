//! Bucket elimination with OBDDs, recorded as a tree-like derivation.
//!
//! Variables are eliminated bottom-up: the last variable of the order goes
//! first. A clause waits in the bucket of the first of its variables to be
//! eliminated. Each bucket conjoins its clauses in a balanced tree (smallest
//! diagrams first), conjoins the result with what earlier buckets left over,
//! and projects its variables away.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::cnf::{Cnf, Role};
use crate::obdd::{NodeRef, ObddError, ObddStore, VarOrder};
use crate::proof::{Derivation, Line, Rule};
use crate::var::Var;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
    #[error("order has {0} variables, formula has {1}")]
    OrderSize(usize, usize),
    #[error("order file: {0}")]
    OrderFile(String),
    #[error(transparent)]
    Obdd(#[from] ObddError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bucket {
    pub vars: Vec<Var>,
    pub clauses: Vec<usize>,
}

/// Buckets in elimination order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub buckets: Vec<Bucket>,
}

impl Schedule {
    /// One bucket holding everything: build the whole formula, then project.
    pub fn single(cnf: &Cnf, order: &VarOrder) -> Schedule {
        let mut vars = order.vars().to_vec();
        vars.reverse();
        Schedule { buckets: vec![Bucket { vars, clauses: (0..cnf.clauses.len()).collect() }] }
    }

    /// Checks that buckets partition variables and clauses, and that no clause
    /// mentions a variable eliminated before its bucket.
    pub fn validate(&self, cnf: &Cnf) -> Result<(), String> {
        let mut var_bucket = vec![usize::MAX; cnf.num_vars];
        for (b, bucket) in self.buckets.iter().enumerate() {
            for v in &bucket.vars {
                let slot = var_bucket.get_mut(v.index()).ok_or(format!("unknown variable {v:?}"))?;
                if *slot != usize::MAX {
                    return Err(format!("variable {v:?} in two buckets"));
                }
                *slot = b;
            }
        }
        if var_bucket.contains(&usize::MAX) {
            return Err("some variable is in no bucket".into());
        }
        let mut seen = vec![false; cnf.clauses.len()];
        for (b, bucket) in self.buckets.iter().enumerate() {
            for &c in &bucket.clauses {
                if c >= seen.len() || std::mem::replace(&mut seen[c], true) {
                    return Err(format!("clause {c} missing or repeated"));
                }
                if let Some(l) = cnf.clauses[c].iter().find(|l| var_bucket[l.var().index()] < b) {
                    return Err(format!("clause {c} mentions {:?}, eliminated earlier", l.var()));
                }
            }
        }
        if seen.contains(&false) {
            return Err("some clause is in no bucket".into());
        }
        Ok(())
    }
}

/// One bucket per variable, bottom of the order first.
pub fn bucket_schedule(cnf: &Cnf, order: &VarOrder) -> Schedule {
    let n = order.len();
    let mut buckets: Vec<Bucket> =
        (0..n).map(|k| Bucket { vars: vec![order.var_at((n - 1 - k) as u32)], clauses: Vec::new() }).collect();
    if buckets.is_empty() {
        buckets.push(Bucket { vars: Vec::new(), clauses: Vec::new() });
    }
    for (i, c) in cnf.clauses.iter().enumerate() {
        let deepest = c.iter().map(|l| order.level(l.var()).unwrap()).max();
        let b = deepest.map_or(0, |l| n - 1 - l as usize);
        buckets[b].clauses.push(i);
    }
    Schedule { buckets }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    /// The node cap was reached; the verdict is unknown.
    Budget,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: Status,
    /// The derivation so far; a refutation when the status is `Unsat`.
    pub derivation: Derivation,
    /// Nodes allocated by the store, terminals included.
    pub peak_nodes: usize,
    pub proof_size: usize,
    pub seconds: f64,
}

enum Item {
    Clause(usize, NodeRef),
    Line(usize),
}

struct Recorder<'a> {
    cnf: &'a Cnf,
    store: ObddStore,
    lines: Vec<Line>,
    funcs: Vec<NodeRef>,
}

impl Recorder<'_> {
    fn emit(&mut self, rule: Rule, f: NodeRef) -> Result<usize, ObddError> {
        let obdd = self.store.export(f)?;
        self.lines.push(Line { rule, obdd });
        self.funcs.push(f);
        Ok(self.lines.len() - 1)
    }

    fn materialize(&mut self, item: Item) -> Result<usize, ObddError> {
        match item {
            Item::Line(i) => Ok(i),
            Item::Clause(c, f) => self.emit(Rule::Axiom(c), f),
        }
    }

    fn conjoin(&mut self, a: Item, b: Item) -> Result<usize, ObddError> {
        let a = self.materialize(a)?;
        let b = self.materialize(b)?;
        let f = self.store.and(self.funcs[a], self.funcs[b])?;
        self.emit(Rule::Conjunction(a, b), f)
    }

    /// Folds the buckets. `Ok(None)` means TRUE was never contradicted.
    fn run(&mut self, schedule: &Schedule) -> Result<Option<usize>, ObddError> {
        let mut carried: Option<usize> = None;
        for bucket in &schedule.buckets {
            self.store.clear_memo();
            let mut items = Vec::with_capacity(bucket.clauses.len());
            for &c in &bucket.clauses {
                let f = self.store.build_clause(&self.cnf.clauses[c])?;
                if f.is_false() {
                    return self.emit(Rule::Axiom(c), f).map(Some);
                }
                if !f.is_true() {
                    items.push((self.store.size(f)?, c, f));
                }
            }
            items.sort_by_key(|&(size, c, _)| (size, c));
            let mut level: Vec<Item> = items.into_iter().map(|(_, c, f)| Item::Clause(c, f)).collect();
            while level.len() > 1 {
                let mut next = Vec::with_capacity(level.len() / 2 + 1);
                let mut it = level.into_iter();
                while let Some(a) = it.next() {
                    match it.next() {
                        Some(b) => {
                            let r = self.conjoin(a, b)?;
                            if self.funcs[r].is_false() {
                                return Ok(Some(r));
                            }
                            next.push(Item::Line(r));
                        }
                        None => next.push(a),
                    }
                }
                level = next;
            }
            let mut cur = match (level.pop(), carried) {
                (None, None) => continue,
                (None, Some(c)) => c,
                (Some(b), None) => self.materialize(b)?,
                (Some(b), Some(c)) => self.conjoin(b, Item::Line(c))?,
            };
            if self.funcs[cur].is_false() {
                return Ok(Some(cur));
            }
            let mut vars = bucket.vars.clone();
            vars.sort_by_key(|v| std::cmp::Reverse(self.store.order().level(*v)));
            for v in vars {
                let f = self.store.exists(self.funcs[cur], v)?;
                if f != self.funcs[cur] {
                    let level = self.store.order().level(v).unwrap();
                    cur = self.emit(Rule::Projection(cur, level), f)?;
                }
            }
            carried = Some(cur);
        }
        Ok(carried)
    }
}

/// Runs the schedule under `order` with a store capped at `node_cap` nodes.
pub fn solve(cnf: &Cnf, order: &VarOrder, schedule: &Schedule, node_cap: usize) -> Result<SolveOutcome, SolveError> {
    if order.len() != cnf.num_vars {
        return Err(SolveError::OrderSize(order.len(), cnf.num_vars));
    }
    schedule.validate(cnf).map_err(SolveError::BadSchedule)?;
    let start = Instant::now();
    let mut rec = Recorder {
        cnf,
        store: ObddStore::with_cap(order.clone(), node_cap),
        lines: Vec::new(),
        funcs: Vec::new(),
    };
    let result = rec.run(schedule);
    let status = match result {
        Ok(Some(last)) if rec.funcs[last].is_false() => Status::Unsat,
        Ok(Some(last)) => {
            debug_assert!(rec.funcs[last].is_true(), "every variable is projected away");
            Status::Sat
        }
        Ok(None) => Status::Sat,
        Err(ObddError::NodeCap(_)) => Status::Budget,
        Err(e) => return Err(e.into()),
    };
    let derivation = Derivation { order: order.vars().iter().map(|&v| cnf.name(v)).collect(), lines: rec.lines };
    Ok(SolveOutcome {
        status,
        proof_size: derivation.size(),
        derivation,
        peak_nodes: rec.store.len(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// How to pick a static order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Heuristic {
    /// DIMACS index order.
    Natural,
    /// Most occurrences first, ties by index.
    Degree,
    /// Permutation bits, then vertex variables grouped by vertex, then edge
    /// variables grouped by edge (lexicographic), then everything else by
    /// role.
    RoleBlocks,
    /// Explicit variable names, top first.
    Names(Vec<String>),
}

pub fn choose_order(cnf: &Cnf, h: &Heuristic) -> Result<VarOrder, SolveError> {
    let vars: Vec<Var> = match h {
        Heuristic::Natural => (0..cnf.num_vars as u32).map(Var).collect(),
        Heuristic::Degree => {
            let occ = cnf.occurrences();
            let mut vars: Vec<Var> = (0..cnf.num_vars as u32).map(Var).collect();
            vars.sort_by_key(|v| (std::cmp::Reverse(occ[v.index()]), v.0));
            vars
        }
        Heuristic::RoleBlocks => {
            let mut vars: Vec<Var> = (0..cnf.num_vars as u32).map(Var).collect();
            vars.sort_by_key(|v| {
                let key = match cnf.roles[v.index()] {
                    Role::Perm { bit } => (0, bit, 0, 0),
                    Role::Vertex { slot, vertex } => (1, vertex, 0, slot),
                    Role::Edge { slot, edge } => (2, edge.u, edge.v, slot),
                    Role::Hole { pigeon, hole } => (3, pigeon, hole, 0),
                    Role::Plain(_) => (4, 0, 0, 0),
                };
                (key, v.0)
            });
            vars
        }
        Heuristic::Names(names) => {
            let by_name: FxHashMap<String, Var> =
                (0..cnf.num_vars as u32).map(|v| (cnf.name(Var(v)), Var(v))).collect();
            names
                .iter()
                .map(|n| by_name.get(n).copied().ok_or_else(|| SolveError::OrderFile(format!("unknown variable {n}"))))
                .collect::<Result<_, _>>()?
        }
    };
    if vars.len() != cnf.num_vars {
        return Err(SolveError::OrderSize(vars.len(), cnf.num_vars));
    }
    VarOrder::new(vars).map_err(|e| SolveError::OrderFile(e.to_string()))
}

/// Whitespace-separated variable names, top first.
pub fn parse_order_text(text: &str) -> Heuristic {
    Heuristic::Names(text.split_whitespace().map(String::from).collect())
}

pub fn write_order_text(cnf: &Cnf, order: &VarOrder) -> String {
    let mut out: Vec<String> = order.vars().iter().map(|&v| cnf.name(v)).collect();
    out.push(String::new());
    out.join("\n")
}

pub fn random_order<R: Rng>(n: usize, rng: &mut R) -> VarOrder {
    let mut vars: Vec<Var> = (0..n as u32).map(Var).collect();
    vars.shuffle(rng);
    VarOrder::new(vars).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{gen_match, gen_php};
    use crate::obdd::DEFAULT_NODE_CAP;
    use crate::proof::check_refutation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bucket_rule_example() {
        // {x}, {¬x ∨ y} with x eliminated first: both clauses land in x's bucket
        let cnf = Cnf::plain(2, vec![vec![Var(0).pos()], vec![Var(0).neg(), Var(1).pos()]]);
        let order = VarOrder::new(vec![Var(1), Var(0)]).unwrap();
        let s = bucket_schedule(&cnf, &order);
        assert_eq!(s.buckets[0], Bucket { vars: vec![Var(0)], clauses: vec![0, 1] });
        assert!(s.buckets[1].clauses.is_empty());
        s.validate(&cnf).unwrap();
    }

    #[test]
    fn schedule_invariant_on_random_orders() {
        let cnf = gen_match(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let order = random_order(cnf.num_vars, &mut rng);
            bucket_schedule(&cnf, &order).validate(&cnf).unwrap();
        }
    }

    #[test]
    fn broken_schedules_rejected() {
        let cnf = Cnf::plain(2, vec![vec![Var(0).pos()], vec![Var(0).neg(), Var(1).pos()]]);
        let order = VarOrder::natural(2);
        let mut s = bucket_schedule(&cnf, &order);
        s.buckets.swap(0, 1);
        assert!(s.validate(&cnf).is_err());
        let mut s = bucket_schedule(&cnf, &order);
        s.buckets[0].clauses.push(0);
        assert!(s.validate(&cnf).is_err());
    }

    #[test]
    fn small_verdicts() {
        let sat = Cnf::plain(2, vec![vec![Var(0).pos(), Var(1).pos()]]);
        let order = VarOrder::natural(2);
        let out = solve(&sat, &order, &bucket_schedule(&sat, &order), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(out.status, Status::Sat);
        for cnf in [gen_match(1).unwrap(), gen_php(3).unwrap()] {
            let order = VarOrder::natural(cnf.num_vars);
            for schedule in [bucket_schedule(&cnf, &order), Schedule::single(&cnf, &order)] {
                let out = solve(&cnf, &order, &schedule, DEFAULT_NODE_CAP).unwrap();
                assert_eq!(out.status, Status::Unsat);
                assert!(check_refutation(&cnf, &out.derivation).ok);
            }
        }
    }

    #[test]
    fn budget_is_reported() {
        let cnf = gen_php(5).unwrap();
        let order = VarOrder::natural(cnf.num_vars);
        let out = solve(&cnf, &order, &bucket_schedule(&cnf, &order), 64).unwrap();
        assert_eq!(out.status, Status::Budget);
    }

    #[test]
    fn degree_order_breaks_ties_by_index() {
        let cnf = Cnf::plain(3, vec![vec![Var(2).pos(), Var(1).pos()], vec![Var(2).neg()]]);
        let o = choose_order(&cnf, &Heuristic::Degree).unwrap();
        assert_eq!(o.vars(), &[Var(2), Var(1), Var(0)]);
        let text = write_order_text(&cnf, &o);
        assert_eq!(choose_order(&cnf, &parse_order_text(&text)).unwrap(), o);
        assert!(choose_order(&cnf, &parse_order_text("v1 v2")).is_err());
    }
}
