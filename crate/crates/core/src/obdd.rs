//! Reduced ordered binary decision diagrams over a fixed variable order.
//!
//! An [`ObddStore`] owns an append-only node arena, a unique table that keeps
//! every node hash-consed, and a memo cache for the apply-style operations.
//! There is no garbage collection and no complement edges, so a
//! [`NodeRef`] stays valid for the lifetime of its store and two refs from the
//! same store are equal exactly when they denote the same Boolean function.
//!
//! Sizes count the terminals: `FALSE` alone has size 1, a single variable has
//! size 3.

use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::var::{Lit, Var};

/// Default node cap when `OBDD_NODE_CAP` is not set.
pub const DEFAULT_NODE_CAP: usize = 1 << 24;

/// Environment variable overriding [`DEFAULT_NODE_CAP`].
pub const NODE_CAP_ENV: &str = "OBDD_NODE_CAP";

/// Node cap from the environment, falling back to [`DEFAULT_NODE_CAP`].
pub fn node_cap_from_env() -> usize {
    std::env::var(NODE_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_NODE_CAP)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObddError {
    #[error("variable {var:?} at level {level} is not above child level {child}")]
    OrderViolation { var: Var, level: u32, child: u32 },
    #[error("node cap of {0} nodes reached")]
    NodeCap(usize),
    #[error("node reference belongs to another store")]
    ForeignRef,
    #[error("variable {0:?} is not in the order")]
    UnknownVar(Var),
    #[error("invalid order: {0}")]
    BadOrder(String),
    #[error("malformed serialized OBDD: {0}")]
    Malformed(String),
}

/// A total order on variables `0..n`, stored both ways.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarOrder {
    by_level: Vec<Var>,
    level_of: Vec<u32>,
}

impl VarOrder {
    /// `by_level[k]` is the variable at level `k`; must be a permutation of `0..n`.
    pub fn new(by_level: Vec<Var>) -> Result<VarOrder, ObddError> {
        let n = by_level.len();
        let mut level_of = vec![u32::MAX; n];
        for (k, v) in by_level.iter().enumerate() {
            if v.index() >= n {
                return Err(ObddError::BadOrder(format!("variable {} out of range", v.0)));
            }
            if level_of[v.index()] != u32::MAX {
                return Err(ObddError::BadOrder(format!("variable {} listed twice", v.0)));
            }
            level_of[v.index()] = k as u32;
        }
        Ok(VarOrder { by_level, level_of })
    }

    pub fn natural(n: usize) -> VarOrder {
        VarOrder::new((0..n as u32).map(Var).collect()).unwrap()
    }

    pub fn len(&self) -> usize {
        self.by_level.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_level.is_empty()
    }

    pub fn level(&self, v: Var) -> Option<u32> {
        self.level_of.get(v.index()).copied()
    }

    pub fn var_at(&self, level: u32) -> Var {
        self.by_level[level as usize]
    }

    /// Variables from top to bottom.
    pub fn vars(&self) -> &[Var] {
        &self.by_level
    }
}

static NEXT_STORE_ID: AtomicU32 = AtomicU32::new(1);

/// Handle to a node. Terminals are shared across stores; inner nodes carry
/// the id of the store that made them.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeRef {
    store: u32,
    index: u32,
}

impl NodeRef {
    pub const FALSE: NodeRef = NodeRef { store: 0, index: 0 };
    pub const TRUE: NodeRef = NodeRef { store: 0, index: 1 };

    pub fn is_terminal(self) -> bool {
        self.index < 2
    }

    pub fn is_false(self) -> bool {
        self == NodeRef::FALSE
    }

    pub fn is_true(self) -> bool {
        self == NodeRef::TRUE
    }

    pub fn constant(b: bool) -> NodeRef {
        if b {
            NodeRef::TRUE
        } else {
            NodeRef::FALSE
        }
    }
}

impl fmt::Debug for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            0 => write!(f, "FALSE"),
            1 => write!(f, "TRUE"),
            i => write!(f, "@{}#{}", i, self.store),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    level: u32,
    lo: u32,
    hi: u32,
}

const TERMINAL_LEVEL: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    And,
    Or,
    Not,
    Exists,
    Restrict0,
    Restrict1,
}

/// One node of a serialized diagram. Child refs: 0 is FALSE, 1 is TRUE and
/// `k + 2` is the `k`-th node of the list, which must come earlier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SerNode {
    pub level: u32,
    pub lo: u32,
    pub hi: u32,
}

/// A diagram as a bottom-up node list, detached from any store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Serialized {
    pub nodes: Vec<SerNode>,
    pub root: u32,
}

impl Serialized {
    pub fn constant(b: bool) -> Serialized {
        Serialized { nodes: Vec::new(), root: b as u32 }
    }

    pub fn is_false(&self) -> bool {
        self.root == 0
    }

    pub fn is_true(&self) -> bool {
        self.root == 1
    }

    /// Nodes reachable from the root, terminals included.
    pub fn size(&self) -> usize {
        let mut seen = vec![false; self.nodes.len() + 2];
        let mut stack = vec![self.root];
        let mut count = 0;
        while let Some(r) = stack.pop() {
            let r = r as usize;
            if r >= seen.len() || seen[r] {
                continue;
            }
            seen[r] = true;
            count += 1;
            if r >= 2 {
                let n = self.nodes[r - 2];
                stack.push(n.lo);
                stack.push(n.hi);
            }
        }
        count
    }

    /// Levels tested anywhere in the list.
    pub fn levels(&self) -> FxHashSet<u32> {
        self.nodes.iter().map(|n| n.level).collect()
    }
}

/// Arena of hash-consed nodes under one [`VarOrder`].
pub struct ObddStore {
    id: u32,
    order: VarOrder,
    nodes: Vec<Node>,
    unique: FxHashMap<(u32, u32, u32), u32>,
    memo: FxHashMap<(Op, u32, u32), u32>,
    implied: FxHashSet<(u32, u32)>,
    cap: usize,
}

type Res<T> = Result<T, ObddError>;

impl ObddStore {
    pub fn new(order: VarOrder) -> ObddStore {
        ObddStore::with_cap(order, DEFAULT_NODE_CAP)
    }

    pub fn with_cap(order: VarOrder, cap: usize) -> ObddStore {
        let terminal = Node { level: TERMINAL_LEVEL, lo: 0, hi: 0 };
        ObddStore {
            id: NEXT_STORE_ID.fetch_add(1, Ordering::Relaxed),
            order,
            nodes: vec![terminal, terminal],
            unique: FxHashMap::default(),
            memo: FxHashMap::default(),
            implied: FxHashSet::default(),
            cap,
        }
    }

    pub fn order(&self) -> &VarOrder {
        &self.order
    }

    /// Number of nodes ever created, terminals included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node_cap(&self) -> usize {
        self.cap
    }

    /// Entries currently held by the operation caches.
    pub fn memo_len(&self) -> usize {
        self.memo.len() + self.implied.len()
    }

    /// Drops the operation caches. Nodes are never freed.
    pub fn clear_memo(&mut self) {
        self.memo.clear();
        self.implied.clear();
    }

    fn wrap(&self, index: u32) -> NodeRef {
        if index < 2 {
            NodeRef { store: 0, index }
        } else {
            NodeRef { store: self.id, index }
        }
    }

    fn unwrap(&self, r: NodeRef) -> Res<u32> {
        if r.index < 2 {
            return Ok(r.index);
        }
        if r.store != self.id || r.index as usize >= self.nodes.len() {
            return Err(ObddError::ForeignRef);
        }
        Ok(r.index)
    }

    fn level_of(&self, v: Var) -> Res<u32> {
        self.order.level(v).ok_or(ObddError::UnknownVar(v))
    }

    /// The variable tested at the root, `None` for terminals.
    pub fn top_var(&self, f: NodeRef) -> Res<Option<Var>> {
        let i = self.unwrap(f)?;
        let l = self.nodes[i as usize].level;
        Ok((l != TERMINAL_LEVEL).then(|| self.order.var_at(l)))
    }

    /// `(var, lo, hi)` of an inner node.
    pub fn node(&self, f: NodeRef) -> Res<Option<(Var, NodeRef, NodeRef)>> {
        let i = self.unwrap(f)?;
        if i < 2 {
            return Ok(None);
        }
        let n = self.nodes[i as usize];
        Ok(Some((self.order.var_at(n.level), self.wrap(n.lo), self.wrap(n.hi))))
    }

    fn mk(&mut self, level: u32, lo: u32, hi: u32) -> Res<u32> {
        if lo == hi {
            return Ok(lo);
        }
        let child = self.nodes[lo as usize].level.min(self.nodes[hi as usize].level);
        if level >= child {
            return Err(ObddError::OrderViolation { var: self.order.var_at(level), level, child });
        }
        if let Some(&i) = self.unique.get(&(level, lo, hi)) {
            return Ok(i);
        }
        if self.nodes.len() >= self.cap {
            return Err(ObddError::NodeCap(self.cap));
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(Node { level, lo, hi });
        self.unique.insert((level, lo, hi), i);
        Ok(i)
    }

    /// The node `if var then hi else lo`. Returns `lo` when `lo == hi`.
    pub fn mk_node(&mut self, var: Var, lo: NodeRef, hi: NodeRef) -> Res<NodeRef> {
        let level = self.level_of(var)?;
        let (lo, hi) = (self.unwrap(lo)?, self.unwrap(hi)?);
        let i = self.mk(level, lo, hi)?;
        Ok(self.wrap(i))
    }

    pub fn var_node(&mut self, var: Var) -> Res<NodeRef> {
        self.mk_node(var, NodeRef::FALSE, NodeRef::TRUE)
    }

    pub fn lit_node(&mut self, lit: Lit) -> Res<NodeRef> {
        if lit.is_negated() {
            self.mk_node(lit.var(), NodeRef::TRUE, NodeRef::FALSE)
        } else {
            self.var_node(lit.var())
        }
    }

    /// The disjunction of `lits`, built bottom-up as a chain.
    pub fn build_clause(&mut self, lits: &[Lit]) -> Res<NodeRef> {
        let mut by_level = Vec::with_capacity(lits.len());
        for &l in lits {
            by_level.push((self.level_of(l.var())?, l.is_negated()));
        }
        by_level.sort_unstable();
        by_level.dedup();
        if by_level.windows(2).any(|w| w[0].0 == w[1].0) {
            return Ok(NodeRef::TRUE);
        }
        let mut r = 0;
        for &(level, neg) in by_level.iter().rev() {
            r = if neg { self.mk(level, 1, r)? } else { self.mk(level, r, 1)? };
        }
        Ok(self.wrap(r))
    }

    fn cofactors(&self, f: u32, level: u32) -> (u32, u32) {
        let n = self.nodes[f as usize];
        if n.level == level {
            (n.lo, n.hi)
        } else {
            (f, f)
        }
    }

    fn top_level(&self, f: u32) -> u32 {
        self.nodes[f as usize].level
    }

    fn and_rec(&mut self, a: u32, b: u32) -> Res<u32> {
        if a == 0 || b == 0 {
            return Ok(0);
        }
        if a == 1 || a == b {
            return Ok(b);
        }
        if b == 1 {
            return Ok(a);
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if let Some(&r) = self.memo.get(&(Op::And, a, b)) {
            return Ok(r);
        }
        let level = self.top_level(a).min(self.top_level(b));
        let (a0, a1) = self.cofactors(a, level);
        let (b0, b1) = self.cofactors(b, level);
        let lo = self.and_rec(a0, b0)?;
        let hi = self.and_rec(a1, b1)?;
        let r = self.mk(level, lo, hi)?;
        self.memo.insert((Op::And, a, b), r);
        Ok(r)
    }

    fn or_rec(&mut self, a: u32, b: u32) -> Res<u32> {
        if a == 1 || b == 1 {
            return Ok(1);
        }
        if a == 0 || a == b {
            return Ok(b);
        }
        if b == 0 {
            return Ok(a);
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if let Some(&r) = self.memo.get(&(Op::Or, a, b)) {
            return Ok(r);
        }
        let level = self.top_level(a).min(self.top_level(b));
        let (a0, a1) = self.cofactors(a, level);
        let (b0, b1) = self.cofactors(b, level);
        let lo = self.or_rec(a0, b0)?;
        let hi = self.or_rec(a1, b1)?;
        let r = self.mk(level, lo, hi)?;
        self.memo.insert((Op::Or, a, b), r);
        Ok(r)
    }

    fn not_rec(&mut self, a: u32) -> Res<u32> {
        if a < 2 {
            return Ok(1 - a);
        }
        if let Some(&r) = self.memo.get(&(Op::Not, a, 0)) {
            return Ok(r);
        }
        let n = self.nodes[a as usize];
        let lo = self.not_rec(n.lo)?;
        let hi = self.not_rec(n.hi)?;
        let r = self.mk(n.level, lo, hi)?;
        self.memo.insert((Op::Not, a, 0), r);
        Ok(r)
    }

    fn exists_rec(&mut self, f: u32, level: u32) -> Res<u32> {
        let n = self.nodes[f as usize];
        if n.level > level {
            return Ok(f);
        }
        if n.level == level {
            return self.or_rec(n.lo, n.hi);
        }
        if let Some(&r) = self.memo.get(&(Op::Exists, f, level)) {
            return Ok(r);
        }
        let lo = self.exists_rec(n.lo, level)?;
        let hi = self.exists_rec(n.hi, level)?;
        let r = self.mk(n.level, lo, hi)?;
        self.memo.insert((Op::Exists, f, level), r);
        Ok(r)
    }

    fn restrict_rec(&mut self, f: u32, level: u32, value: bool) -> Res<u32> {
        let n = self.nodes[f as usize];
        if n.level > level {
            return Ok(f);
        }
        if n.level == level {
            return Ok(if value { n.hi } else { n.lo });
        }
        let op = if value { Op::Restrict1 } else { Op::Restrict0 };
        if let Some(&r) = self.memo.get(&(op, f, level)) {
            return Ok(r);
        }
        let lo = self.restrict_rec(n.lo, level, value)?;
        let hi = self.restrict_rec(n.hi, level, value)?;
        let r = self.mk(n.level, lo, hi)?;
        self.memo.insert((op, f, level), r);
        Ok(r)
    }

    fn implies_rec(&mut self, a: u32, b: u32) -> bool {
        if a == 0 || b == 1 || a == b {
            return true;
        }
        if a == 1 || b == 0 {
            return false;
        }
        if self.implied.contains(&(a, b)) {
            return true;
        }
        let level = self.top_level(a).min(self.top_level(b));
        let (a0, a1) = self.cofactors(a, level);
        let (b0, b1) = self.cofactors(b, level);
        let ok = self.implies_rec(a0, b0) && self.implies_rec(a1, b1);
        if ok {
            self.implied.insert((a, b));
        }
        ok
    }

    pub fn and(&mut self, a: NodeRef, b: NodeRef) -> Res<NodeRef> {
        let (a, b) = (self.unwrap(a)?, self.unwrap(b)?);
        let r = self.and_rec(a, b)?;
        Ok(self.wrap(r))
    }

    pub fn or(&mut self, a: NodeRef, b: NodeRef) -> Res<NodeRef> {
        let (a, b) = (self.unwrap(a)?, self.unwrap(b)?);
        let r = self.or_rec(a, b)?;
        Ok(self.wrap(r))
    }

    pub fn not(&mut self, a: NodeRef) -> Res<NodeRef> {
        let a = self.unwrap(a)?;
        let r = self.not_rec(a)?;
        Ok(self.wrap(r))
    }

    /// `∃var. f`
    pub fn exists(&mut self, f: NodeRef, var: Var) -> Res<NodeRef> {
        let (f, level) = (self.unwrap(f)?, self.level_of(var)?);
        let r = self.exists_rec(f, level)?;
        Ok(self.wrap(r))
    }

    /// `f[var := value]`
    pub fn restrict(&mut self, f: NodeRef, var: Var, value: bool) -> Res<NodeRef> {
        let (f, level) = (self.unwrap(f)?, self.level_of(var)?);
        let r = self.restrict_rec(f, level, value)?;
        Ok(self.wrap(r))
    }

    /// Whether `a ∧ ¬b` is unsatisfiable. Builds no nodes.
    pub fn implies(&mut self, a: NodeRef, b: NodeRef) -> Res<bool> {
        let (a, b) = (self.unwrap(a)?, self.unwrap(b)?);
        Ok(self.implies_rec(a, b))
    }

    /// Value of `f` under an assignment indexed by variable id.
    pub fn eval(&self, f: NodeRef, values: &[bool]) -> Res<bool> {
        let mut i = self.unwrap(f)?;
        while i >= 2 {
            let n = self.nodes[i as usize];
            let v = self.order.var_at(n.level);
            let b = *values.get(v.index()).ok_or(ObddError::UnknownVar(v))?;
            i = if b { n.hi } else { n.lo };
        }
        Ok(i == 1)
    }

    fn reachable(&self, f: u32) -> Vec<u32> {
        let mut seen = FxHashSet::default();
        let mut out = Vec::new();
        let mut stack = vec![f];
        while let Some(i) = stack.pop() {
            if !seen.insert(i) {
                continue;
            }
            out.push(i);
            if i >= 2 {
                let n = self.nodes[i as usize];
                stack.push(n.lo);
                stack.push(n.hi);
            }
        }
        out
    }

    /// Number of nodes reachable from `f`, terminals included.
    pub fn size(&self, f: NodeRef) -> Res<usize> {
        let f = self.unwrap(f)?;
        Ok(self.reachable(f).len())
    }

    /// Variables tested by `f`, top to bottom.
    pub fn support(&self, f: NodeRef) -> Res<Vec<Var>> {
        let f = self.unwrap(f)?;
        let mut levels: Vec<u32> = self
            .reachable(f)
            .into_iter()
            .filter(|&i| i >= 2)
            .map(|i| self.nodes[i as usize].level)
            .collect();
        levels.sort_unstable();
        levels.dedup();
        Ok(levels.into_iter().map(|l| self.order.var_at(l)).collect())
    }

    /// Detached copy of `f`, levels relative to this store's order.
    pub fn export(&self, f: NodeRef) -> Res<Serialized> {
        let f = self.unwrap(f)?;
        if f < 2 {
            return Ok(Serialized { nodes: Vec::new(), root: f });
        }
        let mut pos: FxHashMap<u32, u32> = FxHashMap::default();
        let mut nodes = Vec::new();
        // Post-order with an explicit stack; a node is emitted once both children are.
        let mut stack = vec![(f, false)];
        while let Some((i, expanded)) = stack.pop() {
            if i < 2 || pos.contains_key(&i) {
                continue;
            }
            let n = self.nodes[i as usize];
            if expanded {
                let r = |c: u32| if c < 2 { c } else { pos[&c] };
                let s = SerNode { level: n.level, lo: r(n.lo), hi: r(n.hi) };
                pos.insert(i, nodes.len() as u32 + 2);
                nodes.push(s);
            } else {
                stack.push((i, true));
                stack.push((n.hi, false));
                stack.push((n.lo, false));
            }
        }
        Ok(Serialized { root: pos[&f], nodes })
    }

    /// Rebuilds a serialized diagram in this store. The result is reduced even
    /// if the input was not.
    pub fn import(&mut self, s: &Serialized) -> Res<NodeRef> {
        let mut map: Vec<u32> = Vec::with_capacity(s.nodes.len() + 2);
        map.push(0);
        map.push(1);
        for (k, n) in s.nodes.iter().enumerate() {
            let limit = k as u32 + 2;
            if n.lo >= limit || n.hi >= limit {
                return Err(ObddError::Malformed(format!("node {k} refers forward")));
            }
            if n.level as usize >= self.order.len() {
                return Err(ObddError::Malformed(format!("node {k} has level {} out of range", n.level)));
            }
            let (lo, hi) = (map[n.lo as usize], map[n.hi as usize]);
            map.push(self.mk(n.level, lo, hi)?);
        }
        let root = *map
            .get(s.root as usize)
            .ok_or_else(|| ObddError::Malformed("root out of range".into()))?;
        Ok(self.wrap(root))
    }

    /// Rebuilds `s` with each level sent through `map`: `Ok(level)` renames,
    /// `Err(b)` fixes that variable to `b`. Renaming must keep relative order.
    pub fn import_mapped(
        &mut self,
        s: &Serialized,
        map: impl Fn(u32) -> Result<u32, bool>,
    ) -> Res<NodeRef> {
        let mut out: Vec<u32> = vec![0, 1];
        for (k, n) in s.nodes.iter().enumerate() {
            let limit = k as u32 + 2;
            if n.lo >= limit || n.hi >= limit {
                return Err(ObddError::Malformed(format!("node {k} refers forward")));
            }
            let (lo, hi) = (out[n.lo as usize], out[n.hi as usize]);
            let r = match map(n.level) {
                Ok(level) => {
                    if level as usize >= self.order.len() {
                        return Err(ObddError::Malformed(format!("mapped level {level} out of range")));
                    }
                    self.mk(level, lo, hi)?
                }
                Err(b) => {
                    if b {
                        hi
                    } else {
                        lo
                    }
                }
            };
            out.push(r);
        }
        let root = *out
            .get(s.root as usize)
            .ok_or_else(|| ObddError::Malformed("root out of range".into()))?;
        Ok(self.wrap(root))
    }
}
