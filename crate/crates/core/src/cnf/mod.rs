//! CNF formulas with role-tagged variables, and the formula families.

mod assignment;
mod dimacs;
mod families;
mod perm;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::var::{Lit, Var};

pub use assignment::{find_bad_edges, is_nondegenerate, random_nondegenerate, MAssignment};
pub use dimacs::{parse_dimacs, parse_name_map, write_dimacs, write_name_map};
pub use families::{gen_indmatch, gen_match, gen_php, match_clause_type, perm_bits};
pub use perm::{Gf3k, PermFamily};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("parameter must be at least 1")]
    ZeroParam,
    #[error("m = {0} is not a power of 3")]
    NotPowerOfThree(usize),
    #[error("field of size 3^{0} is not supported")]
    FieldTooLarge(u32),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An unordered vertex pair, stored with `u < v`. Vertices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
}

impl Edge {
    pub fn new(a: u32, b: u32) -> Edge {
        assert_ne!(a, b, "an edge needs two distinct endpoints");
        Edge { u: a.min(b), v: a.max(b) }
    }

    pub fn touches(self, w: u32) -> bool {
        self.u == w || self.v == w
    }

    pub fn meets(self, other: Edge) -> bool {
        self.touches(other.u) || self.touches(other.v)
    }
}

/// What a variable stands for. Slot, vertex and bit indices are 0-based;
/// the printed tags are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// `x^slot_edge`
    Edge { slot: u32, edge: Edge },
    /// `y^slot_vertex`
    Vertex { slot: u32, vertex: u32 },
    /// `z_bit`
    Perm { bit: u32 },
    /// pigeon `p` sits in hole `h`
    Hole { pigeon: u32, hole: u32 },
    /// An untagged variable, by 0-based id.
    Plain(u32),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Role::Edge { slot, edge } => write!(f, "x{}_{}_{}", slot + 1, edge.u + 1, edge.v + 1),
            Role::Vertex { slot, vertex } => write!(f, "y{}_{}", slot + 1, vertex + 1),
            Role::Perm { bit } => write!(f, "z{}", bit + 1),
            Role::Hole { pigeon, hole } => write!(f, "p{}_{}", pigeon + 1, hole + 1),
            Role::Plain(k) => write!(f, "v{}", k + 1),
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Role, String> {
        let bad = || format!("bad role tag {s:?}");
        let (head, rest) = s.split_at(s.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?);
        let nums: Vec<u32> = rest
            .split('_')
            .map(|p| p.parse::<u32>().ok().filter(|&k| k >= 1).map(|k| k - 1))
            .collect::<Option<_>>()
            .ok_or_else(bad)?;
        match (head, nums.as_slice()) {
            ("x", &[slot, a, b]) if a < b => Ok(Role::Edge { slot, edge: Edge::new(a, b) }),
            ("y", &[slot, vertex]) => Ok(Role::Vertex { slot, vertex }),
            ("z", &[bit]) => Ok(Role::Perm { bit }),
            ("p", &[pigeon, hole]) => Ok(Role::Hole { pigeon, hole }),
            ("v", &[k]) => Ok(Role::Plain(k)),
            _ => Err(bad()),
        }
    }
}

/// Which generator produced a formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Match { m: usize },
    IndMatch { m: usize },
    Php { n: usize },
    Plain,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Match { m } => write!(f, "match {m}"),
            Family::IndMatch { m } => write!(f, "indmatch {m}"),
            Family::Php { n } => write!(f, "php {n}"),
            Family::Plain => write!(f, "plain"),
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Family, String> {
        let mut it = s.split_whitespace();
        let tag = it.next().unwrap_or("");
        let param = it.next().map(|p| p.parse::<usize>());
        match (tag, param, it.next()) {
            ("plain", None, None) => Ok(Family::Plain),
            ("match", Some(Ok(m)), None) => Ok(Family::Match { m }),
            ("indmatch", Some(Ok(m)), None) => Ok(Family::IndMatch { m }),
            ("php", Some(Ok(n)), None) => Ok(Family::Php { n }),
            _ => Err(format!("unknown family {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
    pub roles: Vec<Role>,
    pub family: Family,
}

impl Cnf {
    /// A formula with untagged variables.
    pub fn plain(num_vars: usize, clauses: Vec<Vec<Lit>>) -> Cnf {
        Cnf {
            num_vars,
            clauses,
            roles: (0..num_vars as u32).map(Role::Plain).collect(),
            family: Family::Plain,
        }
    }

    pub fn name(&self, v: Var) -> String {
        self.roles[v.index()].to_string()
    }

    pub fn names(&self) -> Vec<String> {
        self.roles.iter().map(|r| r.to_string()).collect()
    }

    /// Variable by printed tag.
    pub fn var_by_name(&self, name: &str) -> Option<Var> {
        let role: Role = name.parse().ok()?;
        self.roles.iter().position(|&r| r == role).map(|i| Var(i as u32))
    }

    pub fn eval(&self, values: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(values)))
    }

    /// First clause falsified by `values`.
    pub fn falsified(&self, values: &[bool]) -> Option<usize> {
        self.clauses.iter().position(|c| !c.iter().any(|l| l.eval(values)))
    }

    /// Number of occurrences of each variable.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0; self.num_vars];
        for c in &self.clauses {
            for l in c {
                occ[l.var().index()] += 1;
            }
        }
        occ
    }
}

/// `n choose 2`
pub fn choose2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Index arithmetic for the matching variables of a fixed `m`, optionally
/// shifted by `offset` (the permutation bits come first in IndMatch).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchLayout {
    pub m: usize,
    pub offset: usize,
}

impl MatchLayout {
    pub fn new(m: usize) -> MatchLayout {
        MatchLayout { m, offset: 0 }
    }

    pub fn vertices(&self) -> usize {
        3 * self.m
    }

    pub fn vertex_slots(&self) -> usize {
        2 * self.m + 1
    }

    /// `C(3m, 2)`
    pub fn num_edges(&self) -> usize {
        choose2(self.vertices())
    }

    pub fn num_edge_vars(&self) -> usize {
        self.m * self.num_edges()
    }

    pub fn num_vertex_vars(&self) -> usize {
        self.vertex_slots() * self.vertices()
    }

    pub fn num_mvars(&self) -> usize {
        self.num_edge_vars() + self.num_vertex_vars()
    }

    /// Position of `e` among all pairs in lexicographic order.
    pub fn edge_index(&self, e: Edge) -> usize {
        let n = self.vertices();
        let (u, v) = (e.u as usize, e.v as usize);
        u * (2 * n - u - 1) / 2 + (v - u - 1)
    }

    /// All pairs in lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.vertices() as u32;
        (0..n).flat_map(|u| (u + 1..n).map(move |v| Edge::new(u, v))).collect()
    }

    pub fn edge_var(&self, slot: usize, e: Edge) -> Var {
        Var((self.offset + slot * self.num_edges() + self.edge_index(e)) as u32)
    }

    pub fn vertex_var(&self, slot: usize, vertex: u32) -> Var {
        Var((self.offset + self.num_edge_vars() + slot * self.vertices() + vertex as usize) as u32)
    }

    pub fn roles(&self) -> Vec<Role> {
        let mut roles = Vec::with_capacity(self.num_mvars());
        for slot in 0..self.m as u32 {
            roles.extend(self.edges().into_iter().map(|edge| Role::Edge { slot, edge }));
        }
        for slot in 0..self.vertex_slots() as u32 {
            roles.extend((0..self.vertices() as u32).map(|vertex| Role::Vertex { slot, vertex }));
        }
        roles
    }

    /// Variable of a matching role.
    pub fn var_of(&self, role: Role) -> Option<Var> {
        match role {
            Role::Edge { slot, edge }
                if (slot as usize) < self.m && (edge.v as usize) < self.vertices() =>
            {
                Some(self.edge_var(slot as usize, edge))
            }
            Role::Vertex { slot, vertex }
                if (slot as usize) < self.vertex_slots() && (vertex as usize) < self.vertices() =>
            {
                Some(self.vertex_var(slot as usize, vertex))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_tags_roundtrip() {
        let roles = [
            Role::Edge { slot: 0, edge: Edge::new(4, 2) },
            Role::Vertex { slot: 6, vertex: 8 },
            Role::Perm { bit: 3 },
            Role::Hole { pigeon: 1, hole: 0 },
            Role::Plain(11),
        ];
        for r in roles {
            assert_eq!(r.to_string().parse::<Role>().unwrap(), r);
        }
        assert_eq!(Role::Edge { slot: 0, edge: Edge::new(4, 2) }.to_string(), "x1_3_5");
        for bad in ["x1_5_3", "y0_1", "q1", "z", "y1_2_", "v1x"] {
            assert!(bad.parse::<Role>().is_err(), "{bad}");
        }
    }

    #[test]
    fn edge_index_is_lexicographic_rank() {
        for m in 1..=4 {
            let lay = MatchLayout::new(m);
            for (k, e) in lay.edges().into_iter().enumerate() {
                assert_eq!(lay.edge_index(e), k);
            }
            assert_eq!(lay.edges().len(), lay.num_edges());
        }
    }

    #[test]
    fn layout_roles_match_var_of() {
        let lay = MatchLayout::new(2);
        for (k, r) in lay.roles().into_iter().enumerate() {
            assert_eq!(lay.var_of(r), Some(Var(k as u32)));
        }
    }
}
