//! Partitions of the matching variables, densities, reduction layouts,
//! search protocols and the set-disjointness reduction.
//!
//! Vertex sets are `u64` masks over `[3m]`, so every routine here requires
//! `3m <= 64`.

pub mod ddwb;
pub mod density;
pub mod layout;
pub mod lemmas;
pub mod protocol;
pub mod sim;

use std::fmt;

use thiserror::Error;

use crate::cnf::{Edge, MatchLayout, Role};
use crate::var::Var;

pub use density::{density, density_profile, Delta, DensityMode, Profile};
pub use layout::{
    build_assignment, enumerate_layouts, hamming_distance, involution, is_switchable, k12, layout_mass, n_guard,
    planted_edge, pm, sample_layout, tm, validate_layout, Layout, SampleError,
};
pub use protocol::{
    audit_locality, run_protocol, BroadcastProtocol, PlayerView, ProofProtocol, SearchProtocol, Transcript, Turn,
};
pub use sim::{run_reduction, SetDisjInstance};

/// Largest `m` whose vertex sets fit in a `u64`.
pub const MAX_M: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    I,
    II,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::I => Side::II,
            Side::II => Side::I,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::I => "I",
            Side::II => "II",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("m = {0} is outside 1..={MAX_M}")]
    BadM(usize),
    #[error("expected {expected} sides, got {got}")]
    Length { expected: usize, got: usize },
    #[error("partition line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A split of MVars_m between the edge player (I) and the vertex player (II).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub m: usize,
    side: Vec<Side>,
}

impl Partition {
    pub fn new(m: usize, side: Vec<Side>) -> Result<Partition, PartitionError> {
        if m == 0 || m > MAX_M {
            return Err(PartitionError::BadM(m));
        }
        let expected = MatchLayout::new(m).num_mvars();
        if side.len() != expected {
            return Err(PartitionError::Length { expected, got: side.len() });
        }
        Ok(Partition { m, side })
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(Role) -> Side) -> Result<Partition, PartitionError> {
        if m == 0 || m > MAX_M {
            return Err(PartitionError::BadM(m));
        }
        Partition::new(m, MatchLayout::new(m).roles().into_iter().map(&mut f).collect())
    }

    /// Every edge variable to I, every vertex variable to II.
    pub fn full(m: usize) -> Result<Partition, PartitionError> {
        Partition::from_fn(m, |r| match r {
            Role::Edge { .. } => Side::I,
            _ => Side::II,
        })
    }

    /// Each edge variable goes to I and each vertex variable to II with
    /// probability `bias`, independently; `bias = 0.5` is uniform.
    pub fn random<R: rand::Rng>(m: usize, bias: f64, rng: &mut R) -> Result<Partition, PartitionError> {
        Partition::from_fn(m, |r| {
            let home = match r {
                Role::Edge { .. } => Side::I,
                _ => Side::II,
            };
            if rng.gen_bool(bias) { home } else { home.other() }
        })
    }

    pub fn layout(&self) -> MatchLayout {
        MatchLayout::new(self.m)
    }

    pub fn side(&self, v: Var) -> Side {
        self.side[v.index()]
    }

    /// Sides indexed by matching variable.
    pub fn sides(&self) -> &[Side] {
        &self.side
    }

    /// `E_i` as adjacency masks: bit `v` of `adj[i][u]` is set when
    /// `x^i_{u,v}` belongs to player I.
    pub fn edge_adjacency(&self) -> Vec<Vec<u64>> {
        let lay = self.layout();
        let n = lay.vertices();
        (0..self.m)
            .map(|i| {
                let mut adj = vec![0u64; n];
                for e in lay.edges() {
                    if self.side(lay.edge_var(i, e)) == Side::I {
                        adj[e.u as usize] |= 1 << e.v;
                        adj[e.v as usize] |= 1 << e.u;
                    }
                }
                adj
            })
            .collect()
    }

    /// `V_j` as masks: vertices whose `y^j_u` belongs to player II.
    pub fn vertex_masks(&self) -> Vec<u64> {
        let lay = self.layout();
        (0..lay.vertex_slots())
            .map(|j| {
                (0..lay.vertices() as u32)
                    .filter(|&u| self.side(lay.vertex_var(j, u)) == Side::II)
                    .fold(0u64, |acc, u| acc | 1 << u)
            })
            .collect()
    }

    /// One `<role-tag> <I|II>` line per variable.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (role, side) in self.layout().roles().iter().zip(&self.side) {
            out.push_str(&format!("{role} {side}\n"));
        }
        out
    }

    pub fn parse(m: usize, text: &str) -> Result<Partition, PartitionError> {
        if m == 0 || m > MAX_M {
            return Err(PartitionError::BadM(m));
        }
        let lay = MatchLayout::new(m);
        let mut side: Vec<Option<Side>> = vec![None; lay.num_mvars()];
        for (k, raw) in text.lines().enumerate() {
            let err = |msg: String| PartitionError::Parse { line: k + 1, msg };
            let toks: Vec<&str> = raw.split_whitespace().collect();
            let [tag, s] = toks.as_slice() else {
                if toks.is_empty() {
                    continue;
                }
                return Err(err(format!("expected `<role> <side>`, got {raw:?}")));
            };
            let role: Role = tag.parse().map_err(|_| err(format!("bad role {tag:?}")))?;
            let v = lay.var_of(role).ok_or_else(|| err(format!("{tag} is not a matching variable of m={m}")))?;
            let s = match *s {
                "I" => Side::I,
                "II" => Side::II,
                _ => return Err(err(format!("bad side {s:?}"))),
            };
            if side[v.index()].replace(s).is_some() {
                return Err(err(format!("{tag} listed twice")));
            }
        }
        let got = side.iter().filter(|s| s.is_some()).count();
        let side: Option<Vec<Side>> = side.into_iter().collect();
        side.ok_or(PartitionError::Length { expected: lay.num_mvars(), got }).and_then(|s| Partition::new(m, s))
    }
}

/// Splits at the first position where either half of the edge variables or
/// half of the vertex variables has been listed. Permutation bits and any
/// non-matching roles are skipped. Returns the partition and that position
/// (1-based count of matching variables in the prefix).
pub fn split_by_order(order: &[Role], m: usize) -> Result<(Partition, usize), PartitionError> {
    let lay = MatchLayout::new(m);
    let mvars: Vec<Role> = order.iter().copied().filter(|r| lay.var_of(*r).is_some()).collect();
    if m == 0 || m > MAX_M {
        return Err(PartitionError::BadM(m));
    }
    if mvars.len() != lay.num_mvars() {
        return Err(PartitionError::Length { expected: lay.num_mvars(), got: mvars.len() });
    }
    let (mut evars, mut vvars) = (0usize, 0usize);
    let mut cut = None;
    for (k, r) in mvars.iter().enumerate() {
        match r {
            Role::Edge { .. } => evars += 1,
            _ => vvars += 1,
        }
        // evars >= (m/2) C(3m,2)  or  vvars >= ((2m+1)/2) 3m
        if 2 * evars >= lay.num_edge_vars() {
            cut = Some((k + 1, Side::I));
            break;
        }
        if 2 * vvars >= lay.num_vertex_vars() {
            cut = Some((k + 1, Side::II));
            break;
        }
    }
    let (i0, prefix_side) = cut.expect("one of the halves is always reached");
    let mut side = vec![prefix_side.other(); lay.num_mvars()];
    for r in &mvars[..i0] {
        side[lay.var_of(*r).unwrap().index()] = prefix_side;
    }
    Ok((Partition::new(m, side)?, i0))
}

/// Edges of `adj` with both endpoints in `w`.
pub fn edges_within(adj: &[u64], w: u64) -> u64 {
    let mut twice = 0u64;
    let mut rest = w;
    while rest != 0 {
        let u = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        twice += (adj[u] & w).count_ones() as u64;
    }
    twice / 2
}

/// Whether `e` lies in `adj` with both endpoints in `w`.
pub fn has_edge_within(adj: &[u64], w: u64, e: Edge) -> bool {
    w >> e.u & 1 == 1 && w >> e.v & 1 == 1 && adj[e.u as usize] >> e.v & 1 == 1
}
