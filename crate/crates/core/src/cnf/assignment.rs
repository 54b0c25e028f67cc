//! Assignments to the matching variables.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Edge, MatchLayout};
use crate::var::Var;

/// A total assignment to MVars_m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MAssignment {
    pub m: usize,
    bits: Vec<bool>,
}

impl MAssignment {
    /// All-false assignment.
    pub fn new(m: usize) -> MAssignment {
        MAssignment { m, bits: vec![false; MatchLayout::new(m).num_mvars()] }
    }

    pub fn layout(&self) -> MatchLayout {
        MatchLayout::new(self.m)
    }

    pub fn edge(&self, slot: usize, e: Edge) -> bool {
        self.bits[self.layout().edge_var(slot, e).index()]
    }

    pub fn set_edge(&mut self, slot: usize, e: Edge, b: bool) {
        let k = self.layout().edge_var(slot, e).index();
        self.bits[k] = b;
    }

    pub fn vertex(&self, slot: usize, u: u32) -> bool {
        self.bits[self.layout().vertex_var(slot, u).index()]
    }

    pub fn set_vertex(&mut self, slot: usize, u: u32, b: bool) {
        let k = self.layout().vertex_var(slot, u).index();
        self.bits[k] = b;
    }

    /// Value of a matching variable (0-based, no offset).
    pub fn get(&self, v: Var) -> bool {
        self.bits[v.index()]
    }

    /// Values indexed by matching variable.
    pub fn values(&self) -> &[bool] {
        &self.bits
    }

    pub fn from_values(m: usize, bits: Vec<bool>) -> MAssignment {
        assert_eq!(bits.len(), MatchLayout::new(m).num_mvars());
        MAssignment { m, bits }
    }

    /// Edges set in slot `i`.
    pub fn slot_edges(&self, i: usize) -> Vec<Edge> {
        self.layout().edges().into_iter().filter(|&e| self.edge(i, e)).collect()
    }

    /// Vertices set in vertex slot `j`.
    pub fn slot_vertices(&self, j: usize) -> Vec<u32> {
        (0..3 * self.m as u32).filter(|&u| self.vertex(j, u)).collect()
    }
}

/// Satisfies clause types 1 to 4: every slot is filled, edges in distinct
/// slots are disjoint, vertex slots are filled and pairwise disjoint.
pub fn is_nondegenerate(a: &MAssignment) -> bool {
    let lay = a.layout();
    let slot_edges: Vec<Vec<Edge>> = (0..lay.m).map(|i| a.slot_edges(i)).collect();
    if slot_edges.iter().any(|s| s.is_empty()) {
        return false;
    }
    for i in 0..lay.m {
        for j in i + 1..lay.m {
            if slot_edges[i].iter().any(|e| slot_edges[j].iter().any(|f| e.meets(*f))) {
                return false;
            }
        }
    }
    let mut owner = vec![None; lay.vertices()];
    for j in 0..lay.vertex_slots() {
        let vs = a.slot_vertices(j);
        if vs.is_empty() {
            return false;
        }
        for u in vs {
            if owner[u as usize].replace(j).is_some() {
                return false;
            }
        }
    }
    true
}

/// Edges set in some slot whose endpoints are both selected by vertex slots.
pub fn find_bad_edges(a: &MAssignment) -> Vec<Edge> {
    let lay = a.layout();
    let selected: Vec<bool> = (0..lay.vertices() as u32)
        .map(|u| (0..lay.vertex_slots()).any(|j| a.vertex(j, u)))
        .collect();
    lay.edges()
        .into_iter()
        .filter(|e| selected[e.u as usize] && selected[e.v as usize])
        .filter(|&e| (0..lay.m).any(|k| a.edge(k, e)))
        .collect()
}

/// A random assignment satisfying types 1 to 4. Starts from a matching and
/// distinct vertices, then sprinkles extra bits that keep the slots disjoint.
pub fn random_nondegenerate<R: Rng>(m: usize, rng: &mut R) -> MAssignment {
    let lay = MatchLayout::new(m);
    let mut a = MAssignment::new(m);
    let mut verts: Vec<u32> = (0..lay.vertices() as u32).collect();
    verts.shuffle(rng);
    let mut touched: Vec<Option<usize>> = vec![None; lay.vertices()];
    for i in 0..m {
        let e = Edge::new(verts[2 * i], verts[2 * i + 1]);
        a.set_edge(i, e, true);
        touched[e.u as usize] = Some(i);
        touched[e.v as usize] = Some(i);
    }
    for _ in 0..rng.gen_range(0..=m) {
        let i = rng.gen_range(0..m);
        let (x, y) = (rng.gen_range(0..lay.vertices() as u32), rng.gen_range(0..lay.vertices() as u32));
        if x == y {
            continue;
        }
        let free = |w: u32| touched[w as usize].is_none_or(|s| s == i);
        if free(x) && free(y) {
            a.set_edge(i, Edge::new(x, y), true);
            touched[x as usize] = Some(i);
            touched[y as usize] = Some(i);
        }
    }
    verts.shuffle(rng);
    let mut owner: Vec<Option<usize>> = vec![None; lay.vertices()];
    for j in 0..lay.vertex_slots() {
        a.set_vertex(j, verts[j], true);
        owner[verts[j] as usize] = Some(j);
    }
    for u in 0..lay.vertices() {
        if owner[u].is_none() && rng.gen_bool(0.2) {
            let j = rng.gen_range(0..lay.vertex_slots());
            a.set_vertex(j, u as u32, true);
            owner[u] = Some(j);
        }
    }
    a
}
