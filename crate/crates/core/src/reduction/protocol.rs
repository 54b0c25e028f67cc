//! Two-party FindBadEdge protocols over a partition.
//!
//! A protocol is driven through a public state that both players derive
//! from the transcript alone. The speaker sees only a [`PlayerView`] holding
//! its own side's variables, so every message is a function of that view
//! and the transcript; [`audit_locality`] replays transcripts against
//! perturbed views to confirm it.

use rand::Rng;
use thiserror::Error;

use super::{Partition, Side};
use crate::cnf::{find_bad_edges, Cnf, Edge, MAssignment, Role};
use crate::obdd::Serialized;
use crate::proof::{check_refutation, Derivation, Rule};
use crate::var::Var;

/// One message.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Turn {
    pub who: Side,
    pub bits: u32,
    pub value: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub turns: Vec<Turn>,
}

impl Transcript {
    pub fn bits(&self) -> usize {
        self.turns.iter().map(|t| t.bits as usize).sum()
    }
}

/// One player's values: `Some` on its own side, `None` elsewhere.
#[derive(Clone, Debug)]
pub struct PlayerView {
    pub side: Side,
    values: Vec<Option<bool>>,
}

impl PlayerView {
    pub fn new(p: &Partition, a: &MAssignment, side: Side) -> PlayerView {
        let values = a.values().iter().zip(p.sides()).map(|(&b, &s)| (s == side).then_some(b)).collect();
        PlayerView { side, values }
    }

    /// Value of a matching variable; panics on the other side's variables.
    pub fn get(&self, v: Var) -> bool {
        self.values[v.index()].unwrap_or_else(|| panic!("{} read a variable it does not hold", self.side))
    }

    pub fn owns(&self, v: Var) -> bool {
        self.values[v.index()].is_some()
    }

    fn own_values(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.values.iter().enumerate().filter_map(|(k, v)| v.map(|b| (k, b)))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("derivation is not a checked refutation: {0}")]
    NotRefutation(String),
    #[error("variable {0} is not a matching variable")]
    NotMatching(String),
    #[error("order interleaves the two sides (variable {0} switches back)")]
    NotSplit(String),
    #[error("partition is for m = {got}, expected {expected}")]
    WrongM { expected: usize, got: usize },
    #[error("walk reached clause {0}, which names no bad edge")]
    NoBadEdge(usize),
    #[error("protocol exceeded {0} turns")]
    Runaway(usize),
}

/// A protocol as a public state machine.
pub trait SearchProtocol {
    type State: Clone;

    fn partition(&self) -> &Partition;
    fn start(&self) -> Self::State;
    /// Who speaks next, or `None` once the output is determined.
    fn speaker(&self, st: &Self::State) -> Option<Side>;
    fn speak(&self, st: &Self::State, view: &PlayerView) -> Turn;
    fn advance(&self, st: &mut Self::State, turn: &Turn);
    fn output(&self, st: &Self::State) -> Result<Edge, ProtocolError>;
}

const MAX_TURNS: usize = 1 << 24;

/// Runs `proto` on `a` and returns the announced edge and the transcript.
pub fn run_protocol<P: SearchProtocol>(proto: &P, a: &MAssignment) -> Result<(Edge, Transcript), ProtocolError> {
    let p = proto.partition();
    let views = [PlayerView::new(p, a, Side::I), PlayerView::new(p, a, Side::II)];
    let mut st = proto.start();
    let mut tr = Transcript::default();
    while let Some(who) = proto.speaker(&st) {
        if tr.turns.len() >= MAX_TURNS {
            return Err(ProtocolError::Runaway(MAX_TURNS));
        }
        let view = &views[(who == Side::II) as usize];
        let turn = proto.speak(&st, view);
        debug_assert_eq!(turn.who, who);
        proto.advance(&mut st, &turn);
        tr.turns.push(turn);
    }
    Ok((proto.output(&st)?, tr))
}

/// Replays `tr` (a run on `a`) for each player against `trials` random
/// assignments that agree with `a` on that player's side only. Returns the
/// number of turns whose recomputed message differed.
pub fn audit_locality<P: SearchProtocol, R: Rng>(
    proto: &P,
    a: &MAssignment,
    tr: &Transcript,
    trials: usize,
    rng: &mut R,
) -> usize {
    let p = proto.partition();
    let mut mismatches = 0;
    for side in [Side::I, Side::II] {
        for _ in 0..trials {
            let bits: Vec<bool> = a
                .values()
                .iter()
                .zip(p.sides())
                .map(|(&b, &s)| if s == side { b } else { rng.gen() })
                .collect();
            let other = MAssignment::from_values(a.m, bits);
            let view = PlayerView::new(p, &other, side);
            let mut st = proto.start();
            for turn in &tr.turns {
                if turn.who == side && proto.speak(&st, &view) != *turn {
                    mismatches += 1;
                }
                proto.advance(&mut st, turn);
            }
        }
    }
    mismatches
}

fn ceil_log2(n: usize) -> u32 {
    n.next_power_of_two().trailing_zeros()
}

/// The search protocol read off a refutation of Match_m.
///
/// Both players walk the proof from the `FALSE` line keeping a line that
/// the input falsifies. Projection and Subsumption lines need no talk: a
/// falsified `∃x g` or a falsified consequence of `g` means `g` itself is
/// falsified by the same input. At a Conjunction the players evaluate the
/// first antecedent together: the owner of the upper part of the order
/// follows the diagram until it meets a variable of the other side and
/// broadcasts that node's index, then the other player finishes the path
/// and sends the one-bit result. The walk ends at a falsified axiom, which
/// for a non-degenerate input is a type-5 clause naming a bad edge.
pub struct ProofProtocol {
    partition: Partition,
    deriv: Derivation,
    /// Level to matching variable.
    level_var: Vec<Var>,
    /// Clause to the edge its edge literal names, if any.
    clause_edge: Vec<Option<Edge>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofState {
    /// Evaluating the first antecedent of Conjunction `line`, now at `node`
    /// (a serialized ref); `talked` once a message has been sent.
    Eval { line: usize, node: u32, talked: bool },
    Axiom(usize),
}

impl ProofProtocol {
    /// Checks `deriv` against `cnf` (a Match_m formula) and that the order
    /// keeps each side of `partition` contiguous.
    pub fn new(cnf: &Cnf, deriv: &Derivation, partition: &Partition) -> Result<ProofProtocol, ProtocolError> {
        let verdict = check_refutation(cnf, deriv);
        if !verdict.ok {
            return Err(ProtocolError::NotRefutation(verdict.to_string()));
        }
        let lay = partition.layout();
        let mut level_var = Vec::with_capacity(deriv.order.len());
        for name in &deriv.order {
            let v = cnf.var_by_name(name).ok_or_else(|| ProtocolError::NotMatching(name.clone()))?;
            let mv = lay.var_of(cnf.roles[v.index()]).ok_or_else(|| ProtocolError::NotMatching(name.clone()))?;
            level_var.push(mv);
        }
        let mut switches = 0;
        for (k, w) in level_var.windows(2).enumerate() {
            if partition.side(w[0]) != partition.side(w[1]) {
                switches += 1;
                if switches > 1 {
                    return Err(ProtocolError::NotSplit(deriv.order[k + 1].clone()));
                }
            }
        }
        let clause_edge = cnf
            .clauses
            .iter()
            .map(|c| {
                c.iter().find_map(|l| match cnf.roles[l.var().index()] {
                    Role::Edge { edge, .. } if l.is_negated() && c.len() == 3 => Some(edge),
                    _ => None,
                })
            })
            .collect();
        Ok(ProofProtocol { partition: partition.clone(), deriv: deriv.clone(), level_var, clause_edge })
    }

    fn obdd(&self, line: usize) -> &Serialized {
        &self.deriv.lines[line].obdd
    }

    /// Size bound used for node-index messages of `line`.
    fn index_bits(&self, line: usize) -> u32 {
        ceil_log2(self.obdd(line).nodes.len() + 2)
    }

    fn first_antecedent(&self, line: usize) -> usize {
        match self.deriv.lines[line].rule {
            Rule::Conjunction(a, _) => a,
            _ => unreachable!("only Conjunction lines are evaluated"),
        }
    }

    /// From line `k`, skip the talk-free steps.
    fn settle(&self, mut k: usize) -> ProofState {
        loop {
            match self.deriv.lines[k].rule {
                Rule::Axiom(c) => return ProofState::Axiom(c),
                Rule::Projection(a, _) | Rule::Subsumption(a) => k = a,
                Rule::Conjunction(a, b) => {
                    let root = self.obdd(a).root;
                    if root < 2 {
                        // A constant antecedent: TRUE sends the walk to `b`.
                        k = if root == 1 { b } else { a };
                        continue;
                    }
                    return ProofState::Eval { line: k, node: root, talked: false };
                }
            }
        }
    }

    fn node_var(&self, line: usize, node: u32) -> Var {
        let a = self.first_antecedent(line);
        self.level_var[self.obdd(a).nodes[node as usize - 2].level as usize]
    }

    fn after_eval(&self, line: usize, result: bool) -> ProofState {
        let Rule::Conjunction(a, b) = self.deriv.lines[line].rule else { unreachable!() };
        self.settle(if result { b } else { a })
    }

    pub fn derivation(&self) -> &Derivation {
        &self.deriv
    }
}

impl SearchProtocol for ProofProtocol {
    type State = ProofState;

    fn partition(&self) -> &Partition {
        &self.partition
    }

    fn start(&self) -> ProofState {
        self.settle(self.deriv.lines.len() - 1)
    }

    fn speaker(&self, st: &ProofState) -> Option<Side> {
        match *st {
            ProofState::Eval { line, node, .. } => Some(self.partition.side(self.node_var(line, node))),
            _ => None,
        }
    }

    fn speak(&self, st: &ProofState, view: &PlayerView) -> Turn {
        let ProofState::Eval { line, mut node, talked } = *st else { panic!("nobody speaks in {st:?}") };
        let f = self.obdd(self.first_antecedent(line));
        while node >= 2 {
            let n = f.nodes[node as usize - 2];
            let v = self.level_var[n.level as usize];
            if !view.owns(v) {
                break;
            }
            node = if view.get(v) { n.hi } else { n.lo };
        }
        let bits = if talked {
            assert!(node < 2, "second message must finish the evaluation");
            1
        } else {
            self.index_bits(self.first_antecedent(line))
        };
        Turn { who: view.side, bits, value: node as u64 }
    }

    fn advance(&self, st: &mut ProofState, turn: &Turn) {
        let ProofState::Eval { line, .. } = *st else { panic!("no message expected in {st:?}") };
        let node = turn.value as u32;
        *st = if node < 2 { self.after_eval(line, node == 1) } else { ProofState::Eval { line, node, talked: true } };
    }

    fn output(&self, st: &ProofState) -> Result<Edge, ProtocolError> {
        match *st {
            ProofState::Axiom(c) => self.clause_edge[c].ok_or(ProtocolError::NoBadEdge(c)),
            _ => panic!("output requested mid-protocol"),
        }
    }
}

/// Baseline: the player holding fewer variables sends them all, 64 per
/// turn, and the other announces the lexicographically first bad edge.
pub struct BroadcastProtocol {
    partition: Partition,
    sender: Side,
    /// Matching variables the sender holds, in increasing order.
    sent: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BroadcastState {
    /// Words of sender values received so far.
    Sending(Vec<u64>),
    /// `0` for no bad edge, else the edge index plus one.
    Done(u64),
}

impl BroadcastProtocol {
    pub fn new(partition: &Partition) -> BroadcastProtocol {
        let count = |s: Side| partition.sides().iter().filter(|&&x| x == s).count();
        let sender = if count(Side::I) <= count(Side::II) { Side::I } else { Side::II };
        let sent = (0..partition.sides().len() as u32).map(Var).filter(|&v| partition.side(v) == sender).collect();
        BroadcastProtocol { partition: partition.clone(), sender, sent }
    }

    fn words(&self) -> usize {
        self.sent.len().div_ceil(64)
    }
}

impl SearchProtocol for BroadcastProtocol {
    type State = BroadcastState;

    fn partition(&self) -> &Partition {
        &self.partition
    }

    fn start(&self) -> BroadcastState {
        BroadcastState::Sending(Vec::new())
    }

    fn speaker(&self, st: &BroadcastState) -> Option<Side> {
        match st {
            BroadcastState::Sending(w) if w.len() < self.words() => Some(self.sender),
            BroadcastState::Sending(_) => Some(self.sender.other()),
            BroadcastState::Done(_) => None,
        }
    }

    fn speak(&self, st: &BroadcastState, view: &PlayerView) -> Turn {
        let BroadcastState::Sending(words) = st else { panic!("nobody speaks after the answer") };
        if words.len() < self.words() {
            let chunk = &self.sent[64 * words.len()..self.sent.len().min(64 * words.len() + 64)];
            let value = chunk.iter().enumerate().fold(0u64, |acc, (k, &v)| acc | (view.get(v) as u64) << k);
            return Turn { who: view.side, bits: chunk.len() as u32, value };
        }
        let mut bits: Vec<bool> = vec![false; self.partition.sides().len()];
        for (k, b) in view.own_values() {
            bits[k] = b;
        }
        for (k, v) in self.sent.iter().enumerate() {
            bits[v.index()] = words[k / 64] >> (k % 64) & 1 == 1;
        }
        let a = MAssignment::from_values(self.partition.m, bits);
        let lay = self.partition.layout();
        let value = find_bad_edges(&a).first().map_or(0, |&e| lay.edge_index(e) as u64 + 1);
        Turn { who: view.side, bits: ceil_log2(lay.num_edges() + 1), value }
    }

    fn advance(&self, st: &mut BroadcastState, turn: &Turn) {
        let BroadcastState::Sending(words) = st else { panic!("no message expected after the answer") };
        if words.len() < self.words() {
            words.push(turn.value);
        } else {
            *st = BroadcastState::Done(turn.value);
        }
    }

    fn output(&self, st: &BroadcastState) -> Result<Edge, ProtocolError> {
        match *st {
            BroadcastState::Done(0) => Err(ProtocolError::NoBadEdge(usize::MAX)),
            BroadcastState::Done(k) => Ok(self.partition.layout().edges()[k as usize - 1]),
            _ => panic!("output requested mid-protocol"),
        }
    }
}
