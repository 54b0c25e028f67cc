//! Single-line corruptions of a derivation, for checker soundness tests.
//!
//! Each operator is built so that the result is wrong whenever the input
//! uses every non-final line exactly once and never projects a variable its
//! antecedent does not mention. Solver output has both properties.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Derivation, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// An antecedent replaced by another line.
    SwapAntecedent,
    /// A projection moved to a variable its antecedent does not test.
    WrongProjectionVar,
    /// An axiom citing a different clause.
    WrongClause,
    /// One diagram node with its children swapped, or a constant flipped.
    FlipNode,
}

/// Applies one random mutation. `None` if no line admits the chosen kind.
pub fn mutate<R: Rng>(d: &Derivation, num_clauses: usize, rng: &mut R) -> Option<(Derivation, Mutation, usize)> {
    let kinds = [Mutation::SwapAntecedent, Mutation::WrongProjectionVar, Mutation::WrongClause, Mutation::FlipNode];
    for _ in 0..64 {
        let kind = *kinds.choose(rng)?;
        let i = rng.gen_range(0..d.lines.len());
        if let Some(out) = apply(d, num_clauses, i, kind, rng) {
            return Some((out, kind, i));
        }
    }
    None
}

fn apply<R: Rng>(d: &Derivation, num_clauses: usize, i: usize, kind: Mutation, rng: &mut R) -> Option<Derivation> {
    let mut out = d.clone();
    let line = &mut out.lines[i];
    match (kind, line.rule) {
        (Mutation::SwapAntecedent, Rule::Conjunction(a, b)) => {
            let r = other_line(i, &[a, b], d.lines.len(), rng)?;
            line.rule = if rng.gen() { Rule::Conjunction(r, b) } else { Rule::Conjunction(a, r) };
        }
        (Mutation::SwapAntecedent, Rule::Projection(a, l)) => {
            line.rule = Rule::Projection(other_line(i, &[a], d.lines.len(), rng)?, l);
        }
        (Mutation::SwapAntecedent, Rule::Subsumption(a)) => {
            line.rule = Rule::Subsumption(other_line(i, &[a], d.lines.len(), rng)?);
        }
        (Mutation::WrongProjectionVar, Rule::Projection(a, l)) => {
            let used = d.lines[a].obdd.levels();
            let free: Vec<u32> = (0..d.order.len() as u32).filter(|x| *x != l && !used.contains(x)).collect();
            line.rule = Rule::Projection(a, *free.choose(rng)?);
        }
        (Mutation::WrongClause, Rule::Axiom(c)) if num_clauses > 1 => {
            let mut k = rng.gen_range(0..num_clauses - 1);
            if k >= c {
                k += 1;
            }
            line.rule = Rule::Axiom(k);
        }
        (Mutation::FlipNode, Rule::Subsumption(_)) => return None,
        (Mutation::FlipNode, _) => {
            if line.obdd.nodes.is_empty() {
                line.obdd.root ^= 1;
            } else {
                let k = rng.gen_range(0..line.obdd.nodes.len());
                let n = &mut line.obdd.nodes[k];
                std::mem::swap(&mut n.lo, &mut n.hi);
            }
        }
        _ => return None,
    }
    Some(out)
}

/// A line index other than `avoid`, preferring earlier lines; may point past `i`.
fn other_line<R: Rng>(i: usize, avoid: &[usize], len: usize, rng: &mut R) -> Option<usize> {
    let pool: Vec<usize> = (0..len).filter(|r| *r != i && !avoid.contains(r)).collect();
    pool.choose(rng).copied()
}
