//! The set-disjointness reduction: both players sample a shared layout,
//! build their halves of the planted assignment and run a FindBadEdge
//! protocol; any announced edge other than the planted one proves the sets
//! intersect.

use rand::Rng;
use thiserror::Error;

use super::protocol::{run_protocol, ProtocolError, SearchProtocol};
use super::{build_assignment, planted_edge, sample_layout, Profile, SampleError};

/// `X, Y ∈ {0,1}^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetDisjInstance {
    pub x: Vec<bool>,
    pub y: Vec<bool>,
}

impl SetDisjInstance {
    pub fn new(x: Vec<bool>, y: Vec<bool>) -> SetDisjInstance {
        assert_eq!(x.len(), y.len(), "both sets live in [n]");
        SetDisjInstance { x, y }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn intersects(&self) -> bool {
        self.x.iter().zip(&self.y).any(|(a, b)| *a && *b)
    }

    /// A uniformly random pair of disjoint sets.
    pub fn random_disjoint<R: Rng>(n: usize, rng: &mut R) -> SetDisjInstance {
        let mut x = vec![false; n];
        let mut y = vec![false; n];
        for k in 0..n {
            match rng.gen_range(0..3) {
                0 => x[k] = true,
                1 => y[k] = true,
                _ => {}
            }
        }
        SetDisjInstance { x, y }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("protocol is for m = {got}, profile for m = {expected}")]
    WrongM { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionRun {
    /// 1 when some repetition saw an edge other than the planted one.
    pub output: u8,
    /// Protocol bits over all repetitions.
    pub bits: usize,
}

/// `reps` independent repetitions; the answer is 0 only if every
/// repetition's announced edge was the planted edge.
pub fn run_reduction<P: SearchProtocol, R: Rng>(
    prof: &Profile,
    proto: &P,
    inst: &SetDisjInstance,
    rng: &mut R,
    reps: usize,
) -> Result<ReductionRun, ReductionError> {
    if proto.partition().m != prof.m {
        return Err(ReductionError::WrongM { expected: prof.m, got: proto.partition().m });
    }
    let mut run = ReductionRun { output: 0, bits: 0 };
    for _ in 0..reps {
        let (l, _) = sample_layout(prof, inst.n(), rng)?;
        let a = build_assignment(&l, &inst.x, &inst.y, prof.m);
        let (edge, tr) = run_protocol(proto, &a)?;
        run.bits += tr.bits();
        if edge != planted_edge(&l) {
            run.output = 1;
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{density_profile, n_guard, BroadcastProtocol, Partition};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_sided_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let part = Partition::random(6, 0.97, &mut rng).unwrap();
        let prof = density_profile(&part);
        let n = n_guard(&prof).unwrap().max(1);
        let proto = BroadcastProtocol::new(&part);
        for _ in 0..200 {
            let inst = SetDisjInstance::random_disjoint(n, &mut rng);
            assert!(!inst.intersects());
            assert_eq!(run_reduction(&prof, &proto, &inst, &mut rng, 1).unwrap().output, 0);
        }
        let inst = SetDisjInstance::new(vec![true; n], vec![true; n]);
        let hits: usize =
            (0..200).map(|_| run_reduction(&prof, &proto, &inst, &mut rng, 1).unwrap().output as usize).sum();
        assert!(hits > 0);
    }

    #[test]
    fn wrong_m_rejected() {
        let prof = density_profile(&Partition::full(3).unwrap());
        let proto = BroadcastProtocol::new(&Partition::full(2).unwrap());
        let inst = SetDisjInstance::new(vec![false], vec![false]);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        assert!(matches!(run_reduction(&prof, &proto, &inst, &mut rng, 1), Err(ReductionError::WrongM { .. })));
    }
}
