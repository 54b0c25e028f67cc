//! Partition density and the sets `G`, `N_2(i)`, `N_3(i)` derived from it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{edges_within, Partition};
use crate::cnf::choose2;

/// Largest `m` for the exact evaluator (`m^2 (2m+1)^5` terms).
pub const EXACT_MAX_M: usize = 4;
/// Sample count and seed used by [`density_profile`] when `m` is too large
/// for the exact evaluator.
pub const PROFILE_SAMPLES: usize = 100_000;
pub const PROFILE_SEED: u64 = 0x5eed_de17a;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DensityError {
    #[error("exact density needs m <= {EXACT_MAX_M}, got {0}")]
    TooLarge(usize),
    #[error("Monte Carlo density needs at least two samples")]
    TooFewSamples,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// A density value, exact or estimated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Delta {
    /// `num / den`, unreduced.
    Exact { num: u128, den: u128 },
    Estimate { value: f64, std_err: f64, samples: usize },
}

impl Delta {
    pub fn value(&self) -> f64 {
        match *self {
            Delta::Exact { num, den } => num as f64 / den as f64,
            Delta::Estimate { value, .. } => value,
        }
    }

    pub fn std_err(&self) -> f64 {
        match *self {
            Delta::Exact { .. } => 0.0,
            Delta::Estimate { std_err, .. } => std_err,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Delta::Exact { .. })
    }

    /// `count >= (δ / div) · scale`, exactly when δ is exact.
    pub fn reaches(&self, count: u64, div: u64, scale: u64) -> bool {
        match *self {
            Delta::Exact { num, den } => count as u128 * div as u128 * den >= num * scale as u128,
            Delta::Estimate { value, .. } => count as f64 * div as f64 >= value * scale as f64,
        }
    }
}

pub fn density(p: &Partition, mode: DensityMode) -> Result<Delta, DensityError> {
    match mode {
        DensityMode::Exact => density_exact(p),
        DensityMode::MonteCarlo { samples, seed } => {
            density_mc(p, samples, &mut ChaCha8Rng::seed_from_u64(seed))
        }
    }
}

/// Pairwise intersections `E_{i1} ∩ E_{i2}` as adjacency masks.
fn row_pairs(adj: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let m = adj.len();
    let mut out = Vec::with_capacity(m * m);
    for a in adj {
        for b in adj {
            out.push(a.iter().zip(b).map(|(x, y)| x & y).collect());
        }
    }
    out
}

fn density_exact(p: &Partition) -> Result<Delta, DensityError> {
    let m = p.m;
    if m > EXACT_MAX_M {
        return Err(DensityError::TooLarge(m));
    }
    let pairs = row_pairs(&p.edge_adjacency());
    let vm = p.vertex_masks();
    let s = vm.len();
    // Histogram of the five-fold intersections, then one pass per row pair.
    let mut hist: rustc_hash::FxHashMap<u64, u128> = rustc_hash::FxHashMap::default();
    let all = (1u64 << (3 * m)) - 1;
    let mut stack = vec![(0usize, all)];
    while let Some((depth, w)) = stack.pop() {
        if depth == 5 {
            *hist.entry(w).or_default() += 1;
            continue;
        }
        for &v in &vm {
            stack.push((depth + 1, w & v));
        }
    }
    let mut num = 0u128;
    for adj in &pairs {
        for (&w, &count) in &hist {
            num += edges_within(adj, w) as u128 * count;
        }
    }
    let den = (m * m) as u128 * (s as u128).pow(5) * choose2(3 * m) as u128;
    Ok(Delta::Exact { num, den })
}

fn density_mc<R: Rng>(p: &Partition, samples: usize, rng: &mut R) -> Result<Delta, DensityError> {
    if samples < 2 {
        return Err(DensityError::TooFewSamples);
    }
    let adj = p.edge_adjacency();
    let vm = p.vertex_masks();
    let (m, s) = (p.m, vm.len());
    let scale = choose2(3 * m) as f64;
    let mut both = vec![0u64; 3 * m];
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let (i1, i2) = (rng.gen_range(0..m), rng.gen_range(0..m));
        let mut w = (1u64 << (3 * m)) - 1;
        for _ in 0..5 {
            w &= vm[rng.gen_range(0..s)];
        }
        for (b, (x, y)) in both.iter_mut().zip(adj[i1].iter().zip(&adj[i2])) {
            *b = x & y;
        }
        let x = edges_within(&both, w) as f64 / scale;
        sum += x;
        sum_sq += x * x;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(Delta::Estimate { value: mean, std_err: (var / n).sqrt(), samples })
}

/// Everything the layout machinery needs about a partition.
#[derive(Clone, Debug)]
pub struct Profile {
    pub m: usize,
    pub delta: Delta,
    /// `E_i` adjacency masks.
    pub adj: Vec<Vec<u64>>,
    /// `V_j` masks.
    pub vmask: Vec<u64>,
    /// `N_3(i)`, distinct triples in lexicographic order.
    pub n3: Vec<Vec<[usize; 3]>>,
    /// `N_2(i)`, the `(j1, j2)` projections of `N_3(i)`.
    pub n2: Vec<Vec<[usize; 2]>>,
    /// `G`, increasing.
    pub g: Vec<usize>,
    n3_member: Vec<Vec<bool>>,
    n2_member: Vec<Vec<bool>>,
}

/// Profile with δ exact when `m <= 4` and estimated from
/// [`PROFILE_SAMPLES`] seeded samples otherwise.
pub fn density_profile(p: &Partition) -> Profile {
    let delta = if p.m <= EXACT_MAX_M {
        density_exact(p)
    } else {
        density(p, DensityMode::MonteCarlo { samples: PROFILE_SAMPLES, seed: PROFILE_SEED })
    };
    Profile::with_delta(p, delta.expect("mode chosen to fit"))
}

impl Profile {
    /// Thresholds `N_3`, `N_2`, `G` computed against the given δ.
    pub fn with_delta(p: &Partition, delta: Delta) -> Profile {
        let adj = p.edge_adjacency();
        let vmask = p.vertex_masks();
        let (m, s) = (p.m, vmask.len());
        let pairs = choose2(3 * m) as u64;
        let cube = (s as u64).pow(3);
        let mut n3 = vec![Vec::new(); m];
        let mut n3_member = vec![vec![false; s * s * s]; m];
        let mut n2_member = vec![vec![false; s * s]; m];
        for i in 0..m {
            for j1 in 0..s {
                for j2 in 0..s {
                    for j3 in 0..s {
                        if j1 == j2 || j2 == j3 || j1 == j3 {
                            continue;
                        }
                        let w = vmask[j1] & vmask[j2] & vmask[j3];
                        if delta.reaches(edges_within(&adj[i], w), 3, pairs) {
                            n3[i].push([j1, j2, j3]);
                            n3_member[i][(j1 * s + j2) * s + j3] = true;
                            n2_member[i][j1 * s + j2] = true;
                        }
                    }
                }
            }
        }
        let n2 = n2_member
            .iter()
            .map(|row| (0..s * s).filter(|&k| row[k]).map(|k| [k / s, k % s]).collect())
            .collect();
        let g = (0..m).filter(|&i| delta.reaches(n3[i].len() as u64, 12, cube)).collect();
        Profile { m, delta, adj, vmask, n3, n2, g, n3_member, n2_member }
    }

    pub fn vertex_slots(&self) -> usize {
        self.vmask.len()
    }

    pub fn in_n3(&self, i: usize, t: [usize; 3]) -> bool {
        let s = self.vertex_slots();
        t.iter().all(|&j| j < s) && self.n3_member[i][(t[0] * s + t[1]) * s + t[2]]
    }

    pub fn in_n2(&self, i: usize, p: [usize; 2]) -> bool {
        let s = self.vertex_slots();
        p.iter().all(|&j| j < s) && self.n2_member[i][p[0] * s + p[1]]
    }

    pub fn in_g(&self, i: usize) -> bool {
        self.g.binary_search(&i).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Role;
    use crate::reduction::Side;

    #[test]
    fn trivial_densities() {
        for m in 1..=3 {
            let full = Partition::full(m).unwrap();
            assert_eq!(density(&full, DensityMode::Exact).unwrap().value(), 1.0);
            let none = Partition::from_fn(m, |_| Side::I).unwrap();
            assert_eq!(density(&none, DensityMode::Exact).unwrap().value(), 0.0);
        }
    }

    #[test]
    fn exact_matches_direct_sum() {
        // The histogram evaluator against the literal quintuple sum.
        let p = Partition::from_fn(2, |r| match r {
            Role::Edge { slot, edge } => {
                if (edge.u + edge.v + slot) % 4 == 0 { Side::II } else { Side::I }
            }
            Role::Vertex { slot, vertex } => {
                if (vertex * 3 + slot) % 5 == 1 { Side::I } else { Side::II }
            }
            _ => unreachable!(),
        })
        .unwrap();
        let adj = p.edge_adjacency();
        let vm = p.vertex_masks();
        let mut direct = 0u128;
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j in 0..5usize.pow(5) {
                    let js: Vec<usize> = (0..5).map(|k| j / 5usize.pow(k) % 5).collect();
                    let mut count = 0;
                    for e in p.layout().edges() {
                        let ok = js.iter().all(|&jk| {
                            let inside = vm[jk] >> e.u & 1 == 1 && vm[jk] >> e.v & 1 == 1;
                            inside && adj[i1][e.u as usize] >> e.v & 1 == 1 && adj[i2][e.u as usize] >> e.v & 1 == 1
                        });
                        count += ok as u128;
                    }
                    direct += count;
                }
            }
        }
        let Delta::Exact { num, den } = density(&p, DensityMode::Exact).unwrap() else { panic!() };
        assert_eq!(num, direct);
        assert_eq!(den, 4 * 3125 * 15);
    }

    #[test]
    fn full_profile() {
        let prof = density_profile(&Partition::full(2).unwrap());
        assert_eq!(prof.g, vec![0, 1]);
        assert!(prof.n3.iter().all(|t| t.len() == 5 * 4 * 3));
        assert!(prof.n2.iter().all(|t| t.len() == 5 * 4));
        // δ = 0 makes every threshold trivial, so G is everything.
        let empty = Partition::from_fn(2, |_| Side::I).unwrap();
        let prof = density_profile(&empty);
        assert_eq!(prof.delta.value(), 0.0);
        assert_eq!(prof.g, vec![0, 1]);
    }

    #[test]
    fn exact_mode_guard() {
        assert_eq!(density(&Partition::full(5).unwrap(), DensityMode::Exact), Err(DensityError::TooLarge(5)));
    }
}
