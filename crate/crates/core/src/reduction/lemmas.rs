//! Exact checkers for the two counting inequalities used on the way to the
//! density bounds.

use rand::Rng;

/// Result of one inequality check: the measured side, the bound, and
/// whether the measured side reaches it (decided in exact arithmetic).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Check {
    pub lhs: f64,
    pub bound: f64,
    pub ok: bool,
}

/// `(1/n^k) Σ_{ı ∈ [n]^k} |⋂ Y_{i_l}| >= α^k |X|` with `X = [x]`, sets as
/// masks and `α` the average relative size.
pub fn check_convexity(x: usize, ys: &[u64], k: u32) -> Check {
    assert!(x <= 64 && !ys.is_empty());
    let full = if x == 64 { u64::MAX } else { (1u64 << x) - 1 };
    let n = ys.len();
    let mut total: u128 = 0;
    let mut idx = vec![0usize; k as usize];
    loop {
        let w = idx.iter().fold(full, |acc, &i| acc & ys[i]);
        total += w.count_ones() as u128;
        // next tuple in [n]^k
        let mut p = 0;
        while p < idx.len() {
            idx[p] += 1;
            if idx[p] < n {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
        if p == idx.len() {
            break;
        }
    }
    let s: u128 = ys.iter().map(|y| (y & full).count_ones() as u128).sum();
    let (nk, xk) = ((n as u128).pow(k), (x as u128).pow(k));
    // total / n^k >= s^k / (n^k x^k) * x
    let ok = total * xk >= s.pow(k) * x as u128;
    let alpha = s as f64 / (n * x) as f64;
    Check { lhs: total as f64 / nk as f64, bound: alpha.powi(k as i32) * x as f64, ok }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Supersaturation {
    /// `Pr_{u ∈ V^3}[K({u1},{u2,u3}) ⊆ G]` and its bound `α² − 5/N`.
    pub star: Check,
    /// `Pr_{u ∈ V^6}[K({u1,u2},{u3..u6}) ⊆ G]` and its bound `α⁸ − 23/N`.
    pub biclique: Check,
}

impl Supersaturation {
    pub fn ok(&self) -> bool {
        self.star.ok && self.biclique.ok
    }
}

/// Both probabilities by exact counting over adjacency masks, with `α`
/// the edge density of the graph itself.
pub fn check_supersaturation(adj: &[u64]) -> Supersaturation {
    let n = adj.len() as u128;
    assert!((2..=64).contains(&n));
    let deg: Vec<u128> = adj.iter().map(|a| a.count_ones() as u128).collect();
    let edges = deg.iter().sum::<u128>() / 2;
    let pairs = n * (n - 1) / 2;
    let star: u128 = deg.iter().map(|d| d * d).sum();
    let mut bic: u128 = 0;
    for a in adj {
        for b in adj {
            bic += ((a & b).count_ones() as u128).pow(4);
        }
    }
    let alpha = edges as f64 / pairs as f64;
    let nf = n as f64;
    // count / N^3 >= e²/C² − 5/N  <=>  count·C²·N + 5·C²·N³ >= e²·N⁴
    let ok3 = star * pairs.pow(2) * n + 5 * pairs.pow(2) * n.pow(3) >= edges.pow(2) * n.pow(4);
    let ok6 = bic * pairs.pow(8) * n + 23 * pairs.pow(8) * n.pow(6) >= edges.pow(8) * n.pow(7);
    Supersaturation {
        star: Check { lhs: star as f64 / nf.powi(3), bound: alpha.powi(2) - 5.0 / nf, ok: ok3 },
        biclique: Check { lhs: bic as f64 / nf.powi(6), bound: alpha.powi(8) - 23.0 / nf, ok: ok6 },
    }
}

/// Outcome of a batch of random instances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteStats {
    pub instances: usize,
    pub failures: usize,
    /// Smallest `lhs − bound` seen.
    pub min_slack: f64,
}

impl SuiteStats {
    fn new() -> SuiteStats {
        SuiteStats { instances: 0, failures: 0, min_slack: f64::INFINITY }
    }

    fn add(&mut self, c: &Check) {
        self.instances += 1;
        self.failures += !c.ok as usize;
        self.min_slack = self.min_slack.min(c.lhs - c.bound);
    }
}

/// Random ground sets of up to 12 points, up to 6 subsets, `k <= 4`.
pub fn convexity_suite<R: Rng>(trials: usize, rng: &mut R) -> SuiteStats {
    let mut st = SuiteStats::new();
    for _ in 0..trials {
        let x = rng.gen_range(1..=12);
        let n = rng.gen_range(1..=6);
        let k = rng.gen_range(0..=4);
        let density = rng.gen_range(0.0..1.0);
        let ys: Vec<u64> =
            (0..n).map(|_| (0..x).filter(|_| rng.gen_bool(density)).fold(0, |a, b| a | 1 << b)).collect();
        st.add(&check_convexity(x, &ys, k));
    }
    st
}

/// `G(N, p)` with `N` in `4..=14` and `p` uniform; both inequalities count.
pub fn supersaturation_suite<R: Rng>(trials: usize, rng: &mut R) -> (SuiteStats, SuiteStats) {
    let (mut star, mut bic) = (SuiteStats::new(), SuiteStats::new());
    for _ in 0..trials {
        let n = rng.gen_range(4..=14);
        let p = rng.gen_range(0.0..1.0);
        let g = random_graph(n, p, rng);
        let s = check_supersaturation(&g);
        star.add(&s.star);
        bic.add(&s.biclique);
    }
    (star, bic)
}

pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<u64> {
    let mut adj = vec![0u64; n];
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
    }
    adj
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn convexity_examples() {
        let c = check_convexity(4, &[0b0011, 0b0011], 2);
        assert_eq!((c.lhs, c.bound, c.ok), (2.0, 1.0, true));
        let c = check_convexity(5, &[0b11111; 3], 3);
        assert_eq!((c.lhs, c.bound, c.ok), (5.0, 5.0, true));
        let c = check_convexity(5, &[0b00001, 0b00010], 0);
        assert_eq!((c.lhs, c.bound), (5.0, 5.0));
    }

    #[test]
    fn convexity_against_literal_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let x = rng.gen_range(1..=10);
            let n = rng.gen_range(1..=5);
            let k = rng.gen_range(0..=3);
            let ys: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1u64 << x)).collect();
            let c = check_convexity(x, &ys, k);
            assert!(c.ok, "{x} {ys:?} {k}");
            assert!(c.lhs + 1e-9 >= c.bound);
        }
    }

    #[test]
    fn supersaturation_examples() {
        let k4: Vec<u64> = (0..4).map(|u| 0b1111 & !(1 << u)).collect();
        let s = check_supersaturation(&k4);
        assert_eq!(s.star.lhs, 36.0 / 64.0);
        assert!(s.ok());
        let s = check_supersaturation(&[0u64; 5]);
        assert_eq!(s.star.lhs, 0.0);
        assert!(s.ok());
    }

    #[test]
    fn suites_are_green() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = convexity_suite(100, &mut rng);
        assert_eq!((c.instances, c.failures), (100, 0));
        let (a, b) = supersaturation_suite(50, &mut rng);
        assert_eq!((a.failures, b.failures), (0, 0));
    }

    #[test]
    fn supersaturation_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let p = rng.gen_range(0.0..1.0);
            let g = random_graph(12, p, &mut rng);
            let s = check_supersaturation(&g);
            assert!(s.ok(), "{g:?}");
            assert!(s.star.lhs + 1e-12 >= s.star.bound && s.biclique.lhs + 1e-12 >= s.biclique.bound);
        }
    }
}
