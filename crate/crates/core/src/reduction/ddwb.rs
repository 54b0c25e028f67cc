//! Small dependent-domain processes with blocking, enumerated exactly.
//!
//! Coordinate `i` takes values in `0..sizes[i]`; `S_i` and `F_i` are tables
//! indexed by the prefix (mixed radix), with sets as bitmasks.

use rand::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DdwbProcess {
    pub sizes: Vec<usize>,
    /// `s[i][prefix]`
    pub s: Vec<Vec<u8>>,
    /// `f[i][prefix]`
    pub f: Vec<Vec<u8>>,
}

pub const MAX_COORDS: usize = 4;
pub const MAX_SIZE: usize = 6;

impl DdwbProcess {
    fn prefixes(&self, i: usize) -> usize {
        self.sizes[..i].iter().product()
    }

    /// `S_i ≡ X_i`, `F_i ≡ ∅`.
    pub fn uniform(sizes: &[usize]) -> DdwbProcess {
        let mut p = DdwbProcess { sizes: sizes.to_vec(), s: vec![], f: vec![] };
        for i in 0..sizes.len() {
            let k = p.prefixes(i);
            p.s.push(vec![((1u16 << sizes[i]) - 1) as u8; k]);
            p.f.push(vec![0; k]);
        }
        p
    }

    /// Random sets with `S_i ∖ F_i` nonempty for every prefix.
    pub fn random<R: Rng>(rng: &mut R) -> DdwbProcess {
        let t = rng.gen_range(1..=MAX_COORDS);
        let sizes: Vec<usize> = (0..t).map(|_| rng.gen_range(1..=MAX_SIZE)).collect();
        let mut p = DdwbProcess::uniform(&sizes);
        for i in 0..t {
            let full = ((1u16 << sizes[i]) - 1) as u8;
            for k in 0..p.prefixes(i) {
                loop {
                    let s = rng.gen::<u8>() & full;
                    let f = if rng.gen_bool(0.3) { 0 } else { rng.gen::<u8>() & full };
                    if s & !f != 0 {
                        p.s[i][k] = s;
                        p.f[i][k] = f;
                        break;
                    }
                }
            }
        }
        p
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// All points, in mixed-radix order (coordinate 0 most significant).
    pub fn points(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for &x in &self.sizes {
            out = out.into_iter().flat_map(|p| (0..x).map(move |a| [p.clone(), vec![a]].concat())).collect();
        }
        out
    }

    fn prefix_index(&self, u: &[usize]) -> usize {
        u.iter().zip(&self.sizes).fold(0, |acc, (&a, &x)| acc * x + a)
    }

    pub fn s_at(&self, i: usize, u: &[usize]) -> u8 {
        self.s[i][self.prefix_index(&u[..i])]
    }

    pub fn f_at(&self, i: usize, u: &[usize]) -> u8 {
        self.f[i][self.prefix_index(&u[..i])]
    }

    /// `π(u)`.
    pub fn prob(&self, u: &[usize]) -> f64 {
        let mut p = 1.0;
        for i in 0..self.len() {
            let free = self.s_at(i, u) & !self.f_at(i, u);
            if free >> u[i] & 1 == 0 {
                return 0.0;
            }
            p /= free.count_ones() as f64;
        }
        p
    }

    /// Smallest `β` with `|F_i| <= β |S_i|` everywhere.
    pub fn blockage_bound(&self) -> f64 {
        let mut b: f64 = 0.0;
        for i in 0..self.len() {
            for (s, f) in self.s[i].iter().zip(&self.f[i]) {
                b = b.max(f.count_ones() as f64 / s.count_ones() as f64);
            }
        }
        b
    }

    /// Largest `κ` with `|S_i ∖ F_i| >= κ |X_i|` everywhere.
    pub fn covering_bound(&self) -> f64 {
        let mut k: f64 = 1.0;
        for i in 0..self.len() {
            for (s, f) in self.s[i].iter().zip(&self.f[i]) {
                k = k.min((s & !f).count_ones() as f64 / self.sizes[i] as f64);
            }
        }
        k
    }
}

/// Loss of expectation: `E_π[f] >= E_U[f] − kβ` for `f` supported where
/// each of its `k` coordinates lies in its `S_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossCheck {
    pub e_pi: f64,
    pub e_u: f64,
    pub k: usize,
    pub beta: f64,
    pub ok: bool,
}

/// `f` is evaluated on whole points but must depend only on `coords`; it is
/// zeroed wherever a coordinate in `coords` falls outside its `S_i`.
pub fn check_loss(p: &DdwbProcess, coords: &[usize], f: impl Fn(&[usize]) -> f64) -> LossCheck {
    let pts = p.points();
    let total = pts.len() as f64;
    let (mut e_pi, mut e_u) = (0.0, 0.0);
    for u in &pts {
        let supported = coords.iter().all(|&i| p.s_at(i, u) >> u[i] & 1 == 1);
        let v = if supported { f(u).clamp(0.0, 1.0) } else { 0.0 };
        e_pi += p.prob(u) * v;
        e_u += v / total;
    }
    let beta = p.blockage_bound();
    let k = coords.len();
    LossCheck { e_pi, e_u, k, beta, ok: e_pi >= e_u - k as f64 * beta - 1e-12 }
}

/// Ratio bound over all pairs of positive-mass points, each pair judged with
/// the smallest admissible `I_0` (coordinates whose `S_i` differ) and the
/// smallest admissible `c`. Returns the worst `π(v) / bound` ratio and
/// the number of pairs that fail `π(v) <= κ^{-d} e^{c/κ} π(u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioCheck {
    pub pairs: usize,
    pub failures: usize,
    pub worst: f64,
}

pub fn check_ratio(p: &DdwbProcess) -> RatioCheck {
    let kappa = p.covering_bound();
    let t = p.len() as f64;
    let pts: Vec<(Vec<usize>, f64)> =
        p.points().into_iter().map(|u| { let q = p.prob(&u); (u, q) }).filter(|(_, q)| *q > 0.0).collect();
    let mut out = RatioCheck { pairs: 0, failures: 0, worst: 0.0 };
    for (u, pu) in &pts {
        for (v, pv) in &pts {
            let mut d = 0;
            let mut c: f64 = 0.0;
            for i in 0..p.len() {
                if p.s_at(i, u) != p.s_at(i, v) {
                    d += 1;
                } else {
                    let diff = (p.f_at(i, u) ^ p.f_at(i, v)).count_ones() as f64;
                    c = c.max(diff * t / p.sizes[i] as f64);
                }
            }
            let bound = kappa.powi(-d) * (c / kappa).exp() * pu;
            out.pairs += 1;
            out.worst = out.worst.max(pv / bound);
            if *pv > bound * (1.0 + 1e-12) {
                out.failures += 1;
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    pub processes: usize,
    pub loss_checks: usize,
    pub loss_failures: usize,
    pub ratio_pairs: usize,
    pub ratio_failures: usize,
    /// Largest observed `π(v) / bound`.
    pub worst_ratio: f64,
    /// Smallest observed slack `E_π − (E_U − kβ)`.
    pub min_loss_slack: f64,
}

/// `trials` random processes, each with one random `f` on a random
/// coordinate subset, checked against both inequalities.
pub fn ddwb_check_suite<R: Rng>(trials: usize, rng: &mut R) -> SuiteReport {
    let mut rep = SuiteReport { min_loss_slack: f64::INFINITY, ..SuiteReport::default() };
    for _ in 0..trials {
        let p = DdwbProcess::random(rng);
        let coords: Vec<usize> = (0..p.len()).filter(|_| rng.gen_bool(0.5)).collect();
        let table: Vec<f64> = (0..p.points().len()).map(|_| rng.gen()).collect();
        let radix = p.sizes.clone();
        let f = |u: &[usize]| {
            // depends on `coords` only
            let key = coords.iter().fold(0, |acc, &i| acc * radix[i] + u[i]);
            table[key % table.len()]
        };
        let loss = check_loss(&p, &coords, f);
        rep.loss_checks += 1;
        rep.loss_failures += !loss.ok as usize;
        rep.min_loss_slack = rep.min_loss_slack.min(loss.e_pi - (loss.e_u - loss.k as f64 * loss.beta));
        let ratio = check_ratio(&p);
        rep.ratio_pairs += ratio.pairs;
        rep.ratio_failures += ratio.failures;
        rep.worst_ratio = rep.worst_ratio.max(ratio.worst);
        rep.processes += 1;
    }
    rep
}
