//! Reduction layouts: the sampling experiment, its exact masses, validity,
//! the assignment a layout induces, and the gadget-swapping involution.
//!
//! Indices are 0-based throughout. A layout of length `n` has `3n + 3`
//! coordinates, in sampling order: `i_1..i_{n+1}`, the pairs
//! `(j_{k,1}, j_{k,2})` for `k <= n`, the triple `j_{n+1,*}`, then the vertex
//! triples `(u_k, v_k, w_k)`.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use super::{has_edge_within, Profile};
use crate::cnf::{Edge, MAssignment, MatchLayout};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Layout {
    /// `i_1..i_{n+1}`
    pub is: Vec<usize>,
    /// `(j_{k,1}, j_{k,2})` for `k <= n`
    pub js: Vec<[usize; 2]>,
    /// `(j_{n+1,1}, j_{n+1,2}, j_{n+1,3})`
    pub jp: [usize; 3],
    /// `(u_k, v_k, w_k)` for `k <= n + 1`
    pub uvw: Vec<[u32; 3]>,
}

impl Layout {
    pub fn n(&self) -> usize {
        self.js.len()
    }

    /// `{ j_{k,1}, j_{k,2} } ∪ { j_{n+1,*} }` as a mask.
    pub fn j_mask(&self) -> u64 {
        self.js.iter().flatten().chain(&self.jp).fold(0, |a, &j| a | 1 << j)
    }

    pub fn v_mask(&self) -> u64 {
        self.uvw.iter().flatten().fold(0, |a, &u| a | 1 << u)
    }

    /// Structured text: one line each for `i`, `j` and the vertex triples,
    /// all 1-based.
    pub fn to_text(&self) -> String {
        let i: Vec<String> = self.is.iter().map(|i| (i + 1).to_string()).collect();
        let mut j: Vec<String> = self.js.iter().map(|p| format!("{},{}", p[0] + 1, p[1] + 1)).collect();
        j.push(format!("{},{},{}", self.jp[0] + 1, self.jp[1] + 1, self.jp[2] + 1));
        let t: Vec<String> =
            self.uvw.iter().map(|t| format!("{},{},{}", t[0] + 1, t[1] + 1, t[2] + 1)).collect();
        format!("i {}\nj {}\nuvw {}\n", i.join(" "), j.join(" "), t.join(" "))
    }
}

/// `K_{1,2}(E[W])`: ordered `(u, v, w)` with `v != w` and both `{u,v}` and
/// `{u,w}` edges of `adj` inside `within`.
pub fn k12(adj: &[u64], within: u64) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for u in ones(within) {
        let nb = adj[u as usize] & within;
        for v in ones(nb) {
            for w in ones(nb & !(1 << v)) {
                out.push([u, v, w]);
            }
        }
    }
    out
}

/// `|K_{1,2}(E[W])|` and, per vertex, how many of those triples contain it.
fn k12_loss(adj: &[u64], within: u64) -> (u64, Vec<u64>) {
    let deg = |u: u32| (adj[u as usize] & within).count_ones() as u64;
    let mut total = 0;
    let mut loss = Vec::new();
    for x in ones(within) {
        let d = deg(x);
        total += d * d.saturating_sub(1);
        let as_leaf: u64 = ones(adj[x as usize] & within).map(|u| 2 * (deg(u) - 1)).sum();
        loss.push(d * d.saturating_sub(1) + as_leaf);
    }
    (total, loss)
}

/// `pm_[x](U)`: ordered pairs over `0..x` meeting `U`.
pub fn pm(x: usize, u: u64) -> Vec<[usize; 2]> {
    let hit = |a: usize| u >> a & 1 == 1;
    let mut out = Vec::new();
    for a in 0..x {
        for b in 0..x {
            if hit(a) || hit(b) {
                out.push([a, b]);
            }
        }
    }
    out
}

/// `tm_[x](U)`: ordered triples over `0..x` meeting `U`.
pub fn tm(x: usize, u: u64) -> Vec<[usize; 3]> {
    let hit = |a: usize| u >> a & 1 == 1;
    let mut out = Vec::new();
    for a in 0..x {
        for b in 0..x {
            for c in 0..x {
                if hit(a) || hit(b) || hit(c) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

fn ones(mut mask: u64) -> impl Iterator<Item = u32> {
    std::iter::from_fn(move || {
        (mask != 0).then(|| {
            let b = mask.trailing_zeros();
            mask &= mask - 1;
            b
        })
    })
}

fn mask_of(js: &[usize]) -> u64 {
    js.iter().fold(0, |a, &j| a | 1 << j)
}

// The choice sets `S \ F` of the experiment.

fn i_choices(prof: &Profile, used: &[usize]) -> Vec<usize> {
    prof.g.iter().copied().filter(|i| !used.contains(i)).collect()
}

fn j2_choices(prof: &Profile, i: usize, used: u64) -> Vec<[usize; 2]> {
    prof.n2[i].iter().copied().filter(|p| mask_of(p) & used == 0).collect()
}

fn j3_choices(prof: &Profile, i: usize, used: u64) -> Vec<[usize; 3]> {
    prof.n3[i].iter().copied().filter(|t| mask_of(t) & used == 0).collect()
}

fn slot_mask(prof: &Profile, js: &[usize]) -> u64 {
    js.iter().fold((1u64 << (3 * prof.m)) - 1, |a, &j| a & prof.vmask[j])
}

fn t_choices(prof: &Profile, i: usize, js: &[usize], used: u64) -> Vec<[u32; 3]> {
    k12(&prof.adj[i], slot_mask(prof, js) & !used)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("experiment stuck at coordinate {coord}: empty choice set")]
    Stuck { coord: usize },
    #[error("length {n} needs {need} slots of a kind, only {have} exist")]
    TooLong { n: usize, need: usize, have: usize },
}

/// One evaluation of a step guard: the size of the choice set against the
/// lower bound claimed for it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuardCheck {
    /// 1 to 5, in the order the bounds are stated.
    pub guard: u8,
    /// 1-based gadget index.
    pub k: usize,
    pub count: u64,
    pub bound: f64,
    pub holds: bool,
}

fn check_len(m: usize, n: usize) -> Result<(), SampleError> {
    if n + 1 > m {
        return Err(SampleError::TooLong { n, need: n + 1, have: m });
    }
    Ok(())
}

/// Runs the experiment once. Every choice is uniform over its candidate set;
/// an empty set aborts with [`SampleError::Stuck`]. The step guards are
/// evaluated before each choice they cover and returned alongside.
pub fn sample_layout<R: Rng>(
    prof: &Profile,
    n: usize,
    rng: &mut R,
) -> Result<(Layout, Vec<GuardCheck>), SampleError> {
    check_len(prof.m, n)?;
    let m = prof.m as f64;
    let s = prof.vertex_slots() as f64;
    let verts = 3.0 * m;
    let delta = prof.delta.value();
    let gamma = (n + 1) as f64 / m;
    let mut checks = Vec::new();
    let mut check = |guard: u8, k: usize, count: usize, bound: f64, strict: bool| {
        let c = count as f64;
        let holds = if strict { c > bound } else { c >= bound };
        checks.push(GuardCheck { guard, k, count: count as u64, bound, holds });
    };
    let mut coord = 0;
    let pick = |len: usize, rng: &mut R, coord: &mut usize| -> Result<usize, SampleError> {
        if len == 0 {
            return Err(SampleError::Stuck { coord: *coord });
        }
        *coord += 1;
        Ok(rng.gen_range(0..len))
    };

    let mut is = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let c = i_choices(prof, &is);
        if k < n {
            check(1, k + 1, c.len(), (delta / 12.0 - gamma) * m, true);
        }
        is.push(c[pick(c.len(), rng, &mut coord)?]);
    }
    let mut used_j = 0u64;
    let mut js = Vec::with_capacity(n);
    for (k, &i) in is.iter().enumerate().take(n) {
        let c = j2_choices(prof, i, used_j);
        check(2, k + 1, c.len(), (delta / 3.0 - 2.0 * gamma) * s * s, false);
        let p = c[pick(c.len(), rng, &mut coord)?];
        used_j |= mask_of(&p);
        js.push(p);
    }
    let c = j3_choices(prof, is[n], used_j);
    check(3, n + 1, c.len(), (delta / 3.0 - 3.0 * gamma) * s * s * s, false);
    let jp = c[pick(c.len(), rng, &mut coord)?];

    let mut used_v = 0u64;
    let mut uvw = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let slots: Vec<usize> = if k < n { js[k].to_vec() } else { jp.to_vec() };
        let c = t_choices(prof, is[k], &slots, used_v);
        let guard = if k < n { 4 } else { 5 };
        check(guard, k + 1, c.len(), (delta * delta / 10.0 - 3.0 * gamma) * verts.powi(3), false);
        let t = c[pick(c.len(), rng, &mut coord)?];
        used_v |= t.iter().fold(0, |a, &u| a | 1 << u);
        uvw.push(t);
    }
    Ok((Layout { is, js, jp, uvw }, checks))
}

/// Natural log of the experiment's probability of producing `l`, or `None`
/// when that probability is zero.
pub fn layout_log_mass(l: &Layout, prof: &Profile) -> Option<f64> {
    let n = l.n();
    if l.is.len() != n + 1 || l.uvw.len() != n + 1 || n + 1 > prof.m {
        return None;
    }
    let mut log = 0.0;
    let mut take = |size: usize, member: bool| -> Option<()> {
        if !member {
            return None;
        }
        log -= (size as f64).ln();
        Some(())
    };
    for k in 0..=n {
        let c = i_choices(prof, &l.is[..k]);
        take(c.len(), c.contains(&l.is[k]))?;
    }
    let mut used_j = 0u64;
    for k in 0..n {
        let c = j2_choices(prof, l.is[k], used_j);
        take(c.len(), c.contains(&l.js[k]))?;
        used_j |= mask_of(&l.js[k]);
    }
    let c = j3_choices(prof, l.is[n], used_j);
    take(c.len(), c.contains(&l.jp))?;
    let mut used_v = 0u64;
    for k in 0..=n {
        let slots: Vec<usize> = if k < n { l.js[k].to_vec() } else { l.jp.to_vec() };
        let c = t_choices(prof, l.is[k], &slots, used_v);
        take(c.len(), c.contains(&l.uvw[k]))?;
        used_v |= l.uvw[k].iter().fold(0, |a, &u| a | 1 << u);
    }
    Some(log)
}

/// Probability that the experiment produces `l`.
pub fn layout_mass(l: &Layout, prof: &Profile) -> f64 {
    layout_log_mass(l, prof).map_or(0.0, f64::exp)
}

/// The nine conditions of a reduction layout.
pub fn validate_layout(l: &Layout, prof: &Profile) -> bool {
    let n = l.n();
    let (m, s, nv) = (prof.m, prof.vertex_slots(), 3 * prof.m as u32);
    if l.is.len() != n + 1 || l.uvw.len() != n + 1 {
        return false;
    }
    if l.is.iter().any(|&i| i >= m) || l.js.iter().flatten().chain(&l.jp).any(|&j| j >= s) {
        return false;
    }
    if l.uvw.iter().flatten().any(|&u| u >= nv) {
        return false;
    }
    let all_distinct = |xs: Vec<u64>| {
        let mut v = xs.clone();
        v.sort_unstable();
        v.dedup();
        v.len() == xs.len()
    };
    // 1, 2, 3: distinct indices and vertices.
    if !all_distinct(l.is.iter().map(|&i| i as u64).collect())
        || !all_distinct(l.js.iter().flatten().chain(&l.jp).map(|&j| j as u64).collect())
        || !all_distinct(l.uvw.iter().flatten().map(|&u| u as u64).collect())
    {
        return false;
    }
    for k in 0..=n {
        let [u, v, w] = l.uvw[k];
        let adj = &prof.adj[l.is[k]];
        // 4: both gadget edges in E_{i_k}.
        if adj[u as usize] >> v & 1 == 0 || adj[u as usize] >> w & 1 == 0 {
            return false;
        }
        // 5 and 6: the vertices are in the cited vertex slots.
        let slots: Vec<usize> = if k < n { l.js[k].to_vec() } else { l.jp.to_vec() };
        let wmask = slot_mask(prof, &slots);
        if [u, v, w].iter().any(|&x| wmask >> x & 1 == 0) {
            return false;
        }
    }
    // 7, 8, 9: membership in G, N_3, N_2.
    l.is.iter().all(|&i| prof.in_g(i))
        && prof.in_n3(l.is[n], l.jp)
        && (0..n).all(|k| prof.in_n2(l.is[k], l.js[k]))
}

/// All layouts of length `n`, by backtracking over the definition directly
/// (not over the experiment). Meant for tiny `m`.
pub fn enumerate_layouts(prof: &Profile, n: usize) -> Vec<Layout> {
    let mut out = Vec::new();
    if n + 1 > prof.m {
        return out;
    }
    let s = prof.vertex_slots();
    let nv = 3 * prof.m as u32;
    let mut ids = Vec::new();
    enum_is(prof, n, &mut ids, &mut |is| {
        let mut pairs = Vec::new();
        enum_js(prof, s, is, n, 0, &mut pairs, &mut |js, used| {
            for jp in distinct_triples(s) {
                if mask_of(&jp) & used != 0 || !prof.in_n3(is[n], jp) {
                    continue;
                }
                let mut uvw = Vec::new();
                enum_uvw(prof, nv, is, js, jp, 0, 0, &mut uvw, &mut |uvw| {
                    let l = Layout { is: is.to_vec(), js: js.to_vec(), jp, uvw: uvw.to_vec() };
                    debug_assert!(validate_layout(&l, prof));
                    out.push(l);
                });
            }
        });
    });
    out
}

fn distinct_triples(s: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..s {
        for b in 0..s {
            for c in 0..s {
                if a != b && b != c && a != c {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

fn enum_is(prof: &Profile, n: usize, acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if acc.len() == n + 1 {
        f(acc);
        return;
    }
    for i in 0..prof.m {
        if prof.in_g(i) && !acc.contains(&i) {
            acc.push(i);
            enum_is(prof, n, acc, f);
            acc.pop();
        }
    }
}

fn enum_js(
    prof: &Profile,
    s: usize,
    is: &[usize],
    n: usize,
    used: u64,
    acc: &mut Vec<[usize; 2]>,
    f: &mut dyn FnMut(&[[usize; 2]], u64),
) {
    let k = acc.len();
    if k == n {
        f(acc, used);
        return;
    }
    for a in 0..s {
        for b in 0..s {
            let p = [a, b];
            if a != b && used & mask_of(&p) == 0 && prof.in_n2(is[k], p) {
                acc.push(p);
                enum_js(prof, s, is, n, used | mask_of(&p), acc, f);
                acc.pop();
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn enum_uvw(
    prof: &Profile,
    nv: u32,
    is: &[usize],
    js: &[[usize; 2]],
    jp: [usize; 3],
    k: usize,
    used: u64,
    acc: &mut Vec<[u32; 3]>,
    f: &mut dyn FnMut(&[[u32; 3]]),
) {
    let n = js.len();
    if k == n + 1 {
        f(acc);
        return;
    }
    let adj = &prof.adj[is[k]];
    let slots: Vec<usize> = if k < n { js[k].to_vec() } else { jp.to_vec() };
    let inside = |x: u32| slots.iter().all(|&j| prof.vmask[j] >> x & 1 == 1);
    let fresh = |x: u32| used >> x & 1 == 0;
    for u in 0..nv {
        for v in 0..nv {
            for w in 0..nv {
                let ok = u != v
                    && v != w
                    && u != w
                    && [u, v, w].iter().all(|&x| fresh(x) && inside(x))
                    && adj[u as usize] >> v & 1 == 1
                    && adj[u as usize] >> w & 1 == 1;
                if ok {
                    acc.push([u, v, w]);
                    enum_uvw(prof, nv, is, js, jp, k + 1, used | 1 << u | 1 << v | 1 << w, acc, f);
                    acc.pop();
                }
            }
        }
    }
}

/// Worst-case size of `S \ F` minus the most the blocked set can remove,
/// for a blocked set of `s` elements with per-element losses `loss`.
fn survives(total: u64, loss: &mut [u64], s: usize) -> bool {
    loss.sort_unstable_by(|a, b| b.cmp(a));
    let removed: u64 = loss.iter().take(s).sum();
    total > removed
}

/// Largest `n` for which no run of the experiment can get stuck, judged
/// from the actual set sizes: every choice set is at least its full size
/// minus the largest possible number of elements blocked by earlier picks.
/// `None` when even `n = 0` is not guaranteed.
pub fn n_guard(prof: &Profile) -> Option<usize> {
    let s = prof.vertex_slots();
    let ok = |n: usize| -> bool {
        if n + 1 > prof.g.len() || 2 * n + 3 > s || 3 * n + 3 > 3 * prof.m {
            return false;
        }
        for &i in &prof.g {
            let mut per_j = vec![0u64; s];
            for p in &prof.n2[i] {
                per_j[p[0]] += 1;
                per_j[p[1]] += 1;
            }
            if n >= 1 && !survives(prof.n2[i].len() as u64, &mut per_j, 2 * (n - 1)) {
                return false;
            }
            let mut per_j = vec![0u64; s];
            for t in &prof.n3[i] {
                for &j in t {
                    per_j[j] += 1;
                }
            }
            if !survives(prof.n3[i].len() as u64, &mut per_j, 2 * n) {
                return false;
            }
            if n >= 1 {
                for p in &prof.n2[i] {
                    let (total, mut loss) = k12_loss(&prof.adj[i], slot_mask(prof, p));
                    if !survives(total, &mut loss, 3 * (n - 1)) {
                        return false;
                    }
                }
            }
            for t in &prof.n3[i] {
                let (total, mut loss) = k12_loss(&prof.adj[i], slot_mask(prof, t));
                if !survives(total, &mut loss, 3 * n) {
                    return false;
                }
            }
        }
        true
    };
    if !ok(0) {
        return None;
    }
    let mut n = 0;
    while ok(n + 1) {
        n += 1;
    }
    Some(n)
}

/// `A_{L,X,Y}`. Rows and vertices outside the gadgets get a fixed
/// completion depending only on the sets of used rows, slots and vertices:
/// with `R` the unused vertices in increasing order and `r = m - n - 1`,
/// the `t`-th unused edge row holds `{R[2t], R[2t+1]}` and the unused vertex
/// slots, in increasing order, take `R[0], R[2], .., R[2r-2]` followed by
/// `R[2r..3r]`, sorted.
pub fn build_assignment(l: &Layout, x: &[bool], y: &[bool], m: usize) -> MAssignment {
    let n = l.n();
    assert!(x.len() == n && y.len() == n, "instance length must match the layout");
    let lay = MatchLayout::new(m);
    let mut a = MAssignment::new(m);
    for k in 0..n {
        let [u, v, w] = l.uvw[k];
        a.set_edge(l.is[k], Edge::new(u, v), x[k]);
        a.set_edge(l.is[k], Edge::new(u, w), !x[k]);
        a.set_vertex(l.js[k][0], v, true);
        a.set_vertex(l.js[k][1], u, y[k]);
        a.set_vertex(l.js[k][1], w, !y[k]);
    }
    let [u, v, w] = l.uvw[n];
    a.set_edge(l.is[n], Edge::new(u, w), true);
    a.set_vertex(l.jp[0], u, true);
    a.set_vertex(l.jp[1], v, true);
    a.set_vertex(l.jp[2], w, true);

    let rest: Vec<u32> = (0..lay.vertices() as u32).filter(|u| l.v_mask() >> u & 1 == 0).collect();
    let rows: Vec<usize> = (0..m).filter(|i| !l.is.contains(i)).collect();
    let slots: Vec<usize> = (0..lay.vertex_slots()).filter(|j| l.j_mask() >> j & 1 == 0).collect();
    let r = m - n - 1;
    debug_assert!(rest.len() == 3 * r && rows.len() == r && slots.len() == 2 * r);
    for (t, &i) in rows.iter().enumerate() {
        a.set_edge(i, Edge::new(rest[2 * t], rest[2 * t + 1]), true);
    }
    let mut chosen: Vec<u32> = (0..r).map(|t| rest[2 * t]).chain(rest[2 * r..].iter().copied()).collect();
    chosen.sort_unstable();
    for (&j, &u) in slots.iter().zip(&chosen) {
        a.set_vertex(j, u, true);
    }
    a
}

/// `pe(L) = {u_{n+1}, w_{n+1}}`.
pub fn planted_edge(l: &Layout) -> Edge {
    let [u, _, w] = l.uvw[l.n()];
    Edge::new(u, w)
}

/// Coordinates (out of `3n + 3`) where two layouts of the same length differ.
pub fn hamming_distance(a: &Layout, b: &Layout) -> usize {
    assert_eq!(a.n(), b.n(), "layouts of different lengths");
    let is = a.is.iter().zip(&b.is).filter(|(x, y)| x != y).count();
    let js = a.js.iter().zip(&b.js).filter(|(x, y)| x != y).count();
    let jp = (a.jp != b.jp) as usize;
    let t = a.uvw.iter().zip(&b.uvw).filter(|(x, y)| x != y).count();
    is + js + jp + t
}

/// Gadget `l` (0-based, `l < n`) can trade places with the planted gadget.
pub fn is_switchable(layout: &Layout, l: usize, prof: &Profile) -> bool {
    let n = layout.n();
    if l >= n {
        return false;
    }
    let (il, ip) = (layout.is[l], layout.is[n]);
    if !prof.in_n3(il, [layout.jp[1], layout.js[l][0], layout.js[l][1]]) {
        return false;
    }
    let wp = slot_mask(prof, &layout.jp);
    let wl = slot_mask(prof, &layout.js[l]);
    let [ul, vl, wwl] = layout.uvw[l];
    let [up, vp, wwp] = layout.uvw[n];
    [up, ul].iter().all(|&a| {
        [vp, vl, wwp, wwl].iter().all(|&b| {
            a != b && {
                let e = Edge::new(a, b);
                has_edge_within(&prof.adj[ip], wp, e) && has_edge_within(&prof.adj[il], wl, e)
            }
        })
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("layout is not {0}-switchable")]
pub struct NotSwitchable(pub usize);

/// The swap of gadget `l` with the planted gadget.
pub fn involution(layout: &Layout, l: usize, prof: &Profile) -> Result<Layout, NotSwitchable> {
    if !is_switchable(layout, l, prof) {
        return Err(NotSwitchable(l));
    }
    let n = layout.n();
    let mut out = layout.clone();
    out.is.swap(l, n);
    let (jl, jp) = (layout.js[l], layout.jp);
    out.js[l] = [jp[2], jp[0]];
    out.jp = [jl[1], jp[1], jl[0]];
    let ([ul, vl, wl], [up, vp, wp]) = (layout.uvw[l], layout.uvw[n]);
    out.uvw[l] = [up, wp, wl];
    out.uvw[n] = [ul, vp, vl];
    Ok(out)
}

/// A uniformly random element of `xs`; used by callers that pick `l`.
pub fn choose<T: Copy, R: Rng>(xs: &[T], rng: &mut R) -> Option<T> {
    xs.choose(rng).copied()
}
