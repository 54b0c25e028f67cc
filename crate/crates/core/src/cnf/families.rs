//! Generators for Match_m, IndMatch_m and the pigeonhole principle.

use super::perm::PermFamily;
use super::{Cnf, CnfError, Family, MatchLayout, Role};
use crate::var::{Lit, Var};

/// Clause types 1 to 4 of Match_m over `lay`.
fn structural_clauses(lay: &MatchLayout) -> Vec<Vec<Lit>> {
    let m = lay.m;
    let edges = lay.edges();
    let n = lay.vertices() as u32;
    let mut out = Vec::new();
    // 1: every edge slot holds an edge
    for i in 0..m {
        out.push(edges.iter().map(|&e| lay.edge_var(i, e).pos()).collect());
    }
    // 2: edges in different slots are disjoint
    for i in 0..m {
        for j in i + 1..m {
            for &e in &edges {
                for &f in edges.iter().filter(|f| f.meets(e)) {
                    out.push(vec![lay.edge_var(i, e).neg(), lay.edge_var(j, f).neg()]);
                }
            }
        }
    }
    // 3: every vertex slot holds a vertex
    for j in 0..lay.vertex_slots() {
        out.push((0..n).map(|u| lay.vertex_var(j, u).pos()).collect());
    }
    // 4: no vertex sits in two vertex slots
    for i in 0..lay.vertex_slots() {
        for j in i + 1..lay.vertex_slots() {
            for u in 0..n {
                out.push(vec![lay.vertex_var(i, u).neg(), lay.vertex_var(j, u).neg()]);
            }
        }
    }
    out
}

/// Match_m: a size-m matching and a size-(2m+1) independent set on 3m vertices.
pub fn gen_match(m: usize) -> Result<Cnf, CnfError> {
    if m == 0 {
        return Err(CnfError::ZeroParam);
    }
    let lay = MatchLayout::new(m);
    let mut clauses = structural_clauses(&lay);
    // 5: no matched edge has both endpoints selected
    for e in lay.edges() {
        for k in 0..m {
            for i in 0..lay.vertex_slots() {
                for j in 0..lay.vertex_slots() {
                    clauses.push(vec![
                        lay.vertex_var(i, e.u).neg(),
                        lay.vertex_var(j, e.v).neg(),
                        lay.edge_var(k, e).neg(),
                    ]);
                }
            }
        }
    }
    Ok(Cnf { num_vars: lay.num_mvars(), clauses, roles: lay.roles(), family: Family::Match { m } })
}

/// Number of permutation bits `ℓ = ⌈log2 |Π_m|⌉`.
pub fn perm_bits(family_len: usize) -> usize {
    let mut l = 0;
    while (1usize << l) < family_len {
        l += 1;
    }
    l
}

/// IndMatch_m: Match_m whose independence clauses are guarded by the
/// permutation bits. Bit pattern `α` (bit `b` is `z_b`) selects member
/// `α mod |Π_m|`. The bits are variables `0..ℓ`, ahead of the matching ones.
pub fn gen_indmatch(m: usize) -> Result<Cnf, CnfError> {
    let fam = PermFamily::new(m)?;
    let l = perm_bits(fam.len());
    let lay = MatchLayout { m, offset: l };
    let mut clauses = structural_clauses(&lay);
    let edges = lay.edges();
    for alpha in 0..1usize << l {
        let pi = fam.get(alpha % fam.len());
        let guard: Vec<Lit> = (0..l).map(|b| Lit::new(Var(b as u32), alpha >> b & 1 == 1)).collect();
        for &e in &edges {
            let (pu, pv) = (pi[e.u as usize], pi[e.v as usize]);
            for k in 0..m {
                for i in 0..lay.vertex_slots() {
                    for j in 0..lay.vertex_slots() {
                        let mut c = guard.clone();
                        c.push(lay.vertex_var(i, pu).neg());
                        c.push(lay.vertex_var(j, pv).neg());
                        c.push(lay.edge_var(k, e).neg());
                        clauses.push(c);
                    }
                }
            }
        }
    }
    let mut roles: Vec<Role> = (0..l as u32).map(|bit| Role::Perm { bit }).collect();
    roles.extend(lay.roles());
    Ok(Cnf { num_vars: l + lay.num_mvars(), clauses, roles, family: Family::IndMatch { m } })
}

/// PHP with `n + 1` pigeons and `n` holes.
pub fn gen_php(n: usize) -> Result<Cnf, CnfError> {
    if n == 0 {
        return Err(CnfError::ZeroParam);
    }
    let var = |p: usize, h: usize| Var((p * n + h) as u32);
    let mut clauses = Vec::new();
    for p in 0..=n {
        clauses.push((0..n).map(|h| var(p, h).pos()).collect());
    }
    for h in 0..n {
        for p in 0..=n {
            for q in p + 1..=n {
                clauses.push(vec![var(p, h).neg(), var(q, h).neg()]);
            }
        }
    }
    let roles = (0..=n as u32)
        .flat_map(|pigeon| (0..n as u32).map(move |hole| Role::Hole { pigeon, hole }))
        .collect();
    Ok(Cnf { num_vars: (n + 1) * n, clauses, roles, family: Family::Php { n } })
}

/// Type (1 to 5) of a Match or IndMatch clause, ignoring permutation literals.
pub fn match_clause_type(cnf: &Cnf, clause: &[Lit]) -> Option<u8> {
    let lits: Vec<(Role, bool)> = clause
        .iter()
        .map(|l| (cnf.roles[l.var().index()], l.is_negated()))
        .filter(|(r, _)| !matches!(r, Role::Perm { .. }))
        .collect();
    let edges = lits.iter().filter(|(r, _)| matches!(r, Role::Edge { .. })).count();
    let verts = lits.iter().filter(|(r, _)| matches!(r, Role::Vertex { .. })).count();
    let neg = lits.iter().all(|(_, n)| *n);
    let pos = lits.iter().all(|(_, n)| !*n);
    match (edges, verts) {
        (e, 0) if e > 0 && pos => Some(1),
        (2, 0) if neg => Some(2),
        (0, v) if v > 0 && pos => Some(3),
        (0, 2) if neg => Some(4),
        (1, 2) if neg => Some(5),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::choose2;

    fn counts(cnf: &Cnf) -> [usize; 5] {
        let mut c = [0; 5];
        for cl in &cnf.clauses {
            c[match_clause_type(cnf, cl).unwrap() as usize - 1] += 1;
        }
        c
    }

    /// Counts by direct enumeration of the index ranges, one clause per
    /// unordered pair of distinct literal sets.
    fn enumerated_counts(m: usize) -> [usize; 5] {
        let n = 3 * m;
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let mut t2 = std::collections::HashSet::new();
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                for &e in &edges {
                    for &f in &edges {
                        if e.0 == f.0 || e.0 == f.1 || e.1 == f.0 || e.1 == f.1 {
                            let a = (i, e);
                            let b = (j, f);
                            t2.insert(if a < b { (a, b) } else { (b, a) });
                        }
                    }
                }
            }
        }
        let s = 2 * m + 1;
        let mut t4 = std::collections::HashSet::new();
        for i in 0..s {
            for j in 0..s {
                for u in 0..n {
                    if i != j {
                        t4.insert((i.min(j), i.max(j), u));
                    }
                }
            }
        }
        let mut t5 = std::collections::HashSet::new();
        for &(u, v) in &edges {
            for k in 0..m {
                for i in 0..s {
                    for j in 0..s {
                        let mut lits = vec![(0, i, u), (0, j, v), (1, k, u * n + v)];
                        lits.sort();
                        t5.insert(lits);
                    }
                }
            }
        }
        [m, t2.len(), s, t4.len(), t5.len()]
    }

    #[test]
    fn match_counts_closed_forms() {
        for m in 1..=4 {
            let cnf = gen_match(m).unwrap();
            let n = 3 * m;
            let c = choose2(n);
            assert_eq!(cnf.num_vars, m * c + (2 * m + 1) * n);
            let closed = [
                m,
                choose2(m) * c * (1 + 2 * (n - 2)),
                2 * m + 1,
                choose2(2 * m + 1) * n,
                m * c * (2 * m + 1) * (2 * m + 1),
            ];
            assert_eq!(counts(&cnf), closed, "m={m}");
            assert_eq!(enumerated_counts(m), closed, "m={m}");
        }
        assert_eq!(gen_match(1).unwrap().num_vars, 12);
    }

    #[test]
    fn clauses_have_no_duplicate_literals() {
        for cnf in [gen_match(2).unwrap(), gen_indmatch(1).unwrap(), gen_php(4).unwrap()] {
            for c in &cnf.clauses {
                assert!(!c.is_empty());
                let mut s = c.clone();
                s.sort();
                s.dedup();
                assert_eq!(s.len(), c.len());
            }
        }
    }

    fn brute_force_sat(cnf: &Cnf) -> Option<Vec<bool>> {
        assert!(cnf.num_vars <= 22);
        (0u64..1 << cnf.num_vars)
            .map(|bits| (0..cnf.num_vars).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            .find(|vals| cnf.eval(vals))
    }

    #[test]
    fn match1_and_php_unsat_by_brute_force() {
        assert!(brute_force_sat(&gen_match(1).unwrap()).is_none());
        assert!(brute_force_sat(&gen_php(3).unwrap()).is_none());
        assert_eq!(gen_php(3).unwrap().num_vars, 12);
    }

    #[test]
    fn dropping_a_type_makes_match1_sat_only_via_that_type() {
        let full = gen_match(1).unwrap();
        for t in 1..=5u8 {
            let mut sub = full.clone();
            sub.clauses.retain(|c| match_clause_type(&full, c) != Some(t));
            if t == 2 {
                // no type-2 clauses exist at m = 1
                assert_eq!(sub.clauses.len(), full.clauses.len());
                continue;
            }
            let model = brute_force_sat(&sub).expect("sub-formula should be satisfiable");
            let violated = full.falsified(&model).unwrap();
            assert_eq!(match_clause_type(&full, &full.clauses[violated]), Some(t));
        }
    }

    #[test]
    fn php_shape() {
        let cnf = gen_php(1).unwrap();
        assert_eq!(cnf.num_vars, 2);
        assert!(brute_force_sat(&cnf).is_none());
        let cnf = gen_php(5).unwrap();
        assert_eq!(cnf.clauses.len(), 6 + 5 * choose2(6));
    }

    #[test]
    fn indmatch_shape() {
        let cnf = gen_indmatch(1).unwrap();
        assert_eq!(perm_bits(6), 3);
        assert_eq!(cnf.num_vars, 3 + 12);
        assert!(matches!(cnf.roles[0], Role::Perm { bit: 0 }));
        let match1 = gen_match(1).unwrap();
        let structural = match1.clauses.iter().filter(|c| match_clause_type(&match1, c) != Some(5)).count();
        assert_eq!(cnf.clauses.len(), structural + 8 * 3 * 9);
        assert_eq!(perm_bits(72), 7);
        assert_eq!(gen_indmatch(2).unwrap_err(), CnfError::NotPowerOfThree(2));
    }

    #[test]
    fn indmatch_restricted_to_alpha_is_relabelled_match() {
        // Fixing z to α leaves exactly the independence clauses of π_α.
        let cnf = gen_indmatch(1).unwrap();
        let fam = PermFamily::new(1).unwrap();
        let lay = MatchLayout { m: 1, offset: 3 };
        for alpha in 0..8usize {
            let pi = fam.get(alpha % 6);
            let live: Vec<Vec<Lit>> = cnf
                .clauses
                .iter()
                .filter(|c| match_clause_type(&cnf, c) == Some(5))
                .filter(|c| {
                    c.iter()
                        .filter(|l| l.var().index() < 3)
                        .all(|l| (alpha >> l.var().index() & 1 == 1) == l.is_negated())
                })
                .map(|c| c.iter().copied().filter(|l| l.var().index() >= 3).collect())
                .collect();
            assert_eq!(live.len(), 27);
            for c in &live {
                let e = match cnf.roles[c[2].var().index()] {
                    Role::Edge { edge, .. } => edge,
                    _ => unreachable!(),
                };
                let ys: Vec<u32> = c[..2]
                    .iter()
                    .map(|l| match cnf.roles[l.var().index()] {
                        Role::Vertex { vertex, .. } => vertex,
                        _ => unreachable!(),
                    })
                    .collect();
                assert_eq!(ys, vec![pi[e.u as usize], pi[e.v as usize]]);
                assert!(lay.var_of(cnf.roles[c[2].var().index()]).is_some());
            }
        }
    }
}
