//! Coding-vector assignment.
//!
//! Each family (the `M` or `R` stream) needs one vector per node or terminal
//! set. Decoding needs certain groups to be linearly independent, and secrecy
//! needs the truncated key image to be independent of every admissible set of
//! observed images. Both are checked exactly by rank computations over the
//! symmetric-matrix parameter space. Moment-curve points are tried first, so
//! large fields never backtrack; small fields fall back to general vectors.

use std::collections::BTreeMap;

use crate::field::{extended_points, Field, FieldMatrix};
use crate::network::NodeId;

use super::SchemeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Node(NodeId),
    Set(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct SecrecyReq {
    pub key: Owner,
    pub len: usize,
    pub observers: Vec<Owner>,
    pub max: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub name: &'static str,
    pub field: Field,
    pub n: usize,
    pub vars: Vec<Owner>,
    pub independent: Vec<Vec<Owner>>,
    pub secrecy: Vec<SecrecyReq>,
}

/// Row of the functional `M ↦ (M w)_r` in the coordinates of the upper triangle.
fn image_row(field: Field, n: usize, w: &[u32], r: usize) -> Vec<u32> {
    let mut row = vec![0u32; n * (n + 1) / 2];
    for (c, &wc) in w.iter().enumerate() {
        let (i, j) = if r <= c { (r, c) } else { (c, r) };
        let idx = i * n - i * (i + 1) / 2 + j;
        row[idx] = field.add(row[idx], wc);
    }
    row
}

/// Exact test that `[X v]_{1:len}` is uniform and independent of `X w` for all
/// observed `w`, with `X` uniform over symmetric `n×n` matrices.
pub fn symmetric_secrecy_holds(field: Field, key: &[u32], len: usize, observed: &[&[u32]]) -> bool {
    let n = key.len();
    let k_rows: Vec<Vec<u32>> = (0..len).map(|r| image_row(field, n, key, r)).collect();
    let o_rows: Vec<Vec<u32>> = observed
        .iter()
        .flat_map(|w| (0..n).map(move |r| image_row(field, n, w, r)))
        .collect();
    let width = n * (n + 1) / 2;
    let rank = |rows: &[Vec<u32>]| -> usize {
        if rows.is_empty() {
            return 0;
        }
        FieldMatrix::from_fn(field, rows.len(), width, |i, j| rows[i][j] as u64).rank()
    };
    let rk = rank(&k_rows);
    if rk != len {
        return false;
    }
    let ro = rank(&o_rows);
    let mut all = k_rows;
    all.extend(o_rows);
    rank(&all) == rk + ro
}

pub(crate) fn independent(field: Field, vecs: &[&[u32]]) -> bool {
    if vecs.is_empty() {
        return true;
    }
    let n = vecs[0].len();
    if vecs.len() > n {
        return false;
    }
    FieldMatrix::from_columns(field, n, vecs).rank() == vecs.len()
}

/// Candidate vectors in preference order: curve points, then (for small
/// spaces) every other projective point with leading coordinate 1.
fn candidate_pool(field: Field, n: usize, observable: bool) -> Pool {
    let mut pts = extended_points(field);
    if !observable {
        // the zero point e_1 is only safe for vectors nobody observes
        pts.rotate_right(1);
    }
    let mut base: Vec<Vec<u32>> = Vec::new();
    for p in pts {
        let v = p.vector(field, n);
        if !base.contains(&v) {
            base.push(v);
        }
    }
    let q = field.q() as u64;
    let mut general = Vec::new();
    if q.checked_pow(n as u32).is_some_and(|s| s <= 4096) {
        let total = q.pow(n as u32);
        for idx in 1..total {
            let mut v = vec![0u32; n];
            let mut t = idx;
            for k in (0..n).rev() {
                v[k] = (t % q) as u32;
                t /= q;
            }
            let lead = v.iter().find(|&&x| x != 0).copied();
            if lead == Some(1) && !base.contains(&v) {
                general.push(v);
            }
        }
    }
    (base, general)
}
/// Curve-point candidates, then general ones.
type Pool = (Vec<Vec<u32>>, Vec<Vec<u32>>);


struct Search<'a> {
    p: &'a Problem,
    pos: BTreeMap<Owner, usize>,
    assigned: Vec<Option<Vec<u32>>>,
    pools: Vec<Pool>,
    indep_of: Vec<Vec<usize>>,
    key_of: Vec<Vec<usize>>,
    obs_of: Vec<Vec<usize>>,
    steps: u64,
    budget: u64,
}

impl Search<'_> {
    fn get(&self, o: Owner) -> Option<&[u32]> {
        self.assigned[self.pos[&o]].as_deref()
    }

    fn ok(&mut self, i: usize) -> bool {
        self.steps += 1;
        let field = self.p.field;
        for &c in &self.indep_of[i] {
            let vecs: Vec<&[u32]> = self.p.independent[c].iter().filter_map(|&o| self.get(o)).collect();
            if !independent(field, &vecs) {
                return false;
            }
        }
        for &r in &self.key_of[i] {
            let req = &self.p.secrecy[r];
            if !self.secrecy_subsets(req, None) {
                return false;
            }
        }
        for &r in &self.obs_of[i] {
            let req = &self.p.secrecy[r];
            if self.get(req.key).is_some() && !self.secrecy_subsets(req, Some(self.p.vars[i])) {
                return false;
            }
        }
        true
    }

    /// Checks every subset of assigned observers (of size at most `req.max`)
    /// that contains `must` when given.
    fn secrecy_subsets(&self, req: &SecrecyReq, must: Option<Owner>) -> bool {
        let key = self.get(req.key).expect("key assigned");
        let mut pool: Vec<&[u32]> = Vec::new();
        for &o in &req.observers {
            if Some(o) == must {
                continue;
            }
            if let Some(v) = self.get(o) {
                if !pool.contains(&v) {
                    pool.push(v);
                }
            }
        }
        let fixed: Vec<&[u32]> = must.and_then(|o| self.get(o)).into_iter().collect();
        let room = req.max.saturating_sub(fixed.len());
        if must.is_some() && req.max == 0 {
            return true;
        }
        let mut chosen = fixed;
        subsets_ok(self.p.field, key, req.len, &pool, 0, room, &mut chosen)
    }

    fn order_for(&self, i: usize) -> Vec<Vec<u32>> {
        let used: Vec<&Vec<u32>> = self.assigned.iter().flatten().collect();
        let (base, general) = &self.pools[i];
        let mut out = Vec::with_capacity(base.len() + general.len());
        for group in [base, general] {
            out.extend(group.iter().filter(|v| !used.contains(v)).cloned());
            out.extend(group.iter().filter(|v| used.contains(v)).cloned());
        }
        out
    }

    fn solve(&mut self, i: usize) -> bool {
        if i == self.p.vars.len() {
            return true;
        }
        for cand in self.order_for(i) {
            if self.steps > self.budget {
                return false;
            }
            self.assigned[i] = Some(cand);
            if self.ok(i) && self.solve(i + 1) {
                return true;
            }
            self.assigned[i] = None;
        }
        false
    }
}

fn subsets_ok<'a>(
    field: Field,
    key: &[u32],
    len: usize,
    pool: &[&'a [u32]],
    from: usize,
    room: usize,
    chosen: &mut Vec<&'a [u32]>,
) -> bool {
    // A larger observed set implies the smaller ones, so only maximal subsets matter,
    // except when the pool is smaller than the room.
    if room == 0 || from == pool.len() {
        return symmetric_secrecy_holds(field, key, len, chosen);
    }
    if pool.len() - from <= room {
        let mut all = chosen.clone();
        all.extend_from_slice(&pool[from..]);
        return symmetric_secrecy_holds(field, key, len, &all);
    }
    for k in from..pool.len() {
        chosen.push(pool[k]);
        let ok = subsets_ok(field, key, len, pool, k + 1, room - 1, chosen);
        chosen.pop();
        if !ok {
            return false;
        }
    }
    true
}

impl Problem {
    pub fn solve(&self) -> Result<BTreeMap<Owner, Vec<u32>>, SchemeError> {
        let pos: BTreeMap<Owner, usize> = self.vars.iter().enumerate().map(|(i, &o)| (o, i)).collect();
        let mut observable = vec![false; self.vars.len()];
        let mut indep_of = vec![Vec::new(); self.vars.len()];
        let mut key_of = vec![Vec::new(); self.vars.len()];
        let mut obs_of = vec![Vec::new(); self.vars.len()];
        for (c, group) in self.independent.iter().enumerate() {
            for o in group {
                let i = pos[o];
                if !indep_of[i].contains(&c) {
                    indep_of[i].push(c);
                }
            }
        }
        for (r, req) in self.secrecy.iter().enumerate() {
            key_of[pos[&req.key]].push(r);
            if req.max > 0 {
                for o in &req.observers {
                    observable[pos[o]] = true;
                    if !obs_of[pos[o]].contains(&r) {
                        obs_of[pos[o]].push(r);
                    }
                }
            }
        }
        let pools = (0..self.vars.len())
            .map(|i| candidate_pool(self.field, self.n, observable[i]))
            .collect();
        let mut s = Search {
            p: self,
            pos,
            assigned: vec![None; self.vars.len()],
            pools,
            indep_of,
            key_of,
            obs_of,
            steps: 0,
            budget: 400_000,
        };
        if s.solve(0) {
            Ok(self.vars.iter().copied().zip(s.assigned.into_iter().map(|v| v.expect("assigned"))).collect())
        } else {
            Err(SchemeError::FieldTooSmall {
                q: self.field.q(),
                detail: format!(
                    "no admissible assignment of {} {} vectors of length {} ({} curve points available)",
                    self.vars.len(),
                    self.name,
                    self.n,
                    self.field.q() as usize + 1
                ),
            })
        }
    }
}

/// Greedily extends `fixed` with `count` further columns to a basis, preferring
/// curve points not in `avoid`.
pub(crate) fn complete_basis(
    field: Field,
    n: usize,
    fixed: &[&[u32]],
    count: usize,
    avoid: &[&[u32]],
) -> Option<Vec<Vec<u32>>> {
    let (base, general) = candidate_pool(field, n, true);
    let mut order: Vec<Vec<u32>> = Vec::new();
    for group in [&base, &general] {
        order.extend(group.iter().filter(|v| !avoid.contains(&v.as_slice())).cloned());
    }
    for group in [&base, &general] {
        order.extend(group.iter().filter(|v| avoid.contains(&v.as_slice())).cloned());
    }
    for k in 0..n {
        let mut e = vec![0; n];
        e[k] = 1;
        order.push(e);
    }
    let mut cols: Vec<Vec<u32>> = Vec::new();
    for cand in order {
        if cols.len() == count {
            break;
        }
        let mut all: Vec<&[u32]> = fixed.to_vec();
        all.extend(cols.iter().map(Vec::as_slice));
        all.push(&cand);
        if independent(field, &all) {
            cols.push(cand);
        }
    }
    (cols.len() == count).then_some(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_point_in_observed_block_leaks() {
        let f = Field::new(3).unwrap();
        // v = (1,1), observed e_1: [Mv]_1 = m11 + m12 is a function of M e_1
        assert!(!symmetric_secrecy_holds(f, &[1, 1], 1, &[&[1, 0]]));
        assert!(symmetric_secrecy_holds(f, &[1, 0], 1, &[&[1, 1]]));
        assert!(symmetric_secrecy_holds(f, &[1, 2], 1, &[&[1, 1]]));
        assert!(!symmetric_secrecy_holds(f, &[1, 1], 1, &[&[1, 1]]));
    }

    #[test]
    fn fig2_small_field_assignment_exists() {
        let f = Field::new(2).unwrap();
        let vars = vec![Owner::Set(0), Owner::Node(1), Owner::Node(2), Owner::Node(3)];
        let obs = vec![Owner::Node(1), Owner::Node(2), Owner::Node(3)];
        let p = Problem {
            name: "test",
            field: f,
            n: 3,
            vars,
            independent: vec![obs.clone()],
            secrecy: vec![SecrecyReq { key: Owner::Set(0), len: 1, observers: obs, max: 2 }],
        };
        let sol = p.solve().unwrap();
        assert_eq!(sol[&Owner::Set(0)], vec![1, 0, 0]);
    }

    #[test]
    fn completion_reaches_full_rank() {
        let f = Field::new(5).unwrap();
        let cols = complete_basis(f, 3, &[&[1, 1, 1]], 2, &[&[1, 1, 1]]).unwrap();
        let mut all: Vec<&[u32]> = vec![&[1, 1, 1]];
        all.extend(cols.iter().map(Vec::as_slice));
        assert!(independent(f, &all));
    }
}
