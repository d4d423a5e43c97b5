//! Plan compilation for every scheme.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::field::{Field, FieldMatrix};
use crate::network::{
    classify_source, disjoint_paths, max_flow, EdgeId, NetworkInstance, NodeClass, NodeId, SourceProfile,
};

use super::alloc::{complete_basis, Owner, Problem, SecrecyReq};
use super::plan::{Batch, BatchMessage, Input, KeyPart, NodePlan, Recover, Send, Slot, SourcePlan, Src};
use super::{EtaRecord, SchemeError, Stream};

pub(crate) fn owner(inst: &NetworkInstance, v: NodeId) -> Owner {
    match inst.terminal_set_of(v) {
        Some(k) => Owner::Set(k),
        None => Owner::Node(v),
    }
}

struct Bundles {
    map: HashMap<(NodeId, NodeId), Vec<EdgeId>>,
}

impl Bundles {
    fn new(inst: &NetworkInstance) -> Self {
        let mut map: HashMap<(NodeId, NodeId), Vec<EdgeId>> = HashMap::new();
        for (e, &(a, b)) in inst.edges().iter().enumerate() {
            map.entry((a, b)).or_default().push(e);
        }
        Bundles { map }
    }

    fn count(&self, u: NodeId, v: NodeId) -> usize {
        self.map.get(&(u, v)).map_or(0, Vec::len)
    }

    /// Least-loaded parallel edge from `u` to `v` (earliest on ties).
    fn pick(&self, plan: &mut SourcePlan, u: NodeId, v: NodeId) -> Slot {
        let edges = &self.map[&(u, v)];
        let e = *edges.iter().min_by_key(|&&e| (plan.slots[e], e)).expect("bundle is non-empty");
        plan.new_slot(e)
    }
}

fn empty_plan(inst: &NetworkInstance, s: NodeId, source_index: usize, order: Vec<NodeId>) -> SourcePlan {
    SourcePlan {
        source: s,
        source_index,
        field: inst.field(),
        m_dim: 0,
        r_dim: 0,
        batches: Vec::new(),
        source_sends: Vec::new(),
        nodes: vec![NodePlan::default(); inst.node_count()],
        order,
        slots: vec![0; inst.edges().len()],
        held_vectors: BTreeMap::new(),
        key_parts: Vec::new(),
        key_len: 0,
        key_nodes: Vec::new(),
    }
}

fn push_send(plan: &mut SourcePlan, sender: NodeId, send: Send) {
    if sender == plan.source {
        plan.source_sends.push(send);
    } else {
        plan.nodes[sender].sends.push(send);
    }
}

fn invert(field: Field, n: usize, cols: &[&[u32]], site: String) -> Result<FieldMatrix, SchemeError> {
    FieldMatrix::from_columns(field, n, cols)
        .inverse()
        .map_err(|_| SchemeError::SingularSubmatrix { site })
}

// ---------------------------------------------------------------------------
// Algorithm 1 skeleton

pub(crate) struct FullSkeleton {
    source: NodeId,
    source_index: usize,
    order: Vec<NodeId>,
    src_cols: Vec<usize>,
    parents: Vec<Vec<NodeId>>,
}

/// With `idle_partial`, partially-connected nodes take no part; callers use
/// it only when no fully-connected node has a partially-connected parent.
pub(crate) fn full_skeleton(
    inst: &NetworkInstance,
    s: NodeId,
    source_index: usize,
    d: usize,
    idle_partial: bool,
) -> Result<FullSkeleton, SchemeError> {
    let topo = inst.topological_order()?;
    let n = inst.node_count();
    let conn: Vec<usize> = (0..n)
        .map(|v| if inst.is_source(v) { 0 } else { max_flow(inst, s, v, &[]) })
        .collect();
    let bundles = Bundles::new(inst);
    let mut order = Vec::new();
    let mut src_cols = vec![0; n];
    let mut parents = vec![Vec::new(); n];
    for &v in &topo {
        if inst.is_source(v) {
            continue;
        }
        let must = inst.is_terminal(v);
        if (conn[v] == 0 || (idle_partial && conn[v] < d)) && !must {
            continue;
        }
        if conn[v] < d {
            return Err(SchemeError::ConnectivityViolation {
                node: inst.name(v).to_string(),
                origin: inst.name(s).to_string(),
                connectivity: conn[v],
                required: d,
            });
        }
        let k = bundles.count(s, v).min(d);
        let sel: Vec<NodeId> = inst
            .parents(v)
            .into_iter()
            .filter(|&p| !inst.is_source(p) && conn[p] > 0 && (!idle_partial || conn[p] >= d))
            .take(d - k)
            .collect();
        if k + sel.len() < d {
            return Err(SchemeError::ConnectivityViolation {
                node: inst.name(v).to_string(),
                origin: inst.name(s).to_string(),
                connectivity: k + sel.len(),
                required: d,
            });
        }
        src_cols[v] = k;
        parents[v] = sel;
        order.push(v);
    }
    Ok(FullSkeleton { source: s, source_index, order, src_cols, parents })
}

pub(crate) fn full_problem(inst: &NetworkInstance, skels: &[FullSkeleton], d: usize, ell: usize) -> Problem {
    let sets = inst.terminal_set_count();
    let mut vars: Vec<Owner> = (0..sets).map(Owner::Set).collect();
    for sk in skels {
        for &v in &sk.order {
            let o = owner(inst, v);
            if !vars.contains(&o) {
                vars.push(o);
            }
        }
    }
    let mut independent = Vec::new();
    for sk in skels {
        for &v in &sk.order {
            if sk.parents[v].len() > 1 {
                independent.push(sk.parents[v].iter().map(|&p| owner(inst, p)).collect());
            }
        }
    }
    let secrecy = (0..sets)
        .map(|i| SecrecyReq {
            key: Owner::Set(i),
            len: d - ell,
            observers: vars.iter().copied().filter(|&o| o != Owner::Set(i)).collect(),
            max: ell,
        })
        .collect();
    Problem { name: "key-stream", field: inst.field(), n: d, vars, independent, secrecy }
}

pub(crate) fn full_plan(
    inst: &NetworkInstance,
    sk: &FullSkeleton,
    vecs: &BTreeMap<Owner, Vec<u32>>,
    d: usize,
    ell: usize,
) -> Result<SourcePlan, SchemeError> {
    let field = inst.field();
    let s = sk.source;
    let bundles = Bundles::new(inst);
    let mut plan = empty_plan(inst, s, sk.source_index, sk.order.clone());
    plan.m_dim = d;
    let avoid: Vec<&[u32]> = vecs.values().map(Vec::as_slice).collect();
    for &v in &sk.order {
        let vv = &vecs[&owner(inst, v)];
        let par: Vec<&[u32]> = sk.parents[v].iter().map(|&p| vecs[&owner(inst, p)].as_slice()).collect();
        let k = sk.src_cols[v];
        let comp = complete_basis(field, d, &par, k, &avoid).ok_or_else(|| SchemeError::SingularSubmatrix {
            site: format!("source columns for node {}", inst.name(v)),
        })?;
        let mut cols: Vec<&[u32]> = comp.iter().map(Vec::as_slice).collect();
        cols.extend(par.iter().copied());
        let inverse = invert(field, d, &cols, format!("decoding matrix of node {}", inst.name(v)))?;
        let mut inputs = Vec::new();
        for c in &comp {
            let slot = bundles.pick(&mut plan, s, v);
            push_send(&mut plan, s, Send {
                slot,
                stream: Stream::M,
                src: Src::Proj { stream: Stream::M, left: vv.clone(), right: c.clone() },
            });
            inputs.push(Input::Edge(slot));
        }
        for &p in &sk.parents[v] {
            let slot = bundles.pick(&mut plan, p, v);
            push_send(&mut plan, p, Send {
                slot,
                stream: Stream::M,
                src: Src::OwnProj { stream: Stream::M, left: vv.clone() },
            });
            inputs.push(Input::Edge(slot));
        }
        plan.nodes[v].recovers.push(Recover::Share { stream: Stream::M, inputs, inverse });
        plan.nodes[v].expect_m = Some(vv.clone());
        if inst.is_terminal(v) {
            plan.key_nodes.push(v);
        }
    }
    plan.key_parts = vec![KeyPart::Share(Stream::M)];
    plan.key_len = d - ell;
    Ok(plan)
}

// ---------------------------------------------------------------------------
// Partial-connectivity skeleton (dual M/R streams)

#[derive(Debug, Clone)]
enum HatSender {
    Direct(NodeId),
    Via(NodeId),
}

pub(crate) struct PartialSkeleton {
    source: NodeId,
    source_index: usize,
    pub profile: SourceProfile,
    order: Vec<NodeId>,
    m_src: Vec<usize>,
    m_parents: Vec<Vec<NodeId>>,
    pub m_deficit: Vec<usize>,
    r_src: Vec<usize>,
    r_parents: Vec<Vec<NodeId>>,
    etas: Vec<Vec<(NodeId, NodeId)>>,
    hat: Vec<Vec<(NodeId, HatSender)>>,
    forward: Vec<Vec<(NodeId, Vec<NodeId>)>>,
    pub eta_records: Vec<EtaRecord>,
}

/// Selection of eta relays for a fully-connected node whose direct inputs fall
/// short of `d`: minimal type-B parent subset by greedy elimination, then one
/// disjoint path per retained parent and the last non-type-B node on it.
fn select_etas(
    inst: &NetworkInstance,
    prof: &SourceProfile,
    j: NodeId,
) -> Result<Vec<(NodeId, NodeId)>, SchemeError> {
    let s = prof.source;
    let n = inst.node_count();
    let fail = |detail: String| SchemeError::EtaSelectionFailed { node: inst.name(j).to_string(), detail };
    let parents = inst.parents(j);
    let jb: Vec<NodeId> = parents.iter().copied().filter(|&p| prof.class[p] == NodeClass::TypeB).collect();
    let target = prof.connectivity[j];
    let mut removed = vec![false; n];
    for &u in &jb {
        removed[u] = true;
        if max_flow(inst, s, j, &removed) < target {
            removed[u] = false;
        }
    }
    let keep: Vec<NodeId> = jb.iter().copied().filter(|&u| !removed[u]).collect();
    for &u in &keep {
        removed[u] = true;
        let f = max_flow(inst, s, j, &removed);
        removed[u] = false;
        if f >= target {
            return Err(fail(format!("retained parent {} is not necessary", inst.name(u))));
        }
    }
    let paths = disjoint_paths(inst, s, j, &removed);
    let pset: BTreeSet<NodeId> = parents.iter().copied().collect();
    let mut out = Vec::new();
    for &u in &keep {
        let hit = paths.iter().find_map(|p| {
            let cut = (1..p.nodes.len()).find(|&k| pset.contains(&p.nodes[k]) || p.nodes[k] == j)?;
            (p.nodes[cut] == u).then(|| p.nodes[1..cut].to_vec())
        });
        let Some(prefix) = hit else {
            return Err(fail(format!("no disjoint path ends at {}", inst.name(u))));
        };
        let Some(&eta) = prefix.iter().rev().find(|&&w| prof.class[w] != NodeClass::TypeB) else {
            return Err(fail(format!("path to {} has no full or type-A node", inst.name(u))));
        };
        if pset.contains(&eta) {
            return Err(fail(format!("{} is a parent", inst.name(eta))));
        }
        if out.iter().any(|&(_, e)| e == eta) {
            return Err(fail(format!("{} selected twice", inst.name(eta))));
        }
        if !prof.d_set[u].contains(&eta) {
            return Err(fail(format!("{} does not hold the vector of {}", inst.name(u), inst.name(eta))));
        }
        out.push((u, eta));
    }
    Ok(out)
}

pub(crate) fn partial_skeleton(
    inst: &NetworkInstance,
    s: NodeId,
    source_index: usize,
    d: usize,
    z: usize,
    allow_deficit: bool,
) -> Result<PartialSkeleton, SchemeError> {
    let prof = classify_source(inst, s, d)?;
    let topo = inst.topological_order()?;
    let n = inst.node_count();
    let bundles = Bundles::new(inst);
    let mut sk = PartialSkeleton {
        source: s,
        source_index,
        profile: prof.clone(),
        order: Vec::new(),
        m_src: vec![0; n],
        m_parents: vec![Vec::new(); n],
        m_deficit: vec![0; n],
        r_src: vec![0; n],
        r_parents: vec![Vec::new(); n],
        etas: vec![Vec::new(); n],
        hat: vec![Vec::new(); n],
        forward: vec![Vec::new(); n],
        eta_records: Vec::new(),
    };
    for &v in &topo {
        if inst.is_source(v) || prof.connectivity[v] == 0 {
            continue;
        }
        sk.order.push(v);
        let parents: Vec<NodeId> = inst
            .parents(v)
            .into_iter()
            .filter(|&p| !inst.is_source(p) && prof.connectivity[p] > 0)
            .collect();
        let c = bundles.count(s, v);
        match prof.class[v] {
            NodeClass::Full => {
                let dm = d - z;
                let k_m = c.min(dm);
                let full_par: Vec<NodeId> =
                    parents.iter().copied().filter(|&p| prof.class[p] == NodeClass::Full).collect();
                let m_par: Vec<NodeId> = full_par.iter().copied().take(dm - k_m).collect();
                let deficit = dm - k_m - m_par.len();
                if deficit > 0 && !allow_deficit {
                    return Err(SchemeError::StructuralConditionViolated {
                        node: inst.name(v).to_string(),
                        partial_parents: prof.partial_in[v],
                        z,
                    });
                }
                sk.m_src[v] = k_m;
                sk.m_parents[v] = m_par;
                sk.m_deficit[v] = deficit;

                let k_r = c.min(d);
                let r_par: Vec<NodeId> = parents
                    .iter()
                    .copied()
                    .filter(|&p| matches!(prof.class[p], NodeClass::Full | NodeClass::TypeA))
                    .take(d - k_r)
                    .collect();
                let need = d - k_r - r_par.len();
                if need > 0 {
                    let pairs = select_etas(inst, &prof, v)?;
                    if pairs.len() < need {
                        return Err(SchemeError::EtaSelectionFailed {
                            node: inst.name(v).to_string(),
                            detail: format!("{} retained type-B parents, {} needed", pairs.len(), need),
                        });
                    }
                    for &(via, eta) in &pairs {
                        sk.eta_records.push(EtaRecord { source: s, node: v, via, eta });
                    }
                    sk.etas[v] = pairs.into_iter().take(need).collect();
                }
                sk.r_src[v] = k_r;
                sk.r_parents[v] = r_par;
            }
            NodeClass::TypeA => {
                if c == 0 {
                    let hat: Vec<NodeId> = prof.d_set[v].iter().copied().take(d).collect();
                    let mut senders = Vec::new();
                    for x in hat {
                        if parents.contains(&x) {
                            senders.push((x, HatSender::Direct(x)));
                        } else {
                            let via = parents
                                .iter()
                                .copied()
                                .find(|&p| prof.class[p] == NodeClass::TypeB && prof.d_set[p].contains(&x))
                                .expect("every member of D(j) arrives through a parent");
                            senders.push((x, HatSender::Via(via)));
                        }
                    }
                    sk.hat[v] = senders;
                }
            }
            NodeClass::TypeB => {
                let direct: BTreeSet<NodeId> =
                    parents.iter().copied().filter(|&p| prof.class[p] != NodeClass::TypeB).collect();
                let mut covered = direct.clone();
                for &p in &parents {
                    if prof.class[p] == NodeClass::TypeB {
                        let fwd: Vec<NodeId> = prof.d_set[p].iter().copied().filter(|x| !covered.contains(x)).collect();
                        covered.extend(fwd.iter().copied());
                        sk.forward[v].push((p, fwd));
                    }
                }
            }
            NodeClass::Source => unreachable!(),
        }
    }
    Ok(sk)
}

pub(crate) fn partial_problems(
    inst: &NetworkInstance,
    skels: &[PartialSkeleton],
    d: usize,
    ell: usize,
    z: usize,
) -> (Problem, Problem) {
    let sets = inst.terminal_set_count();
    let len = d - ell - z + 1;
    let mut m_vars: Vec<Owner> = (0..sets).map(Owner::Set).collect();
    let mut r_vars = m_vars.clone();
    let mut full_obs: Vec<Owner> = Vec::new();
    let mut m_ind = Vec::new();
    let mut r_ind = Vec::new();
    for sk in skels {
        for &v in &sk.order {
            let o = owner(inst, v);
            match sk.profile.class[v] {
                NodeClass::Full => {
                    for vars in [&mut m_vars, &mut r_vars, &mut full_obs] {
                        if !vars.contains(&o) {
                            vars.push(o);
                        }
                    }
                    if sk.m_parents[v].len() > 1 {
                        m_ind.push(sk.m_parents[v].iter().map(|&p| owner(inst, p)).collect());
                    }
                    let mut group: Vec<Owner> = sk.r_parents[v].iter().map(|&p| owner(inst, p)).collect();
                    group.extend(sk.etas[v].iter().map(|&(_, e)| owner(inst, e)));
                    if group.len() > 1 {
                        r_ind.push(group);
                    }
                }
                NodeClass::TypeA => {
                    if !r_vars.contains(&o) {
                        r_vars.push(o);
                    }
                    if !sk.hat[v].is_empty() {
                        r_ind.push(sk.hat[v].iter().map(|(x, _)| owner(inst, *x)).collect());
                    }
                }
                _ => {}
            }
        }
    }
    let req = |max: usize| -> Vec<SecrecyReq> {
        (0..sets)
            .map(|i| SecrecyReq {
                key: Owner::Set(i),
                len,
                observers: full_obs.iter().copied().filter(|&o| o != Owner::Set(i)).collect(),
                max,
            })
            .collect()
    };
    let m = Problem { name: "M-stream", field: inst.field(), n: d - z, vars: m_vars, independent: m_ind, secrecy: req(ell - 1) };
    let r = Problem { name: "R-stream", field: inst.field(), n: d, vars: r_vars, independent: r_ind, secrecy: req(ell) };
    (m, r)
}

/// Appends one masked batch routed over `paths` (one share per path) and
/// returns the slots arriving at the target, in path order.
fn add_batch(plan: &mut SourcePlan, inst: &NetworkInstance, batch: Batch) -> Vec<Slot> {
    let b = plan.batches.len();
    let mut arrivals = Vec::new();
    for (i, path) in batch.paths.iter().enumerate() {
        let mut prev: Option<Slot> = None;
        for &e in path {
            let slot = plan.new_slot(e);
            let tail = inst.edges()[e].0;
            let src = match prev {
                None => Src::Share { batch: b, point: i as u32 + 1 },
                Some(from) => Src::Relay { from },
            };
            push_send(plan, tail, Send { slot, stream: Stream::Shamir, src });
            prev = Some(slot);
        }
        arrivals.push(prev.expect("paths are non-empty"));
    }
    plan.batches.push(batch);
    arrivals
}

/// `d × d` matrix with rows `(1, p, p², …)` for evaluation points `1..=d`.
pub(crate) fn share_matrix_inverse(field: Field, d: usize) -> Result<FieldMatrix, SchemeError> {
    FieldMatrix::from_fn(field, d, d, |i, k| field.pow(i as u32 + 1, k as u64) as u64)
        .inverse()
        .map_err(|_| SchemeError::SingularSubmatrix { site: format!("share evaluation matrix ({d} points)") })
}

pub(crate) fn partial_plan(
    inst: &NetworkInstance,
    sk: &PartialSkeleton,
    mv: &BTreeMap<Owner, Vec<u32>>,
    rv: &BTreeMap<Owner, Vec<u32>>,
    d: usize,
    ell: usize,
    z: usize,
) -> Result<SourcePlan, SchemeError> {
    let field = inst.field();
    let s = sk.source;
    let dm = d - z;
    let prof = &sk.profile;
    let bundles = Bundles::new(inst);
    let mut plan = empty_plan(inst, s, sk.source_index, sk.order.clone());
    plan.m_dim = dm;
    plan.r_dim = d;
    for (o, v) in rv {
        if let Owner::Node(x) = o {
            plan.held_vectors.insert(*x, v.clone());
        }
    }
    let m_avoid: Vec<&[u32]> = mv.values().map(Vec::as_slice).collect();
    let r_avoid: Vec<&[u32]> = rv.values().map(Vec::as_slice).collect();
    let name = |v: NodeId| inst.name(v).to_string();
    for &v in &sk.order {
        let o = owner(inst, v);
        match prof.class[v] {
            NodeClass::Full => {
                // M stream: source columns, masked columns, full parents
                let vm = &mv[&o];
                let par: Vec<&[u32]> = sk.m_parents[v].iter().map(|&p| mv[&owner(inst, p)].as_slice()).collect();
                let extra = sk.m_src[v] + sk.m_deficit[v];
                let comp = complete_basis(field, dm, &par, extra, &m_avoid)
                    .ok_or_else(|| SchemeError::SingularSubmatrix { site: format!("M columns for node {}", name(v)) })?;
                let mut cols: Vec<&[u32]> = comp.iter().map(Vec::as_slice).collect();
                cols.extend(par.iter().copied());
                let inverse = invert(field, dm, &cols, format!("M decoding matrix of node {}", name(v)))?;
                let mut inputs = Vec::new();
                for c in &comp[..sk.m_src[v]] {
                    let slot = bundles.pick(&mut plan, s, v);
                    push_send(&mut plan, s, Send {
                        slot,
                        stream: Stream::M,
                        src: Src::Proj { stream: Stream::M, left: vm.clone(), right: c.clone() },
                    });
                    inputs.push(Input::Edge(slot));
                }
                let hat = &comp[sk.m_src[v]..];
                if !hat.is_empty() {
                    let width = d - ell;
                    if field.q() as usize <= d {
                        return Err(SchemeError::FieldTooSmall {
                            q: field.q(),
                            detail: format!("masked delivery needs {d} distinct nonzero evaluation points"),
                        });
                    }
                    let paths: Vec<Vec<EdgeId>> =
                        disjoint_paths(inst, s, v, &[]).into_iter().take(d).map(|p| p.edges).collect();
                    if paths.len() < d {
                        return Err(SchemeError::InsufficientConnectivity {
                            from: name(s),
                            to: name(v),
                            connectivity: paths.len(),
                            required: d,
                        });
                    }
                    let inverse = share_matrix_inverse(field, d)?;
                    for chunk in hat.chunks(width) {
                        let b = plan.batches.len();
                        let pairs = chunk.iter().map(|c| (vm.clone(), c.clone())).collect();
                        let arrivals = add_batch(&mut plan, inst, Batch {
                            target: v,
                            message: BatchMessage::FromM(pairs),
                            width,
                            masks: ell,
                            paths: paths.clone(),
                        });
                        plan.nodes[v].recovers.push(Recover::Unmask { batch: b, inputs: arrivals, inverse: inverse.clone() });
                        inputs.extend((0..chunk.len()).map(|k| Input::Batch { batch: b, k }));
                    }
                }
                for &p in &sk.m_parents[v] {
                    let slot = bundles.pick(&mut plan, p, v);
                    push_send(&mut plan, p, Send {
                        slot,
                        stream: Stream::M,
                        src: Src::OwnProj { stream: Stream::M, left: vm.clone() },
                    });
                    inputs.push(Input::Edge(slot));
                }
                plan.nodes[v].recovers.push(Recover::Share { stream: Stream::M, inputs, inverse });
                plan.nodes[v].expect_m = Some(vm.clone());

                // R stream: source columns, full/type-A parents, η vectors
                let vr = &rv[&o];
                let mut fixed: Vec<&[u32]> = sk.r_parents[v].iter().map(|&p| rv[&owner(inst, p)].as_slice()).collect();
                fixed.extend(sk.etas[v].iter().map(|&(_, e)| rv[&owner(inst, e)].as_slice()));
                let comp = complete_basis(field, d, &fixed, sk.r_src[v], &r_avoid)
                    .ok_or_else(|| SchemeError::SingularSubmatrix { site: format!("R columns for node {}", name(v)) })?;
                let mut cols: Vec<&[u32]> = comp.iter().map(Vec::as_slice).collect();
                cols.extend(fixed.iter().copied());
                let inverse = invert(field, d, &cols, format!("R decoding matrix of node {}", name(v)))?;
                let mut inputs = Vec::new();
                for c in &comp {
                    let slot = bundles.pick(&mut plan, s, v);
                    push_send(&mut plan, s, Send {
                        slot,
                        stream: Stream::R,
                        src: Src::Proj { stream: Stream::R, left: vr.clone(), right: c.clone() },
                    });
                    inputs.push(Input::Edge(slot));
                }
                for &p in &sk.r_parents[v] {
                    let slot = bundles.pick(&mut plan, p, v);
                    push_send(&mut plan, p, Send {
                        slot,
                        stream: Stream::R,
                        src: Src::OwnProj { stream: Stream::R, left: vr.clone() },
                    });
                    inputs.push(Input::Edge(slot));
                }
                for &(via, eta) in &sk.etas[v] {
                    let slot = bundles.pick(&mut plan, via, v);
                    push_send(&mut plan, via, Send {
                        slot,
                        stream: Stream::R,
                        src: Src::HeldProj { of: eta, left: vr.clone() },
                    });
                    inputs.push(Input::Edge(slot));
                }
                plan.nodes[v].recovers.push(Recover::Share { stream: Stream::R, inputs, inverse });
                plan.nodes[v].expect_r = Some(vr.clone());
                if inst.is_terminal(v) {
                    plan.key_nodes.push(v);
                }
            }
            NodeClass::TypeA => {
                let vr = &rv[&o];
                if sk.hat[v].is_empty() {
                    let mut inputs = Vec::new();
                    for k in 0..d {
                        let slot = bundles.pick(&mut plan, s, v);
                        push_send(&mut plan, s, Send {
                            slot,
                            stream: Stream::R,
                            src: Src::Comp { stream: Stream::R, vec: vr.clone(), k },
                        });
                        inputs.push(slot);
                    }
                    plan.nodes[v].recovers.push(Recover::Collect { of: None, inputs });
                } else {
                    let cols: Vec<&[u32]> = sk.hat[v].iter().map(|(x, _)| rv[&owner(inst, *x)].as_slice()).collect();
                    let inverse = invert(field, d, &cols, format!("recovery matrix of type-A node {}", name(v)))?;
                    let mut inputs = Vec::new();
                    for (x, sender) in &sk.hat[v] {
                        let (from, src) = match sender {
                            HatSender::Direct(p) => (*p, Src::OwnProj { stream: Stream::R, left: vr.clone() }),
                            HatSender::Via(p) => (*p, Src::HeldProj { of: *x, left: vr.clone() }),
                        };
                        let slot = bundles.pick(&mut plan, from, v);
                        push_send(&mut plan, from, Send { slot, stream: Stream::R, src });
                        inputs.push(Input::Edge(slot));
                    }
                    plan.nodes[v].recovers.push(Recover::Share { stream: Stream::R, inputs, inverse });
                }
                plan.nodes[v].expect_r = Some(vr.clone());
            }
            NodeClass::TypeB => {
                let parents = inst.parents(v);
                for &p in &parents {
                    if inst.is_source(p) || prof.connectivity[p] == 0 || prof.class[p] == NodeClass::TypeB {
                        continue;
                    }
                    let mut inputs = Vec::new();
                    for k in 0..d {
                        let slot = bundles.pick(&mut plan, p, v);
                        push_send(&mut plan, p, Send { slot, stream: Stream::R, src: Src::OwnComp { k } });
                        inputs.push(slot);
                    }
                    plan.nodes[v].recovers.push(Recover::Collect { of: Some(p), inputs });
                }
                for (p, fwd) in &sk.forward[v] {
                    for &x in fwd {
                        let mut inputs = Vec::new();
                        for k in 0..d {
                            let slot = bundles.pick(&mut plan, *p, v);
                            push_send(&mut plan, *p, Send { slot, stream: Stream::R, src: Src::HeldComp { of: x, k } });
                            inputs.push(slot);
                        }
                        plan.nodes[v].recovers.push(Recover::Collect { of: Some(x), inputs });
                    }
                }
            }
            NodeClass::Source => unreachable!(),
        }
    }
    // the masked batches are recovered before the M share that consumes them
    for v in 0..plan.nodes.len() {
        plan.nodes[v]
            .recovers
            .sort_by_key(|r| match r {
                Recover::Unmask { .. } => 0,
                _ => 1,
            });
    }
    plan.key_parts = vec![KeyPart::Share(Stream::M), KeyPart::Share(Stream::R)];
    plan.key_len = d - ell - z + 1;
    Ok(plan)
}

/// A single masked transfer of `x` from `s` to `v` over `d` disjoint paths.
pub(crate) fn shamir_plan(
    inst: &NetworkInstance,
    s: NodeId,
    v: NodeId,
    d: usize,
    ell: usize,
    x: &[u32],
) -> Result<SourcePlan, SchemeError> {
    let field = inst.field();
    if field.q() as usize <= d {
        return Err(SchemeError::FieldTooSmall {
            q: field.q(),
            detail: format!("{d} distinct nonzero evaluation points needed"),
        });
    }
    let paths: Vec<Vec<EdgeId>> = disjoint_paths(inst, s, v, &[]).into_iter().map(|p| p.edges).collect();
    if paths.len() < d {
        return Err(SchemeError::InsufficientConnectivity {
            from: inst.name(s).to_string(),
            to: inst.name(v).to_string(),
            connectivity: paths.len(),
            required: d,
        });
    }
    let mut order: Vec<NodeId> = inst.topological_order()?;
    order.retain(|&u| u != s);
    let source_index = inst.sources().iter().position(|&u| u == s).unwrap_or(0);
    let mut plan = empty_plan(inst, s, source_index, order);
    let inverse = share_matrix_inverse(field, d)?;
    let arrivals = add_batch(&mut plan, inst, Batch {
        target: v,
        message: BatchMessage::Fixed(x.to_vec()),
        width: d - ell,
        masks: ell,
        paths: paths.into_iter().take(d).collect(),
    });
    plan.nodes[v].recovers.push(Recover::Unmask { batch: 0, inputs: arrivals, inverse });
    plan.key_parts = vec![KeyPart::Batch(0)];
    plan.key_len = d - ell;
    plan.key_nodes = vec![v];
    Ok(plan)
}
