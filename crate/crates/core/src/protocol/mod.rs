//! Key-cast schemes compiled to explicit per-edge transcripts.
//!
//! Every scheme is first compiled into one [`plan`] per source: which symbol
//! each edge slot carries and how each node decodes. Executing a plan on a
//! randomness vector yields the transcript, the recovered shares and the keys.
//! The security auditor drives the same executor over the whole randomness
//! space.

mod alloc;
mod build;
mod plan;
pub mod shamir;
#[cfg(test)]
mod tests;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::field::{Field, FieldMatrix, RandomSource, SplitSeed, VandermondeIndexAllocator};
use crate::network::{
    classify_source, default_d, validate_instance, NetworkError, NetworkInstance, NodeId,
};

pub use alloc::{symmetric_secrecy_holds, Owner};
use build::{full_plan, full_problem, full_skeleton, partial_plan, partial_problems, partial_skeleton, shamir_plan};
use plan::SourcePlan;

/// Keys grouped by terminal, plus the key of each terminal set.
type KeySets = (BTreeMap<NodeId, Vec<u32>>, Vec<Vec<u32>>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stream {
    M,
    R,
    Shamir,
}

/// One transmitted field symbol with its origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub source: usize,
    pub stream: Stream,
    pub value: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Full,
    Multisource,
    Partial,
    PartialMultisource,
    Unstructured,
    ShamirUnicast,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Full => "full",
            SchemeKind::Multisource => "multisource",
            SchemeKind::Partial => "partial",
            SchemeKind::PartialMultisource => "partial-multisource",
            SchemeKind::Unstructured => "unstructured",
            SchemeKind::ShamirUnicast => "shamir",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            SchemeKind::Full,
            SchemeKind::Multisource,
            SchemeKind::Partial,
            SchemeKind::PartialMultisource,
            SchemeKind::Unstructured,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Optional overrides; unset values come from the instance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SchemeParams {
    pub d: Option<usize>,
    pub ell: Option<usize>,
    pub x: Option<usize>,
    pub z: Option<usize>,
}

impl SchemeParams {
    pub fn with_d(mut self, d: usize) -> Self {
        self.d = Some(d);
        self
    }
    pub fn with_ell(mut self, ell: usize) -> Self {
        self.ell = Some(ell);
        self
    }
    pub fn with_x(mut self, x: usize) -> Self {
        self.x = Some(x);
        self
    }
    pub fn with_z(mut self, z: usize) -> Self {
        self.z = Some(z);
        self
    }
}

/// Parameters after defaults and routing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolved {
    pub d: usize,
    pub ell: usize,
    pub x: usize,
    pub z: usize,
    pub d_hat: usize,
    pub sources: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("node `{node}` has connectivity {connectivity} from `{origin}`, {required} required")]
    ConnectivityViolation { node: String, origin: String, connectivity: usize, required: usize },
    #[error("`{to}` has connectivity {connectivity} from `{from}`, {required} required")]
    InsufficientConnectivity { from: String, to: String, connectivity: usize, required: usize },
    #[error("node `{node}` has {partial_parents} partially-connected parents, more than z = {z}")]
    StructuralConditionViolated { node: String, partial_parents: usize, z: usize },
    #[error("path-index selection failed at `{node}`: {detail}")]
    EtaSelectionFailed { node: String, detail: String },
    #[error("singular matrix: {site}")]
    SingularSubmatrix { site: String },
    #[error("field F_{q} too small: {detail}")]
    FieldTooSmall { q: u32, detail: String },
    #[error("x = {x} eavesdropped sources out of {sources} leaves no secret randomness")]
    TooManySourcesEavesdropped { x: usize, sources: usize },
    #[error("share mismatch at node #{node}: {detail}")]
    ShareMismatch { node: NodeId, detail: String },
    #[error("terminals of set {set} decoded different keys")]
    KeyDisagreement { set: usize },
}

/// A Case-4 path-index choice: `via` is the retained type-B parent of `node`
/// and `eta` the node whose `R` share it relays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EtaRecord {
    pub source: NodeId,
    pub node: NodeId,
    pub via: NodeId,
    pub eta: NodeId,
}

/// Shares recovered by one node from one source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeShares {
    pub source: NodeId,
    pub node: NodeId,
    pub m: Option<Vec<u32>>,
    pub r: Option<Vec<u32>>,
    /// Stored `R v_x` vectors of type-B nodes, keyed by `x`.
    pub held: BTreeMap<NodeId, Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    /// Symbols per edge occurrence, in transmission order.
    pub edges: Vec<Vec<Symbol>>,
    pub shares: Vec<NodeShares>,
    pub terminal_keys: BTreeMap<NodeId, Vec<u32>>,
    pub keys: Vec<Vec<u32>>,
}

impl Transcript {
    pub fn edge_uses(&self) -> Vec<usize> {
        self.edges.iter().map(Vec::len).collect()
    }

    pub fn blocklength(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Line-per-edge rendering used for byte comparisons and reports.
    pub fn render(&self, inst: &NetworkInstance) -> String {
        let mut out = String::new();
        for (e, syms) in self.edges.iter().enumerate() {
            let (a, b) = inst.edges()[e];
            let vals: Vec<String> = syms
                .iter()
                .map(|s| format!("{}:{:?}={}", s.source, s.stream, s.value))
                .collect();
            out.push_str(&format!("e{e} {}->{}: [{}]\n", inst.name(a), inst.name(b), vals.join(", ")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeResult {
    pub scheme: SchemeKind,
    /// Scheme the caller asked for; differs from `scheme` after routing.
    pub requested: SchemeKind,
    pub params: Resolved,
    pub transcript: Transcript,
    /// One key per terminal set.
    pub keys: Vec<Vec<u32>>,
    pub key_len: usize,
    pub blocklength: usize,
    pub achieved: Ratio<u64>,
    pub formula: Ratio<u64>,
    pub formula_met: bool,
    pub batches: usize,
    pub eta_records: Vec<EtaRecord>,
    /// Randomness coordinates drawn per source, in source order.
    pub randomness: Vec<Vec<u32>>,
}

/// `min_i |key_i| / n` as an exact rational; zero for empty keys.
pub fn achieved_rate(result: &SchemeResult) -> Ratio<u64> {
    rate_of(result.key_len, result.blocklength)
}

fn rate_of(key_len: usize, n: usize) -> Ratio<u64> {
    if key_len == 0 || n == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(key_len as u64, n as u64)
    }
}

/// Result of one execution without the consistency checks.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub edges: Vec<Vec<u32>>,
    pub keys: Vec<Vec<u32>>,
    /// Whether all terminals of every set decoded the same key.
    pub agree: bool,
}

/// A scheme compiled for a fixed instance: deterministic plan, randomness
/// layout and rate accounting.
#[derive(Debug, Clone)]
pub struct CompiledScheme {
    pub kind: SchemeKind,
    pub requested: SchemeKind,
    pub params: Resolved,
    pub key_len: usize,
    pub formula: Ratio<u64>,
    /// The partial-connectivity formula evaluated at `z = 0`, kept for
    /// comparison when that scheme was routed to the full one.
    pub plugin_formula: Option<Ratio<u64>>,
    pub eta_records: Vec<EtaRecord>,
    inst: NetworkInstance,
    plans: Vec<SourcePlan>,
    combine: Option<FieldMatrix>,
}

impl CompiledScheme {
    pub fn instance(&self) -> &NetworkInstance {
        &self.inst
    }

    pub fn field(&self) -> Field {
        self.inst.field()
    }

    /// Source node of each plan, in source order.
    pub fn sources(&self) -> Vec<NodeId> {
        self.plans.iter().map(|p| p.source).collect()
    }

    /// Randomness coordinates per source.
    pub fn coord_counts(&self) -> Vec<usize> {
        self.plans.iter().map(SourcePlan::coord_count).collect()
    }

    pub fn edge_uses(&self) -> Vec<usize> {
        (0..self.inst.edges().len()).map(|e| self.plans.iter().map(|p| p.slots[e]).sum()).collect()
    }

    pub fn blocklength(&self) -> usize {
        self.edge_uses().into_iter().max().unwrap_or(0)
    }

    pub fn achieved(&self) -> Ratio<u64> {
        rate_of(self.key_len, self.blocklength())
    }

    /// Receiving node of every masked batch, in emission order.
    pub fn batch_targets(&self) -> Vec<NodeId> {
        self.plans.iter().flat_map(|p| p.batches.iter().map(|b| b.target)).collect()
    }

    pub fn batch_count(&self) -> usize {
        self.plans.iter().map(|p| p.batches.len()).sum()
    }

    fn key_for(&self, per_source: &[&Vec<u32>]) -> Vec<u32> {
        match &self.combine {
            None => per_source[0].clone(),
            Some(g) => {
                let f = self.field();
                let len = per_source[0].len();
                let mut out = Vec::with_capacity(len * g.cols());
                for r in 0..len {
                    for c in 0..g.cols() {
                        let mut acc = 0;
                        for (i, k) in per_source.iter().enumerate() {
                            acc = f.add(acc, f.mul(k[r], g.get(i, c)));
                        }
                        out.push(acc);
                    }
                }
                out
            }
        }
    }

    fn set_keys(&self, runs: &[plan::PlanRun]) -> Result<KeySets, SchemeError> {
        let mut per_terminal = BTreeMap::new();
        let mut keys = Vec::new();
        for (i, set) in self.inst.terminal_sets().iter().enumerate() {
            let mut agreed: Option<Vec<u32>> = None;
            for &t in set {
                let parts: Vec<&Vec<u32>> = runs.iter().map(|r| &r.keys[&t]).collect();
                let k = self.key_for(&parts);
                match &agreed {
                    None => agreed = Some(k.clone()),
                    Some(a) if *a != k => return Err(SchemeError::KeyDisagreement { set: i }),
                    Some(_) => {}
                }
                per_terminal.insert(t, k);
            }
            keys.push(agreed.unwrap_or_default());
        }
        Ok((per_terminal, keys))
    }

    /// Fast path for enumeration: edge values and one key per set.
    pub fn evaluate(&self, coords: &[Vec<u32>]) -> Evaluation {
        let runs: Vec<plan::PlanRun> = self.plans.iter().zip(coords).map(|(p, c)| p.execute(c)).collect();
        let mut edges: Vec<Vec<u32>> = vec![Vec::new(); self.inst.edges().len()];
        for r in &runs {
            for (e, vals) in r.edges.iter().enumerate() {
                edges[e].extend_from_slice(vals);
            }
        }
        let mut agree = true;
        let mut keys = Vec::new();
        for set in self.inst.terminal_sets() {
            let mut first: Option<Vec<u32>> = None;
            for t in set {
                let parts: Vec<&Vec<u32>> = runs.iter().map(|r| &r.keys[&t]).collect();
                let k = self.key_for(&parts);
                match &first {
                    None => first = Some(k),
                    Some(f) => agree &= *f == k,
                }
            }
            keys.push(first.unwrap_or_default());
        }
        Evaluation { edges, keys, agree }
    }

    /// Executes on explicit randomness, checking share correctness, causality
    /// and key agreement.
    pub fn execute(&self, coords: &[Vec<u32>]) -> Result<SchemeResult, SchemeError> {
        let runs: Vec<plan::PlanRun> = self.plans.iter().zip(coords).map(|(p, c)| p.execute(c)).collect();
        let mut edges: Vec<Vec<Symbol>> = vec![Vec::new(); self.inst.edges().len()];
        let mut shares = Vec::new();
        for ((p, r), c) in self.plans.iter().zip(&runs).zip(coords) {
            p.check_shares(c, r)?;
            if let Err((e, k)) = p.replay(c, &r.edges) {
                return Err(SchemeError::ShareMismatch {
                    node: self.inst.edges()[e].0,
                    detail: format!("replay differs on edge {e} slot {k}"),
                });
            }
            for (e, syms) in p.symbols(r).into_iter().enumerate() {
                edges[e].extend(syms);
            }
            for &v in &p.order {
                let st = &r.states[v];
                if st.m.is_some() || st.r.is_some() || !st.held.is_empty() {
                    shares.push(NodeShares {
                        source: p.source,
                        node: v,
                        m: st.m.clone(),
                        r: st.r.clone(),
                        held: st.held.clone(),
                    });
                }
            }
        }
        let (terminal_keys, keys) = self.set_keys(&runs)?;
        let transcript = Transcript { edges, shares, terminal_keys, keys: keys.clone() };
        let blocklength = transcript.blocklength();
        let achieved = rate_of(self.key_len, blocklength);
        Ok(SchemeResult {
            scheme: self.kind,
            requested: self.requested,
            params: self.params,
            transcript,
            keys,
            key_len: self.key_len,
            blocklength,
            achieved,
            formula: self.formula,
            formula_met: achieved >= self.formula,
            batches: self.batch_count(),
            eta_records: self.eta_records.clone(),
            randomness: coords.to_vec(),
        })
    }

    /// Draws each source's randomness from its own stream of `seed`.
    pub fn run(&self, seed: u64) -> Result<SchemeResult, SchemeError> {
        let split = SplitSeed(seed);
        let f = self.field();
        let coords: Vec<Vec<u32>> = self
            .plans
            .iter()
            .map(|p| {
                let mut rng = split.stream(p.source_index as u64);
                (0..p.coord_count()).map(|_| rng.draw(f)).collect()
            })
            .collect();
        self.execute(&coords)
    }

    /// Executes with coordinates replayed from a scripted source.
    pub fn run_with(&self, src: &mut dyn RandomSource) -> Result<SchemeResult, SchemeError> {
        let f = self.field();
        let coords: Vec<Vec<u32>> = self.plans.iter().map(|p| (0..p.coord_count()).map(|_| src.draw(f)).collect()).collect();
        self.execute(&coords)
    }
}

fn single_source(inst: &NetworkInstance, kind: SchemeKind) -> Result<NodeId, SchemeError> {
    match inst.sources().as_slice() {
        [s] => Ok(*s),
        other => Err(SchemeError::BadParams(format!(
            "{kind} scheme needs exactly one source, instance has {}",
            other.len()
        ))),
    }
}

fn combiner(field: Field, sources: usize, x: usize) -> Result<FieldMatrix, SchemeError> {
    let mut alloc = VandermondeIndexAllocator::new(field);
    let mut alphas = Vec::new();
    for i in 0..sources {
        alphas.push(alloc.alloc(&format!("combine-{i}")).map_err(|_| SchemeError::FieldTooSmall {
            q: field.q(),
            detail: format!("{sources} distinct combining points needed"),
        })?.value());
    }
    Ok(FieldMatrix::from_fn(field, sources, sources - x, |i, c| field.pow(alphas[i], c as u64) as u64))
}

fn ratio(num: usize, den: usize) -> Ratio<u64> {
    Ratio::new(num as u64, den as u64)
}

/// Guaranteed rate for each scheme.
pub fn formula_rate(kind: SchemeKind, r: &Resolved, ceil_sum: usize) -> Ratio<u64> {
    let (d, ell, z, dh, s, x) = (r.d, r.ell, r.z, r.d_hat, r.sources, r.x);
    let partial_den = d * (d - dh.min(d)) + 1;
    match kind {
        SchemeKind::Full | SchemeKind::ShamirUnicast => ratio(d - ell, 1),
        SchemeKind::Multisource => ratio((d - ell) * (s - x), s),
        SchemeKind::Partial => ratio(d - ell - z + 1, partial_den),
        SchemeKind::PartialMultisource => ratio((d - ell - z + 1) * (s - x), partial_den * s),
        SchemeKind::Unstructured => ratio(d - ell - z + 1, partial_den + ceil_sum),
    }
}

fn resolve_common(inst: &NetworkInstance, params: &SchemeParams) -> Result<(usize, usize), SchemeError> {
    validate_instance(inst).map_err(NetworkError::Invalid)?;
    inst.topological_order()?;
    let dmax = default_d(inst);
    let d = params.d.unwrap_or(dmax);
    let ell = params.ell.unwrap_or(inst.ell());
    if d == 0 {
        return Err(SchemeError::BadParams("d must be at least 1".into()));
    }
    if d > dmax {
        return Err(SchemeError::BadParams(format!("d = {d} exceeds the minimum terminal connectivity {dmax}")));
    }
    if ell >= d {
        return Err(SchemeError::BadParams(format!("ell = {ell} must be below d = {d}")));
    }
    Ok((d, ell))
}

/// Compiles `kind` for `inst`. Partial requests are routed to the full
/// scheme when no fully-connected node has a partially-connected parent;
/// partially-connected nodes then stay idle.
pub fn compile(inst: &NetworkInstance, kind: SchemeKind, params: SchemeParams) -> Result<CompiledScheme, SchemeError> {
    let (d, ell) = resolve_common(inst, &params)?;
    let sources = inst.sources();
    let multi = matches!(kind, SchemeKind::Multisource | SchemeKind::PartialMultisource);
    let x = if multi { params.x.unwrap_or(inst.max_eavesdropped_sources()) } else { 0 };
    if multi && x >= sources.len() {
        return Err(SchemeError::TooManySourcesEavesdropped { x, sources: sources.len() });
    }
    let field = inst.field();
    let mut profiles = Vec::new();
    for &s in &sources {
        let p = classify_source(inst, s, d)?;
        for set in inst.terminal_sets() {
            for t in set {
                if p.connectivity[t] < d {
                    return Err(NetworkError::TerminalUnderConnected {
                        terminal: inst.name(t).to_string(),
                        origin: inst.name(s).to_string(),
                        connectivity: p.connectivity[t],
                        required: d,
                    }
                    .into());
                }
            }
        }
        profiles.push(p);
    }
    let z_obs = profiles.iter().map(|p| p.z_observed).max().unwrap_or(0);
    let d_hat = profiles.iter().map(|p| p.d_hat).min().unwrap_or(0);
    let mut resolved = Resolved { d, ell, x, z: 0, d_hat, sources: if multi { sources.len() } else { 1 } };
    let base = |kind: SchemeKind, requested, resolved: Resolved, key_len, plans, combine, ceil_sum, etas| CompiledScheme {
        kind,
        requested,
        params: resolved,
        key_len,
        formula: formula_rate(kind, &resolved, ceil_sum),
        plugin_formula: None,
        eta_records: etas,
        inst: inst.clone(),
        plans,
        combine,
    };

    let full_like = |requested: SchemeKind, resolved: Resolved| -> Result<CompiledScheme, SchemeError> {
        let kind = if multi { SchemeKind::Multisource } else { SchemeKind::Full };
        let srcs: Vec<NodeId> = if multi { sources.clone() } else { vec![single_source(inst, requested)?] };
        let skels = srcs
            .iter()
            .enumerate()
            .map(|(i, &s)| full_skeleton(inst, s, i, d, requested != kind))
            .collect::<Result<Vec<_>, _>>()?;
        let vecs = full_problem(inst, &skels, d, ell).solve()?;
        let plans = skels.iter().map(|sk| full_plan(inst, sk, &vecs, d, ell)).collect::<Result<Vec<_>, _>>()?;
        let combine = if multi { Some(combiner(field, srcs.len(), x)?) } else { None };
        let key_len = (d - ell) * if multi { srcs.len() - x } else { 1 };
        let mut c = base(kind, requested, resolved, key_len, plans, combine, 0, Vec::new());
        if requested != kind {
            let plug = Resolved { z: 0, ..resolved };
            let pk = if multi { SchemeKind::PartialMultisource } else { SchemeKind::Partial };
            c.plugin_formula = Some(formula_rate(pk, &plug, 0));
        }
        Ok(c)
    };

    match kind {
        SchemeKind::Full | SchemeKind::Multisource => full_like(kind, resolved),
        SchemeKind::ShamirUnicast => Err(SchemeError::BadParams("use shamir_unicast for point-to-point transfers".into())),
        SchemeKind::Partial | SchemeKind::PartialMultisource | SchemeKind::Unstructured => {
            let srcs: Vec<NodeId> = if multi { sources.clone() } else { vec![single_source(inst, kind)?] };
            if z_obs == 0 && params.z.is_none() {
                return full_like(kind, resolved);
            }
            if ell == 0 {
                return Err(SchemeError::BadParams("partially-connected schemes need ell >= 1".into()));
            }
            let unstructured = kind == SchemeKind::Unstructured;
            let z = match params.z {
                Some(z) => z,
                None if unstructured => z_obs.min(d - ell).max(1),
                None => z_obs,
            };
            if !unstructured {
                let bound = z.min(d - ell);
                for p in &profiles {
                    if let Some(&(v, _)) = p.overloaded(bound).first() {
                        return Err(SchemeError::StructuralConditionViolated {
                            node: inst.name(v).to_string(),
                            partial_parents: p.partial_in[v],
                            z: bound,
                        });
                    }
                }
            }
            if z == 0 || z > d - ell {
                return Err(SchemeError::BadParams(format!("z = {z} must lie in 1..={}", d - ell)));
            }
            resolved.z = z;
            let skels = srcs
                .iter()
                .enumerate()
                .map(|(i, &s)| partial_skeleton(inst, s, i, d, z, unstructured))
                .collect::<Result<Vec<_>, _>>()?;
            let (mp, rp) = partial_problems(inst, &skels, d, ell, z);
            let mv = mp.solve()?;
            let rv = rp.solve()?;
            let plans = skels
                .iter()
                .map(|sk| partial_plan(inst, sk, &mv, &rv, d, ell, z))
                .collect::<Result<Vec<_>, _>>()?;
            let combine = if multi { Some(combiner(field, srcs.len(), x)?) } else { None };
            let len = d - ell - z + 1;
            let key_len = len * if multi { srcs.len() - x } else { 1 };
            let ceil_sum: usize = skels[0]
                .profile
                .overloaded(z)
                .iter()
                .map(|&(_, p)| p.div_ceil(d - ell))
                .sum();
            let etas = skels.iter().flat_map(|sk| sk.eta_records.iter().copied()).collect();
            Ok(base(kind, kind, resolved, key_len, plans, combine, ceil_sum, etas))
        }
    }
}

pub fn run_scheme(
    inst: &NetworkInstance,
    kind: SchemeKind,
    params: SchemeParams,
    seed: u64,
) -> Result<SchemeResult, SchemeError> {
    compile(inst, kind, params)?.run(seed)
}

pub fn run_full_keycast(inst: &NetworkInstance, d: usize, ell: usize, seed: u64) -> Result<SchemeResult, SchemeError> {
    run_scheme(inst, SchemeKind::Full, SchemeParams::default().with_d(d).with_ell(ell), seed)
}

pub fn run_multisource_keycast(
    inst: &NetworkInstance,
    d: usize,
    ell: usize,
    x: usize,
    seed: u64,
) -> Result<SchemeResult, SchemeError> {
    run_scheme(inst, SchemeKind::Multisource, SchemeParams::default().with_d(d).with_ell(ell).with_x(x), seed)
}

pub fn run_partial_keycast(inst: &NetworkInstance, d: usize, ell: usize, seed: u64) -> Result<SchemeResult, SchemeError> {
    run_scheme(inst, SchemeKind::Partial, SchemeParams::default().with_d(d).with_ell(ell), seed)
}

pub fn run_partial_multisource(
    inst: &NetworkInstance,
    d: usize,
    ell: usize,
    x: usize,
    seed: u64,
) -> Result<SchemeResult, SchemeError> {
    run_scheme(inst, SchemeKind::PartialMultisource, SchemeParams::default().with_d(d).with_ell(ell).with_x(x), seed)
}

pub fn run_unstructured_keycast(
    inst: &NetworkInstance,
    d: usize,
    ell: usize,
    seed: u64,
) -> Result<SchemeResult, SchemeError> {
    run_scheme(inst, SchemeKind::Unstructured, SchemeParams::default().with_d(d).with_ell(ell), seed)
}

/// Masked transfer of `x` (length `d - ell`) from `s` to `v` over `d`
/// vertex-disjoint paths; the `ell` masks are drawn from `rng`.
pub fn shamir_unicast(
    inst: &NetworkInstance,
    s: NodeId,
    v: NodeId,
    d: usize,
    ell: usize,
    x: &[u32],
    rng: &mut dyn RandomSource,
) -> Result<SchemeResult, SchemeError> {
    if ell >= d {
        return Err(SchemeError::BadParams(format!("ell = {ell} must be below d = {d}")));
    }
    if x.len() != d - ell {
        return Err(SchemeError::BadParams(format!("message has length {}, expected {}", x.len(), d - ell)));
    }
    let plan = shamir_plan(inst, s, v, d, ell, x)?;
    let field = inst.field();
    let masks: Vec<u32> = (0..ell).map(|_| rng.draw(field)).collect();
    let resolved = Resolved { d, ell, x: 0, z: 0, d_hat: 0, sources: 1 };
    let compiled = CompiledScheme {
        kind: SchemeKind::ShamirUnicast,
        requested: SchemeKind::ShamirUnicast,
        params: resolved,
        key_len: d - ell,
        formula: formula_rate(SchemeKind::ShamirUnicast, &resolved, 0),
        plugin_formula: None,
        eta_records: Vec::new(),
        inst: inst.clone(),
        plans: vec![plan],
        combine: None,
    };
    let run = compiled.plans[0].execute(&masks);
    let mut edges: Vec<Vec<Symbol>> = compiled.plans[0].symbols(&run);
    edges.truncate(inst.edges().len());
    let key = run.keys[&v].clone();
    let transcript = Transcript {
        edges,
        shares: Vec::new(),
        terminal_keys: [(v, key.clone())].into_iter().collect(),
        keys: vec![key.clone()],
    };
    let blocklength = transcript.blocklength();
    let achieved = rate_of(d - ell, blocklength);
    Ok(SchemeResult {
        scheme: SchemeKind::ShamirUnicast,
        requested: SchemeKind::ShamirUnicast,
        params: resolved,
        transcript,
        keys: vec![key],
        key_len: d - ell,
        blocklength,
        achieved,
        formula: compiled.formula,
        formula_met: achieved >= compiled.formula,
        batches: 1,
        eta_records: Vec::new(),
        randomness: vec![masks],
    })
}
