use std::collections::BTreeSet;

use super::flow::max_flow;
use super::instance::{NetworkInstance, NodeId};
use super::NetworkError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Source,
    Full,
    TypeA,
    TypeB,
}

impl NodeClass {
    pub fn is_partial(self) -> bool {
        matches!(self, NodeClass::TypeA | NodeClass::TypeB)
    }

    pub fn label(self) -> &'static str {
        match self {
            NodeClass::Source => "source",
            NodeClass::Full => "full",
            NodeClass::TypeA => "partial/type-A",
            NodeClass::TypeB => "partial/type-B",
        }
    }
}

/// Classification of every node relative to one source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProfile {
    pub source: NodeId,
    pub connectivity: Vec<usize>,
    pub class: Vec<NodeClass>,
    /// Full or type-A nodes reaching `j` through type-B nodes only; empty for full nodes.
    pub d_set: Vec<BTreeSet<NodeId>>,
    /// Number of distinct partially-connected parents; only meaningful for full nodes.
    pub partial_in: Vec<usize>,
    pub z_observed: usize,
    pub d_hat: usize,
}

impl SourceProfile {
    pub fn in_neighborhood(&self, inst: &NetworkInstance, v: NodeId) -> bool {
        inst.edges().iter().any(|&(a, b)| a == self.source && b == v)
    }

    /// Full nodes with more than `z` partial parents, and their excess.
    pub fn overloaded(&self, z: usize) -> Vec<(NodeId, usize)> {
        (0..self.class.len())
            .filter(|&v| self.class[v] == NodeClass::Full && self.partial_in[v] > z)
            .map(|v| (v, self.partial_in[v] - z))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityProfile {
    pub d: usize,
    pub ell: usize,
    pub per_source: Vec<SourceProfile>,
    pub z_observed: usize,
    /// `min(z_observed, d - ell)`.
    pub z: usize,
    pub d_hat: usize,
    /// Full nodes with more than `z` partial parents, with excess `p(j)`
    /// (largest excess over sources).
    pub overloaded: Vec<(NodeId, usize)>,
}

impl ConnectivityProfile {
    pub fn for_source(&self, s: NodeId) -> Option<&SourceProfile> {
        self.per_source.iter().find(|p| p.source == s)
    }
}

/// Minimum connectivity over all (source, terminal) pairs.
pub fn default_d(inst: &NetworkInstance) -> usize {
    let mut best = usize::MAX;
    for s in inst.sources() {
        for set in inst.terminal_sets() {
            for t in set {
                best = best.min(max_flow(inst, s, t, &[]));
            }
        }
    }
    if best == usize::MAX {
        0
    } else {
        best
    }
}

pub fn classify_source(inst: &NetworkInstance, s: NodeId, d: usize) -> Result<SourceProfile, NetworkError> {
    let n = inst.node_count();
    let order = inst.topological_order()?;
    let connectivity: Vec<usize> = (0..n)
        .map(|v| if inst.is_source(v) { 0 } else { max_flow(inst, s, v, &[]) })
        .collect();
    let n_s: BTreeSet<NodeId> = inst.edges().iter().filter(|e| e.0 == s).map(|e| e.1).collect();
    let mut class = vec![NodeClass::Source; n];
    let mut d_set = vec![BTreeSet::new(); n];
    for &v in &order {
        if inst.is_source(v) {
            continue;
        }
        if connectivity[v] >= d {
            class[v] = NodeClass::Full;
            continue;
        }
        let mut dv = BTreeSet::new();
        for p in inst.parents(v) {
            match class[p] {
                NodeClass::Source => {}
                NodeClass::Full | NodeClass::TypeA => {
                    dv.insert(p);
                }
                NodeClass::TypeB => dv.extend(d_set[p].iter().copied()),
            }
        }
        class[v] = if n_s.contains(&v) || dv.len() >= d { NodeClass::TypeA } else { NodeClass::TypeB };
        d_set[v] = dv;
    }
    let mut partial_in = vec![0; n];
    let mut z_observed = 0;
    for v in 0..n {
        if class[v] == NodeClass::Full {
            partial_in[v] = inst.parents(v).into_iter().filter(|&p| class[p].is_partial()).count();
            z_observed = z_observed.max(partial_in[v]);
        }
    }
    let d_hat = (0..n).filter(|&v| !inst.is_source(v)).map(|v| connectivity[v]).min().unwrap_or(0);
    Ok(SourceProfile { source: s, connectivity, class, d_set, partial_in, z_observed, d_hat })
}

pub fn classify_nodes(inst: &NetworkInstance, d: usize) -> Result<ConnectivityProfile, NetworkError> {
    classify_with_ell(inst, d, inst.ell())
}

pub fn classify_with_ell(inst: &NetworkInstance, d: usize, ell: usize) -> Result<ConnectivityProfile, NetworkError> {
    let mut per_source = Vec::new();
    for s in inst.sources() {
        let p = classify_source(inst, s, d)?;
        for set in inst.terminal_sets() {
            for t in set {
                if p.connectivity[t] < d {
                    return Err(NetworkError::TerminalUnderConnected {
                        terminal: inst.name(t).to_string(),
                        origin: inst.name(s).to_string(),
                        connectivity: p.connectivity[t],
                        required: d,
                    });
                }
            }
        }
        per_source.push(p);
    }
    let z_observed = per_source.iter().map(|p| p.z_observed).max().unwrap_or(0);
    let z = z_observed.min(d.saturating_sub(ell));
    let d_hat = per_source.iter().map(|p| p.d_hat).min().unwrap_or(0);
    let mut overloaded: Vec<(NodeId, usize)> = Vec::new();
    for p in &per_source {
        for (v, excess) in p.overloaded(z) {
            match overloaded.iter_mut().find(|(u, _)| *u == v) {
                Some(entry) => entry.1 = entry.1.max(excess),
                None => overloaded.push((v, excess)),
            }
        }
    }
    overloaded.sort();
    Ok(ConnectivityProfile { d, ell, per_source, z_observed, z, d_hat, overloaded })
}
