//! Unit-capacity max-flow on the node-split graph.

use super::instance::{EdgeId, NetworkInstance, NodeId};
use super::NetworkError;

const UNBOUNDED: u32 = u32::MAX / 2;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: u32,
    flow: i64,
    /// Network edge this arc realizes, if any.
    edge: Option<EdgeId>,
    rev: usize,
}

/// Vertex `2v` is the entry of node `v`, `2v + 1` its exit.
struct SplitGraph {
    adj: Vec<Vec<Arc>>,
}

impl SplitGraph {
    fn new(n: usize) -> Self {
        SplitGraph { adj: vec![Vec::new(); 2 * n] }
    }

    fn add(&mut self, from: usize, to: usize, cap: u32, edge: Option<EdgeId>) {
        let rf = self.adj[to].len();
        let rt = self.adj[from].len();
        self.adj[from].push(Arc { to, cap, flow: 0, edge, rev: rf });
        self.adj[to].push(Arc { to: from, cap: 0, flow: 0, edge: None, rev: rt });
    }

    fn augment(&mut self, u: usize, sink: usize, seen: &mut [bool]) -> bool {
        if u == sink {
            return true;
        }
        seen[u] = true;
        for i in 0..self.adj[u].len() {
            let a = &self.adj[u][i];
            if seen[a.to] || (a.cap as i64 - a.flow) <= 0 {
                continue;
            }
            let to = a.to;
            if self.augment(to, sink, seen) {
                let rev = self.adj[u][i].rev;
                self.adj[u][i].flow += 1;
                self.adj[to][rev].flow -= 1;
                return true;
            }
        }
        false
    }
}

/// One unit of flow traced back to the network: `nodes` runs from the source to
/// the sink inclusive, `edges[k]` joins `nodes[k]` and `nodes[k + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowPath {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
}

impl FlowPath {
    pub fn internal(&self) -> &[NodeId] {
        &self.nodes[1..self.nodes.len() - 1]
    }
}

fn build(inst: &NetworkInstance, s: NodeId, v: NodeId, removed: &[bool]) -> SplitGraph {
    let n = inst.node_count();
    let mut g = SplitGraph::new(n);
    for u in 0..n {
        let cap = if u == s || u == v {
            UNBOUNDED
        } else if removed.get(u).copied().unwrap_or(false) {
            0
        } else {
            1
        };
        g.add(2 * u, 2 * u + 1, cap, None);
    }
    for (e, &(a, b)) in inst.edges().iter().enumerate() {
        g.add(2 * a + 1, 2 * b, 1, Some(e));
    }
    g
}

/// Max-flow value and a path decomposition from `s` to `v`, with the
/// `removed` nodes deleted. Augmentation scans arcs in declaration order, so
/// the result is reproducible.
pub fn disjoint_paths(inst: &NetworkInstance, s: NodeId, v: NodeId, removed: &[bool]) -> Vec<FlowPath> {
    let mut g = build(inst, s, v, removed);
    let (src, sink) = (2 * s + 1, 2 * v);
    let mut seen = vec![false; g.adj.len()];
    loop {
        seen.iter_mut().for_each(|x| *x = false);
        if !g.augment(src, sink, &mut seen) {
            break;
        }
    }
    let mut paths = Vec::new();
    loop {
        let mut nodes = vec![s];
        let mut edges = Vec::new();
        let mut u = src;
        let mut ok = false;
        while u != sink {
            let Some(i) = g.adj[u].iter().position(|a| a.flow > 0) else {
                break;
            };
            g.adj[u][i].flow -= 1;
            let a = &g.adj[u][i];
            if let Some(e) = a.edge {
                edges.push(e);
                nodes.push(a.to / 2);
            }
            u = a.to;
            if u == sink {
                ok = true;
            }
        }
        if !ok {
            break;
        }
        paths.push(FlowPath { nodes, edges });
    }
    paths
}

pub fn max_flow(inst: &NetworkInstance, s: NodeId, v: NodeId, removed: &[bool]) -> usize {
    disjoint_paths(inst, s, v, removed).len()
}

/// Direct parallel edges plus internally vertex-disjoint paths from `s` to `v`.
pub fn vertex_connectivity(inst: &NetworkInstance, s: NodeId, v: NodeId) -> Result<usize, NetworkError> {
    if s >= inst.node_count() {
        return Err(NetworkError::UnknownNode(format!("#{s}")));
    }
    if v >= inst.node_count() {
        return Err(NetworkError::UnknownNode(format!("#{v}")));
    }
    if !inst.is_source(s) {
        return Err(NetworkError::NotASource(inst.name(s).to_string()));
    }
    if s == v {
        return Err(NetworkError::SameEndpoints(inst.name(s).to_string()));
    }
    Ok(max_flow(inst, s, v, &[]))
}

pub fn vertex_connectivity_by_name(inst: &NetworkInstance, s: &str, v: &str) -> Result<usize, NetworkError> {
    vertex_connectivity(inst, inst.node_id(s)?, inst.node_id(v)?)
}
