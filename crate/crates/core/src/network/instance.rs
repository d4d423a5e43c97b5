use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::field::Field;

use super::NetworkError;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub is_source: bool,
    /// Zero-based terminal set indices this node belongs to (at most one in a valid instance).
    pub terminal_sets: Vec<usize>,
}

/// A directed acyclic multigraph with sources, a terminal partition and the
/// adversary parameters. Parallel edges are stored by repetition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkInstance {
    field: Field,
    nodes: Vec<Node>,
    edges: Vec<(NodeId, NodeId)>,
    ell: usize,
    x: usize,
    explicit_eaves: Vec<Vec<NodeId>>,
    index: HashMap<String, NodeId>,
}

impl NetworkInstance {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.nodes[v].name
    }

    pub fn node_id(&self, name: &str) -> Result<NodeId, NetworkError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| NetworkError::UnknownNode(name.to_string()))
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn max_eavesdropped_sources(&self) -> usize {
        self.x
    }

    pub fn explicit_eaves(&self) -> &[Vec<NodeId>] {
        &self.explicit_eaves
    }

    pub fn is_source(&self, v: NodeId) -> bool {
        self.nodes[v].is_source
    }

    pub fn sources(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&v| self.nodes[v].is_source).collect()
    }

    pub fn terminal_set_count(&self) -> usize {
        self.nodes
            .iter()
            .flat_map(|n| n.terminal_sets.iter())
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Members of each terminal set, in declaration order.
    pub fn terminal_sets(&self) -> Vec<Vec<NodeId>> {
        let mut sets = vec![Vec::new(); self.terminal_set_count()];
        for (v, n) in self.nodes.iter().enumerate() {
            for &k in &n.terminal_sets {
                sets[k].push(v);
            }
        }
        sets
    }

    pub fn terminal_set_of(&self, v: NodeId) -> Option<usize> {
        self.nodes[v].terminal_sets.first().copied()
    }

    pub fn is_terminal(&self, v: NodeId) -> bool {
        !self.nodes[v].terminal_sets.is_empty()
    }

    pub fn in_edges(&self, v: NodeId) -> Vec<EdgeId> {
        (0..self.edges.len()).filter(|&e| self.edges[e].1 == v).collect()
    }

    pub fn out_edges(&self, v: NodeId) -> Vec<EdgeId> {
        (0..self.edges.len()).filter(|&e| self.edges[e].0 == v).collect()
    }

    pub fn edges_between(&self, u: NodeId, v: NodeId) -> Vec<EdgeId> {
        (0..self.edges.len()).filter(|&e| self.edges[e] == (u, v)).collect()
    }

    /// Distinct tails of `v`'s in-edges, ordered by first occurrence.
    pub fn parents(&self, v: NodeId) -> Vec<NodeId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if b == v && seen.insert(a) {
                out.push(a);
            }
        }
        out
    }

    pub fn children(&self, v: NodeId) -> Vec<NodeId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == v && seen.insert(b) {
                out.push(b);
            }
        }
        out
    }

    /// Topological order; ties go to the earliest-declared ready node.
    pub fn topological_order(&self) -> Result<Vec<NodeId>, NetworkError> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for &(_, b) in &self.edges {
            indeg[b] += 1;
        }
        let mut ready: BTreeSet<NodeId> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &(a, b) in &self.edges {
                if a == v {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        ready.insert(b);
                    }
                }
            }
        }
        if order.len() == n {
            return Ok(order);
        }
        let cycle = self.find_cycle(&indeg);
        Err(NetworkError::CycleDetected {
            cycle: cycle.into_iter().map(|v| self.name(v).to_string()).collect(),
        })
    }

    /// Walks backwards among nodes that still have unresolved in-edges until a
    /// node repeats; that stretch is a cycle.
    fn find_cycle(&self, indeg: &[usize]) -> Vec<NodeId> {
        let start = (0..self.nodes.len()).find(|&v| indeg[v] > 0).expect("cycle exists");
        let mut walk = vec![start];
        let mut pos: HashMap<NodeId, usize> = HashMap::from([(start, 0)]);
        let mut cur = start;
        loop {
            let prev = self
                .edges
                .iter()
                .find(|&&(a, b)| b == cur && indeg[a] > 0)
                .map(|&(a, _)| a)
                .expect("stuck node has a stuck parent");
            if let Some(&i) = pos.get(&prev) {
                let mut cyc: Vec<NodeId> = walk[i..].to_vec();
                cyc.reverse();
                return cyc;
            }
            pos.insert(prev, walk.len());
            walk.push(prev);
            cur = prev;
        }
    }

    /// Same graph with nodes redeclared in `perm` order (`perm[k]` is the old id
    /// of the new k-th node). Edge order is preserved.
    pub fn permuted(&self, perm: &[NodeId]) -> NetworkInstance {
        assert_eq!(perm.len(), self.nodes.len());
        let mut new_id = vec![0; perm.len()];
        for (k, &old) in perm.iter().enumerate() {
            new_id[old] = k;
        }
        let nodes: Vec<Node> = perm.iter().map(|&old| self.nodes[old].clone()).collect();
        let index = nodes.iter().enumerate().map(|(i, n)| (n.name.clone(), i)).collect();
        NetworkInstance {
            field: self.field,
            nodes,
            edges: self.edges.iter().map(|&(a, b)| (new_id[a], new_id[b])).collect(),
            ell: self.ell,
            x: self.x,
            explicit_eaves: self
                .explicit_eaves
                .iter()
                .map(|s| s.iter().map(|&v| new_id[v]).collect())
                .collect(),
            index,
        }
    }

    pub fn with_adversary(&self, ell: usize, x: usize) -> NetworkInstance {
        let mut out = self.clone();
        out.ell = ell;
        out.x = x;
        out
    }

    pub fn with_field(&self, field: Field) -> NetworkInstance {
        let mut out = self.clone();
        out.field = field;
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    SourceHasInEdge,
    TerminalHasOutEdge,
    TerminalSetsOverlap,
    EmptyTerminalSet,
    NoTerminalSet,
    NoSource,
    SourceIsTerminal,
    Cycle,
    TooManySourcesEavesdropped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Every violated structural invariant, each naming the offending node or edge.
pub fn validate_instance(inst: &NetworkInstance) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut push = |kind, message: String| out.push(Violation { kind, message });
    let sources = inst.sources();
    if sources.is_empty() {
        push(ViolationKind::NoSource, "instance declares no source".into());
    }
    for (e, &(a, b)) in inst.edges.iter().enumerate() {
        if inst.is_source(b) {
            push(
                ViolationKind::SourceHasInEdge,
                format!("source has in-edge: {} -> {} (edge {})", inst.name(a), inst.name(b), e + 1),
            );
        }
        if inst.is_terminal(a) {
            push(
                ViolationKind::TerminalHasOutEdge,
                format!("terminal has out-edge: {} -> {} (edge {})", inst.name(a), inst.name(b), e + 1),
            );
        }
    }
    for (v, n) in inst.nodes.iter().enumerate() {
        if n.terminal_sets.len() > 1 {
            push(
                ViolationKind::TerminalSetsOverlap,
                format!("terminal sets not disjoint: node {} is in several sets", inst.name(v)),
            );
        }
        if n.is_source && !n.terminal_sets.is_empty() {
            push(ViolationKind::SourceIsTerminal, format!("node {} is both source and terminal", n.name));
        }
    }
    let sets = inst.terminal_sets();
    if sets.is_empty() {
        push(ViolationKind::NoTerminalSet, "instance declares no terminal".into());
    }
    for (k, s) in sets.iter().enumerate() {
        if s.is_empty() {
            push(ViolationKind::EmptyTerminalSet, format!("terminal set {} is empty", k + 1));
        }
    }
    if !sources.is_empty() && inst.x >= sources.len() {
        push(
            ViolationKind::TooManySourcesEavesdropped,
            format!("sources={} must be below the source count {}", inst.x, sources.len()),
        );
    }
    if let Err(NetworkError::CycleDetected { cycle }) = inst.topological_order() {
        push(ViolationKind::Cycle, format!("graph has a cycle: {}", cycle.join(" -> ")));
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Incremental constructor; names are resolved as they are added.
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    field: Field,
    nodes: Vec<Node>,
    index: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    ell: usize,
    x: usize,
    explicit_eaves: Vec<Vec<NodeId>>,
}

impl InstanceBuilder {
    pub fn new(field: Field) -> Self {
        InstanceBuilder {
            field,
            nodes: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            ell: 0,
            x: 0,
            explicit_eaves: Vec::new(),
        }
    }

    pub fn add_node(&mut self, name: &str, is_source: bool, terminal_sets: &[usize]) -> Result<NodeId, NetworkError> {
        if self.index.contains_key(name) {
            return Err(NetworkError::DuplicateNode(name.to_string()));
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            name: name.to_string(),
            is_source,
            terminal_sets: terminal_sets.to_vec(),
        });
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn node(mut self, name: &str) -> Self {
        self.add_node(name, false, &[]).expect("fresh node name");
        self
    }

    pub fn source(mut self, name: &str) -> Self {
        self.add_node(name, true, &[]).expect("fresh node name");
        self
    }

    /// `set` is one-based, as in the text format.
    pub fn terminal(mut self, name: &str, set: usize) -> Self {
        assert!(set >= 1, "terminal sets are numbered from 1");
        self.add_node(name, false, &[set - 1]).expect("fresh node name");
        self
    }

    pub fn id(&self, name: &str) -> Result<NodeId, NetworkError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| NetworkError::UnknownNode(name.to_string()))
    }

    pub fn add_edge(&mut self, tail: &str, head: &str, mult: usize) -> Result<(), NetworkError> {
        let a = self.id(tail)?;
        let b = self.id(head)?;
        for _ in 0..mult {
            self.edges.push((a, b));
        }
        Ok(())
    }

    pub fn edge(self, tail: &str, head: &str) -> Self {
        self.edges_x(tail, head, 1)
    }

    pub fn edges_x(mut self, tail: &str, head: &str, mult: usize) -> Self {
        self.add_edge(tail, head, mult).expect("known endpoints");
        self
    }

    pub fn set_adversary(&mut self, ell: usize, x: usize) {
        self.ell = ell;
        self.x = x;
    }

    pub fn adversary(mut self, ell: usize, x: usize) -> Self {
        self.set_adversary(ell, x);
        self
    }

    pub fn add_eaves(&mut self, names: &[&str]) -> Result<(), NetworkError> {
        let ids = names.iter().map(|n| self.id(n)).collect::<Result<Vec<_>, _>>()?;
        self.explicit_eaves.push(ids);
        Ok(())
    }

    pub fn eaves(mut self, names: &[&str]) -> Self {
        self.add_eaves(names).expect("known eavesdropper nodes");
        self
    }

    pub fn build_unchecked(self) -> NetworkInstance {
        NetworkInstance {
            field: self.field,
            nodes: self.nodes,
            edges: self.edges,
            ell: self.ell,
            x: self.x,
            explicit_eaves: self.explicit_eaves,
            index: self.index,
        }
    }

    pub fn build(self) -> Result<NetworkInstance, NetworkError> {
        let inst = self.build_unchecked();
        validate_instance(&inst).map_err(NetworkError::Invalid)?;
        Ok(inst)
    }
}
