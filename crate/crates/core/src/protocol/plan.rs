//! Compiled per-source transmission plans and their executor.
//!
//! A plan fixes, before any randomness is drawn, which symbol every edge slot
//! carries and how every node decodes. Execution then walks the nodes in
//! topological order; each node reads only its own in-edge slots.

use std::collections::BTreeMap;

use crate::field::{symmetric_coord_count, symmetric_from_coords, Field, FieldMatrix};
use crate::network::{EdgeId, NodeId};

use super::{SchemeError, Stream, Symbol};

/// Where a transmitted symbol comes from, at the sender.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Src {
    /// `leftᵀ X right`, computed by the source.
    Proj { stream: Stream, left: Vec<u32>, right: Vec<u32> },
    /// `(X v)_k`, computed by the source.
    Comp { stream: Stream, vec: Vec<u32>, k: usize },
    /// Share of a masked batch at evaluation point `point`, computed by the source.
    Share { batch: usize, point: u32 },
    /// `leftᵀ s` for the sender's own share of `stream`.
    OwnProj { stream: Stream, left: Vec<u32> },
    /// Component `k` of the sender's own `R` share.
    OwnComp { k: usize },
    /// `leftᵀ (R v_of)` from a stored vector.
    HeldProj { of: NodeId, left: Vec<u32> },
    HeldComp { of: NodeId, k: usize },
    /// Forwards an in-symbol unchanged.
    Relay { from: Slot },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Slot {
    pub edge: EdgeId,
    pub index: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Send {
    pub slot: Slot,
    pub stream: Stream,
    pub src: Src,
}

#[derive(Debug, Clone)]
pub(crate) enum Input {
    Edge(Slot),
    Batch { batch: usize, k: usize },
}

#[derive(Debug, Clone)]
pub(crate) enum Recover {
    /// `s = (T V⁻¹)ᵀ`; inputs listed in column order.
    Share { stream: Stream, inputs: Vec<Input>, inverse: FieldMatrix },
    /// Reassembles a vector sent component-wise. `of = None` means the node's own `R` share.
    Collect { of: Option<NodeId>, inputs: Vec<Slot> },
    /// Solves a batch's Vandermonde system and keeps the message part.
    Unmask { batch: usize, inputs: Vec<Slot>, inverse: FieldMatrix },
}

#[derive(Debug, Clone)]
pub(crate) enum BatchMessage {
    Fixed(Vec<u32>),
    /// `leftᵀ M right` per entry.
    FromM(Vec<(Vec<u32>, Vec<u32>)>),
}

#[derive(Debug, Clone)]
pub(crate) struct Batch {
    pub target: NodeId,
    pub message: BatchMessage,
    /// Message length `d - ℓ`; shorter messages are zero-padded.
    pub width: usize,
    pub masks: usize,
    pub paths: Vec<Vec<EdgeId>>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct NodePlan {
    pub recovers: Vec<Recover>,
    pub sends: Vec<Send>,
    pub expect_m: Option<Vec<u32>>,
    pub expect_r: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum KeyPart {
    Share(Stream),
    Batch(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct SourcePlan {
    pub source: NodeId,
    pub source_index: usize,
    pub field: Field,
    pub m_dim: usize,
    pub r_dim: usize,
    pub batches: Vec<Batch>,
    pub source_sends: Vec<Send>,
    pub nodes: Vec<NodePlan>,
    pub order: Vec<NodeId>,
    pub slots: Vec<usize>,
    /// Vectors held by type-B style nodes, for correctness checks.
    pub held_vectors: BTreeMap<NodeId, Vec<u32>>,
    pub key_parts: Vec<KeyPart>,
    pub key_len: usize,
    pub key_nodes: Vec<NodeId>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct NodeState {
    pub m: Option<Vec<u32>>,
    pub r: Option<Vec<u32>>,
    pub held: BTreeMap<NodeId, Vec<u32>>,
    pub unmasked: BTreeMap<usize, Vec<u32>>,
}

#[derive(Debug, Clone)]
pub(crate) struct PlanRun {
    pub edges: Vec<Vec<u32>>,
    pub states: Vec<NodeState>,
    pub keys: BTreeMap<NodeId, Vec<u32>>,
}

pub(crate) struct Randomness {
    pub m: Option<FieldMatrix>,
    pub r: Option<FieldMatrix>,
    pub masks: Vec<Vec<u32>>,
}

impl SourcePlan {
    pub fn new_slot(&mut self, edge: EdgeId) -> Slot {
        let index = self.slots[edge];
        self.slots[edge] += 1;
        Slot { edge, index }
    }

    pub fn coord_count(&self) -> usize {
        symmetric_coord_count(self.m_dim)
            + symmetric_coord_count(self.r_dim)
            + self.batches.iter().map(|b| b.masks).sum::<usize>()
    }

    pub fn randomness(&self, coords: &[u32]) -> Randomness {
        assert_eq!(coords.len(), self.coord_count(), "randomness coordinate count");
        let mut at = 0;
        let mut take = |k: usize| {
            let s = &coords[at..at + k];
            at += k;
            s
        };
        let m = (self.m_dim > 0)
            .then(|| symmetric_from_coords(self.field, self.m_dim, take(symmetric_coord_count(self.m_dim))));
        let r = (self.r_dim > 0)
            .then(|| symmetric_from_coords(self.field, self.r_dim, take(symmetric_coord_count(self.r_dim))));
        let masks = self.batches.iter().map(|b| take(b.masks).to_vec()).collect();
        Randomness { m, r, masks }
    }

    fn matrix<'a>(&self, rnd: &'a Randomness, stream: Stream) -> &'a FieldMatrix {
        match stream {
            Stream::M => rnd.m.as_ref().expect("plan draws M"),
            Stream::R => rnd.r.as_ref().expect("plan draws R"),
            Stream::Shamir => panic!("no matrix behind the masked stream"),
        }
    }

    fn batch_message(&self, rnd: &Randomness, b: usize) -> Vec<u32> {
        let batch = &self.batches[b];
        let mut msg = match &batch.message {
            BatchMessage::Fixed(x) => x.clone(),
            BatchMessage::FromM(pairs) => {
                let m = self.matrix(rnd, Stream::M);
                pairs
                    .iter()
                    .map(|(l, r)| self.field.dot(&m.vec_mul(l), r))
                    .collect()
            }
        };
        msg.resize(batch.width, 0);
        msg
    }

    /// `f(point) = Σ x_k point^k + Σ r_k point^{width + k}`.
    fn share_value(&self, rnd: &Randomness, b: usize, point: u32) -> u32 {
        let f = self.field;
        let x = self.batch_message(rnd, b);
        let mut acc = 0;
        let mut p = 1 % f.q();
        for &c in x.iter().chain(rnd.masks[b].iter()) {
            acc = f.add(acc, f.mul(c, p));
            p = f.mul(p, point);
        }
        acc
    }

    fn source_value(&self, rnd: &Randomness, src: &Src) -> u32 {
        let f = self.field;
        match src {
            Src::Proj { stream, left, right } => f.dot(&self.matrix(rnd, *stream).vec_mul(left), right),
            Src::Comp { stream, vec, k } => f.dot(self.matrix(rnd, *stream).row(*k), vec),
            Src::Share { batch, point } => self.share_value(rnd, *batch, *point),
            other => panic!("source cannot emit {other:?}"),
        }
    }

    fn node_value(&self, state: &NodeState, edges: &[Vec<u32>], src: &Src) -> u32 {
        let f = self.field;
        match src {
            Src::OwnProj { stream, left } => {
                let s = match stream {
                    Stream::M => state.m.as_ref(),
                    Stream::R => state.r.as_ref(),
                    Stream::Shamir => None,
                }
                .expect("sender holds its share");
                f.dot(left, s)
            }
            Src::OwnComp { k } => state.r.as_ref().expect("sender holds its R share")[*k],
            Src::HeldProj { of, left } => f.dot(left, &state.held[of]),
            Src::HeldComp { of, k } => state.held[of][*k],
            Src::Relay { from } => edges[from.edge][from.index],
            other => panic!("intermediate node cannot emit {other:?}"),
        }
    }

    fn recover(&self, state: &mut NodeState, edges: &[Vec<u32>], rec: &Recover) {
        let read = |s: &Slot| edges[s.edge][s.index];
        match rec {
            Recover::Share { stream, inputs, inverse } => {
                let t: Vec<u32> = inputs
                    .iter()
                    .map(|i| match i {
                        Input::Edge(s) => read(s),
                        Input::Batch { batch, k } => state.unmasked[batch][*k],
                    })
                    .collect();
                let s = inverse.vec_mul(&t);
                match stream {
                    Stream::M => state.m = Some(s),
                    Stream::R => state.r = Some(s),
                    Stream::Shamir => unreachable!(),
                }
            }
            Recover::Collect { of, inputs } => {
                let v: Vec<u32> = inputs.iter().map(read).collect();
                match of {
                    Some(x) => {
                        state.held.insert(*x, v);
                    }
                    None => state.r = Some(v),
                }
            }
            Recover::Unmask { batch, inputs, inverse } => {
                let y: Vec<u32> = inputs.iter().map(read).collect();
                let c = inverse.mul_vec(&y);
                state.unmasked.insert(*batch, c[..self.batches[*batch].width].to_vec());
            }
        }
    }

    pub fn execute(&self, coords: &[u32]) -> PlanRun {
        let rnd = self.randomness(coords);
        let mut edges: Vec<Vec<u32>> = self.slots.iter().map(|&k| vec![0; k]).collect();
        let mut states = vec![NodeState::default(); self.nodes.len()];
        for s in &self.source_sends {
            edges[s.slot.edge][s.slot.index] = self.source_value(&rnd, &s.src);
        }
        for &v in &self.order {
            let plan = &self.nodes[v];
            let mut state = std::mem::take(&mut states[v]);
            for rec in &plan.recovers {
                self.recover(&mut state, &edges, rec);
            }
            for s in &plan.sends {
                edges[s.slot.edge][s.slot.index] = self.node_value(&state, &edges, &s.src);
            }
            states[v] = state;
        }
        let mut keys = BTreeMap::new();
        for &t in &self.key_nodes {
            keys.insert(t, self.key_of(&states[t]));
        }
        PlanRun { edges, states, keys }
    }

    fn key_of(&self, st: &NodeState) -> Vec<u32> {
        let f = self.field;
        let mut key = vec![0; self.key_len];
        for part in &self.key_parts {
            let s = match part {
                KeyPart::Share(Stream::M) => st.m.as_ref(),
                KeyPart::Share(Stream::R) => st.r.as_ref(),
                KeyPart::Share(Stream::Shamir) => None,
                KeyPart::Batch(b) => st.unmasked.get(b),
            }
            .expect("terminal recovered its key material");
            for k in 0..self.key_len {
                key[k] = f.add(key[k], s[k]);
            }
        }
        key
    }

    /// Compares every recovered share against the direct product with the
    /// source's matrices.
    pub fn check_shares(&self, coords: &[u32], run: &PlanRun) -> Result<(), SchemeError> {
        let rnd = self.randomness(coords);
        for (v, plan) in self.nodes.iter().enumerate() {
            let st = &run.states[v];
            for (stream, expect, got) in [
                (Stream::M, &plan.expect_m, &st.m),
                (Stream::R, &plan.expect_r, &st.r),
            ] {
                if let Some(vec) = expect {
                    let want = self.matrix(&rnd, stream).mul_vec(vec);
                    if got.as_ref() != Some(&want) {
                        return Err(SchemeError::ShareMismatch {
                            node: v,
                            detail: format!("{stream:?} share differs from direct product"),
                        });
                    }
                }
            }
            for (of, got) in &st.held {
                let want = self.matrix(&rnd, Stream::R).mul_vec(&self.held_vectors[of]);
                if *got != want {
                    return Err(SchemeError::ShareMismatch {
                        node: v,
                        detail: format!("stored vector of node #{of} differs from direct product"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Re-derives every node's outgoing symbols from the recorded in-symbols alone.
    pub fn replay(&self, coords: &[u32], edges: &[Vec<u32>]) -> Result<(), (EdgeId, usize)> {
        let rnd = self.randomness(coords);
        for s in &self.source_sends {
            if edges[s.slot.edge][s.slot.index] != self.source_value(&rnd, &s.src) {
                return Err((s.slot.edge, s.slot.index));
            }
        }
        for &v in &self.order {
            let plan = &self.nodes[v];
            let mut state = NodeState::default();
            for rec in &plan.recovers {
                self.recover(&mut state, edges, rec);
            }
            for s in &plan.sends {
                if edges[s.slot.edge][s.slot.index] != self.node_value(&state, edges, &s.src) {
                    return Err((s.slot.edge, s.slot.index));
                }
            }
        }
        Ok(())
    }

    pub fn stream_of_slots(&self) -> Vec<Vec<Stream>> {
        let mut out: Vec<Vec<Stream>> = self.slots.iter().map(|&k| vec![Stream::M; k]).collect();
        let all = self.source_sends.iter().chain(self.nodes.iter().flat_map(|n| n.sends.iter()));
        for s in all {
            out[s.slot.edge][s.slot.index] = s.stream;
        }
        out
    }

    pub fn symbols(&self, run: &PlanRun) -> Vec<Vec<Symbol>> {
        let streams = self.stream_of_slots();
        run.edges
            .iter()
            .zip(streams)
            .map(|(vals, st)| {
                vals.iter()
                    .zip(st)
                    .map(|(&value, stream)| Symbol { source: self.source_index, stream, value })
                    .collect()
            })
            .collect()
    }
}
