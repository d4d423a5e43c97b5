use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::Field;
use crate::network::{max_flow, validate_instance, InstanceBuilder, NetworkInstance};

use super::IoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalKind {
    /// Two sources, two relays, two terminals sharing `K = m1 + m2`.
    Fig1,
    /// Source, `d` relays with `d` parallel source edges each, one terminal.
    Fig2,
    /// `Fig2` with `sources` sources all feeding every relay.
    Fig2Multi,
    /// `s ⇒ a → b_1 → … → t` plus `d - 1` direct edges into `t`; `len` hops from `a` to `t`.
    TypeBChain,
    /// Type-A recovery through type-B relays and a relayed η share.
    PartialMix,
    /// A fully-connected node fed only by `k` single-edge relays.
    Overloaded,
}

impl CanonicalKind {
    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "fig1" => CanonicalKind::Fig1,
            "fig2" => CanonicalKind::Fig2,
            "fig2_multi" => CanonicalKind::Fig2Multi,
            "type_b_chain" => CanonicalKind::TypeBChain,
            "partial_mix" => CanonicalKind::PartialMix,
            "overloaded" => CanonicalKind::Overloaded,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalParams {
    pub d: usize,
    pub q: u32,
    pub ell: usize,
    pub x: usize,
    pub sources: usize,
    pub len: usize,
    pub k: usize,
}

impl Default for CanonicalParams {
    fn default() -> Self {
        CanonicalParams { d: 2, q: 13, ell: 1, x: 0, sources: 2, len: 2, k: 3 }
    }
}

impl CanonicalParams {
    pub fn d(d: usize) -> Self {
        CanonicalParams { d, ..Self::default() }
    }
    pub fn q(mut self, q: u32) -> Self {
        self.q = q;
        self
    }
    pub fn ell(mut self, ell: usize) -> Self {
        self.ell = ell;
        self
    }
}

fn bad(msg: impl Into<String>) -> IoError {
    IoError::BadParams(msg.into())
}

pub fn generate_canonical(kind: CanonicalKind, p: CanonicalParams) -> Result<NetworkInstance, IoError> {
    let field = Field::new(p.q).map_err(|e| bad(e.to_string()))?;
    let d = p.d;
    let b = InstanceBuilder::new(field);
    let inst = match kind {
        CanonicalKind::Fig1 => b
            .source("s1")
            .source("s2")
            .node("u1")
            .node("u2")
            .terminal("t1", 1)
            .terminal("t2", 1)
            .edge("s1", "u1")
            .edge("s2", "u2")
            .edge("u1", "t1")
            .edge("u1", "t2")
            .edge("u2", "t1")
            .edge("u2", "t2")
            .adversary(1, 0)
            .eaves(&["s1"])
            .eaves(&["s2"]),
        CanonicalKind::Fig2 => {
            if d == 0 {
                return Err(bad("fig2 needs d >= 1"));
            }
            let mut b = b.source("s");
            for i in 1..=d {
                b = b.node(&format!("v{i}"));
            }
            b = b.terminal("t", 1);
            for i in 1..=d {
                b = b.edges_x("s", &format!("v{i}"), d);
            }
            for i in 1..=d {
                b = b.edge(&format!("v{i}"), "t");
            }
            b.adversary(p.ell, 0)
        }
        CanonicalKind::Fig2Multi => {
            if d == 0 || p.sources == 0 || p.x >= p.sources {
                return Err(bad("fig2_multi needs d >= 1 and x < sources"));
            }
            let mut b = b;
            for j in 1..=p.sources {
                b = b.source(&format!("s{j}"));
            }
            for i in 1..=d {
                b = b.node(&format!("v{i}"));
            }
            b = b.terminal("t", 1);
            for j in 1..=p.sources {
                for i in 1..=d {
                    b = b.edges_x(&format!("s{j}"), &format!("v{i}"), d);
                }
            }
            for i in 1..=d {
                b = b.edge(&format!("v{i}"), "t");
            }
            b.adversary(p.ell, p.x)
        }
        CanonicalKind::TypeBChain => {
            if d < 2 || p.len < 1 {
                return Err(bad("type_b_chain needs d >= 2 and len >= 1"));
            }
            let mut b = b.source("s").node("a");
            let chain: Vec<String> = (1..p.len).map(|i| format!("b{i}")).collect();
            for c in &chain {
                b = b.node(c);
            }
            b = b.terminal("t", 1).edges_x("s", "a", d);
            let mut prev = "a".to_string();
            for c in &chain {
                b = b.edge(&prev, c);
                prev = c.clone();
            }
            b.edge(&prev, "t").edges_x("s", "t", d - 1).adversary(p.ell, 0)
        }
        CanonicalKind::PartialMix => {
            if d < 3 {
                return Err(bad("partial_mix needs d >= 3"));
            }
            let fs: Vec<String> = (1..=d).map(|i| format!("f{i}")).collect();
            let mut b = b.source("s");
            for f in &fs {
                b = b.node(f);
            }
            b = b.node("a").node("b1").node("b2").node("b3").node("c").node("g").terminal("t", 1);
            for f in &fs {
                b = b.edges_x("s", f, d);
            }
            b = b
                .edge("s", "a")
                .edge("f1", "b1")
                .edge("f1", "b2")
                .edge("b1", "b2")
                .edge("a", "b2")
                .edge("b1", "b3")
                .edge("b2", "b3")
                .edge("b2", "c");
            for f in &fs[2..] {
                b = b.edge(f, "c");
            }
            b.edges_x("s", "g", d - 1)
                .edge("b1", "g")
                .edges_x("s", "t", d - 3)
                .edge("g", "t")
                .edge("f2", "t")
                .edge("c", "t")
                .adversary(p.ell, 0)
        }
        CanonicalKind::Overloaded => {
            if d < 2 || p.k < 1 {
                return Err(bad("overloaded needs d >= 2 and k >= 1"));
            }
            let mut b = b.source("s");
            for i in 1..=p.k {
                b = b.node(&format!("a{i}"));
            }
            b = b.node("j").node("f").terminal("t", 1);
            for i in 1..=p.k {
                b = b.edge("s", &format!("a{i}")).edge(&format!("a{i}"), "j");
            }
            b.edges_x("s", "f", d).edge("f", "t").edges_x("s", "t", d - 2).edge("j", "t").adversary(p.ell, 0)
        }
    };
    Ok(inst.build()?)
}

const MAX_ATTEMPTS: usize = 64;

/// Random layered DAG with one source and one terminal. Intermediate nodes
/// are partially connected with probability `partial_fraction`; all others
/// get `d_target` inputs from the source or from earlier fully-connected
/// nodes, which makes them `d_target`-connected.
pub fn generate_random(
    seed: u64,
    node_count: usize,
    d_target: usize,
    partial_fraction: f64,
) -> Result<NetworkInstance, IoError> {
    if d_target == 0 || node_count < d_target + 2 {
        return Err(bad(format!("need node_count >= d + 2 and d >= 1, got n = {node_count}, d = {d_target}")));
    }
    if !(0.0..=1.0).contains(&partial_fraction) {
        return Err(bad("partial_fraction must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = Field::new(13).expect("prime");
    let mut last = String::new();
    for _ in 0..MAX_ATTEMPTS {
        let mids = node_count - 2;
        let names: Vec<String> = std::iter::once("s".to_string())
            .chain((1..=mids).map(|i| format!("v{i}")))
            .chain(std::iter::once("t".to_string()))
            .collect();
        let mut b = InstanceBuilder::new(field).source("s");
        for n in &names[1..=mids] {
            b = b.node(n);
        }
        b = b.terminal("t", 1);
        let mut full: Vec<usize> = Vec::new();
        let mut partial: Vec<usize> = Vec::new();
        for v in 1..=node_count - 1 {
            let is_t = v == node_count - 1;
            let make_partial = !is_t && d_target > 1 && rng.gen_bool(partial_fraction);
            let mut inputs: Vec<(usize, usize)> = Vec::new();
            if make_partial {
                // at most d - 1 inputs in total keeps the node partially connected
                let budget = rng.gen_range(1..d_target);
                let mut pool: Vec<usize> = full.iter().chain(&partial).copied().collect();
                pool.shuffle(&mut rng);
                let from_pool = rng.gen_range(0..=budget.min(pool.len()));
                if budget > from_pool {
                    inputs.push((0, budget - from_pool));
                }
                for &u in &pool[..from_pool] {
                    inputs.push((u, 1));
                }
                partial.push(v);
            } else {
                let mut pool = full.clone();
                pool.shuffle(&mut rng);
                let direct = rng.gen_range(0..=d_target).max(d_target.saturating_sub(pool.len()));
                if direct > 0 {
                    inputs.push((0, direct));
                }
                for &u in pool.iter().take(d_target - direct) {
                    inputs.push((u, 1));
                }
                if !partial.is_empty() && rng.gen_bool(partial_fraction) {
                    let u = *partial.choose(&mut rng).expect("non-empty");
                    inputs.push((u, 1));
                }
                if !is_t {
                    full.push(v);
                }
            }
            inputs.sort();
            for (u, k) in inputs {
                b = b.edges_x(&names[u], &names[v], k);
            }
        }
        let inst = b.adversary(1.min(d_target - 1), 0).build_unchecked();
        if let Err(v) = validate_instance(&inst) {
            last = v.iter().map(|x| x.message.clone()).collect::<Vec<_>>().join("; ");
            continue;
        }
        let t = node_count - 1;
        let c = max_flow(&inst, 0, t, &[]);
        if c >= d_target {
            return Ok(inst);
        }
        last = format!("terminal connectivity {c} below {d_target}");
    }
    Err(IoError::GenerationFailed { attempts: MAX_ATTEMPTS, reason: last })
}
