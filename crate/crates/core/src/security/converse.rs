use std::collections::HashMap;

use crate::network::NetworkInstance;
use crate::protocol::CompiledScheme;

use super::enumerate::{par_enumerate, state_count};
use super::SecurityError;

#[derive(Debug, Clone, PartialEq)]
pub struct ConverseReport {
    pub d: usize,
    pub ell: usize,
    pub q: u32,
    pub blocklength: usize,
    /// Number of distinct key values.
    pub support: u128,
    /// `q^{(d - ell) n}`.
    pub bound: u128,
    pub uniform: bool,
    /// Diagnostic only.
    pub h_bits: f64,
    pub bound_bits: f64,
    pub within_bound: bool,
    pub tight: bool,
}

/// True when `inst` is a single source with `d` relays, each fed by `d`
/// parallel source edges and feeding one terminal with one edge.
pub fn is_fig2_family(inst: &NetworkInstance, d: usize) -> bool {
    let sources = inst.sources();
    let sets = inst.terminal_sets();
    if sources.len() != 1 || sets.len() != 1 || sets[0].len() != 1 || inst.node_count() != d + 2 {
        return false;
    }
    let (s, t) = (sources[0], sets[0][0]);
    if inst.edges().len() != d * d + d {
        return false;
    }
    let relays: Vec<_> = (0..inst.node_count()).filter(|&v| v != s && v != t).collect();
    relays.len() == d
        && relays.iter().all(|&v| {
            inst.edges_between(s, v).len() == d && inst.edges_between(v, t).len() == 1 && inst.in_edges(v).len() == d
        })
        && inst.in_edges(t).len() == d
}

/// Exhaustively computes the key distribution of a scheme on the `d`-relay
/// network and compares it with `q^{(d - ell) n}`.
pub fn converse_check(
    d: usize,
    ell: usize,
    q: u32,
    scheme: &CompiledScheme,
    budget: u128,
) -> Result<ConverseReport, SecurityError> {
    if ell >= d {
        return Err(SecurityError::Precondition(format!("need ell < d, got d = {d}, ell = {ell}")));
    }
    let inst = scheme.instance();
    if inst.q() != q || !is_fig2_family(inst, d) {
        return Err(SecurityError::Precondition(format!("instance is not the {d}-relay network over F_{q}")));
    }
    let counts = scheme.coord_counts();
    let n: usize = counts.iter().sum();
    let states = state_count(q, n);
    match states {
        Some(s) if s <= budget => {}
        _ => return Err(SecurityError::BudgetExceeded { required: states, allowed: budget }),
    }
    let offsets: Vec<usize> = counts.iter().scan(0, |a, &c| {
        let o = *a;
        *a += c;
        Some(o)
    }).collect();
    let hist = par_enumerate(
        q,
        n,
        HashMap::new,
        |h: &mut HashMap<Vec<u32>, u64>, digits| {
            let coords: Vec<Vec<u32>> = offsets.iter().zip(&counts).map(|(&o, &c)| digits[o..o + c].to_vec()).collect();
            let ev = scheme.evaluate(&coords);
            *h.entry(ev.keys[0].clone()).or_insert(0) += 1;
        },
        |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            a
        },
    );
    let total: u64 = hist.values().sum();
    let h_bits: f64 = hist
        .values()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum();
    let blocklength = scheme.blocklength();
    let exponent = (d - ell) * blocklength;
    let bound = state_count(q, exponent).unwrap_or(u128::MAX);
    let support = hist.len() as u128;
    let first = hist.values().next().copied().unwrap_or(0);
    let uniform = hist.values().all(|&c| c == first);
    let bound_bits = exponent as f64 * (q as f64).log2();
    Ok(ConverseReport {
        d,
        ell,
        q,
        blocklength,
        support,
        bound,
        uniform,
        h_bits,
        bound_bits,
        // a uniform key on at most `bound` values has entropy at most the bound
        within_bound: support <= bound,
        tight: uniform && support == bound,
    })
}
