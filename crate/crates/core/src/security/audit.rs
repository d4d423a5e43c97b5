use std::collections::{BTreeSet, HashMap};

use crate::field::RandomSource;
use crate::field::SplitSeed;
use crate::io::fingerprint;
use crate::network::{NetworkInstance, NodeId};
use crate::protocol::{CompiledScheme, SchemeError};

use super::enumerate::{par_enumerate, state_count};
use super::mi::{mi_from_cells, MutualInformation};
use super::SecurityError;

pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditOptions {
    pub budget: u128,
    /// Overrides the instance's adversary parameters.
    pub ell: Option<usize>,
    pub x: Option<usize>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { budget: DEFAULT_BUDGET, ell: None, x: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditEntry {
    pub set: usize,
    pub beta: Vec<NodeId>,
    pub beta_label: String,
    pub mi: MutualInformation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecurityReport {
    pub scheme: String,
    pub instance: String,
    pub q: u32,
    pub coordinates: usize,
    pub states: u128,
    pub key_len: usize,
    pub entries: Vec<AuditEntry>,
    pub key_uniform: Vec<bool>,
}

impl SecurityReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.mi.is_zero) && self.key_uniform.iter().all(|&u| u)
    }

    pub fn leaks(&self) -> Vec<&AuditEntry> {
        self.entries.iter().filter(|e| !e.mi.is_zero).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("audit: scheme {}, instance {}\n", self.scheme, &self.instance[..16.min(self.instance.len())]);
        out.push_str(&format!(
            "randomness states: {} (q = {}, {} coordinates)\n",
            self.states, self.q, self.coordinates
        ));
        for e in &self.entries {
            if e.mi.is_zero {
                out.push_str(&format!("T{} {}: MI = 0 (exact)\n", e.set + 1, e.beta_label));
            } else {
                out.push_str(&format!(
                    "T{} {}: MI = {:.4} bits = {} LEAK\n",
                    e.set + 1,
                    e.beta_label,
                    e.mi.value_bits,
                    e.mi.expression
                ));
            }
        }
        for (i, &u) in self.key_uniform.iter().enumerate() {
            let verdict = if u { "uniform" } else { "NOT uniform" };
            out.push_str(&format!("T{} key: {verdict} over F_{}^{}\n", i + 1, self.q, self.key_len));
        }
        let leaks = self.leaks().len();
        if leaks == 0 {
            out.push_str(&format!("all {} eavesdropper sets: MI = 0 (exact)\n", self.entries.len()));
        } else {
            out.push_str(&format!("LEAK: {leaks} of {} eavesdropper sets reveal key information\n", self.entries.len()));
        }
        out
    }

    /// Columns: scheme, terminal_set, beta, states, is_zero, mi_bits.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scheme", "terminal_set", "beta", "states", "is_zero", "mi_bits"]).expect("in-memory write");
        for e in &self.entries {
            w.write_record([
                self.scheme.clone(),
                (e.set + 1).to_string(),
                e.beta_label.clone(),
                self.states.to_string(),
                e.mi.is_zero.to_string(),
                format!("{:.6}", e.mi.value_bits),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

fn label(inst: &NetworkInstance, beta: &[NodeId]) -> String {
    let names: Vec<&str> = beta.iter().map(|&v| inst.name(v)).collect();
    format!("{{{}}}", names.join(","))
}

fn subsets_up_to(pool: &[NodeId], k: usize) -> Vec<Vec<NodeId>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![(Vec::new(), 0usize)];
    for _ in 0..k {
        let mut next = Vec::new();
        for (set, from) in &frontier {
            for (i, &v) in pool.iter().enumerate().skip(*from) {
                let mut s: Vec<NodeId> = set.clone();
                s.push(v);
                out.push(s.clone());
                next.push((s, i + 1));
            }
        }
        frontier = next;
    }
    out
}

/// Every β with `|β \ S| ≤ ell`, `|β ∩ S| ≤ x` and `β ∩ T_set = ∅`, plus the
/// explicit sets disjoint from `T_set`; ordered by size then node ids.
pub fn admissible_sets(inst: &NetworkInstance, set: usize, ell: usize, x: usize) -> Vec<Vec<NodeId>> {
    let in_set = |v: NodeId| inst.terminal_set_of(v) == Some(set);
    let others: Vec<NodeId> = (0..inst.node_count()).filter(|&v| !inst.is_source(v) && !in_set(v)).collect();
    let sources = inst.sources();
    let mut all: BTreeSet<(usize, Vec<NodeId>)> = BTreeSet::new();
    for a in subsets_up_to(&others, ell) {
        for b in subsets_up_to(&sources, x) {
            let mut s: Vec<NodeId> = a.iter().chain(&b).copied().collect();
            s.sort();
            all.insert((s.len(), s));
        }
    }
    for e in inst.explicit_eaves() {
        if e.iter().all(|&v| !in_set(v)) {
            let mut s = e.clone();
            s.sort();
            s.dedup();
            all.insert((s.len(), s));
        }
    }
    all.into_iter().map(|(_, s)| s).collect()
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Packed {
    Small(u128),
    Wide(Vec<u32>),
}

fn pack(q: u32, digits: &[u32]) -> Packed {
    let bits = (q as f64).log2() * digits.len() as f64;
    if bits < 127.0 {
        Packed::Small(digits.iter().fold(0u128, |a, &x| a * q as u128 + x as u128))
    } else {
        Packed::Wide(digits.to_vec())
    }
}

/// What an eavesdropper set sees: symbols on incident edges and the full
/// randomness of eavesdropped sources.
struct View {
    set: usize,
    edges: Vec<usize>,
    sources: Vec<usize>,
}

fn view(inst: &NetworkInstance, plan_sources: &[NodeId], set: usize, beta: &[NodeId]) -> View {
    let edges = inst
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, (a, b))| beta.contains(a) || beta.contains(b))
        .map(|(e, _)| e)
        .collect();
    let sources = plan_sources.iter().enumerate().filter(|(_, s)| beta.contains(s)).map(|(i, _)| i).collect();
    View { set, edges, sources }
}

type Tally = Vec<HashMap<(Packed, Packed), u64>>;

fn required_states(scheme: &CompiledScheme) -> (usize, Option<u128>) {
    let n: usize = scheme.coord_counts().iter().sum();
    (n, state_count(scheme.field().q(), n))
}

/// Exhaustive audit over the whole randomness space of `scheme`.
pub fn audit_scheme(scheme: &CompiledScheme, opts: &AuditOptions) -> Result<SecurityReport, SecurityError> {
    let inst = scheme.instance();
    let q = scheme.field().q();
    let (n, states) = required_states(scheme);
    match states {
        Some(s) if s <= opts.budget => {}
        _ => return Err(SecurityError::BudgetExceeded { required: states, allowed: opts.budget }),
    }
    let states = states.expect("checked");
    let ell = opts.ell.unwrap_or(inst.ell());
    let x = opts.x.unwrap_or(inst.max_eavesdropped_sources());
    let plan_sources = scheme.sources();
    let mut entries_meta = Vec::new();
    let mut views = Vec::new();
    for set in 0..inst.terminal_set_count() {
        for beta in admissible_sets(inst, set, ell, x) {
            views.push(view(inst, &plan_sources, set, &beta));
            entries_meta.push((set, beta));
        }
    }
    let counts = scheme.coord_counts();
    let offsets: Vec<usize> = counts
        .iter()
        .scan(0, |acc, &c| {
            let o = *acc;
            *acc += c;
            Some(o)
        })
        .collect();
    let init = || -> (Tally, bool) { (vec![HashMap::new(); views.len()], true) };
    let (tally, agree) = par_enumerate(
        q,
        n,
        init,
        |(tally, agree), digits| {
            let coords: Vec<Vec<u32>> =
                offsets.iter().zip(&counts).map(|(&o, &c)| digits[o..o + c].to_vec()).collect();
            let ev = scheme.evaluate(&coords);
            *agree &= ev.agree;
            let mut obs = Vec::new();
            for (k, v) in views.iter().enumerate() {
                obs.clear();
                for &e in &v.edges {
                    obs.extend_from_slice(&ev.edges[e]);
                }
                for &s in &v.sources {
                    obs.extend_from_slice(&coords[s]);
                }
                let cell = (pack(q, &ev.keys[v.set]), pack(q, &obs));
                *tally[k].entry(cell).or_insert(0) += 1;
            }
        },
        |(mut a, fa), (b, fb)| {
            for (ma, mb) in a.iter_mut().zip(b) {
                for (k, c) in mb {
                    *ma.entry(k).or_insert(0) += c;
                }
            }
            (a, fa && fb)
        },
    );
    if !agree {
        return Err(SecurityError::Scheme(SchemeError::KeyDisagreement { set: 0 }));
    }
    let key_space = state_count(q, scheme.key_len);
    let mut key_uniform = vec![false; inst.terminal_set_count()];
    let mut entries = Vec::new();
    for (k, ((set, beta), cells)) in entries_meta.into_iter().zip(tally).enumerate() {
        if views[k].edges.is_empty() && views[k].sources.is_empty() {
            let mut marg: HashMap<&Packed, u64> = HashMap::new();
            for ((key, _), c) in &cells {
                *marg.entry(key).or_insert(0) += c;
            }
            let first = marg.values().next().copied();
            key_uniform[set] =
                Some(marg.len() as u128) == key_space && marg.values().all(|&c| Some(c) == first);
        }
        let mi = mi_from_cells(cells.into_iter().map(|((a, b), c)| (a, b, c)));
        entries.push(AuditEntry { set, beta_label: label(inst, &beta), beta, mi });
    }
    Ok(SecurityReport {
        scheme: scheme.kind.name().to_string(),
        instance: fingerprint(inst),
        q,
        coordinates: n,
        states,
        key_len: scheme.key_len,
        entries,
        key_uniform,
    })
}

/// Sampled plug-in estimates. Advisory output only; never a verdict.
pub fn monte_carlo_advisory(scheme: &CompiledScheme, samples: usize, seed: u64, opts: &AuditOptions) -> String {
    let inst = scheme.instance();
    let f = scheme.field();
    let ell = opts.ell.unwrap_or(inst.ell());
    let x = opts.x.unwrap_or(inst.max_eavesdropped_sources());
    let plan_sources = scheme.sources();
    let counts = scheme.coord_counts();
    let mut metas = Vec::new();
    for set in 0..inst.terminal_set_count() {
        for beta in admissible_sets(inst, set, ell, x) {
            metas.push((view(inst, &plan_sources, set, &beta), label(inst, &beta)));
        }
    }
    let mut tally: Tally = vec![HashMap::new(); metas.len()];
    let mut rng = SplitSeed(seed).stream(u64::MAX);
    for _ in 0..samples {
        let coords: Vec<Vec<u32>> = counts.iter().map(|&c| (0..c).map(|_| rng.draw(f)).collect()).collect();
        let ev = scheme.evaluate(&coords);
        for (k, (v, _)) in metas.iter().enumerate() {
            let mut obs = Vec::new();
            for &e in &v.edges {
                obs.extend_from_slice(&ev.edges[e]);
            }
            for &s in &v.sources {
                obs.extend_from_slice(&coords[s]);
            }
            *tally[k].entry((pack(f.q(), &ev.keys[v.set]), pack(f.q(), &obs))).or_insert(0) += 1;
        }
    }
    let mut out = format!("advisory only, not a verdict: {samples} sampled executions\n");
    for ((v, lbl), cells) in metas.iter().zip(tally) {
        let mi = mi_from_cells(cells.into_iter().map(|((a, b), c)| (a, b, c)));
        out.push_str(&format!("T{} {}: plug-in MI estimate {:.4} bits\n", v.set + 1, lbl, mi.value_bits));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{generate_canonical, CanonicalKind, CanonicalParams};
    use crate::protocol::{compile, SchemeKind, SchemeParams};

    #[test]
    fn fig2_two_relays_is_secure() {
        let inst = generate_canonical(CanonicalKind::Fig2, CanonicalParams::d(2).q(3)).unwrap();
        let s = compile(&inst, SchemeKind::Full, SchemeParams::default()).unwrap();
        let r = audit_scheme(&s, &AuditOptions::default()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert!(r.to_text().contains("all 3 eavesdropper sets: MI = 0 (exact)"), "{}", r.to_text());
    }

    #[test]
    fn fig1_needs_source_keys_hidden() {
        let inst = generate_canonical(CanonicalKind::Fig1, CanonicalParams::default().q(5)).unwrap();
        let params = SchemeParams::default().with_d(1).with_ell(0);
        let good = compile(&inst, SchemeKind::Multisource, params.with_x(1)).unwrap();
        let r = audit_scheme(&good, &AuditOptions::default()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        let bad = compile(&inst, SchemeKind::Multisource, params.with_x(0)).unwrap();
        let r = audit_scheme(&bad, &AuditOptions::default()).unwrap();
        assert!(!r.passed());
        assert!(r.to_text().contains("LEAK"));
    }
}
