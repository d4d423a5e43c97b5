//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Every comparison is exact; the only tolerances are the
//! wall-clock limits below.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use keycast::field::Field;
use keycast::io::{generate_canonical, minimal_admissible_q, CanonicalKind, CanonicalParams};
use keycast::network::{classify_source, vertex_connectivity, InstanceBuilder, NetworkInstance, NodeClass};
use keycast::protocol::{compile, run_full_keycast, run_partial_keycast, SchemeKind, SchemeParams, SchemeResult};
use keycast::security::{
    audit_scheme, converse_check, product_uniform_dims, verify_matrix_lemma, verify_shamir, AuditOptions, Lemma,
    DEFAULT_BUDGET,
};

/// Exact comparisons only.
const RATE_TOLERANCE: Ratio<u64> = Ratio::new_raw(0, 1);
const MI_TOLERANCE_BITS: f64 = 0.0;
const PRODUCT_MAX_STATES: u128 = 1_000_000;
const RANDOM_INSTANCES: usize = 200;
const RANDOM_MAX_NODES: usize = 8;
const SEED: u64 = 7;

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(kind: CanonicalKind, p: CanonicalParams) -> Result<NetworkInstance, String> {
    generate_canonical(kind, p).map_err(|e| e.to_string())
}

fn audit_clean(scheme: &keycast::protocol::CompiledScheme) -> Result<(usize, u128), String> {
    let r = audit_scheme(scheme, &AuditOptions::default()).map_err(|e| e.to_string())?;
    let worst = r.entries.iter().map(|e| e.mi.value_bits).fold(0.0, f64::max);
    ensure(r.passed() && worst <= MI_TOLERANCE_BITS, || format!("audit failed:\n{}", r.to_text()))?;
    Ok((r.entries.len(), r.states))
}

fn c1_full_rate() -> Outcome {
    let mut runs = 0;
    for d in 2..=4 {
        for ell in 1..d {
            let inst = fixture(CanonicalKind::Fig2, CanonicalParams::d(d).q(13).ell(ell))?;
            let r = run_full_keycast(&inst, d, ell, SEED).map_err(|e| e.to_string())?;
            let want = Ratio::from_integer((d - ell) as u64);
            let gap = if r.achieved > want { r.achieved - want } else { want - r.achieved };
            ensure(gap <= RATE_TOLERANCE, || format!("d={d} ell={ell}: achieved {} want {want}", r.achieved))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} (d, ell) pairs, achieved = d - ell exactly"))
}

fn c2_full_secrecy() -> Outcome {
    let mut parts = Vec::new();
    for (d, q, states) in [(2, 3, 27u128), (3, 2, 64)] {
        let inst = fixture(CanonicalKind::Fig2, CanonicalParams::d(d).q(q).ell(1))?;
        let s = compile(&inst, SchemeKind::Full, SchemeParams::default().with_ell(1)).map_err(|e| e.to_string())?;
        let (sets, got) = audit_clean(&s)?;
        ensure(got == states, || format!("fig2({d}) q={q}: {got} states, expected {states}"))?;
        parts.push(format!("fig2({d}) q={q}: {sets} sets over {got} states"));
    }
    Ok(parts.join("; "))
}

fn c3_converse() -> Outcome {
    let mut checked = 0;
    for d in 2..=3 {
        for q in [2u32, 3] {
            for ell in 1..d {
                let inst = fixture(CanonicalKind::Fig2, CanonicalParams::d(d).q(q).ell(ell))?;
                let s = compile(&inst, SchemeKind::Full, SchemeParams::default().with_ell(ell)).map_err(|e| e.to_string())?;
                let r = converse_check(d, ell, q, &s, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
                ensure(r.blocklength == 1 && r.tight && r.within_bound, || {
                    format!("d={d} q={q} ell={ell}: support {} of {}, uniform {}", r.support, r.bound, r.uniform)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} cases: key uniform on q^((d-ell)n) values with n = 1"))
}

fn c4_lemmas() -> Outcome {
    let mut count = 0;
    let cases = [
        (Lemma::BlockForm { d: 2, ell: 1 }, 2),
        (Lemma::BlockForm { d: 2, ell: 1 }, 3),
        (Lemma::BlockForm { d: 3, ell: 1 }, 2),
        (Lemma::ProjectionSecrecy { d: 2, ell: 1 }, 3),
        (Lemma::ProjectionSecrecy { d: 3, ell: 1 }, 2),
    ];
    for (lemma, q) in cases {
        let r = verify_matrix_lemma(lemma, q, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        ensure(r.passed, || format!("{lemma:?} q={q}: {}", r.detail))?;
        count += 1;
    }
    let mut dims = 0;
    for q in [2u32, 3] {
        for (rows, inner, cols) in product_uniform_dims(q, PRODUCT_MAX_STATES) {
            let r = verify_matrix_lemma(Lemma::ProductUniform { rows, inner, cols }, q, PRODUCT_MAX_STATES).map_err(|e| e.to_string())?;
            ensure(r.passed, || format!("product {rows}x{inner}x{cols} q={q}: {}", r.detail))?;
            dims += 1;
        }
    }
    Ok(format!("{count} matrix cases, {dims} product-uniformity shapes"))
}

fn c5_shamir() -> Outcome {
    let mut n = 0;
    for d in 2..=3 {
        for ell in 1..d {
            for q in [5u32, 7] {
                let r = verify_shamir(d, ell, q, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
                ensure(r.passed, || format!("d={d} ell={ell} q={q}: {r:?}"))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} (d, ell, q) cases: exact reconstruction, any ell shares uniform"))
}

fn c6_multisource() -> Outcome {
    let p = CanonicalParams { d: 2, q: 2, ell: 1, x: 1, sources: 2, ..CanonicalParams::default() };
    let inst = fixture(CanonicalKind::Fig2Multi, p)?;
    let s = compile(&inst, SchemeKind::Multisource, SchemeParams::default().with_ell(1).with_x(1))
        .map_err(|e| e.to_string())?;
    let r = s.run(SEED).map_err(|e| e.to_string())?;
    ensure(r.achieved == Ratio::new(1, 2), || format!("achieved {}", r.achieved))?;
    let report = audit_scheme(&s, &AuditOptions::default()).map_err(|e| e.to_string())?;
    ensure(report.states == 64, || format!("{} states", report.states))?;
    let mixed = report
        .entries
        .iter()
        .filter(|e| e.beta.iter().any(|&v| inst.is_source(v)) && e.beta.iter().any(|&v| !inst.is_source(v)))
        .count();
    ensure(mixed > 0, || "no source-plus-node set audited".into())?;
    ensure(report.passed(), || report.to_text())?;
    Ok(format!("rate 1/2, {} sets ({mixed} source + node) over 64 states", report.entries.len()))
}

/// Checks the three path-index properties and type-B forwarding on one run.
fn claim_one(inst: &NetworkInstance, d: usize, r: &SchemeResult) -> Result<usize, String> {
    let share = |src, node| r.transcript.shares.iter().find(|s| s.source == src && s.node == node);
    for s in inst.sources() {
        let prof = classify_source(inst, s, d).map_err(|e| e.to_string())?;
        let records: Vec<_> = r.eta_records.iter().filter(|e| e.source == s).collect();
        for rec in &records {
            let partial_parents: BTreeSet<_> =
                inst.parents(rec.node).into_iter().filter(|&p| prof.class[p].is_partial()).collect();
            let same_node: Vec<_> = records.iter().filter(|o| o.node == rec.node).map(|o| o.eta).collect();
            let distinct: BTreeSet<_> = same_node.iter().collect();
            ensure(distinct.len() == same_node.len(), || format!("repeated eta at {}", inst.name(rec.node)))?;
            ensure(!partial_parents.contains(&rec.eta), || format!("eta {} is a partial parent", inst.name(rec.eta)))?;
            let held = share(s, rec.via).and_then(|sh| sh.held.get(&rec.eta).cloned());
            let own = share(s, rec.eta).and_then(|sh| sh.r.clone());
            ensure(held.is_some() && held == own, || {
                format!("{} does not hold the share of {}", inst.name(rec.via), inst.name(rec.eta))
            })?;
        }
        for &(a, b) in inst.edges() {
            if prof.class[a] == NodeClass::TypeB && prof.class[b] == NodeClass::TypeB {
                let ha: BTreeSet<_> = share(s, a).map(|x| x.held.keys().copied().collect()).unwrap_or_default();
                let hb: BTreeSet<_> = share(s, b).map(|x| x.held.keys().copied().collect()).unwrap_or_default();
                ensure(ha.is_subset(&hb), || format!("{} -> {} loses held shares", inst.name(a), inst.name(b)))?;
            }
        }
    }
    Ok(r.eta_records.len())
}

fn c7_partial() -> Outcome {
    let mut parts = Vec::new();
    for (name, kind) in [("type_b_chain", CanonicalKind::TypeBChain), ("partial_mix", CanonicalKind::PartialMix)] {
        let base = fixture(kind, CanonicalParams::d(3).ell(1))?;
        let params = SchemeParams::default().with_d(3).with_ell(1);
        let q = minimal_admissible_q(&base, SchemeKind::Partial, params, 101).map_err(|e| e.to_string())?;
        let inst = fixture(kind, CanonicalParams::d(3).ell(1).q(q))?;
        let s = compile(&inst, SchemeKind::Partial, params).map_err(|e| e.to_string())?;
        ensure(s.kind == SchemeKind::Partial && s.params.z == 1, || format!("{name}: {} with z = {}", s.kind, s.params.z))?;
        let r = run_partial_keycast(&inst, 3, 1, SEED).map_err(|e| e.to_string())?;
        let bound = Ratio::new(3 - 1 - 1 + 1, (3 * (3 - r.params.d_hat) + 1) as u64);
        ensure(r.achieved >= bound, || format!("{name}: achieved {} below {bound}", r.achieved))?;
        let etas = claim_one(&inst, 3, &r)?;
        let (sets, states) = audit_clean(&s)?;
        parts.push(format!("{name} q={q}: rate {} >= {bound}, {etas} eta, {sets} sets / {states} states", r.achieved));
    }
    Ok(parts.join("; "))
}

fn c8_unstructured() -> Outcome {
    let mut same = 0;
    for kind in [CanonicalKind::TypeBChain, CanonicalKind::PartialMix] {
        let inst = fixture(kind, CanonicalParams::d(3).ell(1))?;
        let params = SchemeParams::default().with_d(3).with_ell(1);
        let a = compile(&inst, SchemeKind::Partial, params).and_then(|s| s.run(SEED)).map_err(|e| e.to_string())?;
        let b = compile(&inst, SchemeKind::Unstructured, params).and_then(|s| s.run(SEED)).map_err(|e| e.to_string())?;
        ensure(a.transcript.render(&inst) == b.transcript.render(&inst) && a.keys == b.keys, || {
            format!("{kind:?}: transcripts differ")
        })?;
        same += 1;
    }
    let p = CanonicalParams { d: 5, q: 7, ell: 3, k: 5, ..CanonicalParams::default() };
    let inst = fixture(CanonicalKind::Overloaded, p)?;
    let params = SchemeParams::default().with_ell(3);
    let s = compile(&inst, SchemeKind::Unstructured, params).map_err(|e| e.to_string())?;
    let j = inst.node_id("j").map_err(|e| e.to_string())?;
    let targets = s.batch_targets();
    ensure(targets.len() == 2 && targets.iter().all(|&t| t == j), || format!("batches {targets:?}"))?;
    let r = s.run(SEED).map_err(|e| e.to_string())?;
    // p(j) = 5 - z = 3 with z = 2, so the sum of ceil(p / (d - ell)) is 2
    let bound = Ratio::new((5 - 3 - r.params.z + 1) as u64, (5 * (5 - r.params.d_hat) + 2 + 1) as u64);
    ensure(r.params.z == 2 && r.achieved >= bound && r.formula == bound, || {
        format!("z = {}, achieved {}, formula {}, bound {bound}", r.params.z, r.achieved, r.formula)
    })?;
    Ok(format!("{same} fixtures identical without overload; overloaded: 2 batches, rate {} >= {bound}", r.achieved))
}

/// Largest family of `s`-`v` paths pairwise sharing no edge and no interior node.
fn brute_force_connectivity(inst: &NetworkInstance, s: usize, v: usize) -> usize {
    fn walk(inst: &NetworkInstance, u: usize, v: usize, edges: &mut Vec<usize>, nodes: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, Vec<usize>)>) {
        if u == v {
            out.push((edges.clone(), nodes.clone()));
            return;
        }
        for e in inst.out_edges(u) {
            let w = inst.edges()[e].1;
            if w != v {
                if inst.is_source(w) || nodes.contains(&w) {
                    continue;
                }
                nodes.push(w);
            }
            edges.push(e);
            walk(inst, w, v, edges, nodes, out);
            edges.pop();
            if w != v {
                nodes.pop();
            }
        }
    }
    fn best(paths: &[(Vec<usize>, Vec<usize>)], from: usize, used_e: &mut BTreeSet<usize>, used_n: &mut BTreeSet<usize>) -> usize {
        let mut top = 0;
        for i in from..paths.len() {
            let (es, ns) = &paths[i];
            if es.iter().any(|e| used_e.contains(e)) || ns.iter().any(|n| used_n.contains(n)) {
                continue;
            }
            used_e.extend(es);
            used_n.extend(ns);
            top = top.max(1 + best(paths, i + 1, used_e, used_n));
            for e in es {
                used_e.remove(e);
            }
            for n in ns {
                used_n.remove(n);
            }
        }
        top
    }
    let mut paths = Vec::new();
    walk(inst, s, v, &mut Vec::new(), &mut Vec::new(), &mut paths);
    best(&paths, 0, &mut BTreeSet::new(), &mut BTreeSet::new())
}

fn random_dag(rng: &mut ChaCha8Rng) -> NetworkInstance {
    let n = rng.gen_range(3..=RANDOM_MAX_NODES);
    let mut b = InstanceBuilder::new(Field::new(13).expect("prime")).source("n0");
    for i in 1..n {
        b = b.node(&format!("n{i}"));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.45) {
                b = b.edges_x(&format!("n{i}"), &format!("n{j}"), rng.gen_range(1..=2));
            }
        }
    }
    b.build_unchecked()
}

fn c9_connectivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut pairs = 0;
    for k in 0..RANDOM_INSTANCES {
        let inst = random_dag(&mut rng);
        for v in 1..inst.node_count() {
            let fast = vertex_connectivity(&inst, 0, v).map_err(|e| e.to_string())?;
            let slow = brute_force_connectivity(&inst, 0, v);
            ensure(fast == slow, || format!("instance {k}, node n{v}: flow {fast}, brute force {slow}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{RANDOM_INSTANCES} instances, {pairs} node pairs agree"))
}

fn c10_fig1() -> Outcome {
    let inst = fixture(CanonicalKind::Fig1, CanonicalParams::default().q(5))?;
    let params = SchemeParams::default().with_d(1).with_ell(0).with_x(1);
    let s = compile(&inst, SchemeKind::Multisource, params).map_err(|e| e.to_string())?;
    let report = audit_scheme(&s, &AuditOptions::default()).map_err(|e| e.to_string())?;
    let singles = report.entries.iter().filter(|e| e.beta.len() == 1).count();
    ensure(singles == 4, || format!("{singles} single-node sets"))?;
    ensure(report.passed(), || report.to_text())?;
    Ok(format!("{} sets for the shared terminal pair, every single non-terminal node: MI = 0", report.entries.len()))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 full-connectivity rate on fig2", c1_full_rate, secs(1)),
        ("2 full-connectivity secrecy by enumeration", c2_full_secrecy, secs(10)),
        ("3 converse equality", c3_converse, secs(10)),
        ("4 matrix lemma validators", c4_lemmas, secs(60)),
        ("5 masked-share (Shamir) secrecy", c5_shamir, secs(30)),
        ("6 multi-source rate and audit", c6_multisource, secs(10)),
        ("7 partial-connectivity structure", c7_partial, secs(300)),
        ("8 unstructured reduction and batches", c8_unstructured, secs(60)),
        ("9 connectivity oracle vs brute force", c9_connectivity, secs(60)),
        ("10 two-source two-terminal fixture audit", c10_fig1, secs(5)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let verdict = match (&outcome, took <= limit) {
            (Ok(detail), true) => format!("PASS {name}: {detail}"),
            (Ok(detail), false) => format!("FAIL {name}: {detail}; over the {limit:?} limit"),
            (Err(why), _) => format!("FAIL {name}: {why}"),
        };
        if !verdict.starts_with("PASS") {
            failed += 1;
        }
        println!("{verdict} [{:.3} s, limit {} s]", took.as_secs_f64(), limit.as_secs());
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
