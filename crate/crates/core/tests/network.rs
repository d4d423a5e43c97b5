use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use keycast::io::{emit_instance, generate_canonical, generate_random, parse_instance, CanonicalKind, CanonicalParams};
use keycast::network::{
    classify_nodes, default_d, disjoint_paths, max_flow, validate_instance, vertex_connectivity, NetworkInstance,
};

fn random_instance() -> impl Strategy<Value = NetworkInstance> {
    (any::<u64>(), 4usize..=10, 1usize..=3, 0.0f64..0.6).prop_filter_map("generation failed", |(seed, n, d, frac)| {
        generate_random(seed, n.max(d + 2), d, frac).ok()
    })
}

fn classes_by_name(inst: &NetworkInstance, d: usize) -> BTreeMap<(String, String), (usize, &'static str)> {
    let prof = classify_nodes(inst, d).unwrap();
    let mut out = BTreeMap::new();
    for p in &prof.per_source {
        for v in 0..inst.node_count() {
            out.insert(
                (inst.name(p.source).to_string(), inst.name(v).to_string()),
                (p.connectivity[v], p.class[v].label()),
            );
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_validate(inst in random_instance()) {
        prop_assert!(validate_instance(&inst).is_ok());
        prop_assert!(inst.topological_order().is_ok());
    }

    #[test]
    fn emit_parse_round_trip(inst in random_instance()) {
        let text = emit_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(emit_instance(&back), text);
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn classification_ignores_node_order(inst in random_instance(), seed in any::<u64>()) {
        let n = inst.node_count();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let moved = inst.permuted(&perm);
        let d = default_d(&inst);
        prop_assert_eq!(default_d(&moved), d);
        prop_assert_eq!(classes_by_name(&inst, d), classes_by_name(&moved, d));
        let (a, b) = (classify_nodes(&inst, d).unwrap(), classify_nodes(&moved, d).unwrap());
        prop_assert_eq!((a.z_observed, a.z, a.d_hat), (b.z_observed, b.z, b.d_hat));
    }

    #[test]
    fn flow_paths_are_disjoint(inst in random_instance()) {
        let s = inst.sources()[0];
        for v in 0..inst.node_count() {
            if v == s {
                continue;
            }
            let paths = disjoint_paths(&inst, s, v, &vec![false; inst.node_count()]);
            prop_assert_eq!(paths.len(), vertex_connectivity(&inst, s, v).unwrap());
            let mut edges = BTreeSet::new();
            let mut inner = BTreeSet::new();
            for p in &paths {
                prop_assert_eq!(p.nodes.first(), Some(&s));
                prop_assert_eq!(p.nodes.last(), Some(&v));
                for (k, &e) in p.edges.iter().enumerate() {
                    prop_assert_eq!(inst.edges()[e], (p.nodes[k], p.nodes[k + 1]));
                    prop_assert!(edges.insert(e));
                }
                for &u in p.internal() {
                    prop_assert!(inner.insert(u));
                }
            }
        }
    }

    #[test]
    fn removing_a_node_costs_at_most_one_path(inst in random_instance(), pick in any::<prop::sample::Index>()) {
        let s = inst.sources()[0];
        let t = inst.node_count() - 1;
        let candidates: Vec<usize> = (0..inst.node_count()).filter(|&v| v != s && v != t).collect();
        let u = candidates[pick.index(candidates.len())];
        let mut removed = vec![false; inst.node_count()];
        let before = max_flow(&inst, s, t, &removed);
        removed[u] = true;
        let after = max_flow(&inst, s, t, &removed);
        prop_assert!(after + 1 >= before && after <= before);
    }
}

#[test]
fn fig2_nodes_are_d_connected() {
    for d in 1..=5 {
        let inst = generate_canonical(CanonicalKind::Fig2, CanonicalParams::d(d)).unwrap();
        let s = inst.node_id("s").unwrap();
        for v in (0..inst.node_count()).filter(|&v| v != s) {
            assert_eq!(vertex_connectivity(&inst, s, v).unwrap(), d, "d = {d}, node {}", inst.name(v));
        }
    }
}

#[test]
fn random_generation_is_deterministic() {
    let a = generate_random(2, 10, 3, 0.3).unwrap();
    let b = generate_random(2, 10, 3, 0.3).unwrap();
    assert_eq!(a, b);
    let prof = classify_nodes(&a, 3).unwrap();
    assert!(prof.z <= prof.z_observed);
    assert!(prof.overloaded.iter().all(|&(_, p)| p >= 1));
}

#[test]
fn under_connected_terminals_are_rejected() {
    let inst = generate_canonical(CanonicalKind::Fig2, CanonicalParams::d(2)).unwrap();
    let err = classify_nodes(&inst, 3).unwrap_err();
    assert!(err.to_string().contains("terminal `t` has connectivity 2 from `s`, 3 required"), "{err}");
}
