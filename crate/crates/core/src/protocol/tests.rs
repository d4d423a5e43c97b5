use num_rational::Ratio;

use super::*;
use crate::field::ScriptedSource;
use crate::io::{generate_canonical, CanonicalKind, CanonicalParams};
use crate::network::NodeClass;

fn fig2(d: usize, q: u32) -> NetworkInstance {
    generate_canonical(CanonicalKind::Fig2, CanonicalParams::d(d).q(q)).unwrap()
}

#[test]
fn full_scheme_rate_on_fig2() {
    for d in 2..=4 {
        for ell in 1..d {
            let r = run_full_keycast(&fig2(d, 13), d, ell, 7).unwrap();
            assert_eq!(r.achieved, Ratio::from_integer((d - ell) as u64));
            assert_eq!(r.blocklength, 1);
            assert!(r.formula_met);
        }
    }
}

#[test]
fn full_scheme_on_small_fields() {
    let r = run_full_keycast(&fig2(3, 2), 3, 1, 1).unwrap();
    assert_eq!(r.key_len, 2);
    let r = run_full_keycast(&fig2(2, 3), 2, 1, 1).unwrap();
    assert_eq!(r.key_len, 1);
}

#[test]
fn chain_single_path() {
    let inst = crate::network::InstanceBuilder::new(Field::new(5).unwrap())
        .source("s")
        .terminal("t", 1)
        .edge("s", "t")
        .build()
        .unwrap();
    let r = run_full_keycast(&inst, 1, 0, 3).unwrap();
    assert_eq!(r.key_len, 1);
    assert_eq!(r.achieved, Ratio::from_integer(1));
}

#[test]
fn multisource_rate() {
    let p = CanonicalParams { d: 3, q: 13, ell: 1, x: 1, sources: 3, ..CanonicalParams::default() };
    let inst = generate_canonical(CanonicalKind::Fig2Multi, p).unwrap();
    let r = run_multisource_keycast(&inst, 3, 1, 1, 5).unwrap();
    assert_eq!(r.achieved, Ratio::new(4, 3));
    assert_eq!(r.blocklength, 3);
}

#[test]
fn multisource_single_source_matches_full() {
    let inst = fig2(3, 13);
    let a = run_multisource_keycast(&inst, 3, 1, 0, 9).unwrap();
    let b = run_full_keycast(&inst, 3, 1, 9).unwrap();
    assert_eq!(a.transcript.edges, b.transcript.edges);
    assert_eq!(a.keys, b.keys);
}

#[test]
fn partial_type_b_chain() {
    let inst = generate_canonical(CanonicalKind::TypeBChain, CanonicalParams::d(3).q(2)).unwrap();
    let c = compile(&inst, SchemeKind::Partial, SchemeParams::default()).unwrap();
    assert_eq!(c.kind, SchemeKind::Partial);
    assert_eq!(c.params.z, 1);
    let a = inst.node_id("a").unwrap();
    let t = inst.node_id("t").unwrap();
    let b = inst.node_id("b1").unwrap();
    assert_eq!(c.eta_records, vec![EtaRecord { source: 0, node: t, via: b, eta: a }]);
    for seed in 0..20 {
        let r = c.run(seed).unwrap();
        assert!(r.formula_met, "{} < {}", r.achieved, r.formula);
    }
}

#[test]
fn partial_mix_runs() {
    let inst = generate_canonical(CanonicalKind::PartialMix, CanonicalParams::d(3).q(2)).unwrap();
    let prof = crate::network::classify_source(&inst, 0, 3).unwrap();
    let c_id = inst.node_id("c").unwrap();
    assert_eq!(prof.class[c_id], NodeClass::TypeA);
    let c = compile(&inst, SchemeKind::Partial, SchemeParams::default()).unwrap();
    assert_eq!(c.params.z, 1);
    assert_eq!(c.params.d_hat, 1);
    for seed in 0..20 {
        let r = c.run(seed).unwrap();
        assert!(r.formula_met);
    }
}

#[test]
fn unstructured_batches() {
    let p = CanonicalParams { d: 5, q: 7, ell: 3, k: 5, ..CanonicalParams::default() };
    let inst = generate_canonical(CanonicalKind::Overloaded, p).unwrap();
    assert!(matches!(
        compile(&inst, SchemeKind::Partial, SchemeParams::default()),
        Err(SchemeError::StructuralConditionViolated { .. })
    ));
    let c = compile(&inst, SchemeKind::Unstructured, SchemeParams::default()).unwrap();
    assert_eq!(c.params.z, 2);
    assert_eq!(c.batch_count(), 2);
    let j = inst.node_id("j").unwrap();
    assert_eq!(c.batch_targets(), vec![j, j]);
    let r = c.run(4).unwrap();
    assert!(r.formula_met, "{} < {}", r.achieved, r.formula);
}

#[test]
fn unstructured_without_overload_matches_partial() {
    let inst = generate_canonical(CanonicalKind::PartialMix, CanonicalParams::d(3).q(2)).unwrap();
    let a = run_partial_keycast(&inst, 3, 1, 11).unwrap();
    let b = run_unstructured_keycast(&inst, 3, 1, 11).unwrap();
    assert_eq!(a.transcript.render(&inst), b.transcript.render(&inst));
}

#[test]
fn shamir_example() {
    let inst = fig2(2, 5);
    let s = inst.node_id("s").unwrap();
    let t = inst.node_id("t").unwrap();
    let mut masks = ScriptedSource::new(&[2]);
    let r = shamir_unicast(&inst, s, t, 2, 1, &[3], &mut masks).unwrap();
    assert_eq!(r.keys, vec![vec![3]]);
    let mut vals: Vec<u32> = r.transcript.edges.iter().flatten().map(|s| s.value).collect();
    vals.sort();
    assert_eq!(vals, vec![0, 0, 2, 2]);
}

#[test]
fn empty_key_rate_is_zero() {
    assert_eq!(rate_of(0, 3), Ratio::from_integer(0));
}
