use std::collections::BTreeSet;

use proptest::prelude::*;

use keycast::field::Field;
use keycast::io::{generate_canonical, generate_random, CanonicalKind, CanonicalParams};
use keycast::protocol::{compile, SchemeKind, SchemeParams};
use keycast::security::{
    admissible_sets, audit_scheme, converse_check, exact_mutual_information, monte_carlo_advisory, AuditOptions,
    JointDistribution, SecurityError,
};

fn fig2(d: usize, q: u32, ell: usize) -> keycast::network::NetworkInstance {
    generate_canonical(CanonicalKind::Fig2, CanonicalParams::d(d).q(q).ell(ell)).unwrap()
}

fn verdicts(report: &keycast::security::SecurityReport) -> BTreeSet<(usize, String, bool)> {
    report.entries.iter().map(|e| (e.set, e.beta_label.clone(), e.mi.is_zero)).collect()
}

#[test]
fn audit_ignores_node_order() {
    let inst = fig2(3, 2, 1);
    let perm = vec![4, 2, 0, 3, 1];
    let moved = inst.permuted(&perm);
    let a = audit_scheme(&compile(&inst, SchemeKind::Full, SchemeParams::default()).unwrap(), &AuditOptions::default()).unwrap();
    let b = audit_scheme(&compile(&moved, SchemeKind::Full, SchemeParams::default()).unwrap(), &AuditOptions::default()).unwrap();
    assert!(a.passed() && b.passed());
    assert_eq!(verdicts(&a), verdicts(&b));
    assert_eq!(a.states, b.states);
}

#[test]
fn audit_is_a_function_of_the_compiled_scheme() {
    let inst = fig2(2, 3, 1);
    let s = compile(&inst, SchemeKind::Full, SchemeParams::default()).unwrap();
    let a = audit_scheme(&s, &AuditOptions::default()).unwrap();
    let b = audit_scheme(&compile(&inst, SchemeKind::Full, SchemeParams::default()).unwrap(), &AuditOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_text(), b.to_text());
    let (r1, r2) = (s.run(1).unwrap(), s.run(2).unwrap());
    assert_eq!(r1.transcript.edge_uses(), r2.transcript.edge_uses());
}

#[test]
fn secrecy_holds_up_to_design_ell_and_fails_beyond() {
    let inst = fig2(3, 2, 1);
    let s = compile(&inst, SchemeKind::Full, SchemeParams::default().with_ell(1)).unwrap();
    for ell in 0..=1 {
        let r = audit_scheme(&s, &AuditOptions { ell: Some(ell), ..AuditOptions::default() }).unwrap();
        assert!(r.passed(), "ell = {ell}\n{}", r.to_text());
    }
    let r = audit_scheme(&s, &AuditOptions { ell: Some(2), ..AuditOptions::default() }).unwrap();
    assert!(!r.passed());
    assert!(r.leaks().iter().all(|e| e.beta.len() == 2));
    assert!(r.to_text().contains("LEAK"));
    assert!(r.to_csv().lines().any(|l| l.ends_with(",false,1.000000")), "{}", r.to_csv());
}

#[test]
fn admissible_sets_exclude_terminals() {
    let inst = fig2(3, 13, 2);
    let t = inst.node_id("t").unwrap();
    let sets = admissible_sets(&inst, 0, 2, 0);
    assert_eq!(sets.len(), 1 + 3 + 3);
    assert!(sets.iter().all(|b| !b.contains(&t)));
    assert!(sets[0].is_empty());
}

#[test]
fn budget_exceeded_is_reported() {
    let inst = fig2(3, 13, 1);
    let s = compile(&inst, SchemeKind::Full, SchemeParams::default()).unwrap();
    match audit_scheme(&s, &AuditOptions { budget: 1000, ..AuditOptions::default() }) {
        Err(SecurityError::BudgetExceeded { required, allowed }) => {
            assert_eq!(required, Some(13u128.pow(6)));
            assert_eq!(allowed, 1000);
        }
        other => panic!("{other:?}"),
    }
    let note = monte_carlo_advisory(&s, 200, 3, &AuditOptions::default());
    assert!(note.contains("advisory"), "{note}");
}

#[test]
fn converse_preconditions() {
    let inst = fig2(2, 3, 1);
    let s = compile(&inst, SchemeKind::Full, SchemeParams::default()).unwrap();
    assert!(matches!(converse_check(2, 2, 3, &s, 1000), Err(SecurityError::Precondition(_))));
    assert!(matches!(converse_check(2, 1, 5, &s, 1000), Err(SecurityError::Precondition(_))));
    let chain = generate_canonical(CanonicalKind::TypeBChain, CanonicalParams::d(2).q(3)).unwrap();
    let c = compile(&chain, SchemeKind::Partial, SchemeParams::default()).unwrap();
    assert!(matches!(converse_check(2, 1, 3, &c, 1000), Err(SecurityError::Precondition(_))));
    let r = converse_check(2, 1, 3, &s, 1000).unwrap();
    assert!(r.tight);
    assert!((r.h_bits - r.bound_bits).abs() < 1e-9);
}

#[test]
fn random_partial_instances_pass_the_audit() {
    let params = SchemeParams::default().with_d(3).with_ell(1);
    let mut audited = 0;
    for seed in 0..24 {
        let Ok(inst) = generate_random(seed, 8, 3, 0.4) else { continue };
        let small = inst.with_field(Field::new(2).unwrap());
        for kind in [SchemeKind::Partial, SchemeKind::Unstructured] {
            let Ok(s) = compile(&small, kind, params) else { continue };
            let r = audit_scheme(&s, &AuditOptions::default()).unwrap();
            assert!(r.passed(), "seed {seed} {kind}\n{}", r.to_text());
            audited += 1;
        }
    }
    assert!(audited >= 24, "only {audited} audits ran");
}

proptest! {
    #[test]
    fn product_distributions_have_zero_information(
        pk in prop::collection::vec(1u64..5, 1..4),
        po in prop::collection::vec(1u64..5, 1..4),
    ) {
        let mut j = JointDistribution::new();
        for (a, &x) in pk.iter().enumerate() {
            for (b, &y) in po.iter().enumerate() {
                j.add(&[a as u32], &[b as u32], x * y);
            }
        }
        prop_assert!(exact_mutual_information(&j).is_zero);
    }

    #[test]
    fn revealed_keys_leak(n in 2u32..6, mult in 1u64..4) {
        let mut j = JointDistribution::new();
        for k in 0..n {
            j.add(&[k], &[k % 2], mult);
        }
        let mi = exact_mutual_information(&j);
        let balanced = n % 2 == 0;
        // observing the parity leaks exactly one bit when keys are balanced
        prop_assert!(!mi.is_zero);
        if balanced {
            prop_assert!((mi.value_bits - 1.0).abs() < 1e-12);
        }
    }
}
