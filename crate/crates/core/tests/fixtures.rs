//! Closed-form values on the standard channels, each derived by hand.

use infopriv::analysis::{balance_at, balance_profile, check_general_composition, CouplingFamily};
use infopriv::capacity::{group_capacity, individual_capacity};
use infopriv::{AnalysisConfig, CapacityConfig, Error, KnowledgeSet, Mechanism, Method};

fn h2(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

#[test]
fn identity_leaks_each_record_fully() {
    let ch = Mechanism::Identity {
        alphabets: vec![2, 3],
    }
    .build()
    .unwrap();
    let cfg = CapacityConfig::default();
    let c = individual_capacity(&ch, KnowledgeSet::Unconstrained, Method::ExactEnumBa, &cfg).unwrap();
    assert!((c.value - 3f64.log2()).abs() < 1e-9);
    assert_eq!(c.target, vec![1]);
    let g = group_capacity(&ch, 2, KnowledgeSet::Unconstrained, Method::ExactEnumBa, &cfg).unwrap();
    assert!((g.value - 6f64.log2()).abs() < 1e-9);
}

#[test]
fn randomized_response_pins_at_the_uniform_law() {
    // with every law independent and uniform, record i is a BSC(q) away
    let q = 0.2;
    let ch = Mechanism::RandomizedResponse {
        alphabets: vec![2, 2],
        q,
    }
    .build()
    .unwrap();
    let pinned = individual_capacity(
        &ch,
        KnowledgeSet::from_b(2.0),
        Method::Grid,
        &CapacityConfig::default(),
    )
    .unwrap();
    assert!((pinned.value - (1.0 - h2(q))).abs() < 1e-12);
    assert_eq!(pinned.upper(), pinned.lower());
}

#[test]
fn constant_channel_has_no_balance() {
    let ch = Mechanism::Constant {
        alphabets: vec![2, 2],
        outputs: 3,
        row: None,
    }
    .build()
    .unwrap();
    let p = balance_profile(&ch, "constant", 5, &AnalysisConfig::default()).unwrap();
    assert!(p
        .points
        .iter()
        .all(|pt| pt.delta.upper == 0.0 && pt.constrained.upper == 0.0));
}

#[test]
fn xor_balance_is_max_zero_b_minus_one() {
    // δ(b) = max(0, b - 1): any law with H(X) <= 1 can fix X2, and above
    // that I(X1;Y) <= 1 - H(X2|X1) <= 2 - b, attained by independent records
    let ch = Mechanism::Xor { records: 2 }.build().unwrap();
    let cfg = AnalysisConfig::default();
    for b in [0.0, 0.5, 1.0, 2.0] {
        let d = balance_at(&ch, b, &cfg).unwrap().delta;
        let want = (b - 1.0f64).max(0.0);
        assert!(d.lower <= want + 1e-9 && want <= d.upper + 1e-9, "b={b}: {d:?}");
    }
}

#[test]
fn boundary_entropy_cannot_be_sampled() {
    let ch = Mechanism::Identity { alphabets: vec![2] }.build().unwrap();
    let ids = vec!["a".to_string(), "b".to_string()];
    let r = check_general_composition(
        &ch,
        &ch,
        &ids,
        CouplingFamily::Product,
        1.0,
        2,
        0,
        &AnalysisConfig::default(),
    );
    assert!(matches!(r, Err(Error::Sampling(_))));
    // the uniform member alone is still a valid coupling
    let r = check_general_composition(
        &ch,
        &ch,
        &ids,
        CouplingFamily::Product,
        1.0,
        1,
        0,
        &AnalysisConfig::default(),
    )
    .unwrap();
    assert_eq!(r.summary.violated, 0);
}
