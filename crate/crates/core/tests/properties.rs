mod common;

use bnsim_core::exact::{exact_inference_with, EnumerationOrder, DEFAULT_STATE_CAP};
use bnsim_core::io::{parse_network, same_structure, serialize_network};
use bnsim_core::network::{topological_order, validate_network};
use bnsim_core::transform::{condition_network, integrate_evidence, reverse_arc, IntegrationMode};
use bnsim_core::{exact_inference, Assignment, BnError, Evidence, Network};
use common::{all_assignments, blueprint};
use proptest::prelude::*;

fn pick_evidence(net: &Network, picks: &[u8]) -> Evidence {
    let mut observed = Assignment::new();
    for (node, &p) in picks.iter().enumerate().take(net.len()) {
        if p % 3 == 0 {
            observed.insert(node, usize::from(p / 3) % net.cardinality(node));
        }
    }
    Evidence::new(net, observed).unwrap()
}

fn arcs(net: &Network) -> Vec<(usize, usize)> {
    (0..net.len())
        .flat_map(|c| net.parents(c).iter().map(move |&p| (p, c)))
        .collect()
}

fn assert_same_joint(a: &Network, b: &Network) {
    for states in all_assignments(a) {
        let (x, y) = (a.joint_probability_dense(&states), b.joint_probability_dense(&states));
        assert!((x - y).abs() < 1e-12, "{states:?}: {x} vs {y}");
    }
}

fn assert_posteriors_close(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) {
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < tol, "{x} vs {y}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn joint_sums_to_one(bp in blueprint(7)) {
        let net = bp.build();
        let total: f64 = all_assignments(&net).iter().map(|s| net.joint_probability_dense(s)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert_eq!(topological_order(&net).unwrap(), topological_order(&net).unwrap());
    }

    #[test]
    fn documents_round_trip(bp in blueprint(7)) {
        let net = bp.build();
        let again = parse_network(&serialize_network(&net).unwrap()).unwrap();
        prop_assert!(same_structure(&net, &again));
    }

    #[test]
    fn reversal_preserves_joint_and_round_trips(bp in blueprint(6), pick in any::<u16>()) {
        let net = bp.build();
        let candidates = arcs(&net);
        prop_assume!(!candidates.is_empty());
        let (from, to) = candidates[usize::from(pick) % candidates.len()];
        match reverse_arc(&net, from, to) {
            Ok(reversed) => {
                prop_assert!(validate_network(&reversed).is_empty());
                prop_assert!(reversed.has_arc(to, from) && !reversed.has_arc(from, to));
                assert_same_joint(&net, &reversed);
                let again = parse_network(&serialize_network(&reversed).unwrap()).unwrap();
                prop_assert!(same_structure(&reversed, &again));
            }
            Err(BnError::Cycle(_)) => {}
            Err(other) => prop_assert!(false, "unexpected error {other}"),
        }
    }

    #[test]
    fn oracle_is_self_consistent(bp in blueprint(7), picks in prop::collection::vec(any::<u8>(), 7)) {
        let net = bp.build();
        let ev = pick_evidence(&net, &picks);
        let forward = exact_inference_with(&net, &ev, DEFAULT_STATE_CAP, EnumerationOrder::Forward);
        let reverse = exact_inference_with(&net, &ev, DEFAULT_STATE_CAP, EnumerationOrder::Reverse);
        match (forward, reverse) {
            (Ok(f), Ok(r)) => {
                prop_assert!((f.evidence_probability - r.evidence_probability).abs() < 1e-12);
                for row in &f.posterior {
                    prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
                assert_posteriors_close(&f.posterior, &r.posterior, 1e-12);
            }
            (Err(BnError::ImpossibleEvidence(_)), Err(BnError::ImpossibleEvidence(_))) => {}
            (f, r) => prop_assert!(false, "orders disagree: {f:?} / {r:?}"),
        }
    }

    #[test]
    fn root_marginals_equal_priors(bp in blueprint(7)) {
        let net = bp.build();
        let r = exact_inference(&net, &Evidence::empty()).unwrap();
        for node in (0..net.len()).filter(|&v| net.parents(v).is_empty()) {
            assert_posteriors_close(&r.posterior[node..=node], &net.cpt(node).rows[..1], 1e-12);
        }
    }

    #[test]
    fn full_integration_conditions_exactly(bp in blueprint(6), picks in prop::collection::vec(any::<u8>(), 6)) {
        let net = bp.build();
        let ev = pick_evidence(&net, &picks);
        prop_assume!(!ev.is_empty());
        let Ok(truth) = exact_inference(&net, &ev) else { return Ok(()) };
        let (integrated, plan) = integrate_evidence(&net, &ev, IntegrationMode::Full).unwrap();
        prop_assert!(plan.len() <= net.len() * arcs(&net).len().max(1));
        prop_assert!(validate_network(&integrated).is_empty());
        assert_same_joint(&net, &integrated);
        for (e, _) in ev.iter() {
            prop_assert!(integrated.parents(e).iter().all(|&p| ev.is_observed(p)));
        }

        let conditioned = condition_network(&integrated, &ev).unwrap();
        prop_assert!((conditioned.evidence_probability - truth.evidence_probability).abs() < 1e-12);
        let inner = exact_inference(&conditioned.network, &Evidence::empty()).unwrap();
        for (i, &node) in conditioned.kept.iter().enumerate() {
            assert_posteriors_close(&inner.posterior[i..=i], &truth.posterior[node..=node], 1e-12);
        }
    }

    #[test]
    fn partial_integration_removes_original_parents(bp in blueprint(6), picks in prop::collection::vec(any::<u8>(), 6)) {
        let net = bp.build();
        let ev = pick_evidence(&net, &picks);
        prop_assume!(!ev.is_empty());
        let layer: usize = ev
            .iter()
            .map(|(e, _)| net.parents(e).iter().filter(|&&p| !ev.is_observed(p)).count())
            .sum();
        let (integrated, plan) = match integrate_evidence(&net, &ev, IntegrationMode::Partial) {
            Ok(done) => done,
            Err(BnError::Integration { .. }) => return Ok(()),
            Err(other) => return Err(TestCaseError::fail(other.to_string())),
        };
        prop_assert_eq!(plan.len(), layer);
        assert_same_joint(&net, &integrated);
        for (e, _) in ev.iter() {
            for &p in net.parents(e).iter().filter(|&&p| !ev.is_observed(p)) {
                prop_assert!(!integrated.has_arc(p, e));
            }
        }
        if let Ok(truth) = exact_inference(&net, &ev) {
            let after = exact_inference(&integrated, &ev).unwrap();
            assert_posteriors_close(&after.posterior, &truth.posterior, 1e-12);
        }
    }
}
