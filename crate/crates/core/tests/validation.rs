mod support;

use fedm_core::validation::{
    dynamic_validate, static_validate, StaticFindingKind, ValidationReport,
};
use fedm_core::{compile_fpn, normalize_model, reason, validate, Degree, ValidationVerdict};
use indexmap::IndexMap;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

#[test]
fn worked_example_verdicts() {
    let (r, rrs) = referent();
    assert_eq!(
        validate(&patient(), &r, &rrs[..1]).unwrap().verdict,
        ValidationVerdict::SemanticallyIncomplete
    );
    assert_eq!(
        validate(&patient_revised(), &r, &rrs).unwrap().verdict,
        ValidationVerdict::SemanticallyIncorrect
    );
    assert_eq!(
        validate(&r, &r, &rrs[..1]).unwrap().verdict,
        ValidationVerdict::Valid
    );
}

#[test]
fn report_round_trips_through_json() {
    let (r, rrs) = referent();
    let report = validate(&patient(), &r, &rrs).unwrap();
    let json = serde_json::to_string(&report).unwrap();
    assert!(json.contains("\"static\""));
    assert_eq!(
        serde_json::from_str::<ValidationReport>(&json).unwrap(),
        report
    );
}

proptest! {
    #[test]
    fn static_validation_is_reflexive(seed in any::<u64>()) {
        let m = random_model(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(static_validate(&m, &m).is_empty());
    }

    #[test]
    fn static_validation_is_anti_symmetric(a in any::<u64>(), b in any::<u64>()) {
        let m = random_model(&mut ChaCha8Rng::seed_from_u64(a));
        let r = random_model(&mut ChaCha8Rng::seed_from_u64(b));
        let forward = static_validate(&m, &r);
        let backward = static_validate(&r, &m);
        for f in forward.iter().filter(|f| f.kind.is_missing()) {
            prop_assert!(
                backward.iter().any(|x| x.kind == StaticFindingKind::ExtraElement && x.subject == f.subject),
                "{} has no mirror", f
            );
        }
        for f in backward.iter().filter(|f| f.kind == StaticFindingKind::ExtraElement) {
            prop_assert!(forward.iter().any(|x| x.kind.is_missing() && x.subject == f.subject), "{}", f);
        }
    }

    #[test]
    fn dynamic_degrees_come_from_reason(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng);
        let rrs = random_rrs(&mut rng, &m, 3);
        let net = compile_fpn(&normalize_model(&m), &m).unwrap();
        let found = dynamic_validate(&m, &rrs);
        for (i, rr) in rrs.iter().enumerate() {
            let inputs: IndexMap<_, _> = rr.premises.iter().cloned().collect();
            let out = reason(&net, &inputs).unwrap();
            match (&found, out.get(&rr.conclusion)) {
                (Ok(found), Some(d)) => {
                    prop_assert_eq!(found[i].computed, *d);
                    prop_assert_eq!(found[i].passed, rr.comparator.holds(d.value(), rr.threshold.value()));
                }
                (Err(_), _) | (_, None) => {}
            }
        }
    }

    #[test]
    fn raising_premises_never_fails_a_passed_rule(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng);
        let rrs = random_rrs(&mut rng, &m, 3);
        let Ok(before) = dynamic_validate(&m, &rrs) else { return Ok(()); };
        let mut raised = rrs.clone();
        for rr in &mut raised {
            for (_, d) in &mut rr.premises {
                *d = Degree::new(rng.random_range(d.value()..=1.0)).unwrap();
            }
        }
        let after = dynamic_validate(&m, &raised).unwrap();
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(a.computed >= b.computed);
            prop_assert!(!b.passed || a.passed);
        }
    }
}
