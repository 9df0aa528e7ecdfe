mod support;

use fedm_core::{
    parse_model, parse_referent, resolve_model, serialize_model, serialize_referent, Degree,
    ParseError,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;

#[test]
fn fixtures_round_trip() {
    for src in [
        PATIENT,
        PATIENT_REVISED,
        EMPTY,
        INCOMPLETENESS,
        INCONSISTENCY,
        CIRCULAR,
        REDUNDANCY,
    ] {
        let m = parse_model(src).unwrap();
        assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
    }
    let (m, rrs) = referent();
    assert_eq!(
        parse_referent(&serialize_referent(&m, &rrs)).unwrap(),
        (m, rrs)
    );
}

#[test]
fn unicode_connectives_parse_like_ascii() {
    let ascii = PATIENT.replace("PatientEDM", "U");
    let unicode = ascii
        .replace(" & ", " ∧ ")
        .replace(" | ", " ∨ ")
        .replace("->", "→");
    assert_eq!(parse_model(&ascii).unwrap(), parse_model(&unicode).unwrap());
}

fn span_in_bounds(src: &str, err: &ParseError) -> bool {
    let span = err.span();
    let lines: Vec<&str> = src.split('\n').collect();
    span.line >= 1
        && span.line <= lines.len().max(1)
        && span.column >= 1
        && span.column <= lines.get(span.line - 1).map_or(0, |l| l.chars().count()) + 1
}

proptest! {
    #[test]
    fn degree_construction_stays_in_range(x in prop::num::f64::ANY) {
        match Degree::new(x) {
            Ok(d) => prop_assert!((0.0..=1.0).contains(&d.value())),
            Err(_) => prop_assert!(!(0.0..=1.0).contains(&x)),
        }
        let s = Degree::saturating(x);
        prop_assert!((0.0..=1.0).contains(&s.value()));
    }

    #[test]
    fn resolve_is_idempotent_and_tags_every_rule(seed in any::<u64>()) {
        let m = random_model(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(m.rules().all(|(_, r)| r.rule_type.is_some()));
        prop_assert_eq!(resolve_model(m.clone()).unwrap(), m);
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng);
        let text = serialize_model(&m);
        prop_assert_eq!(parse_model(&text).unwrap(), m.clone());
        let rrs = random_rrs(&mut rng, &m, 2);
        let text = serialize_referent(&m, &rrs);
        prop_assert_eq!(parse_referent(&text).unwrap(), (m, rrs));
    }

    #[test]
    fn truncated_input_errors_point_inside_the_text(cut in 0usize..2000) {
        let cut = PATIENT.char_indices().map(|(i, _)| i).nth(cut).unwrap_or(PATIENT.len());
        let src = &PATIENT[..cut];
        if let Err(err) = parse_model(src) {
            prop_assert!(span_in_bounds(src, &err), "{err:?} outside {src:?}");
        }
    }

    #[test]
    fn corrupted_input_errors_point_inside_the_text(
        at in 0usize..1500,
        junk in prop::sample::select(vec!["@", "}", "{", "(", "->", "1e999", "-3", "ferd", "&&", "\n\n"]),
    ) {
        let at = PATIENT.char_indices().map(|(i, _)| i).nth(at).unwrap_or(PATIENT.len());
        let src = format!("{}{}{}", &PATIENT[..at], junk, &PATIENT[at..]);
        if let Err(err) = parse_model(&src) {
            prop_assert!(span_in_bounds(&src, &err), "{err:?}");
        }
    }
}
