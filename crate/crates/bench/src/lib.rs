//! Fixture models shared by the benchmarks.

use fedm_core::{parse_model, parse_referent, EdmModel, ReasoningRule};

pub const PATIENT: &str = include_str!("../../../fixtures/patient.edm");
pub const PATIENT_REVISED: &str = include_str!("../../../fixtures/patient-rev.edm");
pub const REFERENT: &str = include_str!("../../../fixtures/referent.edm");

pub fn patient() -> EdmModel {
    parse_model(PATIENT).expect("patient fixture parses")
}

pub fn patient_revised() -> EdmModel {
    parse_model(PATIENT_REVISED).expect("revised fixture parses")
}

pub fn referent() -> (EdmModel, Vec<ReasoningRule>) {
    parse_referent(REFERENT).expect("referent fixture parses")
}
