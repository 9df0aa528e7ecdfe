//! Random models and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use fedm_core::{
    parse_model, parse_referent, resolve_model, Degree, EdmModel, EthicalRule, LinguisticVariable,
    Proposition, ReasoningRule, Term, TrapezoidMf, Universe, VariableKind,
};
use indexmap::IndexMap;
use rand::seq::IndexedRandom;
use rand::Rng;

pub const PATIENT: &str = include_str!("../../../../fixtures/patient.edm");
pub const PATIENT_REVISED: &str = include_str!("../../../../fixtures/patient-rev.edm");
pub const REFERENT: &str = include_str!("../../../../fixtures/referent.edm");
pub const EMPTY: &str = include_str!("../../../../fixtures/empty.edm");
pub const INCOMPLETENESS: &str = include_str!("../../../../fixtures/incompleteness.edm");
pub const INCONSISTENCY: &str = include_str!("../../../../fixtures/inconsistency.edm");
pub const CIRCULAR: &str = include_str!("../../../../fixtures/circular.edm");
pub const REDUNDANCY: &str = include_str!("../../../../fixtures/redundancy.edm");

pub fn patient() -> EdmModel {
    parse_model(PATIENT).unwrap()
}

pub fn patient_revised() -> EdmModel {
    parse_model(PATIENT_REVISED).unwrap()
}

pub fn referent() -> (EdmModel, Vec<ReasoningRule>) {
    parse_referent(REFERENT).unwrap()
}

pub fn prop(v: &str, t: &str) -> Proposition {
    Proposition::new(v, t)
}

/// `k` overlapping trapezoids covering `[0, 10]`.
fn partition(k: usize) -> Vec<Term> {
    let w = 10.0 / k as f64;
    (0..k)
        .map(|i| {
            let lo = i as f64 * w;
            let hi = (i + 1) as f64 * w;
            let a = (lo - w / 4.0).max(0.0);
            let b = if i == 0 { 0.0 } else { lo + w / 4.0 };
            let c = if i == k - 1 { 10.0 } else { hi - w / 4.0 };
            let d = (hi + w / 4.0).min(10.0);
            Term {
                name: format!("t{i}"),
                mf: TrapezoidMf::new(a, b, c, d).unwrap(),
            }
        })
        .collect()
}

fn pick<R: Rng>(rng: &mut R, pool: &[Proposition], max: usize) -> Vec<Proposition> {
    let n = rng.random_range(1..=max.min(pool.len()));
    pool.choose_multiple(rng, n).cloned().collect()
}

/// A layered model: at most 4 variables with at most 3 terms each and at
/// most 6 rules. Risk rules read inputs only; decision rules read inputs and
/// risk levels.
pub fn random_model<R: Rng>(rng: &mut R) -> EdmModel {
    let nvars = rng.random_range(2..=4);
    let mut model = EdmModel::new("Random");
    for i in 0..nvars {
        let kind = match i {
            0 => VariableKind::Erf,
            1 => VariableKind::Rl,
            _ => *[VariableKind::Erf, VariableKind::Rl, VariableKind::Ad]
                .choose(rng)
                .unwrap(),
        };
        model.variables.push(LinguisticVariable {
            name: format!("V{i}"),
            kind,
            universe: Universe {
                min: 0.0,
                max: 10.0,
            },
            terms: partition(rng.random_range(1..=3)),
        });
    }
    let props = |kinds: &[VariableKind]| -> Vec<Proposition> {
        model
            .variables
            .iter()
            .filter(|v| kinds.contains(&v.kind))
            .flat_map(|v| v.propositions())
            .collect()
    };
    let erf = props(&[VariableKind::Erf]);
    let erf_rl = props(&[VariableKind::Erf, VariableKind::Rl]);
    let rl = props(&[VariableKind::Rl]);
    let ad = props(&[VariableKind::Ad]);

    let nrules = rng.random_range(1..=6);
    let mut ferrs = Vec::new();
    let mut ferds = Vec::new();
    for r in 0..nrules {
        let decision = !ad.is_empty() && rng.random_bool(0.5);
        let (pool, targets) = if decision {
            (&erf_rl, &ad)
        } else {
            (&erf, &rl)
        };
        let mut clauses: Vec<Vec<Proposition>> = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            let clause = pick(rng, pool, 3);
            if !clauses.contains(&clause) {
                clauses.push(clause);
            }
        }
        let consequents = pick(rng, targets, 2);
        let rule =
            EthicalRule::new(format!("r{r}"), clauses, consequents, rng.random::<f64>()).unwrap();
        if decision {
            ferds.push(rule);
        } else {
            ferrs.push(rule);
        }
    }
    model.ferrs = ferrs;
    model.ferds = ferds;
    resolve_model(model).expect("generated model is well formed")
}

/// A random degree for every input proposition of `model`.
pub fn random_inputs<R: Rng>(rng: &mut R, model: &EdmModel) -> IndexMap<Proposition, Degree> {
    model
        .variables_of(VariableKind::Erf)
        .flat_map(|v| v.propositions())
        .map(|p| (p, Degree::new(rng.random::<f64>()).unwrap()))
        .collect()
}

/// A random degree for every proposition of `model`.
pub fn random_state<R: Rng>(rng: &mut R, model: &EdmModel) -> IndexMap<Proposition, Degree> {
    model
        .variables
        .iter()
        .flat_map(|v| v.propositions())
        .map(|p| (p, Degree::new(rng.random::<f64>()).unwrap()))
        .collect()
}

/// Evaluates the original (unnormalized) rules directly: risk rules first,
/// then decision rules. A clause with an underived condition contributes
/// nothing; a conclusion no clause reaches is absent.
pub fn direct_evaluation(
    model: &EdmModel,
    inputs: &IndexMap<Proposition, Degree>,
) -> BTreeMap<Proposition, f64> {
    let mut known: BTreeMap<Proposition, f64> =
        inputs.iter().map(|(p, d)| (p.clone(), d.value())).collect();
    for stage in [&model.ferrs, &model.ferds] {
        let mut derived: BTreeMap<Proposition, f64> = BTreeMap::new();
        for rule in stage {
            let mut best: Option<f64> = None;
            for clause in &rule.antecedent {
                let degrees: Option<Vec<f64>> =
                    clause.iter().map(|p| known.get(p).copied()).collect();
                if let Some(ds) = degrees {
                    let m = ds.into_iter().fold(1.0, f64::min);
                    best = Some(best.map_or(m, |b: f64| b.max(m)));
                }
            }
            if let Some(s) = best {
                let out = s * rule.cf.value();
                for c in &rule.consequents {
                    let e = derived.entry(c.clone()).or_insert(out);
                    *e = e.max(out);
                }
            }
        }
        for (p, d) in derived {
            let e = known.entry(p).or_insert(d);
            *e = e.max(d);
        }
    }
    known
}

fn trapezoid(x: f64, [a, b, c, d]: [f64; 4]) -> f64 {
    if x < a || x > d {
        0.0
    } else if x < b {
        (x - a) / (b - a)
    } else if x <= c {
        1.0
    } else {
        (d - x) / (d - c)
    }
}

/// Centroid of the clipped and max-aggregated risk set, by brute force on
/// 10 001 points.
pub fn centroid_oracle(model: &EdmModel, inputs: &BTreeMap<String, f64>) -> Option<f64> {
    let mut degree: BTreeMap<Proposition, f64> = BTreeMap::new();
    for v in model.variables_of(VariableKind::Erf) {
        let x = inputs[&v.name];
        for t in &v.terms {
            degree.insert(prop(&v.name, &t.name), trapezoid(x, t.mf.corners()));
        }
    }
    let risk = model.variables_of(VariableKind::Rl).next()?;
    let mut clips: Vec<(f64, [f64; 4])> = Vec::new();
    for rule in &model.ferrs {
        let strength = rule
            .antecedent
            .iter()
            .map(|c| c.iter().map(|p| degree[p]).fold(1.0, f64::min))
            .fold(0.0, f64::max);
        let act = strength * rule.cf.value();
        for c in &rule.consequents {
            clips.push((act, risk.term(&c.term)?.mf.corners()));
        }
    }
    let (lo, hi) = (risk.universe.min, risk.universe.max);
    let n = 10_000;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let mu = clips
            .iter()
            .map(|(act, corners)| act.min(trapezoid(x, *corners)))
            .fold(0.0, f64::max);
        num += x * mu;
        den += mu;
    }
    (den > 0.0).then(|| num / den)
}

/// Risk rules that may also read risk levels, so the net can contain
/// cycles.
pub fn random_recursive_model<R: Rng>(rng: &mut R) -> EdmModel {
    let mut model = EdmModel::new("Recursive");
    let nrl = rng.random_range(1..=3);
    for i in 0..=nrl {
        model.variables.push(LinguisticVariable {
            name: format!("V{i}"),
            kind: if i == 0 {
                VariableKind::Erf
            } else {
                VariableKind::Rl
            },
            universe: Universe {
                min: 0.0,
                max: 10.0,
            },
            terms: partition(rng.random_range(1..=2)),
        });
    }
    let all: Vec<Proposition> = model
        .variables
        .iter()
        .flat_map(|v| v.propositions())
        .collect();
    let rl: Vec<Proposition> = model
        .variables_of(VariableKind::Rl)
        .flat_map(|v| v.propositions())
        .collect();
    for r in 0..rng.random_range(1..=6) {
        let clause = pick(rng, &all, 2);
        let consequents = pick(rng, &rl, 1);
        model.ferrs.push(
            EthicalRule::new(
                format!("r{r}"),
                vec![clause],
                consequents,
                rng.random::<f64>(),
            )
            .unwrap(),
        );
    }
    resolve_model(model).expect("generated model is well formed")
}

/// Reasoning rules over places of `model`'s net: input premises and a
/// risk or action conclusion. Empty when the net has no input places.
pub fn random_rrs<R: Rng>(rng: &mut R, model: &EdmModel, count: usize) -> Vec<ReasoningRule> {
    use fedm_core::{compile_fpn, normalize_model, Comparator};
    let net = compile_fpn(&normalize_model(model), model).unwrap();
    let inputs: Vec<Proposition> = net
        .places()
        .iter()
        .filter(|p| p.kind == VariableKind::Erf)
        .map(|p| p.proposition.clone())
        .collect();
    let outputs: Vec<Proposition> = net
        .places()
        .iter()
        .filter(|p| p.kind != VariableKind::Erf)
        .map(|p| p.proposition.clone())
        .collect();
    if inputs.is_empty() {
        return Vec::new();
    }
    (0..count)
        .map(|i| ReasoningRule {
            name: format!("RR{i}"),
            premises: pick(rng, &inputs, 3)
                .into_iter()
                .map(|p| (p, Degree::new(rng.random::<f64>()).unwrap()))
                .collect(),
            conclusion: outputs.choose(rng).unwrap().clone(),
            comparator: if rng.random_bool(0.5) {
                Comparator::Gt
            } else {
                Comparator::Ge
            },
            threshold: Degree::new(rng.random::<f64>()).unwrap(),
            span: None,
        })
        .collect()
}
