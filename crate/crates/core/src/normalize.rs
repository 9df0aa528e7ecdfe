//! Rewrites ethical rules into single-consequent conjunctive rules
//! `P1 & ... & Pk -> Q`, one per (antecedent clause, consequent) pair, each
//! carrying the parent rule's CF.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Degree, EdmModel, EthicalRule, Proposition};

/// Where a normalized rule came from. Clause and consequent indices are
/// 1-based and only present when the parent rule was actually split along
/// that axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleOrigin {
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consequent: Option<usize>,
}

impl fmt::Display for RuleOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rule)?;
        if let Some(c) = self.clause {
            write!(f, "[{c}]")?;
        }
        if let Some(k) = self.consequent {
            write!(f, "{{{k}}}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRule {
    pub origin: RuleOrigin,
    pub antecedents: Vec<Proposition>,
    pub consequent: Proposition,
    pub cf: Degree,
}

impl NormalizedRule {
    /// The equivalent single-clause, single-consequent ethical rule.
    pub fn to_rule(&self) -> EthicalRule {
        EthicalRule {
            name: self.origin.to_string(),
            antecedent: vec![self.antecedents.clone()],
            consequents: vec![self.consequent.clone()],
            cf: self.cf,
            rule_type: None,
            span: None,
        }
    }

    /// Same antecedent set and consequent, ignoring order, CF and origin.
    pub fn same_structure(&self, other: &NormalizedRule) -> bool {
        self.consequent == other.consequent
            && self.antecedents.len() == other.antecedents.len()
            && self
                .antecedents
                .iter()
                .all(|p| other.antecedents.contains(p))
    }
}

impl fmt::Display for NormalizedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ante: Vec<String> = self.antecedents.iter().map(ToString::to_string).collect();
        write!(f, "{} -> {}", ante.join(" & "), self.consequent)
    }
}

pub fn normalize_rule(rule: &EthicalRule) -> Vec<NormalizedRule> {
    let split_clauses = rule.antecedent.len() > 1;
    let split_consequents = rule.consequents.len() > 1;
    let mut out = Vec::with_capacity(rule.antecedent.len() * rule.consequents.len());
    for (ci, clause) in rule.antecedent.iter().enumerate() {
        let mut antecedents: Vec<Proposition> = Vec::with_capacity(clause.len());
        for p in clause {
            if !antecedents.contains(p) {
                antecedents.push(p.clone());
            }
        }
        for (ki, consequent) in rule.consequents.iter().enumerate() {
            out.push(NormalizedRule {
                origin: RuleOrigin {
                    rule: rule.name.clone(),
                    clause: split_clauses.then_some(ci + 1),
                    consequent: split_consequents.then_some(ki + 1),
                },
                antecedents: antecedents.clone(),
                consequent: consequent.clone(),
                cf: rule.cf,
            });
        }
    }
    out
}

/// FERRs then FERDs, each in declaration order.
pub fn normalize_model(model: &EdmModel) -> Vec<NormalizedRule> {
    model
        .rules()
        .flat_map(|(_, rule)| normalize_rule(rule))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{evaluate_rule, FuzzifiedState};
    use proptest::prelude::*;

    fn p(v: &str, t: &str) -> Proposition {
        Proposition::new(v, t)
    }

    #[test]
    fn multi_consequent_rule_splits() {
        let rule = EthicalRule::new(
            "r",
            vec![vec![p("A", "x")]],
            vec![p("B", "x"), p("C", "x")],
            0.5,
        )
        .unwrap();
        let out = normalize_rule(&rule);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].consequent, p("B", "x"));
        assert_eq!(out[1].consequent, p("C", "x"));
        assert_eq!(out[1].origin.to_string(), "r{2}");
        assert!(out.iter().all(|n| n.cf.value() == 0.5));
    }

    #[test]
    fn normal_rule_is_a_fixed_point() {
        let rule = EthicalRule::new(
            "r",
            vec![vec![p("A", "x"), p("B", "y")]],
            vec![p("C", "z")],
            0.7,
        )
        .unwrap();
        let out = normalize_rule(&rule);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to_rule(), rule);
        assert_eq!(out[0].origin.to_string(), "r");
    }

    #[test]
    fn empty_model_normalizes_to_nothing() {
        assert!(normalize_model(&EdmModel::new("E")).is_empty());
    }

    fn arb_rule() -> impl Strategy<Value = EthicalRule> {
        let prop = (0usize..4, 0usize..3).prop_map(|(v, t)| p(&format!("V{v}"), &format!("t{t}")));
        (
            prop::collection::vec(prop::collection::vec(prop.clone(), 1..4), 1..4),
            prop::collection::vec((4usize..6, 0usize..3), 1..3),
            0.0..=1.0f64,
        )
            .prop_map(|(clauses, cons, cf)| {
                let clauses = clauses
                    .into_iter()
                    .map(|mut c| {
                        let mut seen = Vec::new();
                        c.retain(|x| {
                            let fresh = !seen.contains(x);
                            seen.push(x.clone());
                            fresh
                        });
                        c
                    })
                    .collect();
                let mut consequents: Vec<Proposition> = cons
                    .into_iter()
                    .map(|(v, t)| p(&format!("V{v}"), &format!("t{t}")))
                    .collect();
                consequents.dedup();
                EthicalRule::new("r", clauses, consequents, cf).unwrap()
            })
    }

    proptest! {
        #[test]
        fn count_law_and_idempotence(rule in arb_rule()) {
            let out = normalize_rule(&rule);
            prop_assert_eq!(out.len(), rule.antecedent.len() * rule.consequents.len());
            for n in &out {
                let again = normalize_rule(&n.to_rule());
                prop_assert_eq!(again.len(), 1);
                prop_assert_eq!(&again[0].antecedents, &n.antecedents);
                prop_assert_eq!(&again[0].consequent, &n.consequent);
                prop_assert_eq!(again[0].cf, n.cf);
            }
        }

        #[test]
        fn semantics_preserved(rule in arb_rule(), seed in prop::collection::vec(0.0..=1.0f64, 12)) {
            let state: FuzzifiedState = (0..4)
                .flat_map(|v| (0..3).map(move |t| (v, t)))
                .map(|(v, t)| (p(&format!("V{v}"), &format!("t{t}")), Degree::new(seed[v * 3 + t]).unwrap()))
                .collect();
            let direct = evaluate_rule(&rule, &state).unwrap();
            let out = normalize_rule(&rule);
            for c in &rule.consequents {
                let via_normalized = out
                    .iter()
                    .filter(|n| &n.consequent == c)
                    .map(|n| {
                        n.antecedents
                            .iter()
                            .map(|a| state[a])
                            .fold(Degree::ONE, Degree::min)
                            .scale(n.cf)
                    })
                    .fold(Degree::ZERO, Degree::max);
                prop_assert_eq!(via_normalized, direct);
            }
        }
    }
}
