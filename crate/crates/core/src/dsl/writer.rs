use std::fmt::Write;

use super::ReasoningRule;
use crate::model::{EdmModel, EthicalRule, Proposition};

pub fn serialize_model(model: &EdmModel) -> String {
    write_document("model", model, &[])
}

pub fn serialize_referent(model: &EdmModel, rrs: &[ReasoningRule]) -> String {
    write_document("referent", model, rrs)
}

fn write_document(header: &str, model: &EdmModel, rrs: &[ReasoningRule]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{header} {} {{", model.name);
    for var in &model.variables {
        let _ = writeln!(
            out,
            "  {} {} universe {} {} {{",
            var.kind.keyword(),
            var.name,
            var.universe.min,
            var.universe.max
        );
        for term in &var.terms {
            let m = &term.mf;
            let _ = writeln!(
                out,
                "    term {} trapezoid {} {} {} {}",
                term.name, m.a, m.b, m.c, m.d
            );
        }
        out.push_str("  }\n");
    }
    for rule in &model.ferrs {
        write_rule(&mut out, "ferr", rule);
    }
    for rule in &model.ferds {
        write_rule(&mut out, "ferd", rule);
    }
    for rr in rrs {
        let premises: Vec<String> = rr
            .premises
            .iter()
            .map(|(p, d)| format!("{p}={d}"))
            .collect();
        let _ = writeln!(
            out,
            "  rr {} : {} -> {} {} {}",
            rr.name,
            premises.join(" & "),
            rr.conclusion,
            rr.comparator,
            rr.threshold
        );
    }
    out.push_str("}\n");
    out
}

fn write_rule(out: &mut String, keyword: &str, rule: &EthicalRule) {
    let clauses: Vec<String> = rule
        .antecedent
        .iter()
        .map(|clause| {
            let conj = join(clause, " & ");
            if rule.antecedent.len() > 1 && clause.len() > 1 {
                format!("({conj})")
            } else {
                conj
            }
        })
        .collect();
    let _ = writeln!(
        out,
        "  {keyword} {} cf {} : {} -> {}",
        rule.name,
        rule.cf,
        clauses.join(" | "),
        join(&rule.consequents, ", ")
    );
}

fn join(props: &[Proposition], sep: &str) -> String {
    props
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}
