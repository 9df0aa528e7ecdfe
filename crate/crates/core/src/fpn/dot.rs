use std::fmt::Write;

use super::FuzzyPetriNet;
use crate::analysis::ReachabilityGraph;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Places as circles `p<i>`, transitions as boxes `t<j>` labelled with their
/// rule origin and CF, one edge per incidence entry.
pub fn net_to_dot(net: &FuzzyPetriNet) -> String {
    let mut out = String::from("digraph fpn {\n  rankdir=LR;\n");
    for id in net.place_ids() {
        let _ = writeln!(
            out,
            "  {id} [shape=circle, label=\"{id}\\n{}\"];",
            escape(&net.label(id).to_string())
        );
    }
    for id in net.transition_ids() {
        let t = net.transition(id);
        let _ = writeln!(
            out,
            "  {id} [shape=box, height=0.2, style=filled, fillcolor=black, fontcolor=white, label=\"{id} {}\\nf={:.2}\"];",
            escape(&t.origin.to_string()),
            t.cf
        );
    }
    for id in net.transition_ids() {
        let t = net.transition(id);
        for input in &t.inputs {
            let _ = writeln!(out, "  {input} -> {id};");
        }
        let _ = writeln!(out, "  {id} -> {};", t.output);
    }
    out.push_str("}\n");
    out
}

/// One node `m<i>` per marking, labelled with its 0/1 place vector; edges
/// are labelled with the fired transition.
pub fn reachability_to_dot(net: &FuzzyPetriNet, graph: &ReachabilityGraph) -> String {
    let mut out = String::from("digraph reachability {\n");
    for (i, marking) in graph.nodes.iter().enumerate() {
        let vector: Vec<String> = marking
            .vector(net)
            .iter()
            .map(ToString::to_string)
            .collect();
        let marked: Vec<String> = marking.tokens().iter().map(ToString::to_string).collect();
        let _ = writeln!(
            out,
            "  m{i} [shape=box{}, label=\"({})\\n{{{}}}\"];",
            if i == graph.root {
                ", peripheries=2"
            } else {
                ""
            },
            vector.join(","),
            marked.join(",")
        );
    }
    for (from, t, to) in &graph.edges {
        let _ = writeln!(out, "  m{from} -> m{to} [label=\"{t}\"];");
    }
    out.push_str("}\n");
    out
}
