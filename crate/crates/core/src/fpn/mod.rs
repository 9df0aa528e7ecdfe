//! Fuzzy Petri nets compiled from normalized rules.
//!
//! A net is `(P, T, D, I, O, f, α, γ)`: places, transitions, propositions,
//! input and output incidence, transition certainty factors, place degrees
//! and the place labelling. Every proposition occurring in the rules gets one
//! place; every normalized rule becomes one transition with its antecedents
//! as input places and its consequent as the single output place.
//!
//! Place degrees (α) are not stored on the net. [`reason`] computes them for
//! a given input assignment, and a [`Marking`] carries them in simulation.

mod dot;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Degree, EdmModel, Proposition, VariableKind};
use crate::normalize::{NormalizedRule, RuleOrigin};

pub use dot::{net_to_dot, reachability_to_dot};

/// Zero-based place index; displayed 1-based as `p1`, `p2`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlaceId(pub usize);

/// Zero-based transition index; displayed 1-based as `t1`, `t2`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransitionId(pub usize);

impl fmt::Display for PlaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0 + 1)
    }
}

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Place {
    pub proposition: Proposition,
    pub kind: VariableKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub origin: RuleOrigin,
    pub inputs: Vec<PlaceId>,
    pub output: PlaceId,
    pub cf: Degree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyPetriNet {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    index: HashMap<Proposition, PlaceId>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FpnError {
    #[error("cannot compile an empty rule set")]
    EmptyRuleSet,
    #[error("proposition {0} is not part of the net")]
    UnknownProposition(String),
    #[error("the net has a cycle through {0}")]
    CyclicNet(String),
}

impl FuzzyPetriNet {
    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn place(&self, id: PlaceId) -> &Place {
        &self.places[id.0]
    }

    pub fn transition(&self, id: TransitionId) -> &Transition {
        &self.transitions[id.0]
    }

    pub fn place_ids(&self) -> impl Iterator<Item = PlaceId> {
        (0..self.places.len()).map(PlaceId)
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn place_of(&self, prop: &Proposition) -> Option<PlaceId> {
        self.index.get(prop).copied()
    }

    /// γ: the proposition labelling a place.
    pub fn label(&self, place: PlaceId) -> &Proposition {
        &self.places[place.0].proposition
    }

    /// D, in place order.
    pub fn propositions(&self) -> impl Iterator<Item = &Proposition> {
        self.places.iter().map(|p| &p.proposition)
    }

    /// I(p, t)
    pub fn input(&self, place: PlaceId, transition: TransitionId) -> bool {
        self.transitions[transition.0].inputs.contains(&place)
    }

    /// O(t, p)
    pub fn output(&self, transition: TransitionId, place: PlaceId) -> bool {
        self.transitions[transition.0].output == place
    }

    /// f(t)
    pub fn cf(&self, transition: TransitionId) -> Degree {
        self.transitions[transition.0].cf
    }

    /// Transitions with `place` as output.
    pub fn producers(&self, place: PlaceId) -> impl Iterator<Item = TransitionId> + '_ {
        self.transition_ids()
            .filter(move |t| self.transitions[t.0].output == place)
    }

    /// Transitions with `place` as an input.
    pub fn consumers(&self, place: PlaceId) -> impl Iterator<Item = TransitionId> + '_ {
        self.transition_ids()
            .filter(move |t| self.transitions[t.0].inputs.contains(&place))
    }

    /// Arc count: one per input place of each transition plus one output arc.
    pub fn arc_count(&self) -> usize {
        self.transitions.iter().map(|t| t.inputs.len() + 1).sum()
    }

    /// Place order such that every transition's inputs precede its output,
    /// or the first place found on a cycle.
    pub fn topological_places(&self) -> Result<Vec<PlaceId>, PlaceId> {
        let n = self.places.len();
        let mut indegree = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for t in &self.transitions {
            for i in &t.inputs {
                succ[i.0].push(t.output.0);
                indegree[t.output.0] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&p| indegree[p] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(p) = queue.pop_front() {
            order.push(PlaceId(p));
            for &q in &succ[p] {
                indegree[q] -= 1;
                if indegree[q] == 0 {
                    queue.push_back(q);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(PlaceId(indegree.iter().position(|&d| d > 0).unwrap_or(0)))
        }
    }
}

/// Builds the net for `rules`. Places follow the model's variable and term
/// declaration order, restricted to propositions that occur in the rules;
/// transitions follow rule order.
pub fn compile_fpn(rules: &[NormalizedRule], model: &EdmModel) -> Result<FuzzyPetriNet, FpnError> {
    if rules.is_empty() {
        return Err(FpnError::EmptyRuleSet);
    }
    let used: BTreeSet<&Proposition> = rules
        .iter()
        .flat_map(|r| r.antecedents.iter().chain([&r.consequent]))
        .collect();
    if let Some(unknown) = used.iter().find(|p| model.kind_of(p).is_none()) {
        return Err(FpnError::UnknownProposition(unknown.to_string()));
    }

    let mut places = Vec::new();
    let mut index = HashMap::new();
    for var in &model.variables {
        for prop in var.propositions() {
            if used.contains(&prop) {
                index.insert(prop.clone(), PlaceId(places.len()));
                places.push(Place {
                    proposition: prop,
                    kind: var.kind,
                });
            }
        }
    }

    let transitions = rules
        .iter()
        .map(|r| Transition {
            origin: r.origin.clone(),
            inputs: r.antecedents.iter().map(|p| index[p]).collect(),
            output: index[&r.consequent],
            cf: r.cf,
        })
        .collect();

    Ok(FuzzyPetriNet {
        places,
        transitions,
        index,
    })
}

/// Certainty-factor reasoning over an acyclic net.
///
/// Places are visited in topological order. A transition whose input places
/// all have degrees contributes `min(inputs) * f(t)` to its output place; a
/// place takes the maximum of its given input degree and all contributions.
/// Places with neither are left out of the result, which is in place order.
pub fn reason(
    net: &FuzzyPetriNet,
    inputs: &IndexMap<Proposition, Degree>,
) -> Result<IndexMap<Proposition, Degree>, FpnError> {
    let mut alpha: Vec<Option<Degree>> = vec![None; net.places.len()];
    for (prop, degree) in inputs {
        let place = net
            .place_of(prop)
            .ok_or_else(|| FpnError::UnknownProposition(prop.to_string()))?;
        alpha[place.0] = Some(alpha[place.0].map_or(*degree, |d| d.max(*degree)));
    }
    let order = net
        .topological_places()
        .map_err(|p| FpnError::CyclicNet(net.label(p).to_string()))?;

    let mut producers: Vec<Vec<usize>> = vec![Vec::new(); net.places.len()];
    for (ti, t) in net.transitions.iter().enumerate() {
        producers[t.output.0].push(ti);
    }

    for place in order {
        for &ti in &producers[place.0] {
            let t = &net.transitions[ti];
            let strength = t
                .inputs
                .iter()
                .map(|i| alpha[i.0])
                .try_fold(Degree::ONE, |acc, d| d.map(|d| acc.min(d)));
            if let Some(strength) = strength {
                let contribution = strength.scale(t.cf);
                alpha[place.0] = Some(alpha[place.0].map_or(contribution, |d| d.max(contribution)));
            }
        }
    }

    Ok(net
        .places
        .iter()
        .zip(alpha)
        .filter_map(|(p, a)| a.map(|a| (p.proposition.clone(), a)))
        .collect())
}

/// The set of marked places, plus a degree for marked places when used in
/// reasoning mode.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Marking {
    tokens: BTreeSet<PlaceId>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    degrees: BTreeMap<PlaceId, DegreeBits>,
}

/// `Degree` stored by bit pattern so markings can be hashed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Degree", try_from = "Degree")]
struct DegreeBits(u64);

impl From<DegreeBits> for Degree {
    fn from(b: DegreeBits) -> Degree {
        Degree::saturating(f64::from_bits(b.0))
    }
}

impl From<Degree> for DegreeBits {
    fn from(d: Degree) -> DegreeBits {
        DegreeBits(d.value().to_bits())
    }
}

impl Marking {
    pub fn new(tokens: impl IntoIterator<Item = PlaceId>) -> Self {
        Marking {
            tokens: tokens.into_iter().collect(),
            degrees: BTreeMap::new(),
        }
    }

    pub fn with_degrees(degrees: impl IntoIterator<Item = (PlaceId, Degree)>) -> Self {
        let degrees: BTreeMap<PlaceId, DegreeBits> =
            degrees.into_iter().map(|(p, d)| (p, d.into())).collect();
        Marking {
            tokens: degrees.keys().copied().collect(),
            degrees,
        }
    }

    pub fn tokens(&self) -> &BTreeSet<PlaceId> {
        &self.tokens
    }

    pub fn is_marked(&self, place: PlaceId) -> bool {
        self.tokens.contains(&place)
    }

    pub fn degree(&self, place: PlaceId) -> Option<Degree> {
        self.degrees.get(&place).map(|&b| b.into())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn is_subset(&self, other: &Marking) -> bool {
        self.tokens.is_subset(&other.tokens)
    }

    /// 0/1 vector over all places of `net`.
    pub fn vector(&self, net: &FuzzyPetriNet) -> Vec<u8> {
        net.place_ids()
            .map(|p| u8::from(self.is_marked(p)))
            .collect()
    }
}

/// Whether `transition` can fire: all inputs marked and its output not yet
/// derived. Tokens are never consumed, so a transition fires at most once
/// along any path.
pub fn is_enabled(net: &FuzzyPetriNet, marking: &Marking, transition: TransitionId) -> bool {
    let t = &net.transitions[transition.0];
    !marking.is_marked(t.output) && t.inputs.iter().all(|p| marking.is_marked(*p))
}

/// Every enabled transition with the marking that results from firing it.
/// Successors keep all tokens of `marking` and add the output place.
pub fn fire_boolean(net: &FuzzyPetriNet, marking: &Marking) -> Vec<(TransitionId, Marking)> {
    net.transition_ids()
        .filter(|&t| is_enabled(net, marking, t))
        .map(|t| {
            let mut next = Marking::new(marking.tokens.iter().copied());
            next.tokens.insert(net.transitions[t.0].output);
            (t, next)
        })
        .collect()
}
