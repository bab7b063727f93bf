//! Web services and the G-Net that models each of them: a Generic Switch
//! Place (methods and attributes) plus an internal predicate/transition net.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::guards::{ActionSeq, Condition, Inscription};
use crate::value::{Value, ValueType};

/// Joins an original identifier and a renaming suffix. User identifiers
/// must not contain it, so renamed identifiers are always fresh.
pub const RENAME_SEPARATOR: char = '§';

/// Name and component-service set of the zero service.
pub const EMPTY_SERVICE: &str = "Empty";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WebService {
    pub name: String,
    #[serde(default)]
    pub desc: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loc: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    pub component_services: BTreeSet<String>,
    pub net: GNetModel,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GNetModel {
    pub gsp: GspSpec,
    pub is: InternalStructure,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GspSpec {
    #[serde(default)]
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub attributes: Vec<AttributeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub params: Vec<Param>,
    pub init_place: String,
    pub goal_places: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AttributeSpec {
    pub name: String,
    pub value_type: ValueType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Value>,
    /// Finite set of values a free occurrence of the attribute ranges over.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<Value>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InternalStructure {
    pub places: Vec<Place>,
    #[serde(default)]
    pub transitions: Vec<String>,
    #[serde(default)]
    pub arcs: Vec<Arc>,
    #[serde(default, with = "inscription_entries")]
    pub inscriptions: BTreeMap<Arc, Inscription>,
    #[serde(default)]
    pub conditions: BTreeMap<String, Condition>,
    #[serde(default)]
    pub actions: BTreeMap<String, ActionSeq>,
    #[serde(default)]
    pub labels: BTreeMap<String, Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Place {
    pub id: String,
    pub kind: PlaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invoked_gnet: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub using_method: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PlaceKind {
    Normal,
    Goal,
    InstantiatedSwitch,
}

/// Place label: an operation name, the silent action, the goal marker, or a
/// reference to a method of another service.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Label {
    Op(String),
    Tau,
    Goal,
    IspRef { service: String, method: String },
}

/// A flow-relation arc. Endpoints are resolved against the place and
/// transition id sets, which are required to be disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arc {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Place,
    Transition,
}

mod inscription_entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        from: String,
        to: String,
        inscription: Inscription,
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<Arc, Inscription>, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> =
            map.iter().map(|(a, i)| Entry { from: a.from.clone(), to: a.to.clone(), inscription: i.clone() }).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Arc, Inscription>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries.into_iter().map(|e| (Arc::new(e.from, e.to), e.inscription)).collect())
    }
}

impl Arc {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Arc { from: from.into(), to: to.into() }
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.from, self.to)
    }
}

impl Place {
    pub fn normal(id: impl Into<String>) -> Self {
        Place { id: id.into(), kind: PlaceKind::Normal, invoked_gnet: None, using_method: None }
    }

    pub fn goal(id: impl Into<String>) -> Self {
        Place { id: id.into(), kind: PlaceKind::Goal, invoked_gnet: None, using_method: None }
    }

    pub fn isp(id: impl Into<String>, service: impl Into<String>, method: impl Into<String>) -> Self {
        Place {
            id: id.into(),
            kind: PlaceKind::InstantiatedSwitch,
            invoked_gnet: Some(service.into()),
            using_method: Some(method.into()),
        }
    }

    pub fn is_isp(&self) -> bool {
        self.kind == PlaceKind::InstantiatedSwitch
    }
}

impl Label {
    pub fn op(name: impl Into<String>) -> Self {
        Label::Op(name.into())
    }

    pub fn isp(service: impl Into<String>, method: impl Into<String>) -> Self {
        Label::IspRef { service: service.into(), method: method.into() }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Label::Op(_) => "op",
            Label::Tau => "tau",
            Label::Goal => "goal",
            Label::IspRef { .. } => "ispRef",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Op(name) => f.write_str(name),
            Label::Tau => f.write_str("τ"),
            Label::Goal => f.write_str("goal"),
            Label::IspRef { service, method } => write!(f, "ISP({service}.{method})"),
        }
    }
}

impl InternalStructure {
    pub fn place(&self, id: &str) -> Option<&Place> {
        self.places.iter().find(|p| p.id == id)
    }

    pub fn place_mut(&mut self, id: &str) -> Option<&mut Place> {
        self.places.iter_mut().find(|p| p.id == id)
    }

    pub fn has_place(&self, id: &str) -> bool {
        self.place(id).is_some()
    }

    pub fn has_transition(&self, id: &str) -> bool {
        self.transitions.iter().any(|t| t == id)
    }

    pub fn node_kind(&self, id: &str) -> Option<NodeKind> {
        if self.has_place(id) {
            Some(NodeKind::Place)
        } else if self.has_transition(id) {
            Some(NodeKind::Transition)
        } else {
            None
        }
    }

    pub fn place_ids(&self) -> BTreeSet<String> {
        self.places.iter().map(|p| p.id.clone()).collect()
    }

    /// Places with an arc into `t`, in arc order.
    pub fn inputs_of(&self, t: &str) -> Vec<&str> {
        self.arcs.iter().filter(|a| a.to == t).map(|a| a.from.as_str()).collect()
    }

    /// Places `t` has an arc into, in arc order.
    pub fn outputs_of(&self, t: &str) -> Vec<&str> {
        self.arcs.iter().filter(|a| a.from == t).map(|a| a.to.as_str()).collect()
    }

    /// Nodes with an arc into `node`.
    pub fn preset(&self, node: &str) -> Vec<&str> {
        self.inputs_of(node)
    }

    /// Nodes `node` has an arc into.
    pub fn postset(&self, node: &str) -> Vec<&str> {
        self.outputs_of(node)
    }

    pub fn condition(&self, t: &str) -> Option<&Condition> {
        self.conditions.get(t)
    }

    pub fn inscription(&self, from: &str, to: &str) -> Option<&Inscription> {
        self.inscriptions.get(&Arc::new(from, to))
    }

    /// Copy with every place and transition id mapped through `f`.
    pub fn map_ids(&self, f: impl Fn(&str) -> String) -> InternalStructure {
        InternalStructure {
            places: self.places.iter().map(|p| Place { id: f(&p.id), ..p.clone() }).collect(),
            transitions: self.transitions.iter().map(|t| f(t)).collect(),
            arcs: self.arcs.iter().map(|a| Arc::new(f(&a.from), f(&a.to))).collect(),
            inscriptions: self.inscriptions.iter().map(|(a, i)| (Arc::new(f(&a.from), f(&a.to)), i.clone())).collect(),
            conditions: self.conditions.iter().map(|(t, c)| (f(t), c.clone())).collect(),
            actions: self.actions.iter().map(|(t, a)| (f(t), a.clone())).collect(),
            labels: self.labels.iter().map(|(p, l)| (f(p), l.clone())).collect(),
        }
    }

    /// Every place and transition identifier.
    pub fn ids(&self) -> BTreeSet<String> {
        self.places.iter().map(|p| p.id.clone()).chain(self.transitions.iter().cloned()).collect()
    }
}

pub fn renamed_id(id: &str, suffix: &str) -> String {
    format!("{id}{RENAME_SEPARATOR}{suffix}")
}

/// Smallest positive integer `k` such that suffixing every id in `incoming`
/// with `§k` collides with nothing in `taken`.
pub fn fresh_suffix(taken: &BTreeSet<String>, incoming: &BTreeSet<String>) -> String {
    (1u64..)
        .map(|k| k.to_string())
        .find(|k| incoming.iter().all(|id| !taken.contains(&renamed_id(id, k))))
        .expect("unbounded search")
}

impl WebService {
    pub fn method(&self, name: &str) -> Option<&MethodSpec> {
        self.net.gsp.methods.iter().find(|m| m.name == name)
    }

    /// The first declared method. Composed and atomic services declare
    /// exactly one.
    pub fn main_method(&self) -> Option<&MethodSpec> {
        self.net.gsp.methods.first()
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.net.gsp.attributes.iter().find(|a| a.name == name)
    }

    /// A method-less single-place net with no transitions. Invoking it
    /// completes immediately.
    pub fn is_empty_net(&self) -> bool {
        self.net.gsp.methods.is_empty() && self.net.is.places.len() == 1 && self.net.is.transitions.is_empty()
    }

    /// The zero service of the algebra.
    pub fn is_empty_service(&self) -> bool {
        self.is_empty_net() && self.component_services.len() == 1 && self.component_services.contains(EMPTY_SERVICE)
    }

    pub fn is_basic(&self) -> bool {
        self.component_services.len() == 1 && self.component_services.contains(&self.name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("service serialises") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Renames every place and transition `x` to `x§suffix`, rewriting arcs,
/// inscriptions, conditions, actions, labels and method references. Labels
/// and component services are unchanged.
pub fn rename_apart(ws: &WebService, suffix: &str) -> WebService {
    assert!(!suffix.is_empty(), "rename suffix must be non-empty");
    let f = |id: &str| renamed_id(id, suffix);
    let mut out = ws.clone();
    out.net.is = ws.net.is.map_ids(f);
    for m in &mut out.net.gsp.methods {
        m.init_place = f(&m.init_place);
        m.goal_places = m.goal_places.iter().map(|g| f(g)).collect();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    EmptyName,
    EmptyComponentServices,
    DuplicateMethod,
    DuplicateAttribute,
    UnknownInitPlace,
    NoGoalPlaces,
    UnknownGoalPlace,
    GoalPlaceNotGoalKind,
    InitIsGoal,
    AttributeTypeMismatch,
    EmptyPlaceSet,
    EmptyId,
    DuplicatePlace,
    DuplicateTransition,
    PlaceTransitionClash,
    DanglingArc,
    NonBipartiteArc,
    DuplicateArc,
    InscriptionOnUnknownArc,
    InputInscriptionNotPattern,
    ConditionOnUnknownTransition,
    ActionOnUnknownTransition,
    MissingLabel,
    LabelOnUnknownPlace,
    GoalWithoutGoalLabel,
    GoalLabelOnNonGoal,
    IspWithoutIspLabel,
    IspLabelOnNonIsp,
    IspMissingTarget,
    IspLabelMismatch,
    SwitchFieldsOnNonIsp,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::EmptyName => "empty service name",
            Rule::EmptyComponentServices => "empty component-service set",
            Rule::DuplicateMethod => "duplicate method name",
            Rule::DuplicateAttribute => "duplicate attribute name",
            Rule::UnknownInitPlace => "method init place does not exist",
            Rule::NoGoalPlaces => "method has no goal place",
            Rule::UnknownGoalPlace => "method goal place does not exist",
            Rule::GoalPlaceNotGoalKind => "method goal place is not a goal place",
            Rule::InitIsGoal => "method init place is also a goal place",
            Rule::AttributeTypeMismatch => "attribute value does not have the declared type",
            Rule::EmptyPlaceSet => "net has no places",
            Rule::EmptyId => "empty identifier",
            Rule::DuplicatePlace => "duplicate place id",
            Rule::DuplicateTransition => "duplicate transition id",
            Rule::PlaceTransitionClash => "id used for both a place and a transition",
            Rule::DanglingArc => "arc endpoint does not exist",
            Rule::NonBipartiteArc => "non-bipartite arc",
            Rule::DuplicateArc => "duplicate arc",
            Rule::InscriptionOnUnknownArc => "inscription on a missing arc",
            Rule::InputInscriptionNotPattern => "input-arc inscription is not a variable pattern",
            Rule::ConditionOnUnknownTransition => "condition on a missing transition",
            Rule::ActionOnUnknownTransition => "action on a missing transition",
            Rule::MissingLabel => "place has no label",
            Rule::LabelOnUnknownPlace => "label on a missing place",
            Rule::GoalWithoutGoalLabel => "goal place not labelled goal",
            Rule::GoalLabelOnNonGoal => "goal label on a non-goal place",
            Rule::IspWithoutIspLabel => "ISP place not labelled with an ISP reference",
            Rule::IspLabelOnNonIsp => "ISP reference label on a non-ISP place",
            Rule::IspMissingTarget => "ISP missing invocation target",
            Rule::IspLabelMismatch => "ISP label disagrees with invokedGnet/usingMethod",
            Rule::SwitchFieldsOnNonIsp => "invokedGnet/usingMethod set on a non-ISP place",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// The offending element, e.g. `place p1` or `arc (p1, p2)`.
    pub element: String,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub service: String,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "service {}: {} violation(s)", self.service, self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Checks the service against the G-Net meta-model. Violations are
/// returned as data; an empty list means the service is well formed.
pub fn validate(ws: &WebService) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |element: String, rule: Rule| out.push(Violation { element, rule });
    let is = &ws.net.is;
    let gsp = &ws.net.gsp;

    if ws.name.is_empty() {
        push("service".into(), Rule::EmptyName);
    }
    if ws.component_services.is_empty() {
        push(format!("service {}", ws.name), Rule::EmptyComponentServices);
    }

    // nodes
    if is.places.is_empty() {
        push("net".into(), Rule::EmptyPlaceSet);
    }
    let mut place_ids = BTreeSet::new();
    for p in &is.places {
        if p.id.is_empty() {
            push("place".into(), Rule::EmptyId);
        }
        if !place_ids.insert(p.id.as_str()) {
            push(format!("place {}", p.id), Rule::DuplicatePlace);
        }
    }
    let mut transition_ids = BTreeSet::new();
    for t in &is.transitions {
        if t.is_empty() {
            push("transition".into(), Rule::EmptyId);
        }
        if !transition_ids.insert(t.as_str()) {
            push(format!("transition {t}"), Rule::DuplicateTransition);
        }
        if place_ids.contains(t.as_str()) {
            push(format!("transition {t}"), Rule::PlaceTransitionClash);
        }
    }

    // arcs
    let kind = |id: &str| {
        if place_ids.contains(id) {
            Some(NodeKind::Place)
        } else if transition_ids.contains(id) {
            Some(NodeKind::Transition)
        } else {
            None
        }
    };
    let mut seen_arcs = BTreeSet::new();
    for a in &is.arcs {
        let el = format!("arc {a}");
        if !seen_arcs.insert(a) {
            push(el.clone(), Rule::DuplicateArc);
        }
        match (kind(&a.from), kind(&a.to)) {
            (None, _) | (_, None) => push(el, Rule::DanglingArc),
            (Some(x), Some(y)) if x == y => push(el, Rule::NonBipartiteArc),
            _ => {}
        }
    }
    for (a, insc) in &is.inscriptions {
        if !seen_arcs.contains(a) {
            push(format!("inscription on {a}"), Rule::InscriptionOnUnknownArc);
        } else if kind(&a.from) == Some(NodeKind::Place) && !insc.is_pattern() {
            push(format!("inscription on {a}"), Rule::InputInscriptionNotPattern);
        }
    }
    for t in is.conditions.keys() {
        if !transition_ids.contains(t.as_str()) {
            push(format!("condition on {t}"), Rule::ConditionOnUnknownTransition);
        }
    }
    for t in is.actions.keys() {
        if !transition_ids.contains(t.as_str()) {
            push(format!("action on {t}"), Rule::ActionOnUnknownTransition);
        }
    }

    // labels and place kinds
    for id in is.labels.keys() {
        if !place_ids.contains(id.as_str()) {
            push(format!("label on {id}"), Rule::LabelOnUnknownPlace);
        }
    }
    for p in &is.places {
        let el = format!("place {}", p.id);
        let label = is.labels.get(&p.id);
        if label.is_none() {
            push(el.clone(), Rule::MissingLabel);
        }
        match p.kind {
            PlaceKind::Goal => {
                if label.is_some() && label != Some(&Label::Goal) {
                    push(el.clone(), Rule::GoalWithoutGoalLabel);
                }
            }
            PlaceKind::InstantiatedSwitch => {
                match (&p.invoked_gnet, &p.using_method) {
                    (Some(s), Some(m)) if !s.is_empty() && !m.is_empty() => {
                        if let Some(Label::IspRef { service, method }) = label {
                            if service != s || method != m {
                                push(el.clone(), Rule::IspLabelMismatch);
                            }
                        }
                    }
                    _ => push(el.clone(), Rule::IspMissingTarget),
                }
                if label.is_some() && !matches!(label, Some(Label::IspRef { .. })) {
                    push(el.clone(), Rule::IspWithoutIspLabel);
                }
            }
            PlaceKind::Normal => {}
        }
        if p.kind != PlaceKind::Goal && label == Some(&Label::Goal) {
            push(el.clone(), Rule::GoalLabelOnNonGoal);
        }
        if p.kind != PlaceKind::InstantiatedSwitch {
            if matches!(label, Some(Label::IspRef { .. })) {
                push(el.clone(), Rule::IspLabelOnNonIsp);
            }
            if p.invoked_gnet.is_some() || p.using_method.is_some() {
                push(el, Rule::SwitchFieldsOnNonIsp);
            }
        }
    }

    // interface
    let mut method_names = BTreeSet::new();
    for m in &gsp.methods {
        let el = format!("method {}", m.name);
        if !method_names.insert(m.name.as_str()) {
            push(el.clone(), Rule::DuplicateMethod);
        }
        if !place_ids.contains(m.init_place.as_str()) {
            push(el.clone(), Rule::UnknownInitPlace);
        }
        if m.goal_places.is_empty() {
            push(el.clone(), Rule::NoGoalPlaces);
        }
        for g in &m.goal_places {
            match is.place(g) {
                None => push(format!("{el} goal {g}"), Rule::UnknownGoalPlace),
                Some(p) if p.kind != PlaceKind::Goal => push(format!("{el} goal {g}"), Rule::GoalPlaceNotGoalKind),
                Some(_) => {}
            }
        }
        let single_place_empty = is.places.len() == 1 && is.transitions.is_empty();
        if m.goal_places.contains(&m.init_place) && !single_place_empty {
            push(el, Rule::InitIsGoal);
        }
    }
    let mut attr_names = BTreeSet::new();
    for a in &gsp.attributes {
        let el = format!("attribute {}", a.name);
        if !attr_names.insert(a.name.as_str()) {
            push(el.clone(), Rule::DuplicateAttribute);
        }
        let ill_typed = a.initial.iter().chain(a.domain.iter().flatten()).any(|v| v.value_type() != a.value_type);
        if ill_typed {
            push(el, Rule::AttributeTypeMismatch);
        }
    }

    ValidationReport { service: ws.name.clone(), violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{atomic, empty_service};

    #[test]
    fn empty_service_is_valid() {
        let r = validate(&empty_service());
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn place_to_place_arc_is_one_violation() {
        let mut ws = atomic("S1", "a1");
        ws.net.is.arcs.push(Arc::new("p1", "p2"));
        let r = validate(&ws);
        assert_eq!(r.violations.len(), 1, "{r}");
        assert_eq!(r.violations[0].rule, Rule::NonBipartiteArc);
        assert_eq!(r.violations[0].rule.to_string(), "non-bipartite arc");
        assert_eq!(r.violations[0].element, "arc (p1, p2)");
    }

    #[test]
    fn isp_without_method_is_one_violation() {
        let mut ws = atomic("S1", "a1");
        ws.net.is.places[0] = Place {
            id: "p1".into(),
            kind: PlaceKind::InstantiatedSwitch,
            invoked_gnet: Some("S2".into()),
            using_method: None,
        };
        ws.net.is.labels.insert("p1".into(), Label::isp("S2", "m"));
        let r = validate(&ws);
        assert_eq!(r.violations.len(), 1, "{r}");
        assert_eq!(r.violations[0].rule, Rule::IspMissingTarget);
        assert_eq!(r.violations[0].rule.to_string(), "ISP missing invocation target");
    }

    #[test]
    fn label_and_kind_cross_checks() {
        let mut ws = atomic("S1", "a1");
        ws.net.is.labels.insert("p2".into(), Label::Tau);
        ws.net.is.labels.insert("p1".into(), Label::Goal);
        let r = validate(&ws);
        assert!(r.has(Rule::GoalWithoutGoalLabel));
        assert!(r.has(Rule::GoalLabelOnNonGoal));

        let mut ws = atomic("S1", "a1");
        ws.net.is.labels.remove("p1");
        ws.net.is.labels.insert("zz".into(), Label::Tau);
        let r = validate(&ws);
        assert!(r.has(Rule::MissingLabel));
        assert!(r.has(Rule::LabelOnUnknownPlace));

        let mut ws = atomic("S1", "a1");
        ws.net.is.labels.insert("p1".into(), Label::isp("X", "m"));
        assert!(validate(&ws).has(Rule::IspLabelOnNonIsp));

        let mut ws = atomic("S1", "a1");
        ws.net.is.places[0] = Place::isp("p1", "X", "m");
        ws.net.is.labels.insert("p1".into(), Label::isp("Y", "m"));
        assert!(validate(&ws).has(Rule::IspLabelMismatch));
    }

    #[test]
    fn structural_errors() {
        let mut ws = atomic("S1", "a1");
        ws.net.is.arcs.push(Arc::new("t1", "nowhere"));
        ws.net.is.transitions.push("p1".into());
        ws.net.is.conditions.insert("t9".into(), Condition::Always);
        ws.net.is.inscriptions.insert(Arc::new("p1", "t1"), crate::guards::parse_inscription("x + 1").unwrap());
        let r = validate(&ws);
        assert!(r.has(Rule::DanglingArc));
        assert!(r.has(Rule::PlaceTransitionClash));
        assert!(r.has(Rule::ConditionOnUnknownTransition));
        assert!(r.has(Rule::InputInscriptionNotPattern));
    }

    #[test]
    fn interface_errors() {
        let mut ws = atomic("S1", "a1");
        let m = ws.net.gsp.methods[0].clone();
        ws.net.gsp.methods.push(m);
        ws.net.gsp.methods[0].init_place = "p2".into();
        ws.net.gsp.attributes.push(AttributeSpec {
            name: "B".into(),
            value_type: ValueType::Bool,
            initial: Some(Value::Int(1)),
            domain: None,
        });
        let r = validate(&ws);
        assert!(r.has(Rule::DuplicateMethod));
        assert!(r.has(Rule::InitIsGoal));
        assert!(r.has(Rule::AttributeTypeMismatch));
        ws.component_services.clear();
        assert!(validate(&ws).has(Rule::EmptyComponentServices));
    }

    #[test]
    fn rename_suffixes_every_id() {
        let ws = atomic("S1", "a1");
        let r = rename_apart(&ws, "L");
        assert_eq!(r.net.is.places[0].id, "p1§L");
        assert_eq!(r.net.is.places[0].kind, ws.net.is.places[0].kind);
        assert_eq!(r.net.is.labels["p1§L"], Label::op("a1"));
        assert_eq!(r.net.gsp.methods[0].init_place, "p1§L");
        assert_eq!(r.component_services, ws.component_services);
        assert!(validate(&r).is_ok());
    }

    #[test]
    fn fresh_suffix_skips_collisions() {
        let taken: BTreeSet<String> = ["p1§1".to_string(), "p1".to_string()].into();
        let incoming: BTreeSet<String> = ["p1".to_string()].into();
        assert_eq!(fresh_suffix(&taken, &incoming), "2");
    }

    #[test]
    fn json_field_names() {
        let ws = atomic("S1", "a1");
        let json = ws.to_json();
        for key in ["componentServices", "initPlace", "goalPlaces", "\"gsp\"", "\"is\""] {
            assert!(json.contains(key), "missing {key}");
        }
        assert_eq!(WebService::from_json(&json).unwrap(), ws);
    }
}
