//! The composition operators. Composite services are skeleton nets whose
//! instantiated switch places invoke the operands by name, so evaluating a
//! composition needs the operands in a [`Registry`](crate::registry::Registry)
//! when it is later simulated or inlined.
//!
//! Every composite declares a single method whose goal places are exactly
//! the goal-labelled places. Places are `p1..pN` and transitions `t1..tM`
//! in construction order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::guards::{parse_condition, ActionSeq, Assignment, CmpOp, Condition, Expr, Inscription};
use crate::model::{
    fresh_suffix, renamed_id, validate, Arc, AttributeSpec, GNetModel, GspSpec, InternalStructure, Label, MethodSpec,
    Place, PlaceKind, WebService, EMPTY_SERVICE,
};
use crate::value::{Value, ValueType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("discriminator needs at least one racing service")]
    EmptyBranchSet,
    #[error("selection needs at least one service")]
    EmptySelection,
    #[error("service `{0}` has no `req` method")]
    MissingReqMethod(String),
    #[error("malformed block `{block}`: {reason}")]
    MalformedBlock { block: String, reason: String },
    #[error("replacement service must not be the empty service")]
    EmptyReplacement,
}

/// A net fragment spliced in by refinement. Entries have no incoming arcs
/// and exits no outgoing arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockFragment {
    pub name: String,
    #[serde(flatten)]
    pub structure: InternalStructure,
    pub entries: BTreeSet<String>,
    pub exits: BTreeSet<String>,
    /// Attributes the block's inscriptions use; added to the refined
    /// service's attribute set.
    #[serde(default)]
    pub attributes: Vec<AttributeSpec>,
}

/// Computes the selected index (1-based) from the responses gathered by a
/// selection. The expression may read `resp`.
pub trait Scorer {
    fn choice(&self, n: usize) -> Expr;
}

/// Picks the first service.
#[derive(Debug, Clone, Copy, Default)]
pub struct LowestIndex;

impl Scorer for LowestIndex {
    fn choice(&self, _n: usize) -> Expr {
        Expr::lit(1)
    }
}

/// Always picks the given index.
#[derive(Debug, Clone, Copy)]
pub struct FixedIndex(pub i64);

impl Scorer for FixedIndex {
    fn choice(&self, _n: usize) -> Expr {
        Expr::lit(self.0)
    }
}

pub const REQ_METHOD: &str = "req";

fn pid(i: usize) -> String {
    format!("p{i}")
}

fn tid(i: usize) -> String {
    format!("t{i}")
}

/// Method name an instantiated switch place uses to invoke `ws`.
pub fn invocation_method(ws: &WebService) -> String {
    ws.main_method().map(|m| m.name.clone()).unwrap_or_else(|| EMPTY_SERVICE.to_string())
}

struct Skeleton {
    is: InternalStructure,
}

impl Skeleton {
    fn new(places: usize, transitions: usize) -> Self {
        let mut is = InternalStructure::default();
        for i in 1..=places {
            is.places.push(Place::normal(pid(i)));
            is.labels.insert(pid(i), Label::Tau);
        }
        is.transitions = (1..=transitions).map(tid).collect();
        Skeleton { is }
    }

    fn arcs(&mut self, arcs: &[(&str, usize, usize)]) {
        for &(dir, a, b) in arcs {
            let arc = match dir {
                "pt" => Arc::new(pid(a), tid(b)),
                "tp" => Arc::new(tid(a), pid(b)),
                _ => unreachable!("arc direction"),
            };
            self.is.arcs.push(arc);
        }
    }

    fn pt(&mut self, p: usize, t: usize) {
        self.is.arcs.push(Arc::new(pid(p), tid(t)));
    }

    fn tp(&mut self, t: usize, p: usize) {
        self.is.arcs.push(Arc::new(tid(t), pid(p)));
    }

    fn isp(&mut self, p: usize, ws: &WebService) {
        self.isp_method(p, ws, &invocation_method(ws));
    }

    fn isp_method(&mut self, p: usize, ws: &WebService, method: &str) {
        let id = pid(p);
        *self.is.place_mut(&id).expect("skeleton place") = Place::isp(&id, &ws.name, method);
        self.is.labels.insert(id, Label::isp(&ws.name, method));
    }

    fn op(&mut self, p: usize, name: &str) {
        self.is.labels.insert(pid(p), Label::op(name));
    }

    fn goal(&mut self, p: usize) {
        let id = pid(p);
        self.is.place_mut(&id).expect("skeleton place").kind = PlaceKind::Goal;
        self.is.labels.insert(id, Label::Goal);
    }

    fn inscribe(&mut self, arc: Arc, text: &str) {
        let insc = crate::guards::parse_inscription(text).expect("static inscription");
        self.is.inscriptions.insert(arc, insc);
    }

    fn gate(&mut self, t: usize, c: Condition) {
        self.is.conditions.insert(tid(t), c);
    }

    fn action(&mut self, t: usize, a: ActionSeq) {
        self.is.actions.insert(tid(t), a);
    }

    fn finish(
        self,
        name: String,
        desc: String,
        cs: BTreeSet<String>,
        method: &str,
        goal: usize,
        attributes: Vec<AttributeSpec>,
    ) -> WebService {
        WebService {
            name,
            desc,
            loc: None,
            url: None,
            component_services: cs,
            net: GNetModel {
                gsp: GspSpec {
                    methods: vec![MethodSpec {
                        name: method.to_string(),
                        description: String::new(),
                        params: Vec::new(),
                        init_place: pid(1),
                        goal_places: [pid(goal)].into(),
                    }],
                    attributes,
                },
                is: self.is,
            },
        }
    }
}

fn union_cs<'a>(parts: impl IntoIterator<Item = &'a WebService>) -> BTreeSet<String> {
    parts.into_iter().flat_map(|s| s.component_services.iter().cloned()).collect()
}

fn names<'a>(parts: impl IntoIterator<Item = &'a WebService>) -> String {
    parts.into_iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(",")
}

/// The zero service: one place, no transitions, no methods.
pub fn empty_service() -> WebService {
    let mut is = InternalStructure::default();
    is.places.push(Place::normal("p"));
    is.labels.insert("p".into(), Label::Tau);
    WebService {
        name: EMPTY_SERVICE.into(),
        desc: "Empty Web Service".into(),
        loc: None,
        url: None,
        component_services: [EMPTY_SERVICE.to_string()].into(),
        net: GNetModel { gsp: GspSpec::default(), is },
    }
}

/// A basic service performing one operation: `p1 -> t1 -> p2` with `p1`
/// labelled by the operation. Its only method is named after the
/// operation.
///
/// # Panics
/// If `name` or `op` is empty.
pub fn atomic(name: &str, op: &str) -> WebService {
    assert!(!name.is_empty() && !op.is_empty(), "atomic service needs a name and an operation");
    let mut s = Skeleton::new(2, 1);
    s.arcs(&[("pt", 1, 1), ("tp", 1, 2)]);
    s.op(1, op);
    s.goal(2);
    s.finish(name.into(), format!("basic service performing {op}"), [name.to_string()].into(), op, 2, Vec::new())
}

pub fn sequence(s1: &WebService, s2: &WebService) -> WebService {
    let mut s = Skeleton::new(3, 2);
    s.arcs(&[("pt", 1, 1), ("tp", 1, 2), ("pt", 2, 2), ("tp", 2, 3)]);
    s.isp(1, s1);
    s.isp(2, s2);
    s.goal(3);
    s.finish(
        format!("Seq({})", names([s1, s2])),
        format!("{} then {}", s1.name, s2.name),
        union_cs([s1, s2]),
        "Seq",
        3,
        Vec::new(),
    )
}

pub fn alternative(s1: &WebService, s2: &WebService) -> WebService {
    let mut s = Skeleton::new(4, 4);
    s.arcs(&[
        ("pt", 1, 1),
        ("tp", 1, 2),
        ("pt", 2, 3),
        ("tp", 3, 4),
        ("pt", 1, 2),
        ("tp", 2, 3),
        ("pt", 3, 4),
        ("tp", 4, 4),
    ]);
    s.isp(2, s1);
    s.isp(3, s2);
    s.goal(4);
    s.finish(
        format!("Alt({})", names([s1, s2])),
        format!("either {} or {}", s1.name, s2.name),
        union_cs([s1, s2]),
        "Alt",
        4,
        Vec::new(),
    )
}

pub fn iteration(s1: &WebService) -> WebService {
    let mut s = Skeleton::new(2, 2);
    s.arcs(&[("pt", 1, 1), ("tp", 1, 1), ("pt", 1, 2), ("tp", 2, 2)]);
    s.isp(1, s1);
    s.goal(2);
    s.finish(
        format!("Iter({})", s1.name),
        format!("{} repeated", s1.name),
        s1.component_services.clone(),
        "Iter",
        2,
        Vec::new(),
    )
}

/// Both operands in either order, never concurrently: `p3` holds the
/// mutual-exclusion token.
pub fn arbitrary_sequence(s1: &WebService, s2: &WebService) -> WebService {
    let mut s = Skeleton::new(9, 6);
    s.arcs(&[
        ("pt", 1, 1),
        ("tp", 1, 2),
        ("tp", 1, 3),
        ("tp", 1, 4),
        ("pt", 2, 2),
        ("tp", 2, 5),
        ("pt", 5, 4),
        ("tp", 4, 7),
        ("tp", 4, 3),
        ("pt", 7, 6),
        ("tp", 6, 9),
        ("pt", 3, 2),
        ("pt", 3, 3),
        ("pt", 3, 6),
        ("pt", 4, 3),
        ("tp", 3, 6),
        ("pt", 6, 5),
        ("tp", 5, 3),
        ("tp", 5, 8),
        ("pt", 8, 6),
    ]);
    s.isp(5, s1);
    s.isp(6, s2);
    s.goal(9);
    s.finish(
        format!("AnySeq({})", names([s1, s2])),
        format!("{} and {} in either order", s1.name, s2.name),
        union_cs([s1, s2]),
        "ArSeq",
        9,
        Vec::new(),
    )
}

pub fn parallel(s1: &WebService, s2: &WebService) -> WebService {
    let mut s = Skeleton::new(4, 2);
    s.arcs(&[("pt", 1, 1), ("tp", 1, 2), ("tp", 1, 3), ("pt", 2, 2), ("pt", 3, 2), ("tp", 2, 4)]);
    s.isp(2, s1);
    s.isp(3, s2);
    s.goal(4);
    s.finish(
        format!("Par({})", names([s1, s2])),
        format!("{} in parallel with {}", s1.name, s2.name),
        union_cs([s1, s2]),
        "Par",
        4,
        Vec::new(),
    )
}

fn eq_bool(var: &str, b: bool) -> Condition {
    Condition::Compare(Expr::var(var), CmpOp::Eq, Expr::lit(b))
}

fn assign(target: &str, value: Expr) -> Assignment {
    Assignment { target: target.into(), value }
}

/// The first of `first` to respond activates `last`; the flag `B`
/// diverts every later response straight to the goal place.
pub fn discriminator(first: &[WebService], last: &WebService) -> Result<WebService, AlgebraError> {
    if first.is_empty() {
        return Err(AlgebraError::EmptyBranchSet);
    }
    let n = first.len() + 1;
    let mut s = Skeleton::new(n + 3, n + 3);
    for i in 1..=n + 2 {
        s.pt(i, i);
    }
    for i in 2..=n {
        s.tp(1, i);
    }
    for i in 2..=n {
        s.tp(i, n + 1);
    }
    s.pt(n + 1, n + 3);
    s.tp(n + 1, n + 2);
    s.tp(n + 2, n + 3);
    s.tp(n + 3, n + 3);

    s.inscribe(Arc::new(pid(1), tid(1)), "[B]");
    s.inscribe(Arc::new(pid(n + 1), tid(n + 1)), "[B]");
    s.inscribe(Arc::new(pid(n + 1), tid(n + 3)), "[B]");
    s.gate(n + 1, eq_bool("B", true));
    s.gate(n + 3, eq_bool("B", false));
    s.action(1, ActionSeq(vec![assign("B", Expr::lit(true))]));
    s.action(n + 1, ActionSeq(vec![assign("B", Expr::lit(false))]));

    for (i, ws) in first.iter().enumerate() {
        s.isp(i + 2, ws);
    }
    s.isp(n + 2, last);
    s.goal(n + 3);

    let all: Vec<&WebService> = first.iter().chain([last]).collect();
    let flag = AttributeSpec {
        name: "B".into(),
        value_type: ValueType::Bool,
        initial: Some(Value::Bool(false)),
        domain: None,
    };
    Ok(s.finish(
        format!("Disc({};{})", names(first.iter()), last.name),
        format!("first response of {} activates {}", names(first.iter()), last.name),
        union_cs(all.iter().copied()),
        "Disc",
        n + 3,
        vec![flag],
    ))
}

pub fn selection(services: &[WebService]) -> Result<WebService, AlgebraError> {
    selection_with(services, &LowestIndex)
}

/// Sends a request to every service through its `req` method, gathers the
/// responses, lets `scorer` pick an index `j` and invokes the main method
/// of the chosen service.
pub fn selection_with(services: &[WebService], scorer: &dyn Scorer) -> Result<WebService, AlgebraError> {
    if services.is_empty() {
        return Err(AlgebraError::EmptySelection);
    }
    if let Some(ws) = services.iter().find(|ws| ws.method(REQ_METHOD).is_none()) {
        return Err(AlgebraError::MissingReqMethod(ws.name.clone()));
    }
    let n = services.len();
    let mut s = Skeleton::new(2 * n + 3, 2 * n + 2);
    let span = 2..=n + 1;
    s.pt(1, 1);
    for i in span.clone() {
        s.tp(1, i);
    }
    for i in span.clone() {
        s.pt(i, 2);
    }
    s.tp(2, n + 2);
    for i in span.clone() {
        s.pt(n + 2, i + 1);
    }
    for i in span.clone() {
        s.tp(i + 1, i + n + 1);
    }
    for i in span.clone() {
        s.pt(i + n + 1, i + n + 1);
    }
    for i in span.clone() {
        s.tp(i + n + 1, 2 * n + 3);
    }

    s.inscribe(Arc::new(pid(1), tid(1)), "[r]");
    for i in span.clone() {
        s.inscribe(Arc::new(tid(1), pid(i)), "r");
        s.inscribe(Arc::new(pid(i), tid(2)), "[resp]");
    }
    s.inscribe(Arc::new(tid(2), pid(n + 2)), "[resp]");
    for i in 3..=n + 2 {
        s.inscribe(Arc::new(pid(n + 2), tid(i)), "[j]");
        s.gate(i, parse_condition(&format!("j == {}", i - 2)).expect("static gate"));
    }
    s.action(2, ActionSeq(vec![assign("J", scorer.choice(n)), assign("j", Expr::var("J"))]));

    for (k, ws) in services.iter().enumerate() {
        let i = k + 2;
        s.isp_method(i, ws, REQ_METHOD);
        s.isp(i + n + 1, ws);
    }
    s.op(1, "Create-request");
    s.op(n + 2, "Select-Service");
    s.goal(2 * n + 3);

    let attrs = vec![
        AttributeSpec { name: "J".into(), value_type: ValueType::Int, initial: Some(Value::Int(0)), domain: None },
        AttributeSpec {
            name: "r".into(),
            value_type: ValueType::String,
            initial: Some(Value::Str("request".into())),
            domain: None,
        },
    ];
    Ok(s.finish(
        format!("Select({})", names(services)),
        format!("best of {}", names(services)),
        union_cs(services),
        "Select",
        2 * n + 3,
        attrs,
    ))
}

fn malformed(block: &BlockFragment, reason: impl Into<String>) -> AlgebraError {
    AlgebraError::MalformedBlock { block: block.name.clone(), reason: reason.into() }
}

/// Checks the entry/exit declarations, connectivity and the structural
/// rules shared with services.
pub fn check_block(block: &BlockFragment) -> Result<(), AlgebraError> {
    let is = &block.structure;
    if is.places.is_empty() {
        return Err(malformed(block, "no places"));
    }
    let probe = WebService {
        name: block.name.clone(),
        desc: String::new(),
        loc: None,
        url: None,
        component_services: [block.name.clone()].into(),
        net: GNetModel { gsp: GspSpec { methods: Vec::new(), attributes: block.attributes.clone() }, is: is.clone() },
    };
    if let Some(v) = validate(&probe).violations.first() {
        return Err(malformed(block, v.to_string()));
    }
    if is.places.iter().any(|p| p.kind == PlaceKind::Goal) {
        return Err(malformed(block, "blocks cannot contain goal places"));
    }
    let sources: BTreeSet<String> =
        is.places.iter().filter(|p| is.preset(&p.id).is_empty()).map(|p| p.id.clone()).collect();
    let sinks: BTreeSet<String> =
        is.places.iter().filter(|p| is.postset(&p.id).is_empty()).map(|p| p.id.clone()).collect();
    if block.entries.is_empty() || block.exits.is_empty() {
        return Err(malformed(block, "entry and exit sets must be non-empty"));
    }
    if sources != block.entries {
        return Err(malformed(block, "entries must be exactly the places without incoming arcs"));
    }
    if sinks != block.exits {
        return Err(malformed(block, "exits must be exactly the places without outgoing arcs"));
    }

    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for a in &is.arcs {
        adj.entry(a.from.as_str()).or_default().push(a.to.as_str());
        adj.entry(a.to.as_str()).or_default().push(a.from.as_str());
    }
    let all = is.ids();
    let start = is.places[0].id.as_str();
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for &y in adj.get(x).into_iter().flatten() {
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    if seen.len() != all.len() {
        return Err(malformed(block, "block is not connected"));
    }
    Ok(())
}

/// Replaces every place labelled `Op(op)` by the block: transitions that fed
/// such a place feed each entry, transitions it fed are fed by each exit.
/// Returns `s` unchanged when no place carries the label.
pub fn refine(s: &WebService, op: &str, block: &BlockFragment) -> Result<WebService, AlgebraError> {
    check_block(block)?;
    let target = Label::op(op);
    let removed: BTreeSet<String> =
        s.net.is.labels.iter().filter(|(_, l)| **l == target).map(|(p, _)| p.clone()).collect();
    if removed.is_empty() {
        return Ok(s.clone());
    }

    let suffix = fresh_suffix(&s.net.is.ids(), &block.structure.ids());
    let rn = |id: &str| renamed_id(id, &suffix);
    let a = block.structure.map_ids(rn);
    let entries: Vec<String> = block.entries.iter().map(|e| rn(e)).collect();
    let exits: Vec<String> = block.exits.iter().map(|e| rn(e)).collect();
    let src = &s.net.is;

    let mut is = InternalStructure::default();
    let mut spliced = false;
    for p in &src.places {
        if removed.contains(&p.id) {
            if !spliced {
                is.places.extend(a.places.iter().cloned());
                spliced = true;
            }
        } else {
            is.places.push(p.clone());
        }
    }
    is.transitions = src.transitions.iter().chain(&a.transitions).cloned().collect();

    let push_arc = |is: &mut InternalStructure, arc: Arc, insc: Option<&Inscription>| {
        if !is.arcs.contains(&arc) {
            is.arcs.push(arc.clone());
        }
        if let Some(i) = insc {
            is.inscriptions.insert(arc, i.clone());
        }
    };
    for arc in &src.arcs {
        let insc = src.inscriptions.get(arc);
        if removed.contains(&arc.to) {
            for e in &entries {
                push_arc(&mut is, Arc::new(&arc.from, e), insc);
            }
        } else if removed.contains(&arc.from) {
            for x in &exits {
                push_arc(&mut is, Arc::new(x, &arc.to), insc);
            }
        } else {
            push_arc(&mut is, arc.clone(), insc);
        }
    }
    for arc in &a.arcs {
        push_arc(&mut is, arc.clone(), a.inscriptions.get(arc));
    }

    is.conditions = src.conditions.clone();
    is.conditions.extend(a.conditions.clone());
    is.actions = src.actions.clone();
    is.actions.extend(a.actions.clone());
    is.labels = src.labels.iter().filter(|(p, _)| !removed.contains(*p)).map(|(p, l)| (p.clone(), l.clone())).collect();
    is.labels.extend(a.labels.clone());

    let mut methods = s.net.gsp.methods.clone();
    for m in &mut methods {
        if removed.contains(&m.init_place) {
            if entries.len() != 1 {
                return Err(malformed(block, "refining an initial place needs a single entry"));
            }
            m.init_place = entries[0].clone();
        }
    }
    let mut attributes = s.net.gsp.attributes.clone();
    for attr in &block.attributes {
        match attributes.iter().find(|x| x.name == attr.name) {
            Some(x) if x == attr => {}
            Some(_) => return Err(malformed(block, format!("attribute `{}` conflicts with the service", attr.name))),
            None => attributes.push(attr.clone()),
        }
    }

    let mut cs = s.component_services.clone();
    for l in a.labels.values() {
        if let Label::IspRef { service, .. } = l {
            cs.insert(service.clone());
        }
    }

    Ok(WebService {
        name: format!("Refine({},{},{})", s.name, op, block.name),
        desc: format!("{} with {} refined by {}", s.name, op, block.name),
        loc: None,
        url: None,
        component_services: cs,
        net: GNetModel { gsp: GspSpec { methods, attributes }, is },
    })
}

/// Redirects every invocation of `old` in `s` to `new`. Applies only when
/// the component services of `old` are among those of `s` and `s` invokes
/// `old` directly; otherwise `s` is returned unchanged.
pub fn replace(s: &WebService, old: &WebService, new: &WebService) -> Result<WebService, AlgebraError> {
    if new.is_empty_service() {
        return Err(AlgebraError::EmptyReplacement);
    }
    let referenced =
        s.net.is.labels.values().any(|l| matches!(l, Label::IspRef { service, .. } if *service == old.name));
    if !old.component_services.is_subset(&s.component_services) || !referenced {
        return Ok(s.clone());
    }
    let method_for = |m: &str| {
        if new.method(m).is_some() {
            m.to_string()
        } else {
            invocation_method(new)
        }
    };
    let mut out = s.clone();
    for (pid, label) in out.net.is.labels.iter_mut() {
        if let Label::IspRef { service, method } = label {
            if *service == old.name {
                let m = method_for(method);
                *label = Label::isp(&new.name, &m);
                let place = out.net.is.places.iter_mut().find(|p| p.id == *pid).expect("labelled place");
                place.invoked_gnet = Some(new.name.clone());
                place.using_method = Some(m);
            }
        }
    }
    out.component_services = s
        .component_services
        .difference(&old.component_services)
        .cloned()
        .chain(new.component_services.iter().cloned())
        .collect();
    out.name = format!("Replace({},{},{})", s.name, old.name, new.name);
    out.desc = format!("{} with {} replaced by {}", s.name, old.name, new.name);
    Ok(out)
}
