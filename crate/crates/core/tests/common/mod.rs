#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;

use gnet::algebra::{atomic, BlockFragment, REQ_METHOD};
use gnet::analysis::{flat_steps, FlatMarking, FlatNet};
use gnet::dsl::CompositionExpr;
use gnet::guards::{eval_condition, eval_expr, ActionSeq, Assignment, CmpOp, Condition, Expr};
use gnet::marking::Marking;
use gnet::model::{Arc, AttributeSpec, Label, MethodSpec, Place, WebService};
use gnet::registry::{read_block, read_service, Registry};
use gnet::sim::{Policy, SimState, Simulator};
use gnet::value::{Value, ValueType};
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn load(name: &str) -> WebService {
    read_service(&fixture(name)).unwrap()
}

pub fn load_block(name: &str) -> BlockFragment {
    read_block(&fixture(name)).unwrap()
}

/// Atomic service with an extra `req` method answering with a `resp`
/// field, usable under every operator.
pub fn stub(name: &str) -> WebService {
    let mut ws = atomic(name, &name.to_lowercase());
    let is = &mut ws.net.is;
    is.places.push(Place::normal("q1"));
    is.places.push(Place::goal("q2"));
    is.labels.insert("q1".into(), Label::op("answer"));
    is.labels.insert("q2".into(), Label::Goal);
    is.transitions.push("u1".into());
    is.arcs.push(Arc::new("q1", "u1"));
    is.arcs.push(Arc::new("u1", "q2"));
    is.actions.insert("u1".into(), gnet::guards::parse_action("resp := 1").unwrap());
    ws.net.gsp.methods.push(MethodSpec {
        name: REQ_METHOD.into(),
        description: String::new(),
        params: Vec::new(),
        init_place: "q1".into(),
        goal_places: ["q2".to_string()].into(),
    });
    ws
}

pub const LEAVES: [&str; 4] = ["A", "B", "C", "D"];

/// A two-step block refining the operation `a` of stub `A`.
pub fn small_block() -> BlockFragment {
    let mut b = BlockFragment {
        name: "Blk".into(),
        structure: Default::default(),
        entries: ["x1".to_string()].into(),
        exits: ["x2".to_string()].into(),
        attributes: vec![AttributeSpec {
            name: "Ok".into(),
            value_type: ValueType::Bool,
            initial: None,
            domain: Some(vec![Value::Bool(true), Value::Bool(false)]),
        }],
    };
    let s = &mut b.structure;
    s.places = vec![Place::normal("x1"), Place::normal("x2")];
    s.labels.insert("x1".into(), Label::op("check"));
    s.labels.insert("x2".into(), Label::op("confirm"));
    s.transitions = vec!["y1".into()];
    s.arcs = vec![Arc::new("x1", "y1"), Arc::new("y1", "x2")];
    s.conditions.insert("y1".into(), gnet::guards::parse_condition("Ok == true").unwrap());
    b
}

pub fn leaf_registry() -> Registry {
    let mut r = Registry::new();
    for l in LEAVES {
        r.insert(stub(l)).unwrap();
    }
    r.insert_block(small_block()).unwrap();
    r
}

fn leaf(rng: &mut impl Rng) -> CompositionExpr {
    CompositionExpr::Ref(LEAVES[rng.gen_range(0..LEAVES.len())].into())
}

/// Random composition term of the given maximum depth over the stub
/// leaves, using every operator.
pub fn random_term(rng: &mut impl Rng, depth: usize) -> CompositionExpr {
    use CompositionExpr as E;
    if depth <= 1 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.1) { E::Empty } else { leaf(rng) };
    }
    let sub = |rng: &mut _| Box::new(random_term(rng, depth - 1));
    match rng.gen_range(0..9) {
        0 => E::Seq(sub(rng), sub(rng)),
        1 => E::Alt(sub(rng), sub(rng)),
        2 => E::Iter(sub(rng)),
        3 => E::AnySeq(sub(rng), sub(rng)),
        4 => E::Par(sub(rng), sub(rng)),
        5 => {
            let n = rng.gen_range(1..=3);
            E::Disc((0..n).map(|_| random_term(rng, depth - 1)).collect(), sub(rng))
        }
        // only services offering `req` can be selected among
        6 => E::Select((0..rng.gen_range(1..=3)).map(|_| leaf(rng)).collect()),
        7 => E::Refine(sub(rng), "a".into(), "Blk".into()),
        _ => {
            // the replacement must not evaluate to the empty service
            let new = if rng.gen_bool(0.5) { leaf(rng) } else { E::Par(sub(rng), sub(rng)) };
            E::Replace(sub(rng), Box::new(leaf(rng)), Box::new(new))
        }
    }
}

/// Reachable markings of a flat net, computed as a plain fixpoint: every
/// round fires every transition under every assignment of its variables to
/// values occurring in the current markings or the declared domains.
pub fn brute_force_markings(net: &FlatNet) -> BTreeSet<FlatMarking> {
    let mut init = FlatMarking::new();
    for (p, tuples) in &net.initial {
        for t in tuples {
            init.entry(p.clone()).or_default().push(t.clone());
        }
    }
    for list in init.values_mut() {
        list.sort();
    }
    init.retain(|_, l| !l.is_empty());

    let mut known = BTreeSet::from([init.clone()]);
    let mut frontier = vec![init];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for m in &frontier {
            for succ in successors(net, m) {
                if known.insert(succ.clone()) {
                    next.push(succ);
                }
            }
        }
        frontier = next;
    }
    known
}

fn successors(net: &FlatNet, m: &FlatMarking) -> Vec<FlatMarking> {
    let mut out = Vec::new();
    for t in &net.transitions {
        let mut vars = BTreeSet::new();
        for a in t.inputs.iter().chain(&t.outputs) {
            for e in &a.tuple {
                vars.extend(e.vars());
            }
        }
        vars.extend(t.gate.vars());
        // candidate values: anything in the marking or a domain
        let mut pool: BTreeSet<Value> = m.values().flatten().flatten().cloned().collect();
        for d in net.domains.values() {
            pool.extend(d.iter().cloned());
        }
        let vars: Vec<String> = vars.into_iter().collect();
        let mut assignments = vec![BTreeMap::new()];
        for v in &vars {
            let values: Vec<Value> = match net.domains.get(v) {
                Some(d) => d.clone(),
                None => pool.iter().cloned().collect(),
            };
            assignments = assignments
                .into_iter()
                .flat_map(|env: BTreeMap<String, Value>| {
                    values.iter().map(move |x| {
                        let mut env = env.clone();
                        env.insert(v.clone(), x.clone());
                        env
                    })
                })
                .collect();
        }
        'modes: for env in assignments {
            if eval_condition(&t.gate, &env) != Ok(true) {
                continue;
            }
            let mut after = m.clone();
            for a in &t.inputs {
                let Ok(tuple) = eval_all(&a.tuple, &env) else { continue 'modes };
                let Some(list) = after.get_mut(&a.place) else { continue 'modes };
                let Some(i) = list.iter().position(|x| *x == tuple) else { continue 'modes };
                list.remove(i);
                if list.is_empty() {
                    after.remove(&a.place);
                }
            }
            for a in &t.outputs {
                let Ok(tuple) = eval_all(&a.tuple, &env) else { continue 'modes };
                let list = after.entry(a.place.clone()).or_default();
                list.push(tuple);
                list.sort();
            }
            out.push(after);
        }
    }
    out
}

fn eval_all(items: &[Expr], env: &BTreeMap<String, Value>) -> Result<Vec<Value>, gnet::guards::GuardError> {
    items.iter().map(|e| eval_expr(e, env)).collect()
}

/// Breadth-first search over pairs of a flat marking and a tag updated by
/// `step` on every edge. Returns every reachable pair.
pub fn tagged_search<T: Ord + Clone>(
    graph: &gnet::analysis::StateGraph,
    start: T,
    step: impl Fn(&T, &str) -> T,
) -> BTreeSet<(usize, T)> {
    let mut seen = BTreeSet::from([(0usize, start.clone())]);
    let mut queue = VecDeque::from([(0usize, start)]);
    let mut out_edges: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in graph.edges.iter().enumerate() {
        out_edges.entry(e.from).or_default().push(i);
    }
    while let Some((s, tag)) = queue.pop_front() {
        for &i in out_edges.get(&s).map(Vec::as_slice).unwrap_or_default() {
            let e = &graph.edges[i];
            let next = (e.to, step(&tag, &e.transition));
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen
}

type SourceKey = (Marking, BTreeMap<String, Value>);

/// Firing sequences of length `len` of an invocation-free service, by
/// level, computed with the simulator.
pub fn source_sequences(ws: &WebService, method: &str, args: &[Value], len: usize) -> Vec<BTreeSet<Vec<String>>> {
    let reg = Registry::new();
    let sim = Simulator::new(&reg);
    let init = sim.init_state(ws, method, args, Policy::Deterministic).unwrap();
    let mut level: BTreeMap<Vec<String>, Vec<SimState>> = BTreeMap::from([(Vec::new(), vec![init])]);
    let mut out = vec![level.keys().cloned().collect()];
    for _ in 0..len {
        let mut next: BTreeMap<Vec<String>, (BTreeSet<SourceKey>, Vec<SimState>)> = BTreeMap::new();
        for (seq, states) in &level {
            for st in states {
                for e in sim.enabled(st).unwrap() {
                    let after = sim.fire(st, &e).unwrap();
                    let key = (after.top().marking.clone(), after.top().env.clone());
                    let mut s = seq.clone();
                    s.push(e.transition.clone());
                    let slot = next.entry(s).or_default();
                    if slot.0.insert(key) {
                        slot.1.push(after);
                    }
                }
            }
        }
        level = next.into_iter().map(|(k, (_, v))| (k, v)).collect();
        out.push(level.keys().cloned().collect());
    }
    out
}

pub fn internal_closure(net: &FlatNet, states: BTreeSet<FlatMarking>) -> BTreeSet<FlatMarking> {
    let mut all = states.clone();
    let mut todo: Vec<FlatMarking> = states.into_iter().collect();
    while let Some(m) = todo.pop() {
        for step in flat_steps(net, &m).unwrap() {
            if net.transition(&step.transition).unwrap().origin.is_none() && all.insert(step.next.clone()) {
                todo.push(step.next);
            }
        }
    }
    all
}

/// Same for the flat net, with internal transitions erased.
pub fn flat_sequences(net: &FlatNet, len: usize) -> Vec<BTreeSet<Vec<String>>> {
    let mut init = FlatMarking::new();
    for (p, ts) in &net.initial {
        let mut ts = ts.clone();
        ts.sort();
        init.insert(p.clone(), ts);
    }
    let mut level: BTreeMap<Vec<String>, BTreeSet<FlatMarking>> =
        BTreeMap::from([(Vec::new(), internal_closure(net, BTreeSet::from([init])))]);
    let mut out = vec![level.keys().cloned().collect()];
    for _ in 0..len {
        let mut next: BTreeMap<Vec<String>, BTreeSet<FlatMarking>> = BTreeMap::new();
        for (seq, states) in &level {
            for m in states {
                for step in flat_steps(net, m).unwrap() {
                    if let Some(origin) = &net.transition(&step.transition).unwrap().origin {
                        let mut s = seq.clone();
                        s.push(origin.clone());
                        next.entry(s).or_default().insert(step.next);
                    }
                }
            }
        }
        level = next.into_iter().map(|(k, v)| (k, internal_closure(net, v))).collect();
        out.push(level.keys().cloned().collect());
    }
    out
}

const NAMES: [&str; 6] = ["B", "Available", "x", "j", "resp", "a§1"];

pub fn gen_expr(rng: &mut impl Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..4) {
            0 => Expr::Var(NAMES[rng.gen_range(0..NAMES.len())].into()),
            1 => Expr::Lit(Value::Int(rng.gen_range(-50..50))),
            2 => Expr::Lit(Value::Bool(rng.gen())),
            _ => {
                let alphabet = ['a', 'Z', ' ', '"', '\\', '-', '§'];
                let s: String = (0..rng.gen_range(0..5)).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
                Expr::Lit(Value::Str(s))
            }
        };
    }
    let (a, b) = (Box::new(gen_expr(rng, depth - 1)), Box::new(gen_expr(rng, depth - 1)));
    match rng.gen_range(0..3) {
        0 => Expr::Add(a, b),
        1 => Expr::Sub(a, b),
        _ => Expr::Mul(a, b),
    }
}

pub fn gen_condition(rng: &mut impl Rng, depth: u32) -> Condition {
    let ops = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.2) {
            Condition::Holds(Expr::Var(NAMES[rng.gen_range(0..NAMES.len())].into()))
        } else {
            Condition::Compare(gen_expr(rng, 2), ops[rng.gen_range(0..ops.len())], gen_expr(rng, 2))
        };
    }
    match rng.gen_range(0..3) {
        0 => Condition::Not(Box::new(gen_condition(rng, depth - 1))),
        1 => Condition::And(Box::new(gen_condition(rng, depth - 1)), Box::new(gen_condition(rng, depth - 1))),
        _ => Condition::Or(Box::new(gen_condition(rng, depth - 1)), Box::new(gen_condition(rng, depth - 1))),
    }
}

pub fn gen_action(rng: &mut impl Rng) -> ActionSeq {
    ActionSeq(
        (0..rng.gen_range(1..4))
            .map(|_| Assignment { target: NAMES[rng.gen_range(0..NAMES.len())].into(), value: gen_expr(rng, 3) })
            .collect(),
    )
}
