//! Token game of a G-Net service with synchronous method invocation.
//!
//! Firing rule. A transition consumes one non-pending token per input arc.
//! Variables resolve from the consumed tokens' fields (later input arcs win),
//! then from the frame's attribute environment. Variables still unbound but
//! needed by the gate, the action or an output inscription must be
//! attributes with a declared domain and are enumerated over it.
//!
//! The action runs on that binding. Assigned attributes update the frame
//! environment; other assigned names become token fields. Every produced
//! token carries the consumed fields and assigned locals, plus one field
//! per output-inscription item: `v` for a bare variable `v`, `_i` for any
//! other item at index `i`.
//!
//! A token entering an instantiated switch place is pending until the
//! invoked method reaches one of its goal places. The invocation runs to
//! completion in a new frame whose initial token carries all the caller
//! token's fields; the goal token's fields are merged back into it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::guards::{eval_action, eval_condition, eval_expr, ActionSeq, Condition, Env, Expr, GuardError};
use crate::marking::{Marking, Token};
use crate::model::{PlaceKind, WebService};
use crate::registry::Registry;
use crate::value::Value;

pub const DEFAULT_DEPTH_LIMIT: usize = 16;
pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("service `{service}` has no method `{method}`")]
    UnknownMethod { service: String, method: String },
    #[error("unknown service `{0}`")]
    UnknownService(String),
    #[error("method expects {expected} argument(s), got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("invocation of {service}.{method} lacks argument `{param}`")]
    MissingArgument { service: String, method: String, param: String },
    #[error("transition `{0}` is not enabled with that binding")]
    NotEnabled(String),
    #[error("free variable `{0}` has no declared domain")]
    UnboundFreeVariable(String),
    #[error("transition `{transition}`: {source}")]
    Guard {
        transition: String,
        #[source]
        source: GuardError,
    },
    #[error("invocation depth limit {0} exceeded")]
    DepthLimitExceeded(usize),
    #[error("invoked method {service}.{method} deadlocked before reaching a goal place")]
    SubnetDeadlock { service: String, method: String },
    #[error("invoked method {service}.{method} did not finish within {steps} steps")]
    SubnetStepLimit { service: String, method: String, steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Always fire the least enabled (transition, binding).
    Deterministic,
    /// Uniform choice from a generator seeded with the value.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PlacedToken {
    pub place: String,
    pub token: Token,
}

/// One activation of a service method.
#[derive(Debug, Clone)]
pub struct Frame {
    pub service: Arc<WebService>,
    pub method: String,
    pub marking: Marking,
    pub env: Env,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiringEvent {
    /// Index of the frame the transition fired in; 0 is the root.
    pub depth: usize,
    pub service: String,
    pub transition: String,
    pub binding: Env,
    pub consumed: Vec<PlacedToken>,
    pub produced: Vec<PlacedToken>,
}

/// A firing mode: the transition, the variables it binds beyond the
/// attribute environment, and the tokens it consumes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Enabled {
    pub transition: String,
    pub binding: Env,
    pub consumed: Vec<PlacedToken>,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub frames: Vec<Frame>,
    pub trace: Vec<FiringEvent>,
    pub policy: Policy,
    rng: Option<ChaCha8Rng>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Goal,
    Deadlock,
    StepLimit,
}

impl SimState {
    pub fn root(&self) -> &Frame {
        &self.frames[0]
    }

    pub fn top(&self) -> &Frame {
        self.frames.last().expect("at least one frame")
    }

    fn top_mut(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("at least one frame")
    }

    /// True once a returned token sits in a goal place of the root method.
    pub fn at_goal(&self) -> bool {
        frame_at_goal(self.root()).is_some()
    }

    fn choose(&mut self, n: usize) -> usize {
        match self.rng.as_mut() {
            Some(rng) => rng.gen_range(0..n),
            None => 0,
        }
    }
}

fn frame_at_goal(frame: &Frame) -> Option<&Token> {
    let m = frame.service.method(&frame.method)?;
    m.goal_places.iter().flat_map(|g| frame.marking.tokens(g)).find(|t| !t.pending)
}

fn initial_env(ws: &WebService) -> Env {
    ws.net.gsp.attributes.iter().filter_map(|a| a.initial.clone().map(|v| (a.name.clone(), v))).collect()
}

impl fmt::Display for PlacedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.place, self.token)
    }
}

fn write_env(f: &mut fmt::Formatter<'_>, env: &Env) -> fmt::Result {
    f.write_str("{")?;
    for (i, (k, v)) in env.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{k}={v}")?;
    }
    f.write_str("}")
}

fn write_tokens(f: &mut fmt::Formatter<'_>, toks: &[PlacedToken]) -> fmt::Result {
    f.write_str("[")?;
    for (i, t) in toks.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{t}")?;
    }
    f.write_str("]")
}

impl fmt::Display for FiringEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} ", self.depth, self.service, self.transition)?;
        write_env(f, &self.binding)?;
        f.write_str(" consumed ")?;
        write_tokens(f, &self.consumed)?;
        f.write_str(" produced ")?;
        write_tokens(f, &self.produced)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Goal => "goal",
            Outcome::Deadlock => "deadlock",
            Outcome::StepLimit => "step-limit",
        })
    }
}

struct TransitionView<'a> {
    inputs: Vec<(&'a str, Option<&'a crate::guards::Inscription>)>,
    outputs: Vec<(&'a str, Option<&'a crate::guards::Inscription>)>,
    gate: &'a Condition,
    action: &'a ActionSeq,
}

static ALWAYS: Condition = Condition::Always;
static NO_ACTION: ActionSeq = ActionSeq(Vec::new());

fn view<'a>(ws: &'a WebService, t: &str) -> TransitionView<'a> {
    let is = &ws.net.is;
    TransitionView {
        inputs: is.inputs_of(t).into_iter().map(|p| (p, is.inscription(p, t))).collect(),
        outputs: is.outputs_of(t).into_iter().map(|p| (p, is.inscription(t, p))).collect(),
        gate: is.conditions.get(t).unwrap_or(&ALWAYS),
        action: is.actions.get(t).unwrap_or(&NO_ACTION),
    }
}

/// Cartesian product of candidate lists, first list varying slowest.
fn product<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for list in lists {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefix in &out {
            for x in list {
                let mut v = prefix.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn merged_fields(consumed: &[PlacedToken]) -> Env {
    let mut env = Env::new();
    for pt in consumed {
        env.extend(pt.token.fields.iter().map(|(k, v)| (k.clone(), v.clone())));
    }
    env
}

fn guard_err(t: &str) -> impl Fn(GuardError) -> SimError + '_ {
    move |source| SimError::Guard { transition: t.to_string(), source }
}

/// Firing modes of every transition of one frame, sorted.
fn frame_enabled(frame: &Frame) -> Result<Vec<Enabled>, SimError> {
    let ws = frame.service.as_ref();
    let mut out = BTreeSet::new();
    for t in &ws.net.is.transitions {
        let v = view(ws, t);
        let mut candidates = Vec::with_capacity(v.inputs.len());
        for (p, _) in &v.inputs {
            let mut toks: Vec<PlacedToken> = frame
                .marking
                .tokens(p)
                .iter()
                .filter(|tk| !tk.pending)
                .map(|tk| PlacedToken { place: p.to_string(), token: tk.clone() })
                .collect();
            toks.dedup();
            candidates.push(toks);
        }
        if candidates.iter().any(Vec::is_empty) {
            continue;
        }

        let mut needed = BTreeSet::new();
        for (_, insc) in &v.inputs {
            needed.extend(insc.map(|i| i.vars()).unwrap_or_default());
        }
        needed.extend(v.gate.vars());
        needed.extend(v.action.reads());
        let assigned = v.action.assigned();
        for (_, insc) in &v.outputs {
            needed.extend(insc.map(|i| i.vars()).unwrap_or_default().into_iter().filter(|x| !assigned.contains(x)));
        }

        for consumed in product(&candidates) {
            let merged = merged_fields(&consumed);
            let mut domains = Vec::new();
            for var in needed.iter().filter(|x| !merged.contains_key(*x) && !frame.env.contains_key(*x)) {
                let domain = ws
                    .attribute(var)
                    .and_then(|a| a.domain.clone())
                    .ok_or_else(|| SimError::UnboundFreeVariable(var.clone()))?;
                domains.push(domain.into_iter().map(|val| (var.clone(), val)).collect::<Vec<_>>());
            }
            for choice in product(&domains) {
                let mut binding = merged.clone();
                binding.extend(choice);
                let mut full = frame.env.clone();
                full.extend(binding.iter().map(|(k, v)| (k.clone(), v.clone())));
                if eval_condition(v.gate, &full).map_err(guard_err(t))? {
                    out.insert(Enabled { transition: t.clone(), binding, consumed: consumed.clone() });
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Runs nets against a registry used to resolve invocations.
#[derive(Debug, Clone, Copy)]
pub struct Simulator<'r> {
    pub registry: &'r Registry,
    /// Maximum number of simultaneously active frames.
    pub depth_limit: usize,
    /// Step budget of every invoked method.
    pub max_subnet_steps: usize,
}

impl<'r> Simulator<'r> {
    pub fn new(registry: &'r Registry) -> Self {
        Simulator { registry, depth_limit: DEFAULT_DEPTH_LIMIT, max_subnet_steps: DEFAULT_MAX_STEPS }
    }

    pub fn with_depth_limit(mut self, depth_limit: usize) -> Self {
        self.depth_limit = depth_limit;
        self
    }

    pub fn with_subnet_steps(mut self, steps: usize) -> Self {
        self.max_subnet_steps = steps;
        self
    }

    /// One frame running `method`, with a token carrying the arguments in
    /// its initial place. An invocation at the initial place is settled
    /// immediately.
    pub fn init_state(
        &self,
        ws: &WebService,
        method: &str,
        args: &[Value],
        policy: Policy,
    ) -> Result<SimState, SimError> {
        let m = ws
            .method(method)
            .ok_or_else(|| SimError::UnknownMethod { service: ws.name.clone(), method: method.into() })?;
        if m.params.len() != args.len() {
            return Err(SimError::ArityMismatch { expected: m.params.len(), got: args.len() });
        }
        let fields = m.params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect();
        let rng = match policy {
            Policy::Deterministic => None,
            Policy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        let mut state = SimState { frames: Vec::new(), trace: Vec::new(), policy, rng };
        self.push_frame(&mut state, Arc::new(ws.clone()), method, Token::new(fields))?;
        Ok(state)
    }

    fn push_frame(
        &self,
        state: &mut SimState,
        ws: Arc<WebService>,
        method: &str,
        token: Token,
    ) -> Result<(), SimError> {
        if state.frames.len() >= self.depth_limit {
            return Err(SimError::DepthLimitExceeded(self.depth_limit));
        }
        let init = ws.method(method).expect("checked by caller").init_place.clone();
        let mut marking = Marking::new();
        let isp = ws.net.is.place(&init).is_some_and(|p| p.is_isp());
        marking.add(&init, Token { pending: isp, ..token });
        let env = initial_env(&ws);
        state.frames.push(Frame { service: ws, method: method.into(), marking, env });
        if isp {
            self.settle(state, &init)?;
        }
        Ok(())
    }

    pub fn enabled(&self, state: &SimState) -> Result<Vec<Enabled>, SimError> {
        frame_enabled(state.top())
    }

    /// Fires a firing mode previously returned by [`enabled`](Self::enabled)
    /// on a copy of `state`.
    pub fn fire(&self, state: &SimState, e: &Enabled) -> Result<SimState, SimError> {
        if !self.enabled(state)?.contains(e) {
            return Err(SimError::NotEnabled(e.transition.clone()));
        }
        let mut next = state.clone();
        self.fire_in_place(&mut next, e)?;
        Ok(next)
    }

    fn fire_in_place(&self, state: &mut SimState, e: &Enabled) -> Result<(), SimError> {
        let depth = state.frames.len() - 1;
        let frame = state.top_mut();
        let ws = frame.service.clone();
        let v = view(&ws, &e.transition);
        for pt in &e.consumed {
            if !frame.marking.remove(&pt.place, &pt.token) {
                return Err(SimError::NotEnabled(e.transition.clone()));
            }
        }
        let mut full = frame.env.clone();
        full.extend(e.binding.iter().map(|(k, v)| (k.clone(), v.clone())));
        let after = eval_action(v.action, &full).map_err(guard_err(&e.transition))?;

        let is_attr = |name: &str| ws.attribute(name).is_some();
        let assigned = v.action.assigned();
        for a in assigned.iter().filter(|a| is_attr(a)) {
            frame.env.insert(a.clone(), after[a].clone());
        }
        let mut carried: BTreeSet<String> = merged_fields(&e.consumed).into_keys().collect();
        carried.extend(assigned.iter().filter(|a| !is_attr(a)).cloned());

        let mut produced = Vec::with_capacity(v.outputs.len());
        for (p, insc) in &v.outputs {
            let mut fields: BTreeMap<String, Value> = carried.iter().map(|k| (k.clone(), after[k].clone())).collect();
            for (i, item) in insc.map(|x| x.0.as_slice()).unwrap_or_default().iter().enumerate() {
                let val = eval_expr(item, &after).map_err(guard_err(&e.transition))?;
                let name = match item {
                    Expr::Var(name) => name.clone(),
                    _ => format!("_{i}"),
                };
                fields.insert(name, val);
            }
            let pending = ws.net.is.place(p).is_some_and(|pl| pl.kind == PlaceKind::InstantiatedSwitch);
            let token = Token { fields, pending };
            frame.marking.add(p, token.clone());
            produced.push(PlacedToken { place: p.to_string(), token });
        }
        state.trace.push(FiringEvent {
            depth,
            service: ws.name.clone(),
            transition: e.transition.clone(),
            binding: e.binding.clone(),
            consumed: e.consumed.clone(),
            produced: produced.clone(),
        });
        for pt in produced.iter().filter(|pt| pt.token.pending) {
            self.settle(state, &pt.place)?;
        }
        Ok(())
    }

    /// Runs the invocation of one pending token in `place` of the top frame.
    pub fn invoke_isp(&self, state: &SimState, place: &str) -> Result<SimState, SimError> {
        let mut next = state.clone();
        self.settle(&mut next, place)?;
        Ok(next)
    }

    fn settle(&self, state: &mut SimState, place: &str) -> Result<(), SimError> {
        let frame = state.top();
        let Some(token) = frame.marking.tokens(place).iter().find(|t| t.pending).cloned() else {
            return Ok(());
        };
        let pl = frame.service.net.is.place(place).expect("marked place exists");
        let (Some(service), Some(method)) = (pl.invoked_gnet.clone(), pl.using_method.clone()) else {
            return Err(SimError::UnknownService(String::new()));
        };
        let callee = self.registry.shared(&service).map_err(|_| SimError::UnknownService(service.clone()))?;

        let result = if callee.net.gsp.methods.is_empty() && callee.is_empty_net() {
            token.fields.clone()
        } else {
            let m = callee
                .method(&method)
                .ok_or_else(|| SimError::UnknownMethod { service: service.clone(), method: method.clone() })?;
            if let Some(p) = m.params.iter().find(|p| !token.fields.contains_key(&p.name)) {
                return Err(SimError::MissingArgument { service, method, param: p.name.clone() });
            }
            self.push_frame(state, callee.clone(), &method, Token::new(token.fields.clone()))?;
            let mut steps = 0;
            let goal = loop {
                if let Some(goal) = frame_at_goal(state.top()) {
                    break goal.clone();
                }
                let enabled = frame_enabled(state.top())?;
                if enabled.is_empty() {
                    return Err(SimError::SubnetDeadlock { service, method });
                }
                if steps >= self.max_subnet_steps {
                    return Err(SimError::SubnetStepLimit { service, method, steps });
                }
                let pick = state.choose(enabled.len());
                self.fire_in_place(state, &enabled[pick])?;
                steps += 1;
            };
            state.frames.pop();
            let mut fields = token.fields.clone();
            fields.extend(goal.fields);
            fields
        };
        let caller = state.top_mut();
        caller.marking.remove(place, &token);
        caller.marking.add(place, Token::new(result));
        Ok(())
    }

    /// Fires until the root method reaches a goal place, nothing is enabled,
    /// or `max_steps` root-level firings have happened.
    pub fn run(&self, mut state: SimState, max_steps: usize) -> Result<(SimState, Outcome), SimError> {
        let mut steps = 0;
        loop {
            if state.at_goal() {
                return Ok((state, Outcome::Goal));
            }
            let enabled = self.enabled(&state)?;
            if enabled.is_empty() {
                return Ok((state, Outcome::Deadlock));
            }
            if steps >= max_steps {
                return Ok((state, Outcome::StepLimit));
            }
            let pick = state.choose(enabled.len());
            self.fire_in_place(&mut state, &enabled[pick])?;
            steps += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{atomic, discriminator, empty_service, iteration, sequence};
    use crate::guards::{parse_action, parse_condition};
    use crate::model::{Arc as Edge, AttributeSpec, Label, Place};
    use crate::value::ValueType;

    fn reg(services: &[WebService]) -> Registry {
        let mut r = Registry::new();
        for s in services {
            r.insert_or_same(s.clone()).unwrap();
        }
        r
    }

    #[test]
    fn unconditioned_transition_has_empty_binding() {
        let a = atomic("A", "a");
        let r = Registry::new();
        let sim = Simulator::new(&r);
        let st = sim.init_state(&a, "a", &[], Policy::Deterministic).unwrap();
        let en = sim.enabled(&st).unwrap();
        assert_eq!(en.len(), 1);
        assert_eq!(en[0].transition, "t1");
        assert!(en[0].binding.is_empty());
    }

    #[test]
    fn init_errors() {
        let r = Registry::new();
        let sim = Simulator::new(&r);
        let e = empty_service();
        assert!(matches!(sim.init_state(&e, "Empty", &[], Policy::Deterministic), Err(SimError::UnknownMethod { .. })));
        let mut a = atomic("A", "a");
        a.net.gsp.methods[0].params.push(crate::model::Param { name: "n".into(), description: String::new() });
        assert!(matches!(
            sim.init_state(&a, "a", &[], Policy::Deterministic),
            Err(SimError::ArityMismatch { expected: 1, got: 0 })
        ));
        let st = sim.init_state(&a, "a", &[Value::Int(5)], Policy::Deterministic).unwrap();
        assert_eq!(st.root().marking.tokens("p1")[0].fields["n"], Value::Int(5));
    }

    #[test]
    fn sequence_invokes_in_order() {
        let (a, b) = (atomic("A", "a"), atomic("B", "b"));
        let s = sequence(&a, &b);
        let r = reg(&[a, b]);
        let sim = Simulator::new(&r);
        let st = sim.init_state(&s, "Seq", &[], Policy::Deterministic).unwrap();
        assert_eq!(st.root().marking.count("p1"), 1);
        let (st, out) = sim.run(st, 100).unwrap();
        assert_eq!(out, Outcome::Goal);
        let order: Vec<(usize, &str)> = st.trace.iter().map(|e| (e.depth, e.service.as_str())).collect();
        assert_eq!(order, [(1, "A"), (0, "Seq(A,B)"), (1, "B"), (0, "Seq(A,B)")]);
    }

    #[test]
    fn gate_uses_token_fields() {
        let mut a = atomic("A", "a");
        a.net.is.conditions.insert("t1".into(), parse_condition("Available == false").unwrap());
        a.net.gsp.methods[0].params.push(crate::model::Param { name: "Available".into(), description: String::new() });
        let r = Registry::new();
        let sim = Simulator::new(&r);
        let st = sim.init_state(&a, "a", &[Value::Bool(true)], Policy::Deterministic).unwrap();
        assert!(sim.enabled(&st).unwrap().is_empty());
        let st = sim.init_state(&a, "a", &[Value::Bool(false)], Policy::Deterministic).unwrap();
        assert_eq!(sim.enabled(&st).unwrap().len(), 1);
    }

    #[test]
    fn free_variable_needs_domain() {
        let mut a = atomic("A", "a");
        a.net.is.conditions.insert("t1".into(), parse_condition("x > 1").unwrap());
        let r = Registry::new();
        let sim = Simulator::new(&r);
        let st = sim.init_state(&a, "a", &[], Policy::Deterministic).unwrap();
        assert_eq!(sim.enabled(&st), Err(SimError::UnboundFreeVariable("x".into())));
        a.net.gsp.attributes.push(AttributeSpec {
            name: "x".into(),
            value_type: ValueType::Int,
            initial: None,
            domain: Some(vec![Value::Int(1), Value::Int(2), Value::Int(3)]),
        });
        let st = sim.init_state(&a, "a", &[], Policy::Deterministic).unwrap();
        let en = sim.enabled(&st).unwrap();
        assert_eq!(en.iter().map(|e| e.binding["x"].clone()).collect::<Vec<_>>(), [Value::Int(2), Value::Int(3)]);
    }

    #[test]
    fn two_tokens_two_bindings_and_stale_fire() {
        let mut a = atomic("A", "a");
        a.net.gsp.methods[0].params.push(crate::model::Param { name: "n".into(), description: String::new() });
        let r = Registry::new();
        let sim = Simulator::new(&r);
        let mut st = sim.init_state(&a, "a", &[Value::Int(1)], Policy::Deterministic).unwrap();
        st.frames[0].marking.add("p1", Token::default().with("n", 2));
        let en = sim.enabled(&st).unwrap();
        assert_eq!(en.len(), 2);
        let after = sim.fire(&st, &en[0]).unwrap();
        assert_eq!(after.root().marking.count("p1"), 1);
        assert!(matches!(sim.fire(&after, &en[0]), Err(SimError::NotEnabled(_))));
    }

    #[test]
    fn iteration_loops_back() {
        let a = atomic("A", "a");
        let it = iteration(&a);
        let r = reg(&[a]);
        let sim = Simulator::new(&r);
        let st = sim.init_state(&it, "Iter", &[], Policy::Deterministic).unwrap();
        let en = sim.enabled(&st).unwrap();
        assert_eq!(en[0].transition, "t1");
        let st = sim.fire(&st, &en[0]).unwrap();
        assert_eq!(st.root().marking.count("p1"), 1);
        assert!(!st.root().marking.tokens("p1")[0].pending);
    }

    #[test]
    fn discriminator_sets_flag() {
        let (a, b, c) = (atomic("A", "a"), atomic("B", "b"), atomic("C", "c"));
        let d = discriminator(&[a.clone(), b.clone()], &c).unwrap();
        let r = reg(&[a, b, c]);
        let sim = Simulator::new(&r);
        let st = sim.init_state(&d, "Disc", &[], Policy::Deterministic).unwrap();
        assert_eq!(st.root().env["B"], Value::Bool(false));
        let en = sim.enabled(&st).unwrap();
        let st = sim.fire(&st, &en[0]).unwrap();
        assert_eq!(st.root().env["B"], Value::Bool(true));
        let (st, out) = sim.run(st, 100).unwrap();
        assert_eq!(out, Outcome::Goal);
        let continuation = st.trace.iter().filter(|e| e.service == "C").count();
        assert_eq!(continuation, 1);
    }

    #[test]
    fn invocation_failures() {
        let mut rec = atomic("R", "r");
        rec.net.is.places[0] = Place::isp("p1", "R", "r");
        rec.net.is.labels.insert("p1".into(), Label::isp("R", "r"));
        let r = reg(&[rec.clone()]);
        let sim = Simulator::new(&r).with_depth_limit(8);
        assert_eq!(sim.init_state(&rec, "r", &[], Policy::Deterministic).unwrap_err(), SimError::DepthLimitExceeded(8));

        let mut dead = atomic("D", "d");
        dead.net.is.conditions.insert("t1".into(), parse_condition("true == false").unwrap());
        let s = sequence(&dead, &atomic("B", "b"));
        let r = reg(&[dead.clone(), atomic("B", "b")]);
        let sim = Simulator::new(&r);
        assert!(matches!(sim.init_state(&s, "Seq", &[], Policy::Deterministic), Err(SimError::SubnetDeadlock { .. })));

        let s = sequence(&atomic("X", "x"), &atomic("B", "b"));
        assert!(matches!(
            sim.init_state(&s, "Seq", &[], Policy::Deterministic),
            Err(SimError::UnknownService(n)) if n == "X"
        ));
    }

    #[test]
    fn gated_false_deadlocks_immediately() {
        let mut a = atomic("A", "a");
        a.net.is.conditions.insert("t1".into(), parse_condition("true == false").unwrap());
        let r = Registry::new();
        let sim = Simulator::new(&r);
        let st = sim.init_state(&a, "a", &[], Policy::Deterministic).unwrap();
        let (st, out) = sim.run(st, 10).unwrap();
        assert_eq!(out, Outcome::Deadlock);
        assert!(st.trace.is_empty());
    }

    #[test]
    fn action_fields_and_attributes() {
        let mut a = atomic("A", "a");
        a.net.gsp.attributes.push(AttributeSpec {
            name: "I".into(),
            value_type: ValueType::Int,
            initial: Some(Value::Int(2)),
            domain: None,
        });
        a.net.is.actions.insert("t1".into(), parse_action("I := I + 1; k := I * 10").unwrap());
        a.net.is.inscriptions.insert(Edge::new("t1", "p2"), crate::guards::parse_inscription("[I, I + 1]").unwrap());
        let r = Registry::new();
        let sim = Simulator::new(&r);
        let st = sim.init_state(&a, "a", &[], Policy::Deterministic).unwrap();
        let (st, _) = sim.run(st, 10).unwrap();
        assert_eq!(st.root().env["I"], Value::Int(3));
        let tok = &st.root().marking.tokens("p2")[0];
        assert_eq!(tok.fields["k"], Value::Int(30));
        assert_eq!(tok.fields["I"], Value::Int(3));
        assert_eq!(tok.fields["_1"], Value::Int(4));
    }

    #[test]
    fn seeded_random_runs_repeat() {
        let a = atomic("A", "a");
        let it = iteration(&a);
        let r = reg(&[a]);
        let sim = Simulator::new(&r);
        let run = |seed| {
            let st = sim.init_state(&it, "Iter", &[], Policy::Random(seed)).unwrap();
            sim.run(st, 50).unwrap().0.trace
        };
        assert_eq!(run(7), run(7));
    }
}
