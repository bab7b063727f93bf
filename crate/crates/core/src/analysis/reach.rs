use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{AnalysisError, FlatNet, FlatTransition};
use crate::guards::{eval_condition, eval_expr, Env, Expr};
use crate::value::Value;

/// Tuples per place, sorted; places without tokens are absent.
pub type FlatMarking = BTreeMap<String, Vec<Vec<Value>>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Limits {
    pub max_states: usize,
    pub max_tokens_per_place: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_states: 100_000, max_tokens_per_place: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateEdge {
    pub from: usize,
    pub to: usize,
    pub transition: String,
    pub binding: Env,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateGraph {
    pub states: Vec<FlatMarking>,
    pub edges: Vec<StateEdge>,
    /// Whether all successors of each state are in the graph.
    pub expanded: Vec<bool>,
    /// Edge through which each state was first reached.
    pub parent: Vec<Option<usize>>,
    /// Set when a limit stopped the exploration early.
    pub truncated: bool,
}

impl StateGraph {
    pub fn out_degree(&self, state: usize) -> usize {
        self.edges.iter().filter(|e| e.from == state).count()
    }

    /// Transitions on the shortest path from the initial state.
    pub fn path_to(&self, state: usize) -> Vec<String> {
        let mut path = Vec::new();
        let mut at = state;
        while let Some(e) = self.parent[at] {
            path.push(self.edges[e].transition.clone());
            at = self.edges[e].from;
        }
        path.reverse();
        path
    }
}

fn add(m: &mut FlatMarking, place: &str, tuple: Vec<Value>) {
    let list = m.entry(place.to_string()).or_default();
    let at = list.partition_point(|t| *t <= tuple);
    list.insert(at, tuple);
}

fn remove(m: &mut FlatMarking, place: &str, tuple: &[Value]) -> bool {
    let Some(list) = m.get_mut(place) else {
        return false;
    };
    let Some(at) = list.iter().position(|t| t == tuple) else {
        return false;
    };
    list.remove(at);
    if list.is_empty() {
        m.remove(place);
    }
    true
}

fn unify(pattern: &[Expr], tuple: &[Value], env: &mut Env) -> bool {
    if pattern.len() != tuple.len() {
        return false;
    }
    for (e, v) in pattern.iter().zip(tuple) {
        if let Expr::Var(x) = e {
            match env.get(x) {
                Some(old) if old != v => return false,
                Some(_) => {}
                None => {
                    env.insert(x.clone(), v.clone());
                }
            }
        }
    }
    true
}

fn guard_err(t: &FlatTransition) -> impl Fn(crate::guards::GuardError) -> AnalysisError + '_ {
    move |source| AnalysisError::Guard { transition: t.name.clone(), source }
}

/// One firing of a flat transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatStep {
    pub transition: String,
    pub binding: Env,
    pub next: FlatMarking,
}

/// Bindings built so far, with the (arc, tuple) pairs they consumed.
type Partial = Vec<(Env, Vec<(usize, Vec<Value>)>)>;

/// Every firing enabled in `m`, in transition order.
pub fn flat_steps(net: &FlatNet, m: &FlatMarking) -> Result<Vec<FlatStep>, AnalysisError> {
    let mut out = Vec::new();
    for t in &net.transitions {
        let mut seen = BTreeSet::new();
        let mut partial: Partial = vec![(Env::new(), Vec::new())];
        for (k, arc) in t.inputs.iter().enumerate() {
            let tuples = m.get(&arc.place).map(Vec::as_slice).unwrap_or_default();
            let mut next = Vec::new();
            for (env, used) in &partial {
                let mut distinct: Vec<&Vec<Value>> = tuples.iter().collect();
                distinct.dedup();
                for tup in distinct {
                    let mut env = env.clone();
                    if unify(&arc.tuple, tup, &mut env) {
                        let mut used = used.clone();
                        used.push((k, tup.clone()));
                        next.push((env, used));
                    }
                }
            }
            partial = next;
        }
        for (env, used) in partial {
            // constant or computed items in input tuples must match too
            let mut ok = true;
            for (k, tup) in &used {
                for (e, v) in t.inputs[*k].tuple.iter().zip(tup) {
                    if !matches!(e, Expr::Var(_)) && eval_expr(e, &env).map_err(guard_err(t))? != *v {
                        ok = false;
                    }
                }
            }
            if !ok {
                continue;
            }
            // the same tuple may be needed twice but be there once
            let mut base = m.clone();
            if !used.iter().all(|(k, tup)| remove(&mut base, &t.inputs[*k].place, tup)) {
                continue;
            }
            let mut free = t.gate.vars();
            for arc in &t.outputs {
                for e in &arc.tuple {
                    free.extend(e.vars());
                }
            }
            free.retain(|x| !env.contains_key(x));
            let mut choices = vec![env];
            for x in free {
                let domain = net.domains.get(&x).ok_or_else(|| AnalysisError::UnboundFreeVariable(x.clone()))?;
                choices = choices
                    .into_iter()
                    .flat_map(|env| {
                        let x = &x;
                        domain.iter().map(move |v| {
                            let mut env = env.clone();
                            env.insert(x.clone(), v.clone());
                            env
                        })
                    })
                    .collect();
            }
            for env in choices {
                if !eval_condition(&t.gate, &env).map_err(guard_err(t))? {
                    continue;
                }
                let mut next = base.clone();
                for arc in &t.outputs {
                    let tuple = arc
                        .tuple
                        .iter()
                        .map(|e| eval_expr(e, &env))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(guard_err(t))?;
                    add(&mut next, &arc.place, tuple);
                }
                if seen.insert((env.clone(), next.clone())) {
                    out.push(FlatStep { transition: t.name.clone(), binding: env, next });
                }
            }
        }
    }
    Ok(out)
}

/// Breadth-first exploration of the reachable markings.
pub fn reachability(net: &FlatNet, limits: Limits) -> Result<StateGraph, AnalysisError> {
    let mut g = StateGraph::default();
    let mut index: HashMap<FlatMarking, usize> = HashMap::new();
    let init: FlatMarking = net
        .initial
        .iter()
        .filter(|(_, ts)| !ts.is_empty())
        .map(|(p, ts)| {
            let mut ts = ts.clone();
            ts.sort();
            (p.clone(), ts)
        })
        .collect();
    index.insert(init.clone(), 0);
    g.states.push(init);
    g.expanded.push(false);
    g.parent.push(None);
    let mut queue = VecDeque::from([0]);
    while let Some(s) = queue.pop_front() {
        let steps = flat_steps(net, &g.states[s])?;
        // a state with a dropped successor does not count as expanded
        let mut complete = true;
        for step in steps {
            if step.next.values().any(|ts| ts.len() > limits.max_tokens_per_place) {
                g.truncated = true;
                complete = false;
                continue;
            }
            let to = match index.get(&step.next) {
                Some(&to) => to,
                None => {
                    if g.states.len() >= limits.max_states {
                        g.truncated = true;
                        complete = false;
                        continue;
                    }
                    let to = g.states.len();
                    index.insert(step.next.clone(), to);
                    g.states.push(step.next);
                    g.expanded.push(false);
                    g.parent.push(Some(g.edges.len()));
                    queue.push_back(to);
                    to
                }
            };
            g.edges.push(StateEdge { from: s, to, transition: step.transition, binding: step.binding });
        }
        g.expanded[s] = complete;
    }
    Ok(g)
}
