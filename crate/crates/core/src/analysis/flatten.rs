//! G-Net to predicate/transition net.
//!
//! Every place `p` becomes an entry place `pf` and an exit place `pl`
//! joined by an internal transition `T_p`. Source transitions consume from
//! exit places and produce into entry places. Token tuples follow a fixed
//! field signature per place, inferred by propagating fields from the
//! method's initial place. Attributes that have an initial value or are
//! assigned live in one extra place, [`GSP_PLACE`], holding a single tuple
//! that every transition reading or writing them consumes and reproduces.
//! Attributes with neither, but with a domain, stay free variables.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::guards::{Condition, Expr};
use crate::model::WebService;
use crate::value::Value;

pub const GSP_PLACE: &str = "GSP";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatPlace {
    pub name: String,
    pub signature: Vec<String>,
}

/// An arc of a flat transition. Input tuples hold only variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatArc {
    pub place: String,
    pub tuple: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatTransition {
    pub name: String,
    /// The source transition this one stands for; `None` for the internal
    /// place transitions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    pub inputs: Vec<FlatArc>,
    pub outputs: Vec<FlatArc>,
    #[serde(default = "always")]
    pub gate: Condition,
}

fn always() -> Condition {
    Condition::Always
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FlatNet {
    pub places: Vec<FlatPlace>,
    pub transitions: Vec<FlatTransition>,
    #[serde(default)]
    pub initial: BTreeMap<String, Vec<Vec<Value>>>,
    /// Values enumerated for variables not bound by any input tuple.
    #[serde(default)]
    pub domains: BTreeMap<String, Vec<Value>>,
    #[serde(default)]
    pub goal_places: BTreeSet<String>,
}

impl FlatNet {
    pub fn place(&self, name: &str) -> Option<&FlatPlace> {
        self.places.iter().find(|p| p.name == name)
    }

    pub fn transition(&self, name: &str) -> Option<&FlatTransition> {
        self.transitions.iter().find(|t| t.name == name)
    }
}

fn entry(p: &str) -> String {
    format!("{p}f")
}

fn exit(p: &str) -> String {
    format!("{p}l")
}

fn internal(p: &str) -> String {
    format!("T_{p}")
}

/// Flattens the first method of `ws` with no arguments.
pub fn flatten(ws: &WebService) -> Result<FlatNet, AnalysisError> {
    let m = ws.main_method().ok_or_else(|| AnalysisError::NoMethod(ws.name.clone()))?;
    flatten_method(ws, &m.name.clone(), &[])
}

/// Flattens `ws` with one token for `method` carrying `args`.
pub fn flatten_method(ws: &WebService, method: &str, args: &[Value]) -> Result<FlatNet, AnalysisError> {
    let is = &ws.net.is;
    if let Some(p) = is.places.iter().find(|p| p.is_isp()) {
        return Err(AnalysisError::UnflattenableIsp(p.id.clone()));
    }
    let m = ws
        .method(method)
        .ok_or_else(|| AnalysisError::UnknownMethod { service: ws.name.clone(), method: method.into() })?;
    if m.params.len() != args.len() {
        return Err(AnalysisError::ArityMismatch { expected: m.params.len(), got: args.len() });
    }
    let params: Vec<String> = m.params.iter().map(|p| p.name.clone()).collect();

    // attributes
    let assigned_anywhere: BTreeSet<String> = is.actions.values().flat_map(|a| a.assigned()).collect();
    let mut state_attrs = Vec::new();
    let mut domains = BTreeMap::new();
    for a in &ws.net.gsp.attributes {
        if a.initial.is_some() {
            state_attrs.push(a.clone());
        } else if assigned_anywhere.contains(&a.name) {
            return Err(AnalysisError::UninitializedAttribute(a.name.clone()));
        } else if let Some(d) = &a.domain {
            domains.insert(a.name.clone(), d.clone());
        }
    }
    let state_names: Vec<String> = state_attrs.iter().map(|a| a.name.clone()).collect();
    let is_attr = |v: &str| ws.attribute(v).is_some();

    // field signatures
    let order = |fields: BTreeSet<String>| -> Vec<String> {
        let mut out: Vec<String> = params.iter().filter(|p| fields.contains(*p)).cloned().collect();
        out.extend(fields.into_iter().filter(|f| !params.contains(f)));
        out
    };
    let mut sig: BTreeMap<String, Vec<String>> = BTreeMap::new();
    sig.insert(m.init_place.clone(), params.clone());
    let out_fields = |t: &str, q: &str, sig: &BTreeMap<String, Vec<String>>| -> BTreeSet<String> {
        let mut k: BTreeSet<String> = is.inputs_of(t).iter().flat_map(|p| sig[*p].iter().cloned()).collect();
        if let Some(a) = is.actions.get(t) {
            k.extend(a.assigned().into_iter().filter(|x| !is_attr(x)));
        }
        if let Some(insc) = is.inscription(t, q) {
            for (i, item) in insc.0.iter().enumerate() {
                k.insert(match item {
                    Expr::Var(v) => v.clone(),
                    _ => format!("_{i}"),
                });
            }
        }
        k
    };
    let mut done = BTreeSet::new();
    loop {
        let ready =
            is.transitions.iter().find(|t| !done.contains(*t) && is.inputs_of(t).iter().all(|p| sig.contains_key(*p)));
        match ready {
            Some(t) => {
                for q in is.outputs_of(t) {
                    let fields = out_fields(t, q, &sig);
                    match sig.get(q) {
                        Some(existing) => {
                            if existing.iter().cloned().collect::<BTreeSet<_>>() != fields {
                                return Err(AnalysisError::InconsistentSignature {
                                    place: q.to_string(),
                                    expected: existing.clone(),
                                    found: order(fields),
                                });
                            }
                        }
                        None => {
                            sig.insert(q.to_string(), order(fields));
                        }
                    }
                }
                done.insert(t.clone());
            }
            None => match is.places.iter().find(|p| !sig.contains_key(&p.id)) {
                Some(p) => {
                    sig.insert(p.id.clone(), Vec::new());
                }
                None => break,
            },
        }
    }

    // places
    let mut net = FlatNet { domains, ..FlatNet::default() };
    let mut names = BTreeSet::new();
    let mut claim = |name: String| -> Result<String, AnalysisError> {
        if names.insert(name.clone()) {
            Ok(name)
        } else {
            Err(AnalysisError::NameClash(name))
        }
    };
    for t in &is.transitions {
        claim(t.clone())?;
    }
    for p in &is.places {
        for name in [entry(&p.id), exit(&p.id)] {
            net.places.push(FlatPlace { name: claim(name)?, signature: sig[&p.id].clone() });
        }
    }
    if !state_attrs.is_empty() {
        net.places.push(FlatPlace { name: claim(GSP_PLACE.into())?, signature: state_names.clone() });
        net.initial.insert(
            GSP_PLACE.into(),
            vec![state_attrs.iter().map(|a| a.initial.clone().expect("state attribute")).collect()],
        );
    }
    net.initial.insert(entry(&m.init_place), vec![args.to_vec()]);
    for g in &m.goal_places {
        net.goal_places.insert(entry(g));
        net.goal_places.insert(exit(g));
    }

    // transitions, each source transition preceded by the internal
    // transitions of its not yet emitted input places
    let mut emitted = BTreeSet::new();
    let internal_for = |p: &str| -> Result<FlatTransition, AnalysisError> {
        let tuple: Vec<Expr> = sig[p].iter().map(Expr::var).collect();
        Ok(FlatTransition {
            name: internal(p),
            origin: None,
            inputs: vec![FlatArc { place: entry(p), tuple: tuple.clone() }],
            outputs: vec![FlatArc { place: exit(p), tuple }],
            gate: Condition::Always,
        })
    };
    for t in &is.transitions {
        for p in is.inputs_of(t) {
            if emitted.insert(p.to_string()) {
                let tp = internal_for(p)?;
                claim(tp.name.clone())?;
                net.transitions.push(tp);
            }
        }
        net.transitions.push(compile(ws, t, &sig, &state_names)?);
        for q in is.outputs_of(t) {
            if is.postset(q).is_empty() && emitted.insert(q.to_string()) {
                let tp = internal_for(q)?;
                claim(tp.name.clone())?;
                net.transitions.push(tp);
            }
        }
    }
    for p in &is.places {
        if emitted.insert(p.id.clone()) {
            let tp = internal_for(&p.id)?;
            claim(tp.name.clone())?;
            net.transitions.push(tp);
        }
    }
    Ok(net)
}

fn compile(
    ws: &WebService,
    t: &str,
    sig: &BTreeMap<String, Vec<String>>,
    state: &[String],
) -> Result<FlatTransition, AnalysisError> {
    let is = &ws.net.is;
    let inputs = is.inputs_of(t);
    let action = is.actions.get(t).cloned().unwrap_or_default();
    let gate = is.conditions.get(t).cloned().unwrap_or(Condition::Always);
    let is_attr = |v: &str| ws.attribute(v).is_some();

    // input patterns; a field shared by several inputs is taken from the
    // last one, earlier occurrences get throw-away names
    let mut flat_inputs = Vec::new();
    let mut token_fields = BTreeSet::new();
    for (k, p) in inputs.iter().enumerate() {
        let later: BTreeSet<&String> = inputs[k + 1..].iter().flat_map(|q| sig[*q].iter()).collect();
        let tuple = sig[*p]
            .iter()
            .map(|f| if later.contains(f) { Expr::var(format!("{f}__{k}")) } else { Expr::var(f) })
            .collect();
        token_fields.extend(sig[*p].iter().cloned());
        flat_inputs.push(FlatArc { place: exit(p), tuple });
    }

    // sequential substitution of the action
    let mut subst: BTreeMap<String, Expr> = BTreeMap::new();
    for a in &action.0 {
        let value = a.value.substitute(&subst);
        subst.insert(a.target.clone(), value);
    }
    let value_of = |v: &str| subst.get(v).cloned().unwrap_or_else(|| Expr::var(v));

    let mut flat_outputs = Vec::new();
    for q in is.outputs_of(t) {
        let insc = is.inscription(t, q);
        let tuple = sig[q]
            .iter()
            .map(|f| {
                let indexed = f.strip_prefix('_').and_then(|i| i.parse::<usize>().ok());
                match (indexed, insc) {
                    (Some(i), Some(insc)) if i < insc.0.len() && !matches!(insc.0[i], Expr::Var(_)) => {
                        insc.0[i].substitute(&subst)
                    }
                    _ => value_of(f),
                }
            })
            .collect();
        flat_outputs.push(FlatArc { place: entry(q), tuple });
    }

    // the attribute place, when the transition touches a state attribute
    let mut referenced = gate.vars();
    referenced.extend(action.reads());
    for q in is.outputs_of(t) {
        if let Some(i) = is.inscription(t, q) {
            referenced.extend(i.vars());
        }
    }
    for q in &inputs {
        if let Some(i) = is.inscription(q, t) {
            referenced.extend(i.vars());
        }
    }
    let assigned = action.assigned();
    let touches = state.iter().any(|a| assigned.contains(a) || (referenced.contains(a) && !token_fields.contains(a)));
    if touches {
        let pattern: Vec<Expr> = state
            .iter()
            .map(|a| if token_fields.contains(a) { Expr::var(format!("{a}__gsp")) } else { Expr::var(a) })
            .collect();
        let update: Vec<Expr> = state
            .iter()
            .zip(&pattern)
            .map(|(a, old)| if assigned.contains(a) { value_of(a) } else { old.clone() })
            .collect();
        flat_inputs.push(FlatArc { place: GSP_PLACE.into(), tuple: pattern });
        flat_outputs.push(FlatArc { place: GSP_PLACE.into(), tuple: update });
    }
    debug_assert!(assigned.iter().all(|a| !is_attr(a) || state.contains(a)));

    Ok(FlatTransition {
        name: t.to_string(),
        origin: Some(t.to_string()),
        inputs: flat_inputs,
        outputs: flat_outputs,
        gate,
    })
}
