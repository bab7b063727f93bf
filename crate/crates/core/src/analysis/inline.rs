use std::collections::{BTreeMap, BTreeSet};

use super::AnalysisError;
use crate::guards::{parse_action, ActionSeq, Assignment, Expr};
use crate::model::{
    fresh_suffix, renamed_id, Arc, InternalStructure, Label, Place, PlaceKind, WebService, RENAME_SEPARATOR,
};
use crate::registry::Registry;

/// Record of one inlined invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splice {
    /// The instantiated switch place that was replaced.
    pub place: String,
    pub service: String,
    pub method: String,
    /// Suffix appended to the copied ids; empty when the callee was the
    /// empty net and the place simply became silent.
    pub suffix: String,
    /// 1 for invocations of the original net, 2 for those found in a copy.
    pub depth: usize,
}

/// Replaces every instantiated switch place by a renamed copy of the
/// invoked method's subnet until none is left.
pub fn inline_isps(ws: &WebService, reg: &Registry, depth_limit: usize) -> Result<WebService, AnalysisError> {
    inline_isps_traced(ws, reg, depth_limit).map(|(ws, _)| ws)
}

pub fn inline_isps_traced(
    ws: &WebService,
    reg: &Registry,
    depth_limit: usize,
) -> Result<(WebService, Vec<Splice>), AnalysisError> {
    let mut out = ws.clone();
    let mut depth: BTreeMap<String, usize> =
        out.net.is.places.iter().filter(|p| p.is_isp()).map(|p| (p.id.clone(), 1)).collect();
    let mut log = Vec::new();
    while let Some(place) = out.net.is.places.iter().find(|p| p.is_isp()).cloned() {
        let d = depth.remove(&place.id).unwrap_or(1);
        if d >= depth_limit {
            return Err(AnalysisError::DepthLimitExceeded(depth_limit));
        }
        let service = place.invoked_gnet.clone().unwrap_or_default();
        let method = place.using_method.clone().unwrap_or_default();
        let callee = reg.lookup(&service).map_err(|_| AnalysisError::UnknownService(service.clone()))?;
        let suffix = splice(&mut out, &place.id, callee, &method, |id| {
            depth.insert(id.to_string(), d + 1);
        })?;
        log.push(Splice { place: place.id, service, method, suffix, depth: d });
    }
    Ok((out, log))
}

/// Nodes of `is` reachable from `start` along arcs, plus the input places
/// of every reachable transition.
fn forward_closure(is: &InternalStructure, start: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([start.to_string()]);
    let mut stack = vec![start.to_string()];
    while let Some(x) = stack.pop() {
        for y in is.postset(&x) {
            if seen.insert(y.to_string()) {
                stack.push(y.to_string());
            }
        }
    }
    let extra: Vec<String> = is
        .transitions
        .iter()
        .filter(|t| seen.contains(*t))
        .flat_map(|t| is.inputs_of(t).into_iter().map(str::to_string))
        .collect();
    seen.extend(extra);
    seen
}

fn splice(
    host: &mut WebService,
    isp: &str,
    callee: &WebService,
    method: &str,
    mut nested: impl FnMut(&str),
) -> Result<String, AnalysisError> {
    if callee.net.gsp.methods.is_empty() && callee.is_empty_net() {
        let p = host.net.is.place_mut(isp).expect("isp exists");
        *p = Place::normal(isp);
        host.net.is.labels.insert(isp.to_string(), Label::Tau);
        return Ok(String::new());
    }
    let m = callee
        .method(method)
        .ok_or_else(|| AnalysisError::UnknownMethod { service: callee.name.clone(), method: method.into() })?;
    let keep = forward_closure(&callee.net.is, &m.init_place);
    let src = &callee.net.is;

    let mut taken = host.net.is.ids();
    taken.extend(host.net.gsp.attributes.iter().map(|a| a.name.clone()));
    let mut incoming: BTreeSet<String> = keep.clone();
    incoming.extend(callee.net.gsp.attributes.iter().map(|a| a.name.clone()));
    let suffix = fresh_suffix(&taken, &incoming);
    let rn = |id: &str| renamed_id(id, &suffix);

    let attr_map: BTreeMap<String, String> =
        callee.net.gsp.attributes.iter().map(|a| (a.name.clone(), rn(&a.name))).collect();
    let init = rn(&m.init_place);
    let goals: Vec<String> = m.goal_places.iter().map(|g| rn(g)).collect();

    // copied subnet
    let mut copy = InternalStructure::default();
    for p in src.places.iter().filter(|p| keep.contains(&p.id)) {
        let mut q = Place { id: rn(&p.id), ..p.clone() };
        let mut label = src.labels.get(&p.id).cloned().unwrap_or(Label::Tau);
        if q.kind == PlaceKind::Goal {
            q.kind = PlaceKind::Normal;
            label = Label::Tau;
        }
        if q.is_isp() {
            nested(&q.id);
        }
        copy.labels.insert(q.id.clone(), label);
        copy.places.push(q);
    }
    copy.transitions = src.transitions.iter().filter(|t| keep.contains(*t)).map(|t| rn(t)).collect();
    for a in src.arcs.iter().filter(|a| keep.contains(&a.from) && keep.contains(&a.to)) {
        let arc = Arc::new(rn(&a.from), rn(&a.to));
        if let Some(i) = src.inscriptions.get(a) {
            copy.inscriptions.insert(arc.clone(), i.rename_vars(&attr_map));
        }
        copy.arcs.push(arc);
    }
    for t in src.transitions.iter().filter(|t| keep.contains(*t)) {
        if let Some(c) = src.conditions.get(t) {
            copy.conditions.insert(rn(t), c.rename_vars(&attr_map));
        }
        if let Some(a) = src.actions.get(t) {
            copy.actions.insert(rn(t), a.rename_vars(&attr_map));
        }
    }

    // rewire the host
    let h = &mut host.net.is;
    let feeders: Vec<String> = h.preset(isp).into_iter().map(str::to_string).collect();
    let consumers: Vec<String> = h.postset(isp).into_iter().map(str::to_string).collect();

    let mut arcs = Vec::new();
    let mut inscriptions = BTreeMap::new();
    for a in &h.arcs {
        let insc = h.inscriptions.get(a).cloned();
        let mut put = |arc: Arc| {
            if let Some(i) = &insc {
                inscriptions.insert(arc.clone(), i.clone());
            }
            arcs.push(arc);
        };
        if a.to == isp {
            put(Arc::new(&a.from, &init));
        } else if a.from == isp {
            put(Arc::new(&goals[0], &a.to));
        } else {
            put(a.clone());
        }
    }
    h.arcs = arcs;
    h.inscriptions = inscriptions;

    // with several goal places, every consumer gets one copy per extra goal
    for (k, goal) in goals.iter().enumerate().skip(1) {
        for t in &consumers {
            let dup = format!("{t}{RENAME_SEPARATOR}{suffix}g{k}");
            if h.has_place(&dup) || h.has_transition(&dup) {
                return Err(AnalysisError::NameClash(dup));
            }
            let mut new_arcs = Vec::new();
            for a in h.arcs.iter().filter(|a| a.from == *t || a.to == *t) {
                let arc = if a.to == *t {
                    let from = if a.from == goals[0] { goal.clone() } else { a.from.clone() };
                    Arc::new(from, &dup)
                } else {
                    Arc::new(&dup, &a.to)
                };
                if let Some(i) = h.inscriptions.get(a) {
                    h.inscriptions.insert(arc.clone(), i.clone());
                }
                new_arcs.push(arc);
            }
            h.arcs.extend(new_arcs);
            if let Some(c) = h.conditions.get(t).cloned() {
                h.conditions.insert(dup.clone(), c);
            }
            if let Some(a) = h.actions.get(t).cloned() {
                h.actions.insert(dup.clone(), a);
            }
            h.transitions.push(dup);
        }
    }

    // reset the callee's attributes whenever a new invocation starts
    let resets: Vec<Assignment> = callee
        .net
        .gsp
        .attributes
        .iter()
        .filter_map(|a| {
            a.initial.clone().map(|v| Assignment { target: attr_map[&a.name].clone(), value: Expr::Lit(v) })
        })
        .collect();
    if !resets.is_empty() {
        for t in &feeders {
            let action = h.actions.entry(t.clone()).or_insert_with(|| parse_action("").expect("empty action"));
            *action = ActionSeq(action.0.iter().cloned().chain(resets.iter().cloned()).collect());
        }
    }

    let at = h.places.iter().position(|p| p.id == isp).expect("isp exists");
    h.places.splice(at..=at, copy.places);
    h.labels.remove(isp);
    h.labels.extend(copy.labels);
    h.transitions.extend(copy.transitions);
    h.arcs.extend(copy.arcs);
    h.inscriptions.extend(copy.inscriptions);
    h.conditions.extend(copy.conditions);
    h.actions.extend(copy.actions);

    for hm in &mut host.net.gsp.methods {
        if hm.init_place == isp {
            hm.init_place = init.clone();
        }
    }
    for a in &callee.net.gsp.attributes {
        let mut renamed = a.clone();
        renamed.name = attr_map[&a.name].clone();
        host.net.gsp.attributes.push(renamed);
    }
    Ok(suffix)
}
