use std::fmt;

use serde::{Deserialize, Serialize};

use super::{reachability, AnalysisError, FlatMarking, FlatNet, Limits, StateGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub states: usize,
    pub edges: usize,
    pub truncated: bool,
    /// Largest number of tokens seen in one place.
    pub bound_k: usize,
    /// Fully explored markings without successors and without a token in a
    /// goal place.
    pub deadlocks: Vec<FlatMarking>,
    pub goal_reachable: bool,
    /// Shortest firing sequence to a goal marking.
    pub witness: Option<Vec<String>>,
}

fn at_goal(net: &FlatNet, m: &FlatMarking) -> bool {
    net.goal_places.iter().any(|p| m.contains_key(p))
}

impl AnalysisReport {
    pub fn from_graph(net: &FlatNet, g: &StateGraph) -> Self {
        let mut out_degree = vec![0usize; g.states.len()];
        for e in &g.edges {
            out_degree[e.from] += 1;
        }
        let deadlocks = (0..g.states.len())
            .filter(|&s| g.expanded[s] && out_degree[s] == 0 && !at_goal(net, &g.states[s]))
            .map(|s| g.states[s].clone())
            .collect();
        let goal = (0..g.states.len()).find(|&s| at_goal(net, &g.states[s]));
        AnalysisReport {
            states: g.states.len(),
            edges: g.edges.len(),
            truncated: g.truncated,
            bound_k: g.states.iter().flat_map(|m| m.values().map(Vec::len)).max().unwrap_or(0),
            deadlocks,
            goal_reachable: goal.is_some(),
            witness: goal.map(|s| g.path_to(s)),
        }
    }
}

/// Explores `net` and summarises its state graph.
pub fn analyze(net: &FlatNet, limits: Limits) -> Result<AnalysisReport, AnalysisError> {
    let g = reachability(net, limits)?;
    Ok(AnalysisReport::from_graph(net, &g))
}

fn write_marking(f: &mut fmt::Formatter<'_>, m: &FlatMarking) -> fmt::Result {
    f.write_str("{")?;
    for (i, (p, tuples)) in m.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{p}: ")?;
        for (j, t) in tuples.iter().enumerate() {
            if j > 0 {
                f.write_str(" + ")?;
            }
            f.write_str("<")?;
            for (k, v) in t.iter().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str(">")?;
        }
    }
    f.write_str("}")
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {}", self.states)?;
        writeln!(f, "edges: {}", self.edges)?;
        writeln!(f, "truncated: {}", self.truncated)?;
        writeln!(f, "boundK: {}", self.bound_k)?;
        writeln!(f, "deadlocks: {}", self.deadlocks.len())?;
        for m in &self.deadlocks {
            f.write_str("  ")?;
            write_marking(f, m)?;
            writeln!(f)?;
        }
        writeln!(f, "goalReachable: {}", self.goal_reachable)?;
        match &self.witness {
            Some(w) => writeln!(f, "witness: {}", w.join(" ")),
            None => writeln!(f, "witness: -"),
        }
    }
}
