use std::fmt::Write;

use crate::model::{PlaceKind, WebService};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz description of the internal structure of `ws`: one node per
/// place and transition, one edge per arc.
pub fn export_dot(ws: &WebService) -> String {
    let is = &ws.net.is;
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(&ws.name)).unwrap();
    out.push_str("  rankdir=LR;\n");
    for p in &is.places {
        let shape = match p.kind {
            PlaceKind::Normal => "circle",
            PlaceKind::Goal => "doublecircle",
            PlaceKind::InstantiatedSwitch => "ellipse",
        };
        let label = match is.labels.get(&p.id) {
            Some(l) => format!("{}\n{l}", p.id),
            None => p.id.clone(),
        };
        writeln!(out, "  {} [shape={shape}, label={}];", quote(&p.id), quote(&label)).unwrap();
    }
    for t in &is.transitions {
        let mut label = t.clone();
        if let Some(c) = is.conditions.get(t).filter(|c| !c.is_always()) {
            write!(label, "\n[{c}]").unwrap();
        }
        if let Some(a) = is.actions.get(t).filter(|a| !a.is_empty()) {
            write!(label, "\n{a}").unwrap();
        }
        writeln!(out, "  {} [shape=box, label={}];", quote(t), quote(&label)).unwrap();
    }
    for a in &is.arcs {
        match is.inscription(&a.from, &a.to) {
            Some(i) => writeln!(out, "  {} -> {} [label={}];", quote(&a.from), quote(&a.to), quote(&i.to_string())),
            None => writeln!(out, "  {} -> {};", quote(&a.from), quote(&a.to)),
        }
        .unwrap();
    }
    out.push_str("}\n");
    out
}
