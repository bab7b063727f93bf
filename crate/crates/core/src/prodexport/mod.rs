//! Text exports: the PROD net description of a flat net and a Graphviz
//! rendering of a G-Net.

mod dot;
mod reader;

use std::collections::BTreeSet;
use std::fmt::Write;

use thiserror::Error;

use crate::analysis::FlatNet;
use crate::guards::{Condition, Expr};
use crate::value::Value;

pub use dot::export_dot;
pub use reader::parse_prod;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProdError {
    #[error("transition `{transition}` refers to undeclared place `{place}`")]
    UndeclaredPlaceReference { transition: String, place: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProdPlace {
    pub name: String,
    pub marking: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProdArc {
    pub place: String,
    pub tuple: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProdTransition {
    pub name: String,
    pub inputs: Vec<ProdArc>,
    pub outputs: Vec<ProdArc>,
    pub gate: Condition,
}

/// A PROD description before rendering. Places and transitions keep the
/// order of the flat net.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProdDoc {
    pub places: Vec<ProdPlace>,
    pub transitions: Vec<ProdTransition>,
}

impl ProdDoc {
    pub fn from_flat(flat: &FlatNet) -> Result<Self, ProdError> {
        let doc = ProdDoc {
            places: flat
                .places
                .iter()
                .map(|p| ProdPlace {
                    name: p.name.clone(),
                    marking: flat.initial.get(&p.name).cloned().unwrap_or_default(),
                })
                .collect(),
            transitions: flat
                .transitions
                .iter()
                .map(|t| {
                    let arcs = |arcs: &[crate::analysis::FlatArc]| {
                        arcs.iter().map(|a| ProdArc { place: a.place.clone(), tuple: a.tuple.clone() }).collect()
                    };
                    ProdTransition {
                        name: t.name.clone(),
                        inputs: arcs(&t.inputs),
                        outputs: arcs(&t.outputs),
                        gate: t.gate.clone(),
                    }
                })
                .collect(),
        };
        doc.check()?;
        Ok(doc)
    }

    /// Every place used by a transition must be declared.
    pub fn check(&self) -> Result<(), ProdError> {
        let declared: BTreeSet<&str> = self.places.iter().map(|p| p.name.as_str()).collect();
        for t in &self.transitions {
            for a in t.inputs.iter().chain(&t.outputs) {
                if !declared.contains(a.place.as_str()) {
                    return Err(ProdError::UndeclaredPlaceReference {
                        transition: t.name.clone(),
                        place: a.place.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in &self.places {
            out.push_str("#place ");
            out.push_str(&p.name);
            if !p.marking.is_empty() {
                out.push_str(" mk(");
                for (i, t) in p.marking.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    write_tuple(&mut out, t.iter().cloned().map(Expr::Lit));
                }
                out.push(')');
            }
            out.push('\n');
        }
        for t in &self.transitions {
            writeln!(out, "#trans {}", t.name).unwrap();
            for (kw, arcs) in [("in", &t.inputs), ("out", &t.outputs)] {
                write!(out, "{kw} {{ ").unwrap();
                for a in arcs {
                    write!(out, "{}: ", a.place).unwrap();
                    write_tuple(&mut out, a.tuple.iter().cloned());
                    out.push_str("; ");
                }
                out.push_str("}\n");
            }
            if t.gate.is_always() {
                out.push_str("gate ;\n");
            } else {
                writeln!(out, "gate {};", t.gate).unwrap();
            }
            out.push_str("#endtr\n");
        }
        out
    }
}

fn write_tuple(out: &mut String, items: impl Iterator<Item = Expr>) {
    out.push_str("<.");
    for (i, e) in items.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{e}").unwrap();
    }
    out.push_str(".>");
}

pub fn export_prod(flat: &FlatNet) -> Result<String, ProdError> {
    Ok(ProdDoc::from_flat(flat)?.render())
}
