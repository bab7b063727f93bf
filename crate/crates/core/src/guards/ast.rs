use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::value::Value;

/// Integer/boolean/string expression used in inscriptions, action
/// right-hand sides and comparison operands.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Lit(Value),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// Transition selector (`Trc`). `Always` is the absent gate and prints as
/// the empty string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Always,
    /// A bare boolean-valued expression, e.g. `B` or `true`.
    Holds(Expr),
    Compare(Expr, CmpOp, Expr),
    Not(Box<Condition>),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub target: String,
    pub value: Expr,
}

/// Transition action (`Tra`): assignments applied left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionSeq(pub Vec<Assignment>);

/// Arc inscription (`F`): a tuple of expressions. On input arcs every item
/// must be a bare variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Inscription(pub Vec<Expr>);

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn lit(v: impl Into<Value>) -> Self {
        Expr::Lit(v.into())
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Lit(_) | Expr::Var(_) => 3,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Replaces variables by expressions; unmapped variables are kept.
    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Lit(_) => self.clone(),
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(a, b) => Expr::Add(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
        }
    }

    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> Expr {
        let subst: BTreeMap<String, Expr> = map.iter().map(|(k, v)| (k.clone(), Expr::Var(v.clone()))).collect();
        self.substitute(&subst)
    }
}

impl Condition {
    fn precedence(&self) -> u8 {
        match self {
            Condition::Or(..) => 1,
            Condition::And(..) => 2,
            Condition::Not(_) => 3,
            Condition::Always | Condition::Holds(_) | Condition::Compare(..) => 4,
        }
    }

    pub fn is_always(&self) -> bool {
        matches!(self, Condition::Always)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Condition::Always => {}
            Condition::Holds(e) => e.collect_vars(out),
            Condition::Compare(a, _, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Condition::Not(c) => c.collect_vars(out),
            Condition::And(a, b) | Condition::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Condition {
        match self {
            Condition::Always => Condition::Always,
            Condition::Holds(e) => Condition::Holds(e.substitute(map)),
            Condition::Compare(a, op, b) => Condition::Compare(a.substitute(map), *op, b.substitute(map)),
            Condition::Not(c) => Condition::Not(Box::new(c.substitute(map))),
            Condition::And(a, b) => Condition::And(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Condition::Or(a, b) => Condition::Or(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
        }
    }

    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> Condition {
        let subst: BTreeMap<String, Expr> = map.iter().map(|(k, v)| (k.clone(), Expr::Var(v.clone()))).collect();
        self.substitute(&subst)
    }
}

impl ActionSeq {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn assigned(&self) -> BTreeSet<String> {
        self.0.iter().map(|a| a.target.clone()).collect()
    }

    /// Variables whose value is read before the sequence assigns them.
    pub fn reads(&self) -> BTreeSet<String> {
        let mut written = BTreeSet::new();
        let mut reads = BTreeSet::new();
        for a in &self.0 {
            for v in a.value.vars() {
                if !written.contains(&v) {
                    reads.insert(v);
                }
            }
            written.insert(a.target.clone());
        }
        reads
    }

    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> ActionSeq {
        ActionSeq(
            self.0
                .iter()
                .map(|a| Assignment {
                    target: map.get(&a.target).cloned().unwrap_or_else(|| a.target.clone()),
                    value: a.value.rename_vars(map),
                })
                .collect(),
        )
    }
}

impl Inscription {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for e in &self.0 {
            e.collect_vars(&mut out);
        }
        out
    }

    /// True when every item is a bare variable (a valid input pattern).
    pub fn is_pattern(&self) -> bool {
        self.0.iter().all(|e| matches!(e, Expr::Var(_)))
    }

    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> Inscription {
        Inscription(self.0.iter().map(|e| e.rename_vars(map)).collect())
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}

fn fmt_binary(f: &mut fmt::Formatter<'_>, parent: &Expr, op: &str, a: &Expr, b: &Expr) -> fmt::Result {
    let p = parent.precedence();
    if a.precedence() < p {
        write!(f, "({a})")?;
    } else {
        write!(f, "{a}")?;
    }
    write!(f, " {op} ")?;
    if b.precedence() <= p {
        write!(f, "({b})")
    } else {
        write!(f, "{b}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Add(a, b) => fmt_binary(f, self, "+", a, b),
            Expr::Sub(a, b) => fmt_binary(f, self, "-", a, b),
            Expr::Mul(a, b) => fmt_binary(f, self, "*", a, b),
        }
    }
}

impl Condition {
    fn fmt_nested(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "(")?;
            self.fmt_inner(f)?;
            write!(f, ")")
        } else {
            self.fmt_inner(f)
        }
    }

    fn fmt_inner(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // only reachable when nested; the top level prints nothing
            Condition::Always => f.write_str("true"),
            Condition::Holds(e) => write!(f, "{e}"),
            Condition::Compare(a, op, b) => write!(f, "{a} {op} {b}"),
            Condition::Not(c) => {
                f.write_str("!")?;
                c.fmt_nested(f, c.precedence() < 3)
            }
            Condition::And(a, b) => {
                a.fmt_nested(f, a.precedence() < 2)?;
                f.write_str(" && ")?;
                b.fmt_nested(f, b.precedence() <= 2)
            }
            Condition::Or(a, b) => {
                a.fmt_nested(f, a.precedence() < 1)?;
                f.write_str(" || ")?;
                b.fmt_nested(f, b.precedence() <= 1)
            }
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Always => Ok(()),
            c => c.fmt_inner(f),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} := {}", self.target, self.value)
    }
}

impl fmt::Display for ActionSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Inscription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("]")
    }
}
