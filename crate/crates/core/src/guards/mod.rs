//! The inscription language shared by transition conditions (`Trc`),
//! transition actions (`Tra`) and arc inscriptions (`F`).
//!
//! ```text
//! cond   := or
//! or     := and ("||" and)*
//! and    := not ("&&" not)*
//! not    := "!" not | "(" cond ")" | expr (cmpop expr)?
//! expr   := term (("+" | "-") term)*
//! term   := atom ("*" atom)*
//! atom   := INT | "-" INT | "true" | "false" | STRING | IDENT | "(" expr ")"
//! action := (IDENT ":=" expr (";" IDENT ":=" expr)* ";"?)?
//! inscr  := "[" (expr ("," expr)*)? "]" | expr ("," expr)*
//! ```
//!
//! The empty condition is the always-true gate.

mod ast;
mod eval;
mod parser;

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::value::Value;

pub use ast::{ActionSeq, Assignment, CmpOp, Condition, Expr, Inscription};
pub use eval::{eval_action, eval_condition, eval_expr};
pub(crate) use parser::{is_ident_continue, is_ident_start};
pub use parser::{parse_action, parse_condition, parse_expr, parse_inscription};

/// Variable bindings used when evaluating guards and actions.
pub type Env = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuardError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("integer overflow evaluating `{0}`")]
    Overflow(String),
}

macro_rules! text_serde {
    ($ty:ty, $parse:path) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                $parse(&text).map_err(serde::de::Error::custom)
            }
        }

        impl std::str::FromStr for $ty {
            type Err = GuardError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $parse(s)
            }
        }
    };
}

text_serde!(Condition, parse_condition);
text_serde!(ActionSeq, parse_action);
text_serde!(Inscription, parse_inscription);
text_serde!(Expr, parse_expr);

/// True for strings usable as variable names in the inscription language.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_ident_start(c) => {}
        _ => return false,
    }
    chars.all(is_ident_continue) && s != "true" && s != "false"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serde_uses_text_form() {
        let c = parse_condition("Available == true && n < 3").unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, "\"Available == true && n < 3\"");
        let back: Condition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);

        let bad: Result<Condition, _> = serde_json::from_str("\"a ==\"");
        assert!(bad.is_err());
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("seq"));
        assert!(is_identifier("B§1"));
        assert!(!is_identifier("true"));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier("a-b"));
    }
}
