//! Tokens and markings of a G-Net instance.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::value::Value;

/// A token with named fields. `pending` marks a token sitting in an
/// instantiated switch place whose invocation has not returned yet.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Token {
    pub fields: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pending: bool,
}

impl Token {
    pub fn new(fields: BTreeMap<String, Value>) -> Self {
        Token { fields, pending: false }
    }

    pub fn with(mut self, name: &str, v: impl Into<Value>) -> Self {
        self.fields.insert(name.to_string(), v.into());
        self
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str(">")?;
        if self.pending {
            f.write_str("?")?;
        }
        Ok(())
    }
}

/// Multiset of tokens per place. Token lists are kept sorted and empty
/// places are dropped, so equal markings have equal representations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Marking {
    pub by_place: BTreeMap<String, Vec<Token>>,
}

impl Marking {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, place: &str, token: Token) {
        let list = self.by_place.entry(place.to_string()).or_default();
        let at = list.partition_point(|t| *t <= token);
        list.insert(at, token);
    }

    /// Removes one occurrence; false if the token was not there.
    pub fn remove(&mut self, place: &str, token: &Token) -> bool {
        let Some(list) = self.by_place.get_mut(place) else {
            return false;
        };
        let Some(at) = list.iter().position(|t| t == token) else {
            return false;
        };
        list.remove(at);
        if list.is_empty() {
            self.by_place.remove(place);
        }
        true
    }

    pub fn tokens(&self, place: &str) -> &[Token] {
        self.by_place.get(place).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn count(&self, place: &str) -> usize {
        self.tokens(place).len()
    }

    pub fn total(&self) -> usize {
        self.by_place.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_place.is_empty()
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, toks)) in self.by_place.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}: [")?;
            for (j, t) in toks.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("}")
    }
}
