//! Scalar values carried by tokens, attributes and inscriptions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A scalar data value. Ordering is total: ints < bools < strings, then by
/// payload, which gives bindings a lexicographic order for deterministic
/// scheduling.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
}

/// The type of an attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Int,
    Bool,
    String,
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Int(_) => ValueType::Int,
            Value::Bool(_) => ValueType::Bool,
            Value::Str(_) => ValueType::String,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Int => f.write_str("int"),
            ValueType::Bool => f.write_str("bool"),
            ValueType::String => f.write_str("string"),
        }
    }
}

/// Renders a value as a literal of the guard language (strings quoted and
/// escaped), which is also the PROD literal form.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write_quoted(f, s),
        }
    }
}

pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

/// Lenient parsing used for command-line arguments: integers and booleans
/// are recognised, a double-quoted literal is unquoted, anything else is
/// taken as a bare string.
impl FromStr for Value {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Ok(n) = t.parse::<i64>() {
            return Ok(Value::Int(n));
        }
        match t {
            "true" => return Ok(Value::Bool(true)),
            "false" => return Ok(Value::Bool(false)),
            _ => {}
        }
        if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') {
            if let Ok(crate::guards::Expr::Lit(v)) = crate::guards::parse_expr(t) {
                return Ok(v);
            }
        }
        Ok(Value::Str(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cli_literals() {
        assert_eq!("5".parse::<Value>().unwrap(), Value::Int(5));
        assert_eq!("-2".parse::<Value>().unwrap(), Value::Int(-2));
        assert_eq!("true".parse::<Value>().unwrap(), Value::Bool(true));
        assert_eq!("\"a b\"".parse::<Value>().unwrap(), Value::from("a b"));
        assert_eq!("hello".parse::<Value>().unwrap(), Value::from("hello"));
    }

    #[test]
    fn json_is_untagged() {
        let vs = vec![Value::Int(3), Value::Bool(false), Value::from("x")];
        let text = serde_json::to_string(&vs).unwrap();
        assert_eq!(text, r#"[3,false,"x"]"#);
        let back: Vec<Value> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vs);
    }

    #[test]
    fn display_escapes_strings() {
        assert_eq!(Value::from("a\"b").to_string(), r#""a\"b""#);
    }
}
