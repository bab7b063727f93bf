//! Reader for the PROD dialect written by [`ProdDoc::render`].

use super::{ProdArc, ProdDoc, ProdError, ProdPlace, ProdTransition};
use crate::guards::{parse_condition, parse_expr, Condition, Expr};
use crate::value::Value;

fn syntax(line: usize, message: impl Into<String>) -> ProdError {
    ProdError::Syntax { line, message: message.into() }
}

/// Splits `s` on `sep` outside double quotes.
fn split_top(s: &str, sep: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut escaped = false;
    let mut rest = s;
    while let Some(c) = rest.chars().next() {
        if !quoted && rest.starts_with(sep) {
            parts.push(std::mem::take(&mut cur));
            rest = &rest[sep.len()..];
            continue;
        }
        if quoted && !escaped && c == '"' {
            quoted = false;
        } else if !quoted && c == '"' {
            quoted = true;
        }
        escaped = quoted && !escaped && c == '\\';
        cur.push(c);
        rest = &rest[c.len_utf8()..];
    }
    parts.push(cur);
    parts
}

fn parse_tuple(text: &str, line: usize) -> Result<Vec<Expr>, ProdError> {
    let t = text.trim();
    let inner = t
        .strip_prefix("<.")
        .and_then(|t| t.strip_suffix(".>"))
        .ok_or_else(|| syntax(line, format!("expected `<. ... .>`, found `{t}`")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top(inner, ",").iter().map(|item| parse_expr(item).map_err(|e| syntax(line, e.to_string()))).collect()
}

fn parse_arcs(text: &str, kw: &str, line: usize) -> Result<Vec<ProdArc>, ProdError> {
    let body = text
        .trim()
        .strip_prefix(kw)
        .map(str::trim_start)
        .and_then(|t| t.strip_prefix('{'))
        .and_then(|t| t.trim_end().strip_suffix('}'))
        .ok_or_else(|| syntax(line, format!("expected `{kw} {{ ... }}`")))?;
    let mut arcs = Vec::new();
    for item in split_top(body, ";") {
        if item.trim().is_empty() {
            continue;
        }
        let (place, tuple) = item.split_once(':').ok_or_else(|| syntax(line, "expected `PLACE: <. ... .>`"))?;
        arcs.push(ProdArc { place: place.trim().to_string(), tuple: parse_tuple(tuple, line)? });
    }
    Ok(arcs)
}

fn parse_place(rest: &str, line: usize) -> Result<ProdPlace, ProdError> {
    let rest = rest.trim();
    let (name, mk) = match rest.split_once(char::is_whitespace) {
        Some((name, mk)) => (name, Some(mk.trim())),
        None => (rest, None),
    };
    let mut marking = Vec::new();
    if let Some(mk) = mk {
        let inner = mk
            .strip_prefix("mk(")
            .and_then(|m| m.strip_suffix(')'))
            .ok_or_else(|| syntax(line, "expected `mk(...)`"))?;
        for tuple in split_top(inner, "+") {
            let values = parse_tuple(&tuple, line)?
                .into_iter()
                .map(|e| match e {
                    Expr::Lit(v) => Ok(v),
                    other => Err(syntax(line, format!("initial marking holds non-literal `{other}`"))),
                })
                .collect::<Result<Vec<Value>, _>>()?;
            marking.push(values);
        }
    }
    Ok(ProdPlace { name: name.to_string(), marking })
}

/// Parses text produced by [`ProdDoc::render`].
pub fn parse_prod(text: &str) -> Result<ProdDoc, ProdError> {
    let mut doc = ProdDoc::default();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    while let Some((n, l)) = lines.next() {
        if let Some(rest) = l.strip_prefix("#place ") {
            doc.places.push(parse_place(rest, n)?);
        } else if let Some(name) = l.strip_prefix("#trans ") {
            let mut next = |what: &str| lines.next().ok_or_else(|| syntax(n, format!("missing `{what}`")));
            let (ni, li) = next("in")?;
            let inputs = parse_arcs(li, "in", ni)?;
            let (no, lo) = next("out")?;
            let outputs = parse_arcs(lo, "out", no)?;
            let (ng, lg) = next("gate")?;
            let cond = lg
                .strip_prefix("gate")
                .and_then(|g| g.trim().strip_suffix(';'))
                .ok_or_else(|| syntax(ng, "expected `gate ...;`"))?
                .trim();
            let gate = if cond.is_empty() {
                Condition::Always
            } else {
                parse_condition(cond).map_err(|e| syntax(ng, e.to_string()))?
            };
            let (ne, le) = next("#endtr")?;
            if le != "#endtr" {
                return Err(syntax(ne, "expected `#endtr`"));
            }
            doc.transitions.push(ProdTransition { name: name.trim().to_string(), inputs, outputs, gate });
        } else {
            return Err(syntax(n, format!("unexpected `{l}`")));
        }
    }
    doc.check()?;
    Ok(doc)
}
