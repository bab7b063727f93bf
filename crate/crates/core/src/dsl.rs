//! Textual composition expressions.
//!
//! ```text
//! expr  := term (">>" term)*
//! term  := "empty" | name | "(" expr ")"
//!        | "seq" "(" expr "," expr ")"    | "alt" "(" expr "," expr ")"
//!        | "iter" "(" expr ")"            | "anyseq" "(" expr "," expr ")"
//!        | "par" "(" expr "," expr ")"    | "disc" "(" list ";" expr ")"
//!        | "select" "(" list ")"          | "refine" "(" expr "," name "," name ")"
//!        | "replace" "(" expr "," expr "," expr ")"
//! list  := expr ("," expr)*
//! name  := [A-Za-z0-9_.-]+ | '"' chars '"'
//! ```
//!
//! Keywords are only recognised directly before `(`, except `empty`.
//! `#` starts a comment running to the end of the line.

use std::fmt;

use thiserror::Error;

use crate::algebra::{self, AlgebraError};
use crate::model::WebService;
use crate::registry::{Registry, RegistryError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CompositionExpr {
    Empty,
    Ref(String),
    Seq(Box<CompositionExpr>, Box<CompositionExpr>),
    Alt(Box<CompositionExpr>, Box<CompositionExpr>),
    Iter(Box<CompositionExpr>),
    AnySeq(Box<CompositionExpr>, Box<CompositionExpr>),
    Par(Box<CompositionExpr>, Box<CompositionExpr>),
    Disc(Vec<CompositionExpr>, Box<CompositionExpr>),
    Select(Vec<CompositionExpr>),
    Refine(Box<CompositionExpr>, String, String),
    Replace(Box<CompositionExpr>, Box<CompositionExpr>, Box<CompositionExpr>),
}

#[derive(Debug, Error)]
pub enum DslError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Then,
    End,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, DslError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    let err = |position, message: &str| DslError::Syntax { position, message: message.into() };
    while let Some(&(i, c)) = chars.peek() {
        match c {
            _ if c.is_whitespace() => {
                chars.next();
            }
            '#' => {
                while chars.peek().is_some_and(|&(_, c)| c != '\n') {
                    chars.next();
                }
            }
            '(' | ')' | ',' | ';' => {
                chars.next();
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    _ => Tok::Semi,
                };
                out.push((i, t));
            }
            '>' => {
                chars.next();
                match chars.next() {
                    Some((_, '>')) => out.push((i, Tok::Then)),
                    _ => return Err(err(i, "expected `>>`")),
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, c @ ('"' | '\\'))) => s.push(c),
                            _ => return Err(err(i, "bad escape in quoted name")),
                        },
                        Some((_, c)) => s.push(c),
                        None => return Err(err(i, "unterminated quoted name")),
                    }
                }
                if s.is_empty() {
                    return Err(err(i, "empty name"));
                }
                out.push((i, Tok::Quoted(s)));
            }
            _ if is_name_char(c) => {
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek().filter(|(_, c)| is_name_char(*c)) {
                    s.push(c);
                    chars.next();
                }
                out.push((i, Tok::Name(s)));
            }
            _ => return Err(err(i, &format!("unexpected character `{c}`"))),
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::Syntax { position: self.offset(), message: message.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), DslError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<CompositionExpr, DslError> {
        let mut lhs = self.term()?;
        while *self.peek() == Tok::Then {
            self.bump();
            let rhs = self.term()?;
            lhs = CompositionExpr::Seq(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn name(&mut self) -> Result<String, DslError> {
        match self.peek().clone() {
            Tok::Name(s) | Tok::Quoted(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail("expected a name"),
        }
    }

    fn list(&mut self) -> Result<Vec<CompositionExpr>, DslError> {
        let mut items = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            items.push(self.expr()?);
        }
        Ok(items)
    }

    fn term(&mut self) -> Result<CompositionExpr, DslError> {
        use CompositionExpr as E;
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Quoted(s) => {
                self.bump();
                Ok(E::Ref(s))
            }
            Tok::Name(s) => {
                let kw_start = self.offset();
                self.bump();
                if *self.peek() != Tok::LParen {
                    return Ok(if s == "empty" { E::Empty } else { E::Ref(s) });
                }
                let b = Box::new;
                self.bump();
                let e = match s.as_str() {
                    "seq" | "alt" | "anyseq" | "par" => {
                        let x = self.expr()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let y = self.expr()?;
                        match s.as_str() {
                            "seq" => E::Seq(b(x), b(y)),
                            "alt" => E::Alt(b(x), b(y)),
                            "anyseq" => E::AnySeq(b(x), b(y)),
                            _ => E::Par(b(x), b(y)),
                        }
                    }
                    "iter" => E::Iter(b(self.expr()?)),
                    "disc" => {
                        let racers = self.list()?;
                        self.expect(Tok::Semi, "`;`")?;
                        E::Disc(racers, b(self.expr()?))
                    }
                    "select" => E::Select(self.list()?),
                    "refine" => {
                        let x = self.expr()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let op = self.name()?;
                        self.expect(Tok::Comma, "`,`")?;
                        E::Refine(b(x), op, self.name()?)
                    }
                    "replace" => {
                        let x = self.expr()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let y = self.expr()?;
                        self.expect(Tok::Comma, "`,`")?;
                        E::Replace(b(x), b(y), b(self.expr()?))
                    }
                    _ => {
                        return Err(DslError::Syntax { position: kw_start, message: format!("unknown operator `{s}`") })
                    }
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.fail("expected an expression"),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<CompositionExpr, DslError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("unexpected trailing input");
    }
    Ok(e)
}

fn write_name(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if name != "empty" && name.chars().all(is_name_char) && !name.is_empty() {
        f.write_str(name)
    } else {
        f.write_str("\"")?;
        for c in name.chars() {
            if matches!(c, '"' | '\\') {
                f.write_str("\\")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("\"")
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[CompositionExpr]) -> fmt::Result {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

impl fmt::Display for CompositionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CompositionExpr as E;
        match self {
            E::Empty => f.write_str("empty"),
            E::Ref(name) => write_name(f, name),
            E::Seq(a, b) => {
                write!(f, "{a} >> ")?;
                if matches!(**b, E::Seq(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            E::Alt(a, b) => write!(f, "alt({a}, {b})"),
            E::Iter(a) => write!(f, "iter({a})"),
            E::AnySeq(a, b) => write!(f, "anyseq({a}, {b})"),
            E::Par(a, b) => write!(f, "par({a}, {b})"),
            E::Disc(racers, last) => {
                f.write_str("disc(")?;
                write_list(f, racers)?;
                write!(f, "; {last})")
            }
            E::Select(items) => {
                f.write_str("select(")?;
                write_list(f, items)?;
                f.write_str(")")
            }
            E::Refine(e, op, block) => {
                write!(f, "refine({e}, ")?;
                write_name(f, op)?;
                f.write_str(", ")?;
                write_name(f, block)?;
                f.write_str(")")
            }
            E::Replace(a, b, c) => write!(f, "replace({a}, {b}, {c})"),
        }
    }
}

/// The result of evaluating an expression, together with every
/// intermediate service it built. The intermediates must be registered
/// alongside the result before it can be simulated or inlined.
#[derive(Debug, Clone)]
pub struct Composition {
    pub service: WebService,
    pub parts: Vec<WebService>,
}

impl Composition {
    /// `base` extended with the intermediates and the result.
    pub fn registry(&self, base: &Registry) -> Result<Registry, RegistryError> {
        let mut reg = base.clone();
        for ws in self.parts.iter().chain([&self.service]) {
            reg.insert_or_same(ws.clone())?;
        }
        Ok(reg)
    }
}

struct Evaluator<'a> {
    reg: &'a Registry,
    parts: Vec<WebService>,
}

impl Evaluator<'_> {
    fn built(&mut self, ws: WebService) -> WebService {
        if !self.reg.contains(&ws.name) && !self.parts.iter().any(|p| p.name == ws.name) {
            self.parts.push(ws.clone());
        }
        ws
    }

    fn eval(&mut self, e: &CompositionExpr) -> Result<WebService, DslError> {
        use CompositionExpr as E;
        let ws = match e {
            E::Empty => algebra::empty_service(),
            E::Ref(name) => return Ok(self.reg.lookup(name)?.clone()),
            E::Seq(a, b) => algebra::sequence(&self.eval(a)?, &self.eval(b)?),
            E::Alt(a, b) => algebra::alternative(&self.eval(a)?, &self.eval(b)?),
            E::Iter(a) => algebra::iteration(&self.eval(a)?),
            E::AnySeq(a, b) => algebra::arbitrary_sequence(&self.eval(a)?, &self.eval(b)?),
            E::Par(a, b) => algebra::parallel(&self.eval(a)?, &self.eval(b)?),
            E::Disc(racers, last) => {
                let racers = racers.iter().map(|r| self.eval(r)).collect::<Result<Vec<_>, _>>()?;
                algebra::discriminator(&racers, &self.eval(last)?)?
            }
            E::Select(items) => {
                let items = items.iter().map(|r| self.eval(r)).collect::<Result<Vec<_>, _>>()?;
                algebra::selection(&items)?
            }
            E::Refine(s, op, block) => {
                let s = self.eval(s)?;
                algebra::refine(&s, op, self.reg.block(block)?)?
            }
            E::Replace(s, old, new) => {
                let (s, old, new) = (self.eval(s)?, self.eval(old)?, self.eval(new)?);
                algebra::replace(&s, &old, &new)?
            }
        };
        Ok(self.built(ws))
    }
}

/// Evaluates `e` bottom-up against `reg`.
pub fn eval_expr(e: &CompositionExpr, reg: &Registry) -> Result<Composition, DslError> {
    let mut ev = Evaluator { reg, parts: Vec::new() };
    let service = ev.eval(e)?;
    let parts = ev.parts.into_iter().filter(|p| p.name != service.name).collect();
    Ok(Composition { service, parts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::atomic;
    use CompositionExpr as E;

    fn r(s: &str) -> Box<E> {
        Box::new(E::Ref(s.into()))
    }

    #[test]
    fn infix_sequence() {
        assert_eq!(parse_expr("S1 >> S2").unwrap(), E::Seq(r("S1"), r("S2")));
        assert_eq!(parse_expr("A >> B >> C").unwrap(), E::Seq(Box::new(E::Seq(r("A"), r("B"))), r("C")));
    }

    #[test]
    fn discriminator_list() {
        assert_eq!(parse_expr("disc(A, B; C)").unwrap(), E::Disc(vec![E::Ref("A".into()), E::Ref("B".into())], r("C")));
    }

    #[test]
    fn round_trip_printing() {
        for text in [
            "A >> (B >> C)",
            "refine(\"Command books\", Treat-Command, B)",
            "replace(seq(A, B), A, \"empty\")",
            "select(A, iter(B)) >> empty # trailing comment",
        ] {
            let e = parse_expr(text).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{text}");
        }
        assert_eq!(parse_expr("seq(A, B)").unwrap().to_string(), "A >> B");
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_expr("seq(A B)") {
            Err(DslError::Syntax { position, .. }) => assert_eq!(position, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("foo(A)"), Err(DslError::Syntax { position: 0, .. })));
        assert!(parse_expr("A >").is_err());
        assert!(parse_expr("").is_err());
        assert!(parse_expr("disc(; A)").is_err());
    }

    #[test]
    fn evaluation() {
        let mut reg = Registry::new();
        reg.insert(atomic("S1", "a")).unwrap();
        reg.insert(atomic("S", "s")).unwrap();
        let c = eval_expr(&parse_expr("empty").unwrap(), &reg).unwrap();
        assert!(c.service.is_empty_service());
        let c = eval_expr(&parse_expr("iter(S1)").unwrap(), &reg).unwrap();
        let is = &c.service.net.is;
        assert_eq!((is.places.len(), is.transitions.len(), is.arcs.len()), (2, 2, 4));
        assert!(matches!(
            eval_expr(&parse_expr("replace(S, S1, empty)").unwrap(), &reg),
            Err(DslError::Algebra(AlgebraError::EmptyReplacement))
        ));
        assert!(matches!(
            eval_expr(&parse_expr("S >> nope").unwrap(), &reg),
            Err(DslError::Registry(RegistryError::UnknownService(_)))
        ));
        assert!(matches!(
            eval_expr(&parse_expr("refine(S, s, nope)").unwrap(), &reg),
            Err(DslError::Registry(RegistryError::UnknownBlock(_)))
        ));
    }

    #[test]
    fn parts_cover_intermediates() {
        let mut reg = Registry::new();
        reg.insert(atomic("A", "a")).unwrap();
        reg.insert(atomic("B", "b")).unwrap();
        let c = eval_expr(&parse_expr("iter(A >> B) >> empty").unwrap(), &reg).unwrap();
        let names: Vec<&str> = c.parts.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["Seq(A,B)", "Iter(Seq(A,B))", "Empty"]);
        let full = c.registry(&reg).unwrap();
        assert!(full.contains("Seq(Iter(Seq(A,B)),Empty)"));
    }
}
