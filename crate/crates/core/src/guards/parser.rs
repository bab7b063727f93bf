//! Lexer and recursive-descent parser for conditions, actions and
//! inscriptions.
//!
//! Precedence, loosest first: `||`, `&&`, `!`, comparisons, `+`/`-`, `*`.

use super::ast::{ActionSeq, Assignment, CmpOp, Condition, Expr, Inscription};
use super::GuardError;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(String),
    Str(String),
    True,
    False,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Plus,
    Minus,
    Star,
    Assign,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == crate::model::RENAME_SEPARATOR
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, GuardError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |position: usize, message: &str| GuardError::Syntax { position, message: message.to_string() };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let two = |a: char, b: char| c == a && chars.get(i + 1) == Some(&b);
        let tok = if is_ident_start(c) {
            while i < chars.len() && is_ident_continue(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(word),
            }
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Int(chars[start..i].iter().collect())
        } else if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(err(start, "unterminated string literal")),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            _ => return Err(err(i, "invalid escape")),
                        }
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            Tok::Str(s)
        } else if two(':', '=') {
            i += 2;
            Tok::Assign
        } else if two('=', '=') {
            i += 2;
            Tok::EqEq
        } else if two('!', '=') {
            i += 2;
            Tok::Ne
        } else if two('<', '=') {
            i += 2;
            Tok::Le
        } else if two('>', '=') {
            i += 2;
            Tok::Ge
        } else if two('&', '&') {
            i += 2;
            Tok::AndAnd
        } else if two('|', '|') {
            i += 2;
            Tok::OrOr
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '!' => Tok::Bang,
                _ => return Err(err(start, &format!("unexpected character `{c}`"))),
            }
        };
        out.push((tok, start));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

type PResult<T> = Result<T, GuardError>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0, end: src.chars().count() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(GuardError::Syntax { position: self.position(), message: message.into() })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> PResult<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn finish(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.error("unexpected trailing input")
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.primary()?;
        while self.eat(&Tok::Star) {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.primary()?));
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return self.error("expected expression");
        };
        match tok {
            Tok::Ident(name) => {
                self.pos += 1;
                Ok(Expr::Var(name))
            }
            Tok::True => {
                self.pos += 1;
                Ok(Expr::Lit(Value::Bool(true)))
            }
            Tok::False => {
                self.pos += 1;
                Ok(Expr::Lit(Value::Bool(false)))
            }
            Tok::Str(s) => {
                self.pos += 1;
                Ok(Expr::Lit(Value::Str(s)))
            }
            Tok::Int(digits) => {
                let n = digits.parse::<i64>();
                match n {
                    Ok(n) => {
                        self.pos += 1;
                        Ok(Expr::Lit(Value::Int(n)))
                    }
                    Err(_) => self.error("integer literal out of range"),
                }
            }
            Tok::Minus => {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(Tok::Int(digits)) => match format!("-{digits}").parse::<i64>() {
                        Ok(n) => {
                            self.pos += 1;
                            Ok(Expr::Lit(Value::Int(n)))
                        }
                        Err(_) => self.error("integer literal out of range"),
                    },
                    _ => self.error("expected integer literal after `-`"),
                }
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.error("expected expression"),
        }
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek()? {
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        };
        self.pos += 1;
        Some(op)
    }

    fn or(&mut self) -> PResult<Condition> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::OrOr) {
            lhs = Condition::Or(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Condition> {
        let mut lhs = self.not()?;
        while self.eat(&Tok::AndAnd) {
            lhs = Condition::And(Box::new(lhs), Box::new(self.not()?));
        }
        Ok(lhs)
    }

    fn not(&mut self) -> PResult<Condition> {
        if self.eat(&Tok::Bang) {
            return Ok(Condition::Not(Box::new(self.not()?)));
        }
        if self.peek() == Some(&Tok::LParen) {
            // `(` opens either an arithmetic group or a nested condition
            let save = self.pos;
            if let Ok(c) = self.comparison() {
                return Ok(c);
            }
            self.pos = save;
            self.pos += 1;
            let c = self.or()?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(c);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Condition> {
        let lhs = self.expr()?;
        match self.cmp_op() {
            Some(op) => Ok(Condition::Compare(lhs, op, self.expr()?)),
            None => Ok(Condition::Holds(lhs)),
        }
    }

    fn assignment(&mut self) -> PResult<Assignment> {
        let target = match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                name
            }
            _ => return self.error("expected assignment target"),
        };
        self.expect(&Tok::Assign, "`:=`")?;
        Ok(Assignment { target, value: self.expr()? })
    }
}

pub fn parse_condition(text: &str) -> Result<Condition, GuardError> {
    let mut p = Parser::new(text)?;
    if p.at_end() {
        return Ok(Condition::Always);
    }
    let c = p.or()?;
    p.finish()?;
    Ok(c)
}

pub fn parse_action(text: &str) -> Result<ActionSeq, GuardError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while !p.at_end() {
        out.push(p.assignment()?);
        if !p.eat(&Tok::Semi) {
            break;
        }
    }
    p.finish()?;
    Ok(ActionSeq(out))
}

pub fn parse_expr(text: &str) -> Result<Expr, GuardError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses `a, b + 1` or the bracketed form `[a, b + 1]`.
pub fn parse_inscription(text: &str) -> Result<Inscription, GuardError> {
    let mut p = Parser::new(text)?;
    let bracketed = p.eat(&Tok::LBracket);
    let mut items = Vec::new();
    let closes = |p: &Parser| if bracketed { p.peek() == Some(&Tok::RBracket) } else { p.at_end() };
    if !closes(&p) {
        loop {
            items.push(p.expr()?);
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
    }
    if bracketed {
        p.expect(&Tok::RBracket, "`]`")?;
    }
    p.finish()?;
    Ok(Inscription(items))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(s: &str) -> Expr {
        Expr::var(s)
    }

    #[test]
    fn discriminator_gate() {
        assert_eq!(parse_condition("B == true").unwrap(), Condition::Compare(var("B"), CmpOp::Eq, Expr::lit(true)));
    }

    #[test]
    fn availability_gate() {
        assert_eq!(
            parse_condition("Available == false").unwrap(),
            Condition::Compare(var("Available"), CmpOp::Eq, Expr::lit(false))
        );
    }

    #[test]
    fn empty_gate_is_always() {
        assert_eq!(parse_condition("").unwrap(), Condition::Always);
        assert_eq!(parse_condition("   ").unwrap(), Condition::Always);
    }

    #[test]
    fn actions() {
        let a = parse_action("B := true").unwrap();
        assert_eq!(a.0, vec![Assignment { target: "B".into(), value: Expr::lit(true) }]);

        let a = parse_action("I := I + 1").unwrap();
        assert_eq!(a.0[0].value, Expr::Add(Box::new(var("I")), Box::new(Expr::lit(1))));

        let a = parse_action("I := 0; B := false").unwrap();
        assert_eq!(a.0.len(), 2);
        assert_eq!(a.0[0].target, "I");
        assert_eq!(a.0[1].target, "B");

        assert!(parse_action("").unwrap().is_empty());
        assert_eq!(parse_action("x := 1;").unwrap().0.len(), 1);
    }

    #[test]
    fn precedence() {
        // comparisons bind tighter than `!`
        let c = parse_condition("!a == b").unwrap();
        assert!(matches!(c, Condition::Not(inner) if matches!(*inner, Condition::Compare(..))));
        // `&&` binds tighter than `||`
        let c = parse_condition("a || b && c").unwrap();
        assert!(matches!(c, Condition::Or(_, rhs) if matches!(*rhs, Condition::And(..))));
        let e = parse_expr("1 + 2 * x").unwrap();
        assert!(matches!(e, Expr::Add(_, rhs) if matches!(*rhs, Expr::Mul(..))));
    }

    #[test]
    fn parenthesised_groups() {
        let c = parse_condition("(a + 1) * 2 == b").unwrap();
        assert!(matches!(c, Condition::Compare(Expr::Mul(..), CmpOp::Eq, _)));
        let c = parse_condition("(a == 1 || b) && c").unwrap();
        assert!(matches!(c, Condition::And(lhs, _) if matches!(*lhs, Condition::Or(..))));
        let c = parse_condition("(x)").unwrap();
        assert_eq!(c, Condition::Holds(var("x")));
    }

    #[test]
    fn negative_literals() {
        assert_eq!(parse_expr("-3").unwrap(), Expr::lit(-3));
        assert_eq!(parse_expr("-9223372036854775808").unwrap(), Expr::lit(i64::MIN));
        assert!(matches!(parse_expr("a - -3").unwrap(), Expr::Sub(_, rhs) if *rhs == Expr::lit(-3)));
    }

    #[test]
    fn renamed_identifiers_lex() {
        assert_eq!(parse_expr("B§2").unwrap(), var("B§2"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_condition("B == ") {
            Err(GuardError::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse_action("B = true") {
            Err(GuardError::Syntax { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_condition("a == b == c").is_err());
        assert!(parse_condition("\"open").is_err());
        assert!(parse_condition("a # b").is_err());
    }

    #[test]
    fn inscriptions() {
        assert_eq!(parse_inscription("[B]").unwrap(), Inscription(vec![var("B")]));
        assert_eq!(parse_inscription("r").unwrap(), Inscription(vec![var("r")]));
        let i = parse_inscription("seq, Available, quantity").unwrap();
        assert_eq!(i.0.len(), 3);
        assert!(i.is_pattern());
        assert!(!parse_inscription("[I + 1]").unwrap().is_pattern());
        assert!(parse_inscription("[]").unwrap().0.is_empty());
    }
}
