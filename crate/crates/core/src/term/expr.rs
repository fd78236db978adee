//! Infix expression language for utilities and constraints.
//!
//! Precedence, tightest first: unary minus, `*`, binary `+`/`-`,
//! comparisons, `|`. Literals are unsigned decimals.

use std::fmt;

use num_traits::Signed;

use super::atom::CmpOp;
use super::number::{fmt_infix, parse_decimal, Rational};
use super::symbols::SymbolTable;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Lit(Rational),
    Sym(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("comparison or disjunction nested in arithmetic at position {pos}")]
    NestedComparison { pos: usize },
    #[error("disjunction operand at position {pos} is not a comparison")]
    ArithmeticInDisjunction { pos: usize },
    #[error("expected an arithmetic term but found a comparison")]
    NotArithmetic,
    #[error("expected a comparison or disjunction")]
    NotBoolean,
    #[error("product of two infinitesimal terms")]
    InfinitesimalProduct,
}

impl Expr {
    pub fn lit(r: Rational) -> Expr {
        Expr::Lit(r)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(name.to_string())
    }

    pub fn is_boolean(&self) -> bool {
        matches!(self, Expr::Cmp(..) | Expr::Or(..))
    }

    pub fn symbols(&self, out: &mut Vec<String>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Sym(s) => out.push(s.clone()),
            Expr::Neg(e) => e.symbols(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Cmp(_, a, b) | Expr::Or(a, b) => {
                a.symbols(out);
                b.symbols(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 0,
            Expr::Cmp(..) => 1,
            Expr::Add(..) | Expr::Sub(..) => 2,
            Expr::Mul(..) => 3,
            Expr::Neg(_) => 4,
            Expr::Lit(r) if r.is_negative() => 4,
            Expr::Lit(_) | Expr::Sym(_) => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
            if paren {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        let p = self.precedence();
        match self {
            Expr::Lit(r) => write!(f, "{}", fmt_infix(r)),
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                child(f, e, e.precedence() < 4)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Or(a, b) => {
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => " * ",
                    _ => " | ",
                };
                child(f, a, a.precedence() < p)?;
                write!(f, "{op}")?;
                child(f, b, b.precedence() <= p)
            }
            Expr::Cmp(op, a, b) => {
                child(f, a, a.precedence() <= p)?;
                write!(f, " {} ", op.infix())?;
                child(f, b, b.precedence() <= p)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Bar,
    Cmp(CmpOp),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let lit = &text[start..i];
            let value = parse_decimal(lit).ok_or_else(|| ExprError::Syntax {
                pos: start,
                message: format!("malformed number `{lit}`"),
            })?;
            out.push((Tok::Num(value), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        let next = bytes.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('<', Some(b'=')) => (Tok::Cmp(CmpOp::Le), 2),
            ('>', Some(b'=')) => (Tok::Cmp(CmpOp::Ge), 2),
            ('!', Some(b'=')) => (Tok::Cmp(CmpOp::Ne), 2),
            ('=', Some(b'=')) => (Tok::Cmp(CmpOp::Eq), 2),
            ('<', _) => (Tok::Cmp(CmpOp::Lt), 1),
            ('>', _) => (Tok::Cmp(CmpOp::Gt), 1),
            ('=', _) => (Tok::Cmp(CmpOp::Eq), 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('|', _) => (Tok::Bar, 1),
            _ => {
                return Err(ExprError::Syntax {
                    pos: start,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push((tok, start));
        i += len;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    symbols: &'a SymbolTable,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax { pos: self.offset(), message: message.into() })
    }

    fn disjunction(&mut self) -> Result<Expr, ExprError> {
        let start = self.offset();
        let mut lhs = self.comparison()?;
        while self.peek() == Some(&Tok::Bar) {
            if !lhs.is_boolean() {
                return Err(ExprError::ArithmeticInDisjunction { pos: start });
            }
            self.bump();
            let at = self.offset();
            let rhs = self.comparison()?;
            if !rhs.is_boolean() {
                return Err(ExprError::ArithmeticInDisjunction { pos: at });
            }
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn comparison(&mut self) -> Result<Expr, ExprError> {
        let start = self.offset();
        let lhs = self.additive()?;
        if let Some(Tok::Cmp(op)) = self.peek().cloned() {
            if lhs.is_boolean() {
                return Err(ExprError::NestedComparison { pos: start });
            }
            self.bump();
            let at = self.offset();
            let rhs = self.additive()?;
            if rhs.is_boolean() {
                return Err(ExprError::NestedComparison { pos: at });
            }
            if matches!(self.peek(), Some(Tok::Cmp(_))) {
                return self.syntax("chained comparison");
            }
            return Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn arith_operand(&mut self, e: Expr, pos: usize) -> Result<Expr, ExprError> {
        if e.is_boolean() {
            Err(ExprError::NestedComparison { pos })
        } else {
            Ok(e)
        }
    }

    fn additive(&mut self) -> Result<Expr, ExprError> {
        let start = self.offset();
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => Tok::Plus,
                Some(Tok::Minus) => Tok::Minus,
                _ => return Ok(lhs),
            };
            lhs = self.arith_operand(lhs, start)?;
            self.bump();
            let at = self.offset();
            let rhs = self.multiplicative()?;
            let rhs = self.arith_operand(rhs, at)?;
            lhs = if op == Tok::Plus {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ExprError> {
        let start = self.offset();
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            lhs = self.arith_operand(lhs, start)?;
            self.bump();
            let at = self.offset();
            let rhs = self.unary()?;
            let rhs = self.arith_operand(rhs, at)?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            let at = self.offset();
            let e = self.unary()?;
            let e = self.arith_operand(e, at)?;
            return Ok(Expr::Neg(Box::new(e)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Num(r)) => Ok(Expr::Lit(r)),
            Some(Tok::Ident(name)) => {
                if self.symbols.kind(&name).is_none() {
                    return Err(ExprError::UnknownIdentifier { name, pos: at });
                }
                Ok(Expr::Sym(name))
            }
            Some(Tok::LParen) => {
                let e = self.disjunction()?;
                if self.bump() != Some(Tok::RParen) {
                    self.pos -= 1;
                    return self.syntax("expected `)`");
                }
                Ok(e)
            }
            Some(_) => {
                self.pos -= 1;
                self.syntax("expected a number, identifier or `(`")
            }
            None => self.syntax("unexpected end of input"),
        }
    }
}

/// Parses an expression, resolving identifiers against `symbols`.
pub fn parse_expr(text: &str, symbols: &SymbolTable) -> Result<Expr, ExprError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ExprError::Syntax { pos: 0, message: "empty expression".into() });
    }
    let mut p = Parser { toks, pos: 0, end: text.len(), symbols };
    let e = p.disjunction()?;
    if p.pos < p.toks.len() {
        return p.syntax("unexpected trailing input");
    }
    Ok(e)
}

/// Parses an arithmetic term (a utility value).
pub fn parse_term(text: &str, symbols: &SymbolTable) -> Result<Expr, ExprError> {
    let e = parse_expr(text, symbols)?;
    if e.is_boolean() {
        return Err(ExprError::NotArithmetic);
    }
    Ok(e)
}

/// Parses a Boolean constraint (a comparison or disjunction of comparisons).
pub fn parse_constraint(text: &str, symbols: &SymbolTable) -> Result<Expr, ExprError> {
    let e = parse_expr(text, symbols)?;
    if !e.is_boolean() {
        return Err(ExprError::NotBoolean);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::number::int;
    use crate::term::symbols::SymbolKind;

    fn table() -> SymbolTable {
        SymbolTable::new()
            .with("a", SymbolKind::Constant)
            .with("b", SymbolKind::Constant)
            .with("eps", SymbolKind::Infinitesimal)
    }

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn leaf_value() {
        let e = parse_expr("a-1", &table()).unwrap();
        assert_eq!(e, Expr::Sub(b(Expr::sym("a")), b(Expr::Lit(int(1)))));
    }

    #[test]
    fn initial_constraint() {
        let e = parse_expr("a>0", &table()).unwrap();
        assert_eq!(e, Expr::Cmp(CmpOp::Gt, b(Expr::sym("a")), b(Expr::Lit(int(0)))));
    }

    #[test]
    fn bare_literal() {
        assert_eq!(parse_expr("0", &table()).unwrap(), Expr::Lit(int(0)));
    }

    #[test]
    fn disjunction_of_comparisons() {
        let e = parse_expr("a > b | b > 1", &table()).unwrap();
        let l = Expr::Cmp(CmpOp::Gt, b(Expr::sym("a")), b(Expr::sym("b")));
        let r = Expr::Cmp(CmpOp::Gt, b(Expr::sym("b")), b(Expr::Lit(int(1))));
        assert_eq!(e, Expr::Or(b(l), b(r)));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("-a * 2 + b", &table()).unwrap();
        let expected = Expr::Add(
            b(Expr::Mul(b(Expr::Neg(b(Expr::sym("a")))), b(Expr::Lit(int(2))))),
            b(Expr::sym("b")),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn errors() {
        let t = table();
        assert!(matches!(parse_expr("c + 1", &t), Err(ExprError::UnknownIdentifier { pos: 0, .. })));
        assert!(matches!(parse_expr("(a > 0) + 1", &t), Err(ExprError::NestedComparison { .. })));
        assert!(matches!(parse_expr("a + | b", &t), Err(ExprError::Syntax { pos: 4, .. })));
        assert!(matches!(parse_expr("a | b > 0", &t), Err(ExprError::ArithmeticInDisjunction { .. })));
        assert!(matches!(parse_expr("a < b < 1", &t), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_expr("", &t), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_expr("(a", &t), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn printing_keeps_structure() {
        let t = table();
        for text in ["a - (b - 1)", "-(a * b)", "a * (b + 1) >= 0 | a = b", "--a", "a - b - 1"] {
            let e = parse_expr(text, &t).unwrap();
            assert_eq!(parse_expr(&e.to_string(), &t).unwrap(), e, "{text}");
        }
        assert_eq!(parse_expr("a-(b-1)", &t).unwrap().to_string(), "a - (b - 1)");
    }
}
