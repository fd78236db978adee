//! Minimal s-expression reader for solver responses.

use std::fmt;

use num_traits::Zero;

use crate::term::{parse_decimal, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    Str(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(l) => Some(l),
            _ => None,
        }
    }

    /// A numeric value in SMT-LIB notation: decimals, `(- x)` and `(/ x y)`.
    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            SExpr::Atom(a) => parse_decimal(a),
            SExpr::List(items) => match items.as_slice() {
                [SExpr::Atom(op), x] if op == "-" => x.as_rational().map(|v| -v),
                [SExpr::Atom(op), x, y] if op == "/" => {
                    let d = y.as_rational()?;
                    if d.is_zero() {
                        None
                    } else {
                        Some(x.as_rational()? / d)
                    }
                }
                _ => None,
            },
            SExpr::Str(_) => None,
        }
    }

    /// Strips `|...|` quoting from a symbol.
    pub fn symbol_name(&self) -> Option<String> {
        let a = self.as_atom()?;
        Some(a.strip_prefix('|').and_then(|s| s.strip_suffix('|')).unwrap_or(a).to_string())
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a) => f.write_str(a),
            SExpr::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            SExpr::List(items) => {
                f.write_str("(")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse solver response at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// Tracks whether accumulated text forms complete s-expressions.
#[derive(Default)]
pub struct Balance {
    depth: i64,
    in_string: bool,
    in_quote: bool,
    seen_token: bool,
}

impl Balance {
    pub fn feed(&mut self, text: &str) {
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            if self.in_string {
                if c == '"' {
                    if chars.peek() == Some(&'"') {
                        chars.next();
                    } else {
                        self.in_string = false;
                    }
                }
                continue;
            }
            if self.in_quote {
                if c == '|' {
                    self.in_quote = false;
                }
                continue;
            }
            match c {
                '"' => {
                    self.in_string = true;
                    self.seen_token = true;
                }
                '|' => {
                    self.in_quote = true;
                    self.seen_token = true;
                }
                '(' => {
                    self.depth += 1;
                    self.seen_token = true;
                }
                ')' => self.depth -= 1,
                c if !c.is_whitespace() => self.seen_token = true,
                _ => {}
            }
        }
    }

    pub fn complete(&self) -> bool {
        self.seen_token && self.depth <= 0 && !self.in_string && !self.in_quote
    }
}

pub fn parse(text: &str) -> Result<SExpr, ParseError> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        n => Err(ParseError { offset: 0, message: format!("expected one expression, found {n}") }),
    }
}

pub fn parse_all(text: &str) -> Result<Vec<SExpr>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    let err = |offset: usize, message: &str| ParseError { offset, message: message.to_string() };
    while pos < chars.len() {
        let c = chars[pos];
        match c {
            c if c.is_whitespace() => pos += 1,
            ';' => {
                while pos < chars.len() && chars[pos] != '\n' {
                    pos += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                pos += 1;
            }
            ')' => {
                if stack.len() < 2 {
                    return Err(err(pos, "unbalanced `)`"));
                }
                let done = stack.pop().unwrap();
                stack.last_mut().unwrap().push(SExpr::List(done));
                pos += 1;
            }
            '"' => {
                let start = pos;
                pos += 1;
                let mut s = String::new();
                loop {
                    match chars.get(pos) {
                        None => return Err(err(start, "unterminated string")),
                        Some('"') if chars.get(pos + 1) == Some(&'"') => {
                            s.push('"');
                            pos += 2;
                        }
                        Some('"') => {
                            pos += 1;
                            break;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            pos += 1;
                        }
                    }
                }
                stack.last_mut().unwrap().push(SExpr::Str(s));
            }
            '|' => {
                let start = pos;
                pos += 1;
                while pos < chars.len() && chars[pos] != '|' {
                    pos += 1;
                }
                if pos >= chars.len() {
                    return Err(err(start, "unterminated quoted symbol"));
                }
                pos += 1;
                stack.last_mut().unwrap().push(SExpr::Atom(chars[start..pos].iter().collect()));
            }
            _ => {
                let start = pos;
                while pos < chars.len() && !chars[pos].is_whitespace() && !"()\";|".contains(chars[pos]) {
                    pos += 1;
                }
                stack.last_mut().unwrap().push(SExpr::Atom(chars[start..pos].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(err(chars.len(), "unbalanced `(`"));
    }
    Ok(stack.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{int, ratio};

    #[test]
    fn values() {
        let e = parse("((a (- 2.0)) (b (/ 1.0 3.0)) (|x.1| false))").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(items[0].as_list().unwrap()[1].as_rational(), Some(int(-2)));
        assert_eq!(items[1].as_list().unwrap()[1].as_rational(), Some(ratio(1, 3)));
        assert_eq!(items[2].as_list().unwrap()[0].symbol_name().unwrap(), "x.1");
    }

    #[test]
    fn strings_and_errors() {
        let e = parse("(error \"line 1: unknown \"\"x\"\" (Real)\")").unwrap();
        assert_eq!(e.as_list().unwrap()[1], SExpr::Str("line 1: unknown \"x\" (Real)".into()));
        assert!(parse("(a b").is_err());
        assert!(parse("a)").is_err());
    }

    #[test]
    fn balance() {
        let mut b = Balance::default();
        b.feed("((a (- 2.0))\n");
        assert!(!b.complete());
        b.feed(" (b \")(\"))\n");
        assert!(b.complete());
        let mut b = Balance::default();
        b.feed("sat\n");
        assert!(b.complete());
    }
}
