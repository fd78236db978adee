//! SMT-LIB 2 command rendering.

use crate::formula::Formula;
use crate::term::smt_symbol;

fn is_simple_symbol(name: &str) -> bool {
    const EXTRA: &str = "~!@$%^&*_-+=<>.?/";
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || EXTRA.contains(c) => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || EXTRA.contains(c))
}

/// A symbol usable in solver commands: reserved or unusual names are quoted.
pub fn quote(name: &str) -> String {
    if is_simple_symbol(name) {
        smt_symbol(name)
    } else {
        format!("|{}|", name.replace('|', "_"))
    }
}

pub fn declare(name: &str, sort: &str) -> String {
    format!("(declare-fun {} () {sort})", quote(name))
}

pub fn term(f: &Formula) -> String {
    f.to_smt_with(&quote)
}

/// `(assert F)` or `(assert (! F :named L))` for an already quoted `L`.
pub fn assertion(f: &Formula, named: Option<String>) -> String {
    match named {
        Some(l) => format!("(assert (! {} :named {l}))", term(f)),
        None => format!("(assert {})", term(f)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting() {
        assert_eq!(quote("dv.3.1"), "dv.3.1");
        assert_eq!(quote("and"), "|and|");
        assert_eq!(quote("1x"), "|1x|");
        assert_eq!(declare("a", "Real"), "(declare-fun a () Real)");
        let f = Formula::and([Formula::var("x"), Formula::NotVar("or".into())]);
        assert_eq!(assertion(&f, Some("l1".into())), "(assert (! (and x (not |or|)) :named l1))");
    }
}
