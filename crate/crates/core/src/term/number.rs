//! Exact rational numbers and their textual forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses an unsigned decimal literal such as `2`, `0.25` or `10.`.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(numer, denom))
}

/// Whether the value has a finite decimal expansion.
pub fn is_terminating(r: &Rational) -> bool {
    let mut d = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while d.is_even() {
        d /= &two;
    }
    while (&d % &five).is_zero() {
        d /= &five;
    }
    d.is_one()
}

fn decimal_digits(r: &Rational) -> Option<(String, String)> {
    if !is_terminating(r) {
        return None;
    }
    let abs = r.abs();
    let whole = abs.trunc().to_integer();
    let mut frac = abs.fract();
    let mut digits = String::new();
    let ten = int(10);
    while !frac.is_zero() {
        frac *= &ten;
        let d = frac.trunc().to_integer();
        digits.push_str(&d.to_string());
        frac = frac.fract();
    }
    Some((whole.to_string(), digits))
}

/// Infix rendering used by the expression printer: `2`, `-0.5`, `1/3`.
pub fn fmt_infix(r: &Rational) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    match decimal_digits(r) {
        Some((w, f)) if f.is_empty() => format!("{sign}{w}"),
        Some((w, f)) => format!("{sign}{w}.{f}"),
        None => format!("{sign}{}/{}", r.numer().abs(), r.denom()),
    }
}

/// SMT-LIB rendering: `2.0`, `(- 2.0)`, `0.25`, `(/ 1.0 3.0)`.
pub fn fmt_smt(r: &Rational) -> String {
    let body = match decimal_digits(r) {
        Some((w, f)) if f.is_empty() => format!("{w}.0"),
        Some((w, f)) => format!("{w}.{f}"),
        None => format!("(/ {}.0 {}.0)", r.numer().abs(), r.denom()),
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

/// Least common multiple of the denominators, as a positive rational.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    let l = values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    Rational::from_integer(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("2"), Some(int(2)));
        assert_eq!(parse_decimal("0.25"), Some(ratio(1, 4)));
        assert_eq!(parse_decimal("1.10"), Some(ratio(11, 10)));
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal("1.2.3"), None);
    }

    #[test]
    fn smt_forms() {
        assert_eq!(fmt_smt(&int(2)), "2.0");
        assert_eq!(fmt_smt(&int(0)), "0.0");
        assert_eq!(fmt_smt(&int(-2)), "(- 2.0)");
        assert_eq!(fmt_smt(&ratio(5, 2)), "2.5");
        assert_eq!(fmt_smt(&ratio(-1, 3)), "(- (/ 1.0 3.0))");
    }

    #[test]
    fn infix_forms() {
        assert_eq!(fmt_infix(&ratio(-1, 8)), "-0.125");
        assert_eq!(fmt_infix(&ratio(2, 3)), "2/3");
        assert_eq!(fmt_infix(&int(7)), "7");
    }
}
