//! Symbolic terms: numbers, polynomials, expressions, atoms and utilities.

pub mod atom;
pub mod expr;
pub mod number;
pub mod poly;
pub mod symbols;
pub mod utility;

pub use atom::{AtomOrConst, CmpOp, RealAtom};
pub use expr::{parse_constraint, parse_expr, parse_term, Expr, ExprError};
pub use number::{fmt_infix, fmt_smt, int, parse_decimal, ratio, Rational};
pub use poly::{smt_symbol, Monomial, Poly};
pub use symbols::{is_identifier, SymbolError, SymbolKind, SymbolTable};
pub use utility::{compare, constraint_to_formula, to_utility, utility_arith, ArithOp, UtilityPair};
