//! Arithmetic expressions over positions `x0..x{n-1}` and velocities
//! `xdot0..xdot{n-1}`, used by scenario files to describe metric entries,
//! potentials, 2-form entries and custom force components.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | constant | variable | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2`
//! is `-4`. There is no implicit multiplication.

mod ast;
mod eval;
mod parser;

pub use ast::{BinOp, Constant, Expr, Func};
pub use eval::EvalError;
pub use parser::{parse, ParseError, ParseErrorKind};
