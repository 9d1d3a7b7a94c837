//! Concrete syntax: the AsmetaL subset, Avalla scenarios and CTL/LTL
//! properties.

pub mod ast;
mod lexer;
mod parser;
mod printer;

pub use ast::*;
pub use parser::{parse_asm, parse_avalla, parse_property, parse_term};
pub use printer::{print_asm, print_avalla, print_formula, print_term, FormulaStyle};
