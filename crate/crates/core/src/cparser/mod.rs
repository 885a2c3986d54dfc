//! C-subset front end: lexer plus recursive-descent parser.
//!
//! Supported: `void/char/short/int/long/float/double/signed/unsigned`
//! declarations with pointers and arrays, `static/extern/const/volatile`,
//! function definitions and prototypes, compound/if/else/while/for/return
//! and expression statements, unary and binary operators, assignment
//! (including compound forms), calls, identifiers, and integer, floating,
//! character and string constants. Full C should be parsed externally and
//! brought in through the interchange format.

mod lexer;
mod parser;

use thiserror::Error;

pub use lexer::{classify_number, lex, LexError, Position, SourceToken, TokenCategory, KEYWORDS};
pub use parser::{kinds, parse, ParseError};

use crate::ast::Ast;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Lexes and parses `source` in one step.
pub fn parse_source(source: &str) -> Result<Ast, FrontendError> {
    Ok(parse(&lex(source)?)?)
}

/// The `FuncDef` subtrees directly under a file root, each as its own tree.
pub fn function_trees(file: &Ast) -> Vec<Ast> {
    file.root()
        .children()
        .iter()
        .filter(|n| n.kind() == kinds::FUNC_DEF)
        .map(|n| Ast::new(n.clone()))
        .collect()
}
