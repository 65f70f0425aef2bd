//! The ASCII text form: lexing, parsing, canonical rendering and validation.

mod lexer;
mod parse;
mod render;
mod validate;

pub use lexer::{lex, lex_token, trim_newline, LexError, Lexeme, Token};
pub use parse::{parse, parse_lenient, ParseError};
pub use render::{render, render_elements, serialize, GrammarConfig, SerializeError, GRAMMAR};
pub use validate::{
    validate, validate_with, Diagnostic, Rule, ValidateOptions, ValidationReport,
};
