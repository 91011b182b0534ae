//! Lexing, parsing and type checking of `.oo` sources.

pub mod ast;
mod lexer;
mod parser;
mod pretty;
mod typecheck;

pub use ast::*;
pub use parser::parse_program;
pub use pretty::{pretty_atomic, pretty_expr, pretty_program};
pub use typecheck::{typecheck, TypeEnv, TypedProgram};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct FrontendError {
    pub pos: Pos,
    pub message: String,
}

impl FrontendError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        FrontendError {
            pos,
            message: message.into(),
        }
    }
}

/// Parse and type check in one step.
pub fn load(src: &str) -> Result<TypedProgram, FrontendError> {
    typecheck(parse_program(src)?)
}
