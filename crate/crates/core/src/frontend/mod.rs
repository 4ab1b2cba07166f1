//! DSL front end: tokens, parse tree and its canonical text dump.

mod ast;
mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

pub use ast::{ast_to_text, AstExpression, AstFunction, AstModule, AstStatement, BinOp};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse_module;

/// Position of a token. `line` and `column` are 1-based, `column` and
/// `length` count characters, `offset` is the byte offset into the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
    pub offset: usize,
}

impl Default for SourceSpan {
    fn default() -> Self {
        SourceSpan {
            line: 1,
            column: 1,
            length: 0,
            offset: 0,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontendError {
    #[error("{span}: lex error: {message}")]
    Lex { span: SourceSpan, message: String },
    #[error("{span}: parse error: expected {expected}, found {found}")]
    Parse {
        span: SourceSpan,
        expected: String,
        found: String,
    },
    #[error("{span}: duplicate `main` (first defined at {first})")]
    DuplicateMain { span: SourceSpan, first: SourceSpan },
    #[error("{span}: no `main` function")]
    MissingMain { span: SourceSpan },
    #[error("{span}: `{name}` is already defined")]
    DuplicateName { span: SourceSpan, name: String },
}

impl FrontendError {
    pub fn span(&self) -> SourceSpan {
        match self {
            FrontendError::Lex { span, .. }
            | FrontendError::Parse { span, .. }
            | FrontendError::DuplicateMain { span, .. }
            | FrontendError::MissingMain { span }
            | FrontendError::DuplicateName { span, .. } => *span,
        }
    }
}

/// Tokenize and parse in one step.
pub fn parse_source(source: &str) -> Result<AstModule, FrontendError> {
    parse_module(&tokenize(source)?)
}
