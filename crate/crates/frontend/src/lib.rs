//! MiniC front-end: source text to a typed, immutable syntax tree.
//!
//! MiniC is a small C subset: `int` scalars with mathematical-integer
//! semantics, fixed-size `int` arrays, function pointers (`fnptr`) and
//! direct or indirect calls. Annotations use a tiny ACSL-like language
//! written in `//@` line comments:
//!
//! ```text
//! //@ requires 0 <= n && n <= 10;
//! //@ ensures \result >= 0;
//! int f(int n) {
//!   int r = n * n;
//!   //@ assert r >= n;
//!   return r;
//! }
//! ```
//!
//! Division and remainder truncate toward zero; a zero divisor is a
//! runtime error. Locals are zero-initialized.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod typecheck;
pub mod visit;

pub use ast::*;
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse, parse_predicate, SyntaxError};
pub use typecheck::{typecheck, NodeInfo, NodeKind, TypeError, TypeErrorKind, TypedAst};
pub use visit::{walk_unit, Visitor};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Type(Vec<TypeError>),
}

impl FrontendError {
    pub fn locations(&self) -> Vec<&Location> {
        match self {
            FrontendError::Lex(e) => vec![e.location()],
            FrontendError::Syntax(e) => vec![&e.loc],
            FrontendError::Type(errs) => errs.iter().map(|e| &e.loc).collect(),
        }
    }
}

/// A named source text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    pub name: String,
    pub text: String,
}

impl SourceFile {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> SourceFile {
        SourceFile {
            name: name.into(),
            text: text.into(),
        }
    }
}

/// Tokenizes, parses and typechecks several files as one translation unit.
/// Node ids run across files in the given order.
pub fn load(files: &[SourceFile]) -> Result<TypedAst, FrontendError> {
    let mut unit = Unit::default();
    for f in files {
        let tokens = tokenize(&f.text, &f.name)?;
        unit.functions.extend(parser::parse_unnumbered(&tokens)?.functions);
    }
    visit::renumber(&mut unit);
    typecheck(unit).map_err(FrontendError::Type)
}

/// Convenience for a single in-memory file.
pub fn load_str(name: &str, text: &str) -> Result<TypedAst, FrontendError> {
    load(&[SourceFile::new(name, text)])
}
