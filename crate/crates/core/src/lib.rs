//! ANF and CPS transformations for a small untyped functional language,
//! fuel-based interpreters for source and target, a checker for the
//! relational specification of the ANF pass, a bounded step-indexed logical
//! relation, and a differential-testing harness tying them together.

pub mod anf;
pub mod cps;
pub mod eval;
pub mod harness;
pub mod logrel;
pub mod spec;
pub mod syntax;
pub mod testgen;

use thiserror::Error;

/// Errors raised by the transformations.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("de Bruijn index {index} out of range (depth {depth})")]
    IndexOutOfRange { index: usize, depth: usize },
    #[error("unknown constructor `{0}`")]
    UnknownTag(String),
    #[error("constructor `{tag}` takes {expected} fields, given {found}")]
    Arity {
        tag: String,
        expected: usize,
        found: usize,
    },
    #[error("name list has {names} entries but {values} values were given")]
    LengthMismatch { names: usize, values: usize },
    #[error("name `{0}` is bound to two values that do not agree")]
    DuplicateName(String),
    #[error("program is not closed")]
    OpenProgram,
}
