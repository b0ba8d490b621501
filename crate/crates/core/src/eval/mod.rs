//! Fuel-instrumented big-step interpreters.
//!
//! Both interpreters charge exactly one unit of fuel when a rule is entered,
//! before any premise is evaluated. When the budget is exhausted at a rule
//! entry the result is [`EvalResult::Oot`] and the consumed count equals the
//! budget. Getting stuck (applying a non-function, matching a closure, ...)
//! is reported separately as a [`StuckError`].
//!
//! Evaluation is recursive only where the big-step rules have non-tail
//! premises; tail positions (let bodies, application bodies, branches, tail
//! calls) run in a loop, and the remaining recursion grows the stack on
//! demand.

pub mod anf;
pub mod source;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{Tag, Var};

pub use self::anf::eval_anf;
pub use self::source::eval_src;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalResult<V> {
    Val(V),
    Oot,
}

impl<V> EvalResult<V> {
    pub fn value(&self) -> Option<&V> {
        match self {
            EvalResult::Val(v) => Some(v),
            EvalResult::Oot => None,
        }
    }

    pub fn is_oot(&self) -> bool {
        matches!(self, EvalResult::Oot)
    }
}

impl<V: fmt::Display> fmt::Display for EvalResult<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalResult::Val(v) => v.fmt(f),
            EvalResult::Oot => f.write_str("OOT"),
        }
    }
}

/// Result of a run together with the fuel it used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation<V> {
    pub result: EvalResult<V>,
    pub consumed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stuck {
    UnboundIndex { index: usize },
    UnboundVar { name: String },
    NotAClosure,
    NotAConstructor,
    NoMatchingBranch { tag: String },
    ArityMismatch { expected: usize, found: usize },
    FieldOutOfRange { index: usize, fields: usize },
}

impl fmt::Display for Stuck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stuck::UnboundIndex { index } => write!(f, "unbound de Bruijn index {index}"),
            Stuck::UnboundVar { name } => write!(f, "unbound variable `{name}`"),
            Stuck::NotAClosure => f.write_str("applied a value that is not a closure"),
            Stuck::NotAConstructor => f.write_str("inspected a closure as a constructor value"),
            Stuck::NoMatchingBranch { tag } => write!(f, "no branch for constructor `{tag}`"),
            Stuck::ArityMismatch { expected, found } => {
                write!(
                    f,
                    "arity mismatch: expected {expected} arguments, found {found}"
                )
            }
            Stuck::FieldOutOfRange { index, fields } => {
                write!(
                    f,
                    "field {index} out of range for a value with {fields} fields"
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("evaluation stuck after {consumed} steps: {reason}")]
pub struct StuckError {
    pub reason: Stuck,
    pub consumed: u64,
}

impl Stuck {
    pub(crate) fn unbound(x: &Var) -> Stuck {
        Stuck::UnboundVar {
            name: x.to_string(),
        }
    }

    pub(crate) fn no_branch(tag: &Tag) -> Stuck {
        Stuck::NoMatchingBranch {
            tag: tag.to_string(),
        }
    }
}

pub(crate) enum Halt {
    Oot,
    Stuck(Stuck),
}

impl From<Stuck> for Halt {
    fn from(s: Stuck) -> Self {
        Halt::Stuck(s)
    }
}

pub(crate) struct Meter {
    budget: u64,
    used: u64,
}

impl Meter {
    pub(crate) fn new(budget: u64) -> Self {
        Meter { budget, used: 0 }
    }

    #[inline]
    pub(crate) fn tick(&mut self) -> Result<(), Halt> {
        if self.used == self.budget {
            return Err(Halt::Oot);
        }
        self.used += 1;
        Ok(())
    }

    pub(crate) fn finish<V>(self, r: Result<V, Halt>) -> Result<Evaluation<V>, StuckError> {
        match r {
            Ok(v) => Ok(Evaluation {
                result: EvalResult::Val(v),
                consumed: self.used,
            }),
            Err(Halt::Oot) => Ok(Evaluation {
                result: EvalResult::Oot,
                consumed: self.budget,
            }),
            Err(Halt::Stuck(reason)) => Err(StuckError {
                reason,
                consumed: self.used,
            }),
        }
    }
}

const RED_ZONE: usize = 64 * 1024;
const STACK_CHUNK: usize = 2 * 1024 * 1024;

#[inline]
pub(crate) fn deeper<R>(f: impl FnOnce() -> R) -> R {
    stacker::maybe_grow(RED_ZONE, STACK_CHUNK, f)
}
