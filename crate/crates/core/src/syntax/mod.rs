//! Abstract syntax for the source and target languages, contexts, and the
//! textual surface format.

pub mod alpha;
pub mod anf;
pub mod ctors;
pub mod ctx;
pub mod names;
pub mod sexp;
pub mod source;
pub mod surface;

pub use alpha::{alpha_eq, alpha_eq_ctx, alpha_eq_value};
pub use anf::{free_vars_anf, AnfClosure, AnfEnv, AnfExpr, AnfValue};
pub use ctors::{CtorTable, CtorTableError};
pub use ctx::{compose, plug, Ctx};
pub use names::{CoFiniteSet, NameSupply, Tag, Var};
pub use sexp::{ParseError, Pos};
pub use source::{well_formed_src, SrcClosure, SrcExpr, SrcValue};
pub use surface::{parse, Kind, Term};
