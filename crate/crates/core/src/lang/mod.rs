// SPDX-License-Identifier: Apache-2.0

//! Typed function definitions, their evaluator and the law harness.

mod compile;
mod eval;
mod laws;
mod syntax;

pub use compile::{DerivedOp, Expr, FnDef, FnId, Formal, Group, Prim, Program};
pub use eval::{EvalError, Machine, Mode, DEFAULT_DEPTH_LIMIT};
pub use laws::{
    enumeration_atoms, measure_violation, FixLaw, FnSubject, Harness, LawError, LawOptions, LawReport, OpSubject,
    Outcome, Subject, DEFAULT_ENUMERATION_CAP,
};
pub use syntax::{parse_define, parse_defines, FnSource, FormalSource, GroupSource};
