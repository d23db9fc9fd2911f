// SPDX-License-Identifier: Apache-2.0

//! The builtin base-type catalog.
//!
//! | type   | recognizer   | fixer        | default | notes                       |
//! |--------|--------------|--------------|---------|-----------------------------|
//! | nat    | `natp`       | `nfix`       | `0`     | negatives and non-integers  |
//! | int    | `integerp`   | `ifix`       | `0`     |                             |
//! | string | `stringp`    | `str-fix`    | `""`    |                             |
//! | bool   | `booleanp`   | `bool-fix`   | `nil`   | non-`nil` values become `t` |
//! | char   | `characterp` | `char-fix`   | `#\Nul` |                             |
//! | sym    | `symbolp`    | `symbol-fix` | `nil`   |                             |
//!
//! The `bool`, `char` and `sym` conventions follow common ACL2 practice; they
//! are choices rather than requirements of the discipline.

use crate::values::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaseKind {
    Nat,
    Int,
    String,
    Bool,
    Char,
    Sym,
}

impl BaseKind {
    pub const ALL: [BaseKind; 6] = [
        BaseKind::Nat,
        BaseKind::Int,
        BaseKind::String,
        BaseKind::Bool,
        BaseKind::Char,
        BaseKind::Sym,
    ];

    pub fn type_name(self) -> &'static str {
        match self {
            BaseKind::Nat => "nat",
            BaseKind::Int => "int",
            BaseKind::String => "string",
            BaseKind::Bool => "bool",
            BaseKind::Char => "char",
            BaseKind::Sym => "sym",
        }
    }

    pub fn predicate(self) -> &'static str {
        match self {
            BaseKind::Nat => "natp",
            BaseKind::Int => "integerp",
            BaseKind::String => "stringp",
            BaseKind::Bool => "booleanp",
            BaseKind::Char => "characterp",
            BaseKind::Sym => "symbolp",
        }
    }

    pub fn fixer(self) -> &'static str {
        match self {
            BaseKind::Nat => "nfix",
            BaseKind::Int => "ifix",
            BaseKind::String => "str-fix",
            BaseKind::Bool => "bool-fix",
            BaseKind::Char => "char-fix",
            BaseKind::Sym => "symbol-fix",
        }
    }

    pub fn from_predicate(name: &str) -> Option<BaseKind> {
        BaseKind::ALL.into_iter().find(|k| k.predicate() == name)
    }

    pub fn from_fixer(name: &str) -> Option<BaseKind> {
        BaseKind::ALL.into_iter().find(|k| k.fixer() == name)
    }

    pub fn recognize(self, v: &Value) -> bool {
        match self {
            BaseKind::Nat => v.is_nat(),
            BaseKind::Int => v.is_int(),
            BaseKind::String => matches!(v, Value::Str(_)),
            BaseKind::Bool => v.is_nil() || v.is_t(),
            BaseKind::Char => matches!(v, Value::Char(_)),
            BaseKind::Sym => v.is_symbol(),
        }
    }

    pub fn default_value(self) -> Value {
        match self {
            BaseKind::Nat | BaseKind::Int => Value::int(0),
            BaseKind::String => Value::str(""),
            BaseKind::Bool | BaseKind::Sym => Value::nil(),
            BaseKind::Char => Value::Char(0),
        }
    }

    pub fn fix(self, v: &Value) -> Value {
        if self.recognize(v) {
            v.clone()
        } else if self == BaseKind::Bool {
            // v is neither nil nor t here
            Value::t()
        } else {
            self.default_value()
        }
    }

    pub fn admits_nil(self) -> bool {
        matches!(self, BaseKind::Bool | BaseKind::Sym)
    }
}
