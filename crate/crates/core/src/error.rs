// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

use crate::kernel::KernelError;
use crate::lang::{EvalError, LawError};
use crate::schema::SchemaError;
use crate::values::ReadError;
use crate::visitor::VisitError;

/// Any failure surfaced by a [`Session`](crate::Session) or the command line.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Schema(#[from] SchemaError),
    #[error("value: {0}")]
    Read(#[from] ReadError),
    #[error("{0}")]
    Kernel(#[from] KernelError),
    #[error("{0}")]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Visit(#[from] VisitError),
    #[error("{0}")]
    Law(#[from] LawError),
    #[error("{0}")]
    Semantic(String),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// 2 for input that could not be read at all, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Read(_) | Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
