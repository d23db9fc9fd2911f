// SPDX-License-Identifier: Apache-2.0

//! The `fixkit` command line.
//!
//! Exit status: 0 on success, 1 on a semantic failure (validation error,
//! unknown name, guard violation, failing law), 2 on usage or IO errors
//! and unreadable values.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::kernel::{generate_typed, seeded_rng};
use crate::lang::Mode;
use crate::session::{LawSet, Session, DEFAULT_DEPTH, DEFAULT_RUNS};
use crate::values::{read_value, Value};

#[derive(Debug, Parser)]
#[command(name = "fixkit", version, about = "Fixing-function types for S-expression data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a file and summarize its types.
    Check { file: PathBuf },
    /// Print the fix of a value at a type.
    Fix {
        file: PathBuf,
        #[arg(value_name = "TYPE")]
        ty: String,
        /// Value text, or @path to read it from a file.
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
    /// Evaluate a call such as '(aterm-eval (:num 1))'.
    Eval {
        file: PathBuf,
        #[arg(allow_hyphen_values = true)]
        call: String,
        #[arg(long, default_value = "logic")]
        mode: Mode,
    },
    /// Run law suites and print one report line per check.
    Test {
        file: PathBuf,
        #[arg(long, default_value = "all")]
        laws: LawSet,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: u64,
        #[arg(long, env = "FIXKIT_SEED", default_value_t = 0)]
        seed: u64,
        /// Enumeration depth for hypothesis elimination.
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: u64,
    },
    /// Print random values of a type, one per line.
    Gen {
        file: PathBuf,
        #[arg(value_name = "TYPE")]
        ty: String,
        #[arg(short = 'n', default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = 10)]
        size: u64,
        #[arg(long, env = "FIXKIT_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Run a visitor on a value.
    Visit {
        file: PathBuf,
        visitor: String,
        /// Value text, or @path to read it from a file.
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
}

fn value_arg(text: &str) -> Result<Value, Error> {
    let text = match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: PathBuf::from(path),
            source,
        })?,
        None => text.to_string(),
    };
    Ok(read_value(&text)?)
}

fn load(file: &Path, err: &mut dyn Write) -> Result<Session, Error> {
    let session = Session::load_file(file)?;
    for w in &session.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(session)
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let io = |e: std::io::Error| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    match command {
        Command::Check { file } => {
            let s = load(&file, err)?;
            for id in s.schema.user_ids() {
                let e = s.schema.entry(id);
                writeln!(out, "{}\t{}\t{}\t{}", e.name, e.shape.kind_name(), e.rank, e.default).map_err(io)?;
            }
            let mut code = 0;
            for r in s.run_requests(0) {
                writeln!(out, "{}", r.line()).map_err(io)?;
                if !r.passed() {
                    code = 1;
                }
            }
            Ok(code)
        }
        Command::Fix { file, ty, value } => {
            let s = load(&file, err)?;
            let id = s.type_id(&ty)?;
            let v = value_arg(&value)?;
            writeln!(out, "{}", s.schema.fix(id, &v)).map_err(io)?;
            Ok(0)
        }
        Command::Eval { file, call, mode } => {
            let s = load(&file, err)?;
            let call = value_arg(&call)?;
            writeln!(out, "{}", s.eval_call(&call, mode)?).map_err(io)?;
            Ok(0)
        }
        Command::Test {
            file,
            laws,
            runs,
            seed,
            depth,
        } => {
            let s = load(&file, err)?;
            let reports = s.run_suite(laws, runs, seed, depth);
            let failed = reports.iter().filter(|r| !r.passed()).count();
            for r in &reports {
                writeln!(out, "{}", r.line()).map_err(io)?;
            }
            let _ = writeln!(err, "{} checks, {failed} failed", reports.len());
            Ok(i32::from(failed > 0))
        }
        Command::Gen {
            file,
            ty,
            n,
            size,
            seed,
        } => {
            let s = load(&file, err)?;
            let id = s.type_id(&ty)?;
            let mut rng = seeded_rng(seed);
            for _ in 0..n {
                writeln!(out, "{}", generate_typed(&s.schema, id, size, &mut rng)).map_err(io)?;
            }
            Ok(0)
        }
        Command::Visit { file, visitor, value } => {
            let s = load(&file, err)?;
            let v = value_arg(&value)?;
            writeln!(out, "{}", s.visit(&visitor, &v)?).map_err(io)?;
            Ok(0)
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
