// SPDX-License-Identifier: Apache-2.0

//! Schemas of fixing-function types over S-expression values.
//!
//! Every type declared in a `.fty` file gets a recognizer, a total fixing
//! function that maps any value into the type (and is the identity on
//! values already in it), the induced equivalence, a count measure, and
//! constructors and accessors that fix their inputs. Functions defined over
//! these types can be run in a logic mode, which fixes typed formals, or a
//! guarded mode, which checks them, and a law harness tests that functions
//! respect the induced equivalence.
//!
//! ```
//! use fixkit::Session;
//!
//! let s = Session::load_str("(defprod student ((name string) (age nat)))").unwrap();
//! let student = s.type_id("student").unwrap();
//! let v = fixkit::read_value("(6 \"Calista\")").unwrap();
//! assert_eq!(s.schema.fix(student, &v).to_string(), "(\"\" 0)");
//! ```

pub mod cli;
mod error;
mod forms;
pub mod kernel;
pub mod lang;
pub mod schema;
mod session;
pub mod values;
pub mod visitor;

pub use error::Error;
pub use session::{LawRequest, LawSet, Session, DEFAULT_DEPTH, DEFAULT_RUNS};
pub use values::{print_value, read_value, Value};
