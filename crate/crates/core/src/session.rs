// SPDX-License-Identifier: Apache-2.0

//! One loaded `.fty` file: its schema, functions and visitors.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use crate::error::Error;
use crate::lang::{
    DerivedOp, FnId, FnSubject, Harness, LawOptions, LawReport, Machine, Mode, OpSubject, Outcome, Program, Subject,
};
use crate::schema::{parse_events, validate, EventKind, Schema, SchemaError, TypeId};
use crate::values::{read_value, Value};
use crate::visitor::{visit, visitor_laws, VisitorSpec};

pub const DEFAULT_RUNS: u64 = 100;
pub const DEFAULT_DEPTH: u64 = 3;

/// Which suites `test` runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LawSet {
    FixLaws,
    Fixequiv,
    Thm1,
    Visitor,
    All,
}

impl LawSet {
    fn includes(self, other: LawSet) -> bool {
        self == LawSet::All || self == other
    }
}

impl FromStr for LawSet {
    type Err = String;

    fn from_str(s: &str) -> Result<LawSet, String> {
        Ok(match s {
            "fixlaws" => LawSet::FixLaws,
            "fixequiv" => LawSet::Fixequiv,
            "thm1" => LawSet::Thm1,
            "visitor" => LawSet::Visitor,
            "all" => LawSet::All,
            _ => return Err(format!("unknown law set {s}")),
        })
    }
}

impl fmt::Display for LawSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LawSet::FixLaws => "fixlaws",
            LawSet::Fixequiv => "fixequiv",
            LawSet::Thm1 => "thm1",
            LawSet::Visitor => "visitor",
            LawSet::All => "all",
        })
    }
}

/// A discipline check requested by the file itself, through
/// `set-fixequiv-hook` or `deffixequiv`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawRequest {
    pub group: usize,
    pub options: LawOptions,
}

#[derive(Clone, Debug)]
pub struct Session {
    pub schema: Schema,
    pub program: Program,
    pub visitors: Vec<VisitorSpec>,
    pub requests: Vec<LawRequest>,
    /// Non-fatal diagnostics found while loading.
    pub warnings: Vec<String>,
}

fn rejected(law: &str, subject: String, seed: u64, why: String) -> LawReport {
    LawReport {
        law: law.to_string(),
        subject,
        mode: Mode::Logic,
        seed,
        runs: 0,
        outcome: Outcome::Rejected(why),
        note: None,
        elapsed: Duration::ZERO,
    }
}

impl Session {
    pub fn load_file(path: impl AsRef<Path>) -> Result<Session, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Session::load_str(&text)
    }

    pub fn load_str(text: &str) -> Result<Session, Error> {
        let events = parse_events(text)?;
        let schema = validate(&events)?;
        let mut program = Program::new();
        let mut visitors: Vec<VisitorSpec> = Vec::new();
        let mut requests = Vec::new();
        let mut warnings = Vec::new();
        let mut hook: Option<LawOptions> = None;
        for ev in &events {
            match &ev.kind {
                EventKind::Types(_) => {}
                EventKind::Define(src) => {
                    let group = program.add_group(&schema, src)?;
                    if src.mutual && !program.groups()[group].has_measure {
                        warnings.push(format!("{}: defines {} has no :measure", ev.pos, src.name));
                    }
                    if let Some(options) = hook {
                        requests.push(LawRequest { group, options });
                    }
                }
                EventKind::Visitor(decl) => {
                    if visitors.iter().any(|v| v.name == decl.name) {
                        return Err(SchemaError::at(ev.pos, format!("redefinition of visitor {}", decl.name)).into());
                    }
                    let (spec, w) = VisitorSpec::compile(&schema, &program, decl)?;
                    warnings.extend(w.into_iter().map(|m| format!("{}: {m}", ev.pos)));
                    visitors.push(spec);
                }
                EventKind::FixequivHook { enabled, options } => {
                    hook = enabled.then_some(*options);
                }
                EventKind::Fixequiv {
                    target,
                    mutual,
                    options,
                } => {
                    let group = match program.lookup(target) {
                        Some(id) if !mutual => program.get(id).group,
                        _ => program
                            .groups()
                            .iter()
                            .position(|g| &g.name == target)
                            .or_else(|| program.lookup(target).map(|id| program.get(id).group))
                            .ok_or_else(|| {
                                SchemaError::at(ev.pos, format!("deffixequiv: unknown function {target}"))
                            })?,
                    };
                    requests.push(LawRequest {
                        group,
                        options: *options,
                    });
                }
            }
        }
        Ok(Session {
            schema,
            program,
            visitors,
            requests,
            warnings,
        })
    }

    pub fn type_id(&self, name: &str) -> Result<TypeId, Error> {
        Ok(self.schema.type_id(name)?)
    }

    pub fn visitor(&self, name: &str) -> Option<&VisitorSpec> {
        self.visitors.iter().find(|v| v.name == name)
    }

    /// Evaluates a call such as `(aterm-eval (:num 1))`. Arguments that are
    /// not themselves calls are taken as literal values.
    pub fn eval_call(&self, call: &Value, mode: Mode) -> Result<Value, Error> {
        if !call.is_pair() {
            return Err(Error::Semantic(format!("expected a call, got {call}")));
        }
        let expr = self
            .program
            .compile_expr(&self.schema, call, true)
            .map_err(Error::Semantic)?;
        Ok(Machine::new(&self.schema, &self.program, mode).eval(&expr, &mut Vec::new())?)
    }

    pub fn eval_text(&self, call: &str, mode: Mode) -> Result<Value, Error> {
        self.eval_call(&read_value(call)?, mode)
    }

    pub fn visit(&self, name: &str, v: &Value) -> Result<Value, Error> {
        let spec = self
            .visitor(name)
            .ok_or_else(|| Error::Semantic(format!("unknown visitor {name}")))?;
        Ok(visit(&self.schema, &self.program, spec, v)?)
    }

    fn subjects(&self, group: usize) -> Vec<FnSubject<'_>> {
        self.program.groups()[group]
            .members
            .iter()
            .map(|id| FnSubject::logic(&self.schema, &self.program, *id))
            .collect()
    }

    /// Transparency, congruence and constant normalization for every typed
    /// formal of every member of a group.
    pub fn deffixequiv(&self, group: usize, runs: u64, seed: u64) -> Vec<LawReport> {
        let subjects = self.subjects(group);
        let dyns: Vec<&dyn Subject> = subjects.iter().map(|s| s as &dyn Subject).collect();
        Harness::new(&self.schema).deffixequiv(&dyns, runs, seed)
    }

    /// Runs the checks the file asked for.
    pub fn run_requests(&self, seed: u64) -> Vec<LawReport> {
        self.requests
            .iter()
            .flat_map(|r| {
                self.deffixequiv(
                    r.group,
                    r.options.runs.unwrap_or(DEFAULT_RUNS),
                    r.options.seed.unwrap_or(seed),
                )
            })
            .collect()
    }

    /// One-formal functions declared to return a boolean.
    pub fn predicates(&self) -> Vec<FnId> {
        let bool_ty = self.schema.lookup("bool");
        self.program
            .fns()
            .filter(|(_, f)| f.formals.len() == 1 && f.formals[0].ty.is_some() && f.returns == bool_ty)
            .map(|(id, _)| id)
            .collect()
    }

    pub fn run_suite(&self, laws: LawSet, runs: u64, seed: u64, depth: u64) -> Vec<LawReport> {
        let h = Harness::new(&self.schema);
        let mut out = Vec::new();
        if laws.includes(LawSet::FixLaws) {
            for ty in self.schema.ids() {
                out.extend(h.fix_laws(ty, runs, seed));
            }
        }
        if laws.includes(LawSet::Fixequiv) {
            for g in 0..self.program.groups().len() {
                out.extend(self.deffixequiv(g, runs, seed));
            }
            for (id, _) in self.program.fns() {
                out.extend(h.check_returns(&self.program, id, runs, seed));
                out.push(h.check_mode_agreement(&self.program, id, runs, seed));
                out.extend(h.check_guard_planted(&self.program, id, runs, seed));
            }
            let ops: Vec<OpSubject<'_>> = DerivedOp::all_for(&self.schema)
                .into_iter()
                .map(|op| OpSubject {
                    schema: &self.schema,
                    op,
                })
                .collect();
            let dyns: Vec<&dyn Subject> = ops.iter().map(|s| s as &dyn Subject).collect();
            out.extend(h.deffixequiv(&dyns, runs, seed));
        }
        if laws.includes(LawSet::Thm1) {
            for id in self.predicates() {
                let subj = FnSubject::logic(&self.schema, &self.program, id);
                out.push(
                    h.check_hypothesis_elimination(&subj, depth, runs, seed)
                        .unwrap_or_else(|e| rejected("hypothesis-elimination", subj.label(), seed, e.to_string())),
                );
            }
        }
        if laws.includes(LawSet::Visitor) {
            for spec in &self.visitors {
                out.extend(visitor_laws(&self.schema, &self.program, spec, runs, seed));
            }
        }
        out
    }
}
