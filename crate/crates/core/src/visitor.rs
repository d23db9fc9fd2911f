// SPDX-License-Identifier: Apache-2.0

//! Derived traversals over typed values.
//!
//! ```text
//! (defvisitor name :type root (:collect | :transform) (:target type action) ...)
//! ```
//!
//! Both traversals first fix the input at the root type and then walk it
//! depth-first, in field declaration order and list order. Collect applies
//! each target's action before descending into the target's own children
//! and concatenates the (list-fixed) results. Transform rebuilds bottom-up:
//! children first, then the action at target nodes, and every rebuilt node
//! is fixed at its type.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::forms::{self, FormResult};
use crate::kernel::generate_typed;
use crate::lang::{EvalError, FnId, Harness, LawReport, Machine, Mode, Outcome, Program};
use crate::schema::{Schema, SchemaError, Shape, TypeId};
use crate::values::{Pos, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VisitMode {
    Collect,
    Transform,
}

impl fmt::Display for VisitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VisitMode::Collect => "collect",
            VisitMode::Transform => "transform",
        })
    }
}

/// A `defvisitor` form with names unresolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisitorDecl {
    pub name: String,
    pub root: String,
    pub mode: VisitMode,
    /// `(target type, action function)` in source order.
    pub targets: Vec<(String, String)>,
    pub pos: Pos,
}

pub fn parse_defvisitor(rest: &[&Value], pos: Pos) -> FormResult<VisitorDecl> {
    let (name, rest) = rest
        .split_first()
        .ok_or_else(|| "defvisitor needs a name".to_string())?;
    let name = forms::symbol(name, "defvisitor name")?.to_string();
    let mut root = None;
    let mut mode = None;
    let mut targets = Vec::new();
    let mut it = rest.iter();
    while let Some(item) = it.next() {
        match item.as_symbol() {
            Some(":type") if root.is_none() => {
                let t = it
                    .next()
                    .ok_or_else(|| format!("defvisitor {name}: :type needs a value"))?;
                root = Some(forms::symbol(t, "visitor root type")?.to_string());
            }
            Some(":collect") if mode.is_none() => mode = Some(VisitMode::Collect),
            Some(":transform") if mode.is_none() => mode = Some(VisitMode::Transform),
            Some(_) => return Err(format!("defvisitor {name}: unexpected {item}")),
            None => {
                let parts = forms::items(item, "visitor target")?;
                match parts.as_slice() {
                    [k, ty, action] if k.as_symbol() == Some(":target") => targets.push((
                        forms::symbol(ty, "target type")?.to_string(),
                        forms::symbol(action, "target action")?.to_string(),
                    )),
                    _ => return Err(format!("defvisitor {name}: malformed target {item}")),
                }
            }
        }
    }
    Ok(VisitorDecl {
        root: root.ok_or_else(|| format!("defvisitor {name} requires :type"))?,
        mode: mode.ok_or_else(|| format!("defvisitor {name} requires :collect or :transform"))?,
        targets,
        name,
        pos,
    })
}

/// What runs at a target node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Call(FnId),
    Identity,
    /// `second(fix(first(x)))`.
    Then(Box<Action>, Box<Action>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisitorSpec {
    pub name: String,
    pub root: TypeId,
    pub mode: VisitMode,
    pub targets: Vec<(TypeId, Action)>,
}

impl VisitorSpec {
    /// Resolves a declaration. Targets unreachable from the root are kept
    /// and reported as warnings.
    pub fn compile(
        schema: &Schema,
        program: &Program,
        decl: &VisitorDecl,
    ) -> Result<(VisitorSpec, Vec<String>), SchemaError> {
        let err = |m: String| SchemaError::at(decl.pos, format!("defvisitor {}: {m}", decl.name));
        let root = schema
            .resolve(&decl.root)
            .ok_or_else(|| err(format!("unknown root type {}", decl.root)))?;
        let reachable = schema.reachable(root);
        let mut targets: Vec<(TypeId, Action)> = Vec::new();
        let mut warnings = Vec::new();
        for (ty_name, action) in &decl.targets {
            let ty = schema
                .resolve(ty_name)
                .ok_or_else(|| err(format!("unknown target type {ty_name}")))?;
            if targets.iter().any(|(t, _)| *t == ty) {
                return Err(err(format!("target {ty_name} given twice")));
            }
            let id = program
                .lookup(action)
                .ok_or_else(|| err(format!("unknown action {action}")))?;
            let f = program.get(id);
            match f.formals.as_slice() {
                [x] if x.ty == Some(ty) => {}
                _ => {
                    return Err(err(format!(
                        "action {action} must take exactly one formal of type {}",
                        schema.name(ty)
                    )))
                }
            }
            if !reachable.contains(&ty) {
                warnings.push(format!(
                    "defvisitor {}: target {} is not reachable from {}",
                    decl.name,
                    schema.name(ty),
                    schema.name(root)
                ));
            }
            targets.push((ty, Action::Call(id)));
        }
        Ok((
            VisitorSpec {
                name: decl.name.clone(),
                root,
                mode: decl.mode,
                targets,
            },
            warnings,
        ))
    }

    /// The same traversal with every action replaced by `Identity`.
    pub fn identity(&self) -> VisitorSpec {
        VisitorSpec {
            targets: self.targets.iter().map(|(t, _)| (*t, Action::Identity)).collect(),
            mode: VisitMode::Transform,
            ..self.clone()
        }
    }

    /// Each action followed by itself.
    pub fn doubled(&self) -> VisitorSpec {
        VisitorSpec {
            targets: self
                .targets
                .iter()
                .map(|(t, a)| (*t, Action::Then(Box::new(a.clone()), Box::new(a.clone()))))
                .collect(),
            ..self.clone()
        }
    }

    fn action(&self, ty: TypeId) -> Option<&Action> {
        self.targets.iter().find(|(t, _)| *t == ty).map(|(_, a)| a)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum VisitError {
    #[error("unknown type {0}")]
    UnknownType(String),
    #[error("at {path}: {source}")]
    Action { path: String, source: Box<EvalError> },
}

/// Names of the types reachable from `root`, the root included.
pub fn reachable_types(schema: &Schema, root: &str) -> Result<BTreeSet<String>, VisitError> {
    let id = schema
        .resolve(root)
        .ok_or_else(|| VisitError::UnknownType(root.to_string()))?;
    Ok(schema
        .reachable(id)
        .into_iter()
        .map(|t| schema.name(t).to_string())
        .collect())
}

struct Walker<'a> {
    schema: &'a Schema,
    program: &'a Program,
    spec: &'a VisitorSpec,
    path: Vec<String>,
}

impl Walker<'_> {
    fn path(&self) -> String {
        let mut s = self.schema.name(self.spec.root).to_string();
        for seg in &self.path {
            if !seg.starts_with('[') {
                s.push('.');
            }
            s.push_str(seg);
        }
        s
    }

    fn run(&self, action: &Action, ty: TypeId, v: &Value) -> Result<Value, VisitError> {
        match action {
            Action::Identity => Ok(v.clone()),
            Action::Call(id) => Machine::new(self.schema, self.program, Mode::Logic)
                .call(*id, vec![v.clone()])
                .map_err(|source| VisitError::Action {
                    path: self.path(),
                    source: Box::new(source),
                }),
            Action::Then(a, b) => {
                let mid = self.schema.fix(ty, &self.run(a, ty, v)?);
                self.run(b, ty, &mid)
            }
        }
    }

    /// Children of a typed node as `(path segment, type, value)`.
    fn children(&self, ty: TypeId, v: &Value) -> Vec<(String, TypeId, Value)> {
        let s = self.schema;
        match s.shape(ty) {
            Shape::Base(_) => vec![],
            Shape::Prod(fields) => fields
                .iter()
                .zip(v.iter())
                .map(|(f, x)| (f.name.clone(), f.ty, x.clone()))
                .collect(),
            Shape::Sum { variants, .. } => {
                let vi = s.kind_index(ty, v).expect("typed sum");
                variants[vi]
                    .fields
                    .iter()
                    .zip(v.tail().iter())
                    .map(|(f, x)| (f.name.clone(), f.ty, x.clone()))
                    .collect()
            }
            Shape::List(e) => v
                .iter()
                .enumerate()
                .map(|(i, x)| (format!("[{i}]"), *e, x.clone()))
                .collect(),
            Shape::Alist(k, x) => v
                .iter()
                .enumerate()
                .flat_map(|(i, entry)| {
                    [
                        (format!("[{i}].key"), *k, entry.head()),
                        (format!("[{i}].value"), *x, entry.tail()),
                    ]
                })
                .collect(),
            Shape::Option(inner) if !v.is_nil() => vec![("some".to_string(), *inner, v.clone())],
            Shape::Option(_) => vec![],
        }
    }

    fn collect(&mut self, ty: TypeId, v: &Value, out: &mut Vec<Value>) -> Result<(), VisitError> {
        stacker::maybe_grow(64 * 1024, 1024 * 1024, || {
            if let Some(a) = self.spec.action(ty) {
                let r = self.run(a, ty, v)?;
                out.extend(r.iter().cloned());
            }
            for (seg, cty, c) in self.children(ty, v) {
                self.path.push(seg);
                self.collect(cty, &c, out)?;
                self.path.pop();
            }
            Ok(())
        })
    }

    fn transform(&mut self, ty: TypeId, v: &Value) -> Result<Value, VisitError> {
        stacker::maybe_grow(64 * 1024, 1024 * 1024, || {
            let s = self.schema;
            let mut rebuilt = Vec::new();
            for (seg, cty, c) in self.children(ty, v) {
                self.path.push(seg);
                rebuilt.push(self.transform(cty, &c)?);
                self.path.pop();
            }
            let node = match s.shape(ty) {
                Shape::Base(_) => v.clone(),
                Shape::Prod(_) | Shape::List(_) => Value::list(rebuilt),
                Shape::Sum { .. } => Value::cons(v.head(), Value::list(rebuilt)),
                Shape::Alist(..) => {
                    let mut it = rebuilt.into_iter();
                    let mut entries = Vec::new();
                    while let (Some(k), Some(x)) = (it.next(), it.next()) {
                        entries.push(Value::cons(k, x));
                    }
                    Value::list(entries)
                }
                Shape::Option(_) => rebuilt.pop().unwrap_or_else(Value::nil),
            };
            let node = match self.spec.action(ty) {
                Some(a) => self.run(a, ty, &node)?,
                None => node,
            };
            Ok(s.fix(ty, &node))
        })
    }
}

/// Concatenated action results over every target occurrence in
/// `fix(root, v)`.
pub fn visit_collect(schema: &Schema, program: &Program, spec: &VisitorSpec, v: &Value) -> Result<Value, VisitError> {
    let fixed = schema.fix(spec.root, v);
    let mut w = Walker {
        schema,
        program,
        spec,
        path: Vec::new(),
    };
    let mut out = Vec::new();
    w.collect(spec.root, &fixed, &mut out)?;
    Ok(Value::list(out))
}

/// Bottom-up rebuild of `fix(root, v)` with actions applied at targets.
pub fn visit_transform(schema: &Schema, program: &Program, spec: &VisitorSpec, v: &Value) -> Result<Value, VisitError> {
    let fixed = schema.fix(spec.root, v);
    let mut w = Walker {
        schema,
        program,
        spec,
        path: Vec::new(),
    };
    w.transform(spec.root, &fixed)
}

/// Runs the visitor in its declared mode.
pub fn visit(schema: &Schema, program: &Program, spec: &VisitorSpec, v: &Value) -> Result<Value, VisitError> {
    match spec.mode {
        VisitMode::Collect => visit_collect(schema, program, spec, v),
        VisitMode::Transform => visit_transform(schema, program, spec, v),
    }
}

fn shown(r: &Result<Value, VisitError>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("<error: {e}>"),
    }
}

/// Invariants of one visitor over `runs` raw and typed inputs.
pub fn visitor_laws(schema: &Schema, program: &Program, spec: &VisitorSpec, runs: u64, seed: u64) -> Vec<LawReport> {
    let h = Harness::new(schema);
    let root = spec.root;
    let input = |rng: &mut rand_chacha::ChaCha8Rng, run: u64| {
        if run.is_multiple_of(2) {
            h.untyped(Some(root), rng)
        } else {
            generate_typed(schema, root, h.size, rng)
        }
    };
    let identity = spec.identity();
    let mut out = Vec::new();
    let mut law = |name: &str, check: &dyn Fn(&Value) -> Option<String>| {
        let start = Instant::now();
        let mut outcome = Outcome::Pass;
        for run in 0..runs {
            let mut rng = Harness::run_rng(seed, run);
            let x = input(&mut rng, run);
            if let Some(detail) = check(&x) {
                outcome = Outcome::Counterexample { run, detail };
                break;
            }
        }
        out.push(LawReport {
            law: name.to_string(),
            subject: spec.name.clone(),
            mode: Mode::Logic,
            seed,
            runs,
            outcome,
            note: None,
            elapsed: start.elapsed(),
        });
    };
    law("visit-fix", &|x| {
        let fx = schema.fix(root, x);
        let (a, b) = (visit(schema, program, spec, x), visit(schema, program, spec, &fx));
        (a.is_err() || a != b).then(|| format!("x={x} visit(x)={} visit(fix(x))={}", shown(&a), shown(&b)))
    });
    law("visit-identity", &|x| {
        let fx = schema.fix(root, x);
        let r = visit_transform(schema, program, &identity, x);
        (r.as_ref() != Ok(&fx)).then(|| format!("x={x} fix(x)={fx} identity={}", shown(&r)))
    });
    match spec.mode {
        VisitMode::Transform => {
            law("visit-recognized", &|x| {
                let r = visit_transform(schema, program, spec, x);
                match &r {
                    Ok(v) if schema.recognize(root, v) => None,
                    _ => Some(format!("x={x} result={}", shown(&r))),
                }
            });
            let doubled = spec.doubled();
            law("visit-fusion", &|x| {
                let twice =
                    visit_transform(schema, program, spec, x).and_then(|y| visit_transform(schema, program, spec, &y));
                let fused = visit_transform(schema, program, &doubled, x);
                (twice.is_err() || twice != fused)
                    .then(|| format!("x={x} twice={} fused={}", shown(&twice), shown(&fused)))
            });
        }
        VisitMode::Collect => {
            law("visit-collect-stable", &|x| {
                let direct = visit_collect(schema, program, spec, x);
                let after = visit_transform(schema, program, &identity, x)
                    .and_then(|y| visit_collect(schema, program, spec, &y));
                (direct.is_err() || direct != after)
                    .then(|| format!("x={x} collect={} after-identity={}", shown(&direct), shown(&after)))
            });
        }
    }
    out
}
