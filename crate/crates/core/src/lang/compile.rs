// SPDX-License-Identifier: Apache-2.0

//! Name resolution: turns parsed definitions into [`FnDef`]s whose bodies
//! refer to slots, functions and schema operations by index.
//!
//! Expression grammar:
//!
//! ```text
//! expr := integer | string | character | t | nil | :keyword | variable
//!       | (quote value)
//!       | (if test then [else])
//!       | (let ((var expr) ...) body) | (let* ((var expr) ...) body)
//!       | (and expr ...) | (or expr ...)
//!       | (+ expr ...) | (- expr [expr]) | (< expr expr) | (equal expr expr)
//!       | (cons expr expr) | (car expr) | (cdr expr) | (atom? expr) | (not expr)
//!       | (T-case var :tag expr ...)          ; binds var.field in each arm
//!       | (T-p x) (T-fix x) (T-equiv x y) (T-count x) (T-kind x)
//!       | (T field ...) (T->field x)          ; products
//!       | (make-T :field expr ...)            ; products, missing fields default
//!       | (T-tag field ...) (T-tag->field x)  ; sums
//!       | (function expr ...)
//! ```

use std::collections::{BTreeSet, HashMap};

use crate::forms::FormResult;
use crate::schema::{BaseKind, Schema, SchemaError, Shape, TypeId};
use crate::values::{Pos, Value};

use super::syntax::{FnSource, GroupSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FnId(pub(crate) u32);

impl FnId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prim {
    Add,
    Sub,
    Neg,
    Lt,
    Equal,
    Cons,
    Car,
    Cdr,
    Atom,
    Not,
}

impl Prim {
    pub fn name(self) -> &'static str {
        match self {
            Prim::Add => "+",
            Prim::Sub | Prim::Neg => "-",
            Prim::Lt => "<",
            Prim::Equal => "equal",
            Prim::Cons => "cons",
            Prim::Car => "car",
            Prim::Cdr => "cdr",
            Prim::Atom => "atom?",
            Prim::Not => "not",
        }
    }
}

/// A schema operation callable from expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivedOp {
    Recognize(TypeId),
    Fix(TypeId),
    Equiv(TypeId),
    Count(TypeId),
    Kind(TypeId),
    /// Product (variant `None`) or sum variant constructor.
    Construct(TypeId, Option<usize>),
    /// Field by index, of a product or of one sum variant.
    Access(TypeId, Option<usize>, usize),
}

impl DerivedOp {
    pub fn arity(self, schema: &Schema) -> usize {
        match self {
            DerivedOp::Equiv(_) => 2,
            DerivedOp::Construct(t, v) => schema.field_list(t, v).len(),
            _ => 1,
        }
    }

    /// Declared types of the arguments.
    pub fn arg_types(self, schema: &Schema) -> Vec<TypeId> {
        match self {
            DerivedOp::Equiv(t) => vec![t, t],
            DerivedOp::Construct(t, v) => schema.field_list(t, v).iter().map(|f| f.ty).collect(),
            DerivedOp::Recognize(t)
            | DerivedOp::Fix(t)
            | DerivedOp::Count(t)
            | DerivedOp::Kind(t)
            | DerivedOp::Access(t, _, _) => vec![t],
        }
    }

    /// The name an expression uses to call this operation.
    pub fn name(self, schema: &Schema) -> String {
        let ty = |t: TypeId| schema.name(t).to_string();
        let tag = |t: TypeId, v: usize| match schema.shape(t) {
            Shape::Sum { variants, .. } => variants[v].tag_name().trim_start_matches(':').to_string(),
            _ => String::new(),
        };
        match self {
            DerivedOp::Recognize(t) => format!("{}-p", ty(t)),
            DerivedOp::Fix(t) => format!("{}-fix", ty(t)),
            DerivedOp::Equiv(t) => format!("{}-equiv", ty(t)),
            DerivedOp::Count(t) => format!("{}-count", ty(t)),
            DerivedOp::Kind(t) => format!("{}-kind", ty(t)),
            DerivedOp::Construct(t, None) => ty(t),
            DerivedOp::Construct(t, Some(v)) => format!("{}-{}", ty(t), tag(t, v)),
            DerivedOp::Access(t, v, i) => {
                let field = &schema.field_list(t, v)[i].name;
                match v {
                    None => format!("{}->{}", ty(t), field),
                    Some(v) => format!("{}-{}->{}", ty(t), tag(t, v), field),
                }
            }
        }
    }

    /// Every congruence-bearing operation derived for the user types.
    pub fn all_for(schema: &Schema) -> Vec<DerivedOp> {
        let mut out = Vec::new();
        for t in schema.user_ids() {
            match schema.shape(t) {
                Shape::Base(_) => continue,
                Shape::Prod(fields) => {
                    out.push(DerivedOp::Construct(t, None));
                    out.extend((0..fields.len()).map(|i| DerivedOp::Access(t, None, i)));
                }
                Shape::Sum { variants, .. } => {
                    out.push(DerivedOp::Kind(t));
                    for (vi, v) in variants.iter().enumerate() {
                        out.push(DerivedOp::Construct(t, Some(vi)));
                        out.extend((0..v.fields.len()).map(|i| DerivedOp::Access(t, Some(vi), i)));
                    }
                }
                _ => {}
            }
            out.push(DerivedOp::Count(t));
            out.push(DerivedOp::Equiv(t));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Lit(Value),
    /// Slot in the current frame.
    Local(usize),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    /// Evaluates each initializer in turn, pushing its value as a new slot.
    Let(Vec<Expr>, Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Prim(Prim, Vec<Expr>),
    Derived(DerivedOp, Vec<Expr>),
    /// Dispatch on the kind of a sum-typed slot. Arm `i` runs with the
    /// fields of variant `i` pushed as slots.
    Case {
        ty: TypeId,
        scrutinee: usize,
        arms: Vec<Expr>,
    },
    Call(FnId, Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formal {
    pub name: String,
    pub ty: Option<TypeId>,
    pub raw: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FnDef {
    pub name: String,
    pub formals: Vec<Formal>,
    pub returns: Option<TypeId>,
    pub body: Expr,
    pub group: usize,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub name: String,
    pub members: Vec<FnId>,
    pub mutual: bool,
    /// Every member declared a `:measure`.
    pub has_measure: bool,
}

enum Named {
    Op(DerivedOp),
    Case(TypeId),
    Make(TypeId),
}

/// All functions of a loaded file.
#[derive(Clone, Debug, Default)]
pub struct Program {
    fns: Vec<FnDef>,
    groups: Vec<Group>,
    by_name: HashMap<String, FnId>,
}

fn prim_for(name: &str, argc: usize) -> Option<(Prim, Option<usize>)> {
    Some(match name {
        "+" => (Prim::Add, None),
        "-" if argc == 1 => (Prim::Neg, Some(1)),
        "-" => (Prim::Sub, Some(2)),
        "<" => (Prim::Lt, Some(2)),
        "equal" => (Prim::Equal, Some(2)),
        "cons" => (Prim::Cons, Some(2)),
        "car" => (Prim::Car, Some(1)),
        "cdr" => (Prim::Cdr, Some(1)),
        "atom?" | "atom" => (Prim::Atom, Some(1)),
        "not" => (Prim::Not, Some(1)),
        _ => return None,
    })
}

const SPECIAL: [&str; 6] = ["quote", "if", "let", "let*", "and", "or"];

fn derived_names(schema: &Schema) -> HashMap<String, Named> {
    let mut names = HashMap::new();
    let mut add = |name: String, n: Named| {
        names.entry(name).or_insert(n);
    };
    for kind in BaseKind::ALL {
        let t = schema.lookup(kind.type_name()).expect("builtin");
        add(kind.predicate().to_string(), Named::Op(DerivedOp::Recognize(t)));
        add(kind.fixer().to_string(), Named::Op(DerivedOp::Fix(t)));
    }
    for t in schema.ids() {
        let name = schema.name(t);
        add(format!("{name}-p"), Named::Op(DerivedOp::Recognize(t)));
        add(format!("{name}-fix"), Named::Op(DerivedOp::Fix(t)));
        add(format!("{name}-equiv"), Named::Op(DerivedOp::Equiv(t)));
        if !schema.is_base(t) {
            add(format!("{name}-count"), Named::Op(DerivedOp::Count(t)));
        }
        match schema.shape(t) {
            Shape::Prod(fields) => {
                add(name.to_string(), Named::Op(DerivedOp::Construct(t, None)));
                add(format!("make-{name}"), Named::Make(t));
                for i in 0..fields.len() {
                    let op = DerivedOp::Access(t, None, i);
                    add(op.name(schema), Named::Op(op));
                }
            }
            Shape::Sum { variants, .. } => {
                add(format!("{name}-kind"), Named::Op(DerivedOp::Kind(t)));
                add(format!("{name}-case"), Named::Case(t));
                for (vi, v) in variants.iter().enumerate() {
                    let op = DerivedOp::Construct(t, Some(vi));
                    add(op.name(schema), Named::Op(op));
                    for i in 0..v.fields.len() {
                        let op = DerivedOp::Access(t, Some(vi), i);
                        add(op.name(schema), Named::Op(op));
                    }
                }
            }
            _ => {}
        }
    }
    names
}

struct Compiler<'a> {
    schema: &'a Schema,
    derived: &'a HashMap<String, Named>,
    /// Functions visible from the group being compiled.
    visible: &'a HashMap<String, (FnId, usize)>,
    /// Read non-calls and unbound symbols as literal data.
    data: bool,
}

impl<'a> Compiler<'a> {
    fn expr(&self, v: &Value, scope: &mut Vec<String>) -> FormResult<Expr> {
        stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.expr_inner(v, scope))
    }

    fn expr_inner(&self, v: &Value, scope: &mut Vec<String>) -> FormResult<Expr> {
        match v {
            Value::Int(_) | Value::Char(_) | Value::Str(_) => Ok(Expr::Lit(v.clone())),
            Value::Sym(s) => {
                if v.is_nil() || v.is_t() || v.is_keyword() {
                    return Ok(Expr::Lit(v.clone()));
                }
                match scope.iter().rposition(|n| n == &**s) {
                    Some(i) => Ok(Expr::Local(i)),
                    None if self.data => Ok(Expr::Lit(v.clone())),
                    None => Err(format!("unbound variable {s}")),
                }
            }
            Value::Pair(_) => {
                let items = v
                    .proper_list()
                    .ok_or_else(|| format!("expression must be a proper list: {v}"))?;
                let (head, args) = items.split_first().expect("pair is non-empty");
                if self.data && !head.as_symbol().is_some_and(|h| self.callable(h)) {
                    return Ok(Expr::Lit(v.clone()));
                }
                let head = head
                    .as_symbol()
                    .filter(|s| !s.starts_with(':'))
                    .ok_or_else(|| format!("cannot call {head} in {v}"))?;
                self.form(head, args, v, scope)
            }
        }
    }

    fn callable(&self, head: &str) -> bool {
        SPECIAL.contains(&head)
            || self.visible.contains_key(head)
            || prim_for(head, 0).is_some()
            || self.derived.contains_key(head)
    }

    fn exprs(&self, args: &[&Value], scope: &mut Vec<String>) -> FormResult<Vec<Expr>> {
        args.iter().map(|a| self.expr(a, scope)).collect()
    }

    fn form(&self, head: &str, args: &[&Value], whole: &Value, scope: &mut Vec<String>) -> FormResult<Expr> {
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(format!("{head} expects {n} arguments, got {}: {whole}", args.len()))
            }
        };
        if SPECIAL.contains(&head) {
            return match head {
                "quote" => {
                    arity(1)?;
                    Ok(Expr::Lit(args[0].clone()))
                }
                "if" => {
                    if args.len() != 2 && args.len() != 3 {
                        return Err(format!("if expects 2 or 3 arguments: {whole}"));
                    }
                    let c = self.expr(args[0], scope)?;
                    let t = self.expr(args[1], scope)?;
                    let e = match args.get(2) {
                        Some(e) => self.expr(e, scope)?,
                        None => Expr::Lit(Value::nil()),
                    };
                    Ok(Expr::If(Box::new(c), Box::new(t), Box::new(e)))
                }
                "let" | "let*" => {
                    arity(2)?;
                    let bindings = args[0]
                        .proper_list()
                        .ok_or_else(|| format!("malformed bindings in {whole}"))?;
                    let outer = scope.len();
                    let mut inits = Vec::new();
                    let mut names = Vec::new();
                    for b in bindings {
                        let pair = b
                            .proper_list_of_len(2)
                            .ok_or_else(|| format!("malformed binding {b}"))?;
                        let name = pair[0]
                            .as_symbol()
                            .filter(|s| !s.starts_with(':') && *s != "nil" && *s != "t")
                            .ok_or_else(|| format!("cannot bind {}", pair[0]))?;
                        let init = if head == "let" {
                            let mut inner: Vec<String> = scope[..outer].to_vec();
                            // parallel binding: earlier names are invisible,
                            // but slot numbering must account for them
                            inner.extend(names.iter().map(|_| String::new()));
                            self.expr(pair[1], &mut inner)?
                        } else {
                            self.expr(pair[1], scope)?
                        };
                        inits.push(init);
                        names.push(name.to_string());
                        if head == "let*" {
                            scope.push(name.to_string());
                        }
                    }
                    scope.truncate(outer);
                    scope.extend(names);
                    let body = self.expr(args[1], scope);
                    scope.truncate(outer);
                    Ok(Expr::Let(inits, Box::new(body?)))
                }
                "and" => Ok(Expr::And(self.exprs(args, scope)?)),
                "or" => Ok(Expr::Or(self.exprs(args, scope)?)),
                _ => unreachable!(),
            };
        }
        if let Some((id, n)) = self.visible.get(head) {
            arity(*n)?;
            return Ok(Expr::Call(*id, self.exprs(args, scope)?));
        }
        if let Some((prim, n)) = prim_for(head, args.len()) {
            if let Some(n) = n {
                arity(n)?;
            }
            return Ok(Expr::Prim(prim, self.exprs(args, scope)?));
        }
        match self.derived.get(head) {
            Some(Named::Op(op)) => {
                arity(op.arity(self.schema))?;
                Ok(Expr::Derived(*op, self.exprs(args, scope)?))
            }
            Some(Named::Case(ty)) => self.case(*ty, head, args, whole, scope),
            Some(Named::Make(ty)) => self.make(*ty, head, args, whole, scope),
            None => Err(format!("unknown function {head}")),
        }
    }

    fn make(
        &self,
        ty: TypeId,
        head: &str,
        args: &[&Value],
        whole: &Value,
        scope: &mut Vec<String>,
    ) -> FormResult<Expr> {
        let fields = self.schema.field_list(ty, None);
        let mut given: Vec<Option<Expr>> = vec![None; fields.len()];
        if !args.len().is_multiple_of(2) {
            return Err(format!("{head} arguments must be :field expression pairs: {whole}"));
        }
        for pair in args.chunks(2) {
            let key = pair[0]
                .as_symbol()
                .and_then(|k| k.strip_prefix(':'))
                .ok_or_else(|| format!("{head}: expected a :field keyword, got {}", pair[0]))?;
            let i = fields
                .iter()
                .position(|f| f.name == key)
                .ok_or_else(|| format!("{head}: {} has no field {key}", self.schema.name(ty)))?;
            if given[i].is_some() {
                return Err(format!("{head}: field {key} given twice"));
            }
            given[i] = Some(self.expr(pair[1], scope)?);
        }
        let args = given
            .into_iter()
            .zip(fields)
            .map(|(e, f)| e.unwrap_or_else(|| Expr::Lit(self.schema.default_witness(f.ty).clone())))
            .collect();
        Ok(Expr::Derived(DerivedOp::Construct(ty, None), args))
    }

    fn case(
        &self,
        ty: TypeId,
        head: &str,
        args: &[&Value],
        whole: &Value,
        scope: &mut Vec<String>,
    ) -> FormResult<Expr> {
        let Shape::Sum { variants, .. } = self.schema.shape(ty) else {
            unreachable!("case form for a non-sum")
        };
        let (var, arms) = args
            .split_first()
            .ok_or_else(|| format!("{head} needs a variable: {whole}"))?;
        let var = var
            .as_symbol()
            .filter(|s| !s.starts_with(':'))
            .ok_or_else(|| format!("{head} scrutinee must be a variable: {whole}"))?;
        let slot = scope
            .iter()
            .rposition(|n| n == var)
            .ok_or_else(|| format!("unbound variable {var}"))?;
        if arms.len() % 2 != 0 {
            return Err(format!("{head} arms must be :tag expression pairs: {whole}"));
        }
        let mut compiled: Vec<Option<Expr>> = vec![None; variants.len()];
        for pair in arms.chunks(2) {
            let tag = pair[0];
            let vi = variants
                .iter()
                .position(|v| &v.tag == tag)
                .ok_or_else(|| format!("{head}: {tag} is not a tag of {}", self.schema.name(ty)))?;
            if compiled[vi].is_some() {
                return Err(format!("{head}: tag {tag} appears twice"));
            }
            let outer = scope.len();
            scope.extend(variants[vi].fields.iter().map(|f| format!("{var}.{}", f.name)));
            let body = self.expr(pair[1], scope);
            scope.truncate(outer);
            compiled[vi] = Some(body?);
        }
        let missing: Vec<&str> = variants
            .iter()
            .zip(&compiled)
            .filter(|(_, c)| c.is_none())
            .map(|(v, _)| v.tag_name())
            .collect();
        if !missing.is_empty() {
            return Err(format!("{head} does not cover {}", missing.join(" ")));
        }
        Ok(Expr::Case {
            ty,
            scrutinee: slot,
            arms: compiled.into_iter().map(|c| c.expect("covered")).collect(),
        })
    }
}

impl Program {
    pub fn new() -> Program {
        Program::default()
    }

    pub fn lookup(&self, name: &str) -> Option<FnId> {
        self.by_name.get(name).copied()
    }

    pub fn get(&self, id: FnId) -> &FnDef {
        &self.fns[id.index()]
    }

    pub fn fns(&self) -> impl Iterator<Item = (FnId, &FnDef)> {
        self.fns.iter().enumerate().map(|(i, f)| (FnId(i as u32), f))
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group_of(&self, id: FnId) -> &Group {
        &self.groups[self.get(id).group]
    }

    /// Compiles one group. Members may call each other and anything
    /// defined before the group.
    pub fn add_group(&mut self, schema: &Schema, src: &GroupSource) -> Result<usize, SchemaError> {
        let base = self.fns.len() as u32;
        let derived = derived_names(schema);
        let mut visible: HashMap<String, (FnId, usize)> = self
            .fns()
            .map(|(id, f)| (f.name.clone(), (id, f.formals.len())))
            .collect();
        let mut seen = BTreeSet::new();
        for (i, f) in src.members.iter().enumerate() {
            let clash = self.by_name.contains_key(&f.name) || !seen.insert(f.name.as_str());
            if clash {
                return Err(SchemaError::at(f.pos, format!("redefinition of function {}", f.name)));
            }
            if derived.contains_key(&f.name) || SPECIAL.contains(&f.name.as_str()) || prim_for(&f.name, 0).is_some() {
                return Err(SchemaError::at(
                    f.pos,
                    format!("function name {} is already a builtin or derived operation", f.name),
                ));
            }
            visible.insert(f.name.clone(), (FnId(base + i as u32), f.formals.len()));
        }
        let group = self.groups.len();
        let mut defs = Vec::new();
        for f in &src.members {
            let def = self
                .compile_fn(schema, &derived, &visible, f, group)
                .map_err(|m| SchemaError::at(f.pos, format!("in {}: {m}", f.name)))?;
            defs.push(def);
        }
        let has_measure = src.members.iter().all(|f| f.measure.is_some());
        let mut members = Vec::new();
        for def in defs {
            let id = FnId(self.fns.len() as u32);
            self.by_name.insert(def.name.clone(), id);
            self.fns.push(def);
            members.push(id);
        }
        self.groups.push(Group {
            name: src.name.clone(),
            members,
            mutual: src.mutual,
            has_measure,
        });
        Ok(group)
    }

    /// Compiles a closed expression over everything defined so far. With
    /// `data` set, sub-forms that are not calls are read as literals, so
    /// `(aterm-eval (:num 1))` needs no quoting.
    pub fn compile_expr(&self, schema: &Schema, v: &Value, data: bool) -> FormResult<Expr> {
        let derived = derived_names(schema);
        let visible: HashMap<String, (FnId, usize)> = self
            .fns()
            .map(|(id, f)| (f.name.clone(), (id, f.formals.len())))
            .collect();
        let compiler = Compiler {
            schema,
            derived: &derived,
            visible: &visible,
            data,
        };
        if data {
            // the outermost form is always a call
            let head = v.proper_list().and_then(|items| items.first().map(|h| (*h).clone()));
            match head.as_ref().and_then(|h| h.as_symbol()) {
                Some(h) if compiler.callable(h) => {}
                Some(h) => return Err(format!("unknown function {h}")),
                None => return Err(format!("expected a call, got {v}")),
            }
        }
        compiler.expr(v, &mut Vec::new())
    }

    fn compile_fn(
        &self,
        schema: &Schema,
        derived: &HashMap<String, Named>,
        visible: &HashMap<String, (FnId, usize)>,
        f: &FnSource,
        group: usize,
    ) -> FormResult<FnDef> {
        let formals = f
            .formals
            .iter()
            .map(|x| {
                let ty = match &x.ty {
                    Some(t) => Some(schema.resolve(t).ok_or_else(|| format!("unknown type {t}"))?),
                    None => None,
                };
                Ok(Formal {
                    name: x.name.clone(),
                    ty,
                    raw: x.raw,
                })
            })
            .collect::<FormResult<Vec<_>>>()?;
        let returns = match &f.returns {
            Some(t) => Some(schema.resolve(t).ok_or_else(|| format!("unknown return type {t}"))?),
            None => None,
        };
        let compiler = Compiler {
            schema,
            derived,
            visible,
            data: false,
        };
        let mut scope: Vec<String> = formals.iter().map(|x| x.name.clone()).collect();
        let body = compiler.expr(&f.body, &mut scope)?;
        Ok(FnDef {
            name: f.name.clone(),
            formals,
            returns,
            body,
            group,
            pos: f.pos,
        })
    }
}
