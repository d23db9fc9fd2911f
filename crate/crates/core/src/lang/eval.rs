// SPDX-License-Identifier: Apache-2.0

//! The evaluator, in two modes.
//!
//! Logic mode gives every function its logical meaning: typed formals are
//! fixed on entry (unless marked `:raw`), arithmetic treats non-integers as
//! 0 and `car`/`cdr` of an atom is `nil`. Guarded mode fixes nothing and
//! instead checks every guard: formal types at each call, the argument
//! types of primitives and derived operations, and the kind of a sum passed
//! to a variant accessor. On well-typed inputs the two modes agree.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::schema::{Schema, Shape, TypeId};
use crate::values::Value;

use super::compile::{DerivedOp, Expr, FnId, Prim, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    Logic,
    Guarded,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Logic => "logic",
            Mode::Guarded => "guarded",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "logic" => Ok(Mode::Logic),
            "guarded" => Ok(Mode::Guarded),
            _ => Err(format!("unknown mode {s} (expected logic or guarded)")),
        }
    }
}

pub const DEFAULT_DEPTH_LIMIT: usize = 10_000;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("guard violation: {function} {formal} expects {expected}, got {value}")]
    Guard {
        function: String,
        formal: String,
        expected: String,
        value: Value,
    },
    #[error("recursion depth limit {0} exhausted")]
    Depth(usize),
    #[error("{function} expects {expected} arguments, got {got}")]
    Arity {
        function: String,
        expected: usize,
        got: usize,
    },
    #[error("unknown function {0}")]
    UnknownFunction(String),
}

/// Evaluates functions of a [`Program`] against a [`Schema`].
pub struct Machine<'a> {
    schema: &'a Schema,
    program: &'a Program,
    mode: Mode,
    depth_limit: usize,
    depth: usize,
}

impl<'a> Machine<'a> {
    pub fn new(schema: &'a Schema, program: &'a Program, mode: Mode) -> Self {
        Machine {
            schema,
            program,
            mode,
            depth_limit: DEFAULT_DEPTH_LIMIT,
            depth: 0,
        }
    }

    pub fn with_depth_limit(mut self, limit: usize) -> Self {
        self.depth_limit = limit;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Calls a function by name.
    pub fn call_named(&mut self, name: &str, args: Vec<Value>) -> Result<Value, EvalError> {
        let id = self
            .program
            .lookup(name)
            .ok_or_else(|| EvalError::UnknownFunction(name.to_string()))?;
        self.call(id, args)
    }

    pub fn call(&mut self, id: FnId, mut args: Vec<Value>) -> Result<Value, EvalError> {
        let f = self.program.get(id);
        if args.len() != f.formals.len() {
            return Err(EvalError::Arity {
                function: f.name.clone(),
                expected: f.formals.len(),
                got: args.len(),
            });
        }
        if self.depth >= self.depth_limit {
            return Err(EvalError::Depth(self.depth_limit));
        }
        for (formal, arg) in f.formals.iter().zip(args.iter_mut()) {
            let Some(ty) = formal.ty else { continue };
            match self.mode {
                Mode::Logic if !formal.raw => *arg = self.schema.fix(ty, arg),
                Mode::Logic => {}
                Mode::Guarded => {
                    if !self.schema.recognize(ty, arg) {
                        return Err(EvalError::Guard {
                            function: f.name.clone(),
                            formal: formal.name.clone(),
                            expected: self.schema.name(ty).to_string(),
                            value: arg.clone(),
                        });
                    }
                }
            }
        }
        self.depth += 1;
        let result = self.eval(&f.body, &mut args);
        self.depth -= 1;
        result
    }

    /// Evaluates `expr` with `frame` as its slots.
    pub fn eval(&mut self, expr: &Expr, frame: &mut Vec<Value>) -> Result<Value, EvalError> {
        stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, || self.eval_inner(expr, frame))
    }

    fn eval_inner(&mut self, expr: &Expr, frame: &mut Vec<Value>) -> Result<Value, EvalError> {
        match expr {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Local(i) => Ok(frame[*i].clone()),
            Expr::If(c, t, e) => {
                if self.eval(c, frame)?.truthy() {
                    self.eval(t, frame)
                } else {
                    self.eval(e, frame)
                }
            }
            Expr::Let(inits, body) => {
                let outer = frame.len();
                for init in inits {
                    let v = match self.eval(init, frame) {
                        Ok(v) => v,
                        Err(e) => {
                            frame.truncate(outer);
                            return Err(e);
                        }
                    };
                    frame.push(v);
                }
                let r = self.eval(body, frame);
                frame.truncate(outer);
                r
            }
            Expr::And(xs) => {
                let mut last = Value::t();
                for x in xs {
                    last = self.eval(x, frame)?;
                    if !last.truthy() {
                        return Ok(last);
                    }
                }
                Ok(last)
            }
            Expr::Or(xs) => {
                for x in xs {
                    let v = self.eval(x, frame)?;
                    if v.truthy() {
                        return Ok(v);
                    }
                }
                Ok(Value::nil())
            }
            Expr::Prim(p, args) => {
                let vals = self.eval_args(args, frame)?;
                self.prim(*p, vals)
            }
            Expr::Derived(op, args) => {
                let vals = self.eval_args(args, frame)?;
                self.derived(*op, vals)
            }
            Expr::Case { ty, scrutinee, arms } => {
                let x = frame[*scrutinee].clone();
                self.guard_type("case", "scrutinee", *ty, &x)?;
                let vi = self.schema.kind_index(*ty, &x).expect("case on a sum");
                let n = self.schema.field_list(*ty, Some(vi)).len();
                let outer = frame.len();
                for i in 0..n {
                    frame.push(self.schema.access_at(*ty, Some(vi), i, &x));
                }
                let r = self.eval(&arms[vi], frame);
                frame.truncate(outer);
                r
            }
            Expr::Call(id, args) => {
                let vals = self.eval_args(args, frame)?;
                self.call(*id, vals)
            }
        }
    }

    fn eval_args(&mut self, args: &[Expr], frame: &mut Vec<Value>) -> Result<Vec<Value>, EvalError> {
        args.iter().map(|a| self.eval(a, frame)).collect()
    }

    fn guard_type(&self, function: &str, formal: &str, ty: TypeId, v: &Value) -> Result<(), EvalError> {
        if self.mode == Mode::Guarded && !self.schema.recognize(ty, v) {
            return Err(EvalError::Guard {
                function: function.to_string(),
                formal: formal.to_string(),
                expected: self.schema.name(ty).to_string(),
                value: v.clone(),
            });
        }
        Ok(())
    }

    fn int_arg(&self, op: Prim, i: usize, v: &Value) -> Result<BigInt, EvalError> {
        match v.as_int() {
            Some(n) => Ok(n.clone()),
            None if self.mode == Mode::Logic => Ok(BigInt::zero()),
            None => Err(EvalError::Guard {
                function: op.name().to_string(),
                formal: format!("argument {}", i + 1),
                expected: "int".to_string(),
                value: v.clone(),
            }),
        }
    }

    fn prim(&self, p: Prim, args: Vec<Value>) -> Result<Value, EvalError> {
        Ok(match p {
            Prim::Add => {
                let mut sum = BigInt::zero();
                for (i, a) in args.iter().enumerate() {
                    sum += self.int_arg(p, i, a)?;
                }
                Value::Int(sum)
            }
            Prim::Neg => Value::Int(-self.int_arg(p, 0, &args[0])?),
            Prim::Sub => Value::Int(self.int_arg(p, 0, &args[0])? - self.int_arg(p, 1, &args[1])?),
            Prim::Lt => Value::bool(self.int_arg(p, 0, &args[0])? < self.int_arg(p, 1, &args[1])?),
            Prim::Equal => Value::bool(args[0] == args[1]),
            Prim::Cons => {
                let mut it = args.into_iter();
                let head = it.next().expect("arity");
                let tail = it.next().expect("arity");
                Value::cons(head, tail)
            }
            Prim::Car | Prim::Cdr => {
                let x = &args[0];
                if self.mode == Mode::Guarded && !x.is_pair() && !x.is_nil() {
                    return Err(EvalError::Guard {
                        function: p.name().to_string(),
                        formal: "argument 1".to_string(),
                        expected: "cons or nil".to_string(),
                        value: x.clone(),
                    });
                }
                if p == Prim::Car {
                    x.head()
                } else {
                    x.tail()
                }
            }
            Prim::Atom => Value::bool(args[0].is_atom()),
            Prim::Not => Value::bool(args[0].is_nil()),
        })
    }

    fn derived(&self, op: DerivedOp, args: Vec<Value>) -> Result<Value, EvalError> {
        let s = self.schema;
        let name = || op.name(s);
        match op {
            DerivedOp::Recognize(t) => Ok(Value::bool(s.recognize(t, &args[0]))),
            DerivedOp::Equiv(t) => Ok(Value::bool(s.equiv(t, &args[0], &args[1]))),
            DerivedOp::Count(t) => Ok(Value::int(s.count(t, &args[0]))),
            DerivedOp::Fix(t) => {
                self.guard_type(&name(), "argument 1", t, &args[0])?;
                Ok(s.fix(t, &args[0]))
            }
            DerivedOp::Kind(t) => {
                self.guard_type(&name(), "argument 1", t, &args[0])?;
                Ok(s.kind_of(t, &args[0]).expect("kind of a sum"))
            }
            DerivedOp::Construct(t, v) => {
                for (i, (f, a)) in s.field_list(t, v).iter().zip(&args).enumerate() {
                    self.guard_type(&name(), &format!("{} (argument {})", f.name, i + 1), f.ty, a)?;
                }
                Ok(s.construct_at(t, v, &args).expect("arity checked at compile time"))
            }
            DerivedOp::Access(t, v, i) => {
                self.guard_type(&name(), "argument 1", t, &args[0])?;
                if let (Mode::Guarded, Some(vi)) = (self.mode, v) {
                    if s.kind_index(t, &args[0]).ok() != Some(vi) {
                        return Err(EvalError::Guard {
                            function: name(),
                            formal: "argument 1".to_string(),
                            expected: format!("{} of kind {}", s.name(t), variant_tag(s, t, vi)),
                            value: args[0].clone(),
                        });
                    }
                }
                Ok(s.access_at(t, v, i, &args[0]))
            }
        }
    }
}

fn variant_tag(s: &Schema, t: TypeId, vi: usize) -> String {
    match s.shape(t) {
        Shape::Sum { variants, .. } => variants[vi].tag_name().to_string(),
        _ => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{parse_events, validate, EventKind};
    use crate::values::read_value;

    const ATERM: &str = "
        (deftypes arithmetic-terms
          (deftagsum aterm (:num ((val int))) (:sum ((args atermlist))) (:minus ((arg aterm))))
          (deflist atermlist :elt-type aterm))
        (defprod student ((name string) (age nat)))
        (defines aterm-eval
          (define aterm-eval ((x aterm-p)) :measure (aterm-count x) :returns (val integerp)
            (aterm-case x :num x.val :sum (atermlist-sum x.args) :minus (- (aterm-eval x.arg))))
          (define atermlist-sum ((x atermlist-p)) :measure (atermlist-count x) :returns (sum integerp)
            (if (atom x) 0 (+ (aterm-eval (car x)) (atermlist-sum (cdr x))))))
        (define bad-id ((x nat :raw)) x)
        (define count-down ((n nat)) (if (equal n 0) 0 (count-down (- n 1))))
        (define swap ((x :raw)) (let ((a (car x)) (b (cdr x))) (cons b a)))
        (define seq ((x int)) (let* ((a (+ x 1)) (b (+ a 1))) (cons a b)))
        (define par ((x int)) (let ((x (+ x 1)) (y x)) (cons x y)))
        (define logic ((x :raw)) (or (and x 1) 2))";

    fn setup() -> (Schema, Program) {
        let events = parse_events(ATERM).unwrap();
        let schema = validate(&events).unwrap();
        let mut program = Program::new();
        for ev in &events {
            if let EventKind::Define(g) = &ev.kind {
                program.add_group(&schema, g).unwrap();
            }
        }
        (schema, program)
    }

    fn run(s: &Schema, p: &Program, mode: Mode, f: &str, args: &[&str]) -> Result<Value, EvalError> {
        let args = args.iter().map(|a| read_value(a).unwrap()).collect();
        Machine::new(s, p, mode).call_named(f, args)
    }

    fn ok(s: &Schema, p: &Program, f: &str, args: &[&str]) -> String {
        run(s, p, Mode::Logic, f, args).unwrap().to_string()
    }

    #[test]
    fn evaluates_aterm_terms() {
        let (s, p) = setup();
        assert_eq!(ok(&s, &p, "aterm-eval", &["(:sum ((:num 1) (:num 2)))"]), "3");
        assert_eq!(ok(&s, &p, "aterm-eval", &["(:minus (:num 5))"]), "-5");
        assert_eq!(ok(&s, &p, "aterm-eval", &["\"junk\""]), "0");
        let guarded = run(&s, &p, Mode::Guarded, "aterm-eval", &["(:sum ((:num 1) (:num 2)))"]);
        assert_eq!(guarded.unwrap().to_string(), "3");
    }

    #[test]
    fn guarded_mode_checks_formals() {
        let (s, p) = setup();
        match run(&s, &p, Mode::Guarded, "aterm-eval", &["\"junk\""]) {
            Err(EvalError::Guard { function, formal, .. }) => {
                assert_eq!(function, "aterm-eval");
                assert_eq!(formal, "x");
            }
            other => panic!("expected a guard violation, got {other:?}"),
        }
        // raw formals skip fixing but are still checked in guarded mode
        assert_eq!(ok(&s, &p, "bad-id", &["\"s\""]), "\"s\"");
        assert!(matches!(
            run(&s, &p, Mode::Guarded, "bad-id", &["\"s\""]),
            Err(EvalError::Guard { .. })
        ));
    }

    #[test]
    fn primitives_follow_fixing_conventions() {
        let (s, p) = setup();
        let e = p.compile_expr(&s, &read_value("(+ \"a\" 1)").unwrap(), false).unwrap();
        let logic = Machine::new(&s, &p, Mode::Logic).eval(&e, &mut Vec::new());
        assert_eq!(logic, Ok(Value::int(1)));
        let guarded = Machine::new(&s, &p, Mode::Guarded).eval(&e, &mut Vec::new());
        assert!(matches!(guarded, Err(EvalError::Guard { .. })));
        assert_eq!(ok(&s, &p, "swap", &["7"]), "(nil)");
        assert!(matches!(
            run(&s, &p, Mode::Guarded, "swap", &["7"]),
            Err(EvalError::Guard { .. })
        ));
    }

    #[test]
    fn let_forms_bind_sequentially_or_in_parallel() {
        let (s, p) = setup();
        assert_eq!(ok(&s, &p, "seq", &["1"]), "(2 . 3)");
        assert_eq!(ok(&s, &p, "par", &["1"]), "(2 . 1)");
        assert_eq!(ok(&s, &p, "logic", &["nil"]), "2");
        assert_eq!(ok(&s, &p, "logic", &["5"]), "1");
    }

    #[test]
    fn depth_limit_is_enforced() {
        let (s, p) = setup();
        let r = Machine::new(&s, &p, Mode::Logic)
            .with_depth_limit(50)
            .call_named("count-down", vec![Value::int(100)]);
        assert_eq!(r, Err(EvalError::Depth(50)));
        assert_eq!(ok(&s, &p, "count-down", &["5000"]), "0");
    }

    #[test]
    fn derived_operations_are_callable() {
        let (s, p) = setup();
        let eval = |text: &str, mode| {
            let e = p.compile_expr(&s, &read_value(text).unwrap(), true).unwrap();
            Machine::new(&s, &p, mode)
                .eval(&e, &mut Vec::new())
                .map(|v| v.to_string())
        };
        assert_eq!(
            eval("(student->name (make-student :name 6 :age \"Calista\"))", Mode::Logic).unwrap(),
            "\"\""
        );
        assert!(eval("(make-student :name 6)", Mode::Guarded).is_err());
        assert_eq!(eval("(make-student :age 3)", Mode::Guarded).unwrap(), "(\"\" 3)");
        assert_eq!(eval("(aterm-kind (:minus 7))", Mode::Logic).unwrap(), ":minus");
        assert_eq!(eval("(aterm-minus->arg (:num 3))", Mode::Logic).unwrap(), "(:num 0)");
        assert!(eval("(aterm-minus->arg (:num 3))", Mode::Guarded).is_err());
        assert_eq!(eval("(aterm-count (:minus (:num 3)))", Mode::Logic).unwrap(), "2");
        assert_eq!(eval("(natp -1)", Mode::Guarded).unwrap(), "nil");
        assert_eq!(eval("(nfix -1)", Mode::Logic).unwrap(), "0");
        assert_eq!(eval("(atermlist-sum ((:num 4) (:num 5)))", Mode::Logic).unwrap(), "9");
    }

    #[test]
    fn compile_errors() {
        let (s, p) = setup();
        let bad = |text: &str| p.compile_expr(&s, &read_value(text).unwrap(), false).unwrap_err();
        assert!(bad("(nosuch 1)").contains("unknown function"));
        assert!(bad("(aterm-eval 1 2)").contains("expects 1"));
        assert!(bad("y").contains("unbound"));
        assert!(bad("(aterm-case y :num 1)").contains("unbound"));
        let mut p2 = Program::new();
        let events = parse_events(
            "(define f ((x aterm)) (aterm-case x :num 1 :sum 2))
             (define g ((x aterm)) (aterm-case x :num 1 :num 2 :sum 3 :minus 4))
             (define aterm-p ((x nat)) x)
             (define h ((x nat)) (h2 x))",
        )
        .unwrap();
        for ev in &events {
            if let EventKind::Define(g) = &ev.kind {
                assert!(p2.add_group(&s, g).is_err(), "{g:?} should not compile");
            }
        }
    }
}
