// SPDX-License-Identifier: Apache-2.0

//! Randomized and bounded-exhaustive checks of the fixing discipline.
//!
//! Every check draws run `r` from its own ChaCha stream of the report's
//! seed, so a recorded `(seed, runs)` pair reproduces a counterexample
//! exactly.
//!
//! Congruent pairs are built by mutate-then-refix: starting from `x`, take
//! `x' = fix(x)` and plant ill-typed material into `x'` wherever fixing
//! erases it (see [`junkify`]), giving an `x''` equivalent to both.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::forms::{self, FormResult};
use crate::kernel::{generate_typed, junkify, seeded_rng, RawGenerator};
use crate::schema::{Schema, Shape, TypeId};
use crate::values::Value;

use super::compile::{DerivedOp, FnId, Program};
use super::eval::{EvalError, Machine, Mode};

/// `:runs`, `:seed` and `:depth` as given on law-requesting forms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LawOptions {
    pub runs: Option<u64>,
    pub seed: Option<u64>,
    pub depth: Option<u64>,
}

impl LawOptions {
    pub fn parse(rest: &[&Value], what: &str) -> FormResult<LawOptions> {
        let o = forms::options(rest, &[":runs", ":seed", ":depth"], what)?;
        let get = |k: &str| o.get(k).map(|v| forms::natural(v, k)).transpose();
        Ok(LawOptions {
            runs: get(":runs")?,
            seed: get(":seed")?,
            depth: get(":depth")?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// The first failing run, with its inputs printed.
    Counterexample {
        run: u64,
        detail: String,
    },
    /// A precondition of the law does not hold.
    Rejected(String),
}

#[derive(Clone, Debug)]
pub struct LawReport {
    pub law: String,
    pub subject: String,
    pub mode: Mode,
    pub seed: u64,
    pub runs: u64,
    pub outcome: Outcome,
    pub note: Option<String>,
    pub elapsed: Duration,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    /// `law  subject  runs  PASS|FAIL  seed  detail`, tab-separated.
    pub fn line(&self) -> String {
        let (status, detail) = match &self.outcome {
            Outcome::Pass => ("PASS", self.note.clone().unwrap_or_default()),
            Outcome::Counterexample { run, detail } => ("FAIL", format!("run={run} {detail}")),
            Outcome::Rejected(why) => ("FAIL", format!("rejected: {why}")),
        };
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.law, self.subject, self.runs, status, self.seed, detail
        )
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LawError {
    #[error("enumeration of {size} values exceeds the cap of {cap}")]
    EnumerationOverflow { size: u128, cap: u64 },
    #[error("{0} takes no typed argument at position {1}")]
    UntypedArgument(String, usize),
    #[error("{0} must take exactly one typed argument")]
    NotUnary(String),
}

/// A function the harness can apply to argument tuples.
pub trait Subject {
    fn label(&self) -> String;
    /// Declared argument types; `None` for untyped arguments.
    fn arg_types(&self) -> Vec<Option<TypeId>>;
    fn apply(&self, args: &[Value]) -> Result<Value, String>;
}

/// A user function, evaluated in the given mode.
pub struct FnSubject<'a> {
    pub schema: &'a Schema,
    pub program: &'a Program,
    pub id: FnId,
    pub mode: Mode,
}

impl<'a> FnSubject<'a> {
    pub fn logic(schema: &'a Schema, program: &'a Program, id: FnId) -> Self {
        FnSubject {
            schema,
            program,
            id,
            mode: Mode::Logic,
        }
    }
}

impl Subject for FnSubject<'_> {
    fn label(&self) -> String {
        self.program.get(self.id).name.clone()
    }

    fn arg_types(&self) -> Vec<Option<TypeId>> {
        self.program.get(self.id).formals.iter().map(|f| f.ty).collect()
    }

    fn apply(&self, args: &[Value]) -> Result<Value, String> {
        Machine::new(self.schema, self.program, self.mode)
            .call(self.id, args.to_vec())
            .map_err(|e| e.to_string())
    }
}

/// A derived schema operation, with its logical semantics.
pub struct OpSubject<'a> {
    pub schema: &'a Schema,
    pub op: DerivedOp,
}

impl Subject for OpSubject<'_> {
    fn label(&self) -> String {
        self.op.name(self.schema)
    }

    fn arg_types(&self) -> Vec<Option<TypeId>> {
        self.op.arg_types(self.schema).into_iter().map(Some).collect()
    }

    fn apply(&self, args: &[Value]) -> Result<Value, String> {
        let s = self.schema;
        Ok(match self.op {
            DerivedOp::Recognize(t) => Value::bool(s.recognize(t, &args[0])),
            DerivedOp::Fix(t) => s.fix(t, &args[0]),
            DerivedOp::Equiv(t) => Value::bool(s.equiv(t, &args[0], &args[1])),
            DerivedOp::Count(t) => Value::int(s.count(t, &args[0])),
            DerivedOp::Kind(t) => s.kind_of(t, &args[0]).map_err(|e| e.to_string())?,
            DerivedOp::Construct(t, v) => s.construct_at(t, v, args).map_err(|e| e.to_string())?,
            DerivedOp::Access(t, v, i) => s.access_at(t, v, i, &args[0]),
        })
    }
}

fn show(r: &Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("<error: {e}>"),
    }
}

fn agree(a: &Result<Value, String>, b: &Result<Value, String>) -> bool {
    matches!((a, b), (Ok(x), Ok(y)) if x == y)
}

/// Atoms of the bounded universe used for hypothesis elimination.
pub fn enumeration_atoms() -> Vec<Value> {
    let mut atoms: Vec<Value> = (-2..=2).map(Value::from).collect();
    atoms.extend([
        Value::str(""),
        Value::str("a"),
        Value::nil(),
        Value::t(),
        Value::sym(":k"),
        Value::Char(0),
    ]);
    atoms
}

/// Laws about a single type's derived operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixLaw {
    /// `fix(x)` is recognized, for any `x`.
    Recognized,
    /// `fix(v) = v` for recognized `v`.
    Identity,
    Idempotent,
    DefaultRecognized,
    EquivReflexive,
    EquivSymmetric,
    EquivTransitive,
    /// `equiv(a, b)` iff `fix(a) = fix(b)`, and `x` is equivalent to `fix(x)`.
    EquivCanonical,
    /// `count(x) = count(fix(x))`.
    CountFix,
    /// Count strictly decreases from a typed value to each non-base child.
    Measure,
    /// Rebuilding a product or sum value from its fields gives it back.
    ConstructAccess,
}

impl FixLaw {
    pub const ALL: [FixLaw; 11] = [
        FixLaw::Recognized,
        FixLaw::Identity,
        FixLaw::Idempotent,
        FixLaw::DefaultRecognized,
        FixLaw::EquivReflexive,
        FixLaw::EquivSymmetric,
        FixLaw::EquivTransitive,
        FixLaw::EquivCanonical,
        FixLaw::CountFix,
        FixLaw::Measure,
        FixLaw::ConstructAccess,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixLaw::Recognized => "fix-recognized",
            FixLaw::Identity => "fix-identity",
            FixLaw::Idempotent => "fix-idempotent",
            FixLaw::DefaultRecognized => "default-recognized",
            FixLaw::EquivReflexive => "equiv-reflexive",
            FixLaw::EquivSymmetric => "equiv-symmetric",
            FixLaw::EquivTransitive => "equiv-transitive",
            FixLaw::EquivCanonical => "equiv-canonical",
            FixLaw::CountFix => "count-fix",
            FixLaw::Measure => "measure",
            FixLaw::ConstructAccess => "construct-access",
        }
    }

    pub fn applies(self, schema: &Schema, ty: TypeId) -> bool {
        match self {
            FixLaw::CountFix | FixLaw::Measure => !schema.is_base(ty),
            FixLaw::ConstructAccess => matches!(schema.shape(ty), Shape::Prod(_) | Shape::Sum { .. }),
            _ => true,
        }
    }
}

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Runs law checks against one schema.
pub struct Harness<'a> {
    schema: &'a Schema,
    raw: RawGenerator,
    /// Size budget for generated inputs.
    pub size: u64,
    pub enumeration_cap: u64,
}

impl<'a> Harness<'a> {
    pub fn new(schema: &'a Schema) -> Self {
        Harness {
            schema,
            raw: RawGenerator::for_schema(schema),
            size: 12,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn schema(&self) -> &'a Schema {
        self.schema
    }

    pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
        let mut rng = seeded_rng(seed);
        rng.set_stream(run);
        rng
    }

    pub fn typed(&self, ty: TypeId, rng: &mut ChaCha8Rng) -> Value {
        let budget = rng.random_range(0..=self.size);
        generate_typed(self.schema, ty, budget, rng)
    }

    /// An input that is usually not of type `ty`: pure noise, a typed value
    /// with planted junk, or occasionally a typed value.
    pub fn untyped(&self, ty: Option<TypeId>, rng: &mut ChaCha8Rng) -> Value {
        let Some(ty) = ty else {
            return self.raw.generate(self.size, rng);
        };
        match rng.random_range(0..5) {
            0 | 1 => self.raw.generate(self.size, rng),
            2 | 3 => {
                let v = self.typed(ty, rng);
                junkify(self.schema, ty, &v, &self.raw, rng)
            }
            _ => self.typed(ty, rng),
        }
    }

    /// A value equivalent to `x` at `ty`, built by planting junk in `fix(x)`.
    pub fn equivalent(&self, ty: TypeId, x: &Value, rng: &mut ChaCha8Rng) -> Value {
        junkify(self.schema, ty, &self.schema.fix(ty, x), &self.raw, rng)
    }

    fn report(&self, law: &str, subject: String, seed: u64, runs: u64, outcome: Outcome, start: Instant) -> LawReport {
        LawReport {
            law: law.to_string(),
            subject,
            mode: Mode::Logic,
            seed,
            runs,
            outcome,
            note: None,
            elapsed: start.elapsed(),
        }
    }

    fn arg_type(&self, subj: &dyn Subject, arg: usize) -> Result<TypeId, LawError> {
        subj.arg_types()
            .get(arg)
            .copied()
            .flatten()
            .ok_or_else(|| LawError::UntypedArgument(subj.label(), arg))
    }

    fn draw_args(&self, subj: &dyn Subject, rng: &mut ChaCha8Rng) -> Vec<Value> {
        subj.arg_types().into_iter().map(|t| self.untyped(t, rng)).collect()
    }

    fn others(args: &[Value], skip: usize) -> String {
        if args.len() <= 1 {
            return String::new();
        }
        let rest: Vec<String> = args
            .iter()
            .enumerate()
            .map(|(i, a)| if i == skip { "_".to_string() } else { a.to_string() })
            .collect();
        format!(" args=({})", rest.join(" "))
    }

    /// `f(.., fix(x), ..) = f(.., x, ..)` over `runs` random tuples.
    pub fn check_transparency(
        &self,
        subj: &dyn Subject,
        arg: usize,
        runs: u64,
        seed: u64,
    ) -> Result<LawReport, LawError> {
        let start = Instant::now();
        let ty = self.arg_type(subj, arg)?;
        let mut outcome = Outcome::Pass;
        for run in 0..runs {
            let mut rng = Self::run_rng(seed, run);
            let mut args = self.draw_args(subj, &mut rng);
            let x = args[arg].clone();
            let r1 = subj.apply(&args);
            let fixed = self.schema.fix(ty, &x);
            args[arg] = fixed.clone();
            let r2 = subj.apply(&args);
            if !agree(&r1, &r2) {
                outcome = Outcome::Counterexample {
                    run,
                    detail: format!(
                        "x={x} x'={fixed} f(x)={} f(x')={}{}",
                        show(&r1),
                        show(&r2),
                        Self::others(&args, arg)
                    ),
                };
                break;
            }
        }
        Ok(self.report(
            "transparency",
            format!("{}#{arg}", subj.label()),
            seed,
            runs,
            outcome,
            start,
        ))
    }

    /// Equal results on `x`, `fix(x)` and a junk-planted `x''` equivalent
    /// to both.
    pub fn check_congruence(
        &self,
        subj: &dyn Subject,
        arg: usize,
        runs: u64,
        seed: u64,
    ) -> Result<LawReport, LawError> {
        let start = Instant::now();
        let ty = self.arg_type(subj, arg)?;
        let mut outcome = Outcome::Pass;
        for run in 0..runs {
            let mut rng = Self::run_rng(seed, run);
            let mut args = self.draw_args(subj, &mut rng);
            let x = args[arg].clone();
            let x1 = self.schema.fix(ty, &x);
            let x2 = self.equivalent(ty, &x, &mut rng);
            let r0 = subj.apply(&args);
            args[arg] = x1.clone();
            let r1 = subj.apply(&args);
            args[arg] = x2.clone();
            let r2 = subj.apply(&args);
            if !agree(&r0, &r1) || !agree(&r0, &r2) {
                outcome = Outcome::Counterexample {
                    run,
                    detail: format!(
                        "x={x} x'={x1} x''={x2} f(x)={} f(x')={} f(x'')={}{}",
                        show(&r0),
                        show(&r1),
                        show(&r2),
                        Self::others(&args, arg)
                    ),
                };
                break;
            }
        }
        Ok(self.report(
            "congruence",
            format!("{}#{arg}", subj.label()),
            seed,
            runs,
            outcome,
            start,
        ))
    }

    /// Constants used when none are given: small atoms, the schema's tags,
    /// a junk string and every type's default witness.
    pub fn default_constants(&self) -> Vec<Value> {
        let mut cs = enumeration_atoms();
        cs.push(Value::str("junk"));
        cs.push(Value::cons(Value::int(1), Value::int(2)));
        for id in self.schema.ids() {
            if let Shape::Sum { variants, .. } = self.schema.shape(id) {
                cs.extend(variants.iter().map(|v| v.tag.clone()));
            }
            cs.push(self.schema.default_witness(id).clone());
        }
        let mut out: Vec<Value> = Vec::new();
        for c in cs {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    /// `f(.., c, ..) = f(.., fix(c), ..)` for each constant `c`, other
    /// arguments drawn once from `seed`.
    pub fn check_constant_normalization(
        &self,
        subj: &dyn Subject,
        arg: usize,
        constants: &[Value],
        seed: u64,
    ) -> Result<LawReport, LawError> {
        let start = Instant::now();
        let ty = self.arg_type(subj, arg)?;
        let mut rng = seeded_rng(seed);
        let mut args = self.draw_args(subj, &mut rng);
        let mut outcome = Outcome::Pass;
        for (run, c) in constants.iter().enumerate() {
            args[arg] = c.clone();
            let r1 = subj.apply(&args);
            let fixed = self.schema.fix(ty, c);
            args[arg] = fixed.clone();
            let r2 = subj.apply(&args);
            if !agree(&r1, &r2) {
                outcome = Outcome::Counterexample {
                    run: run as u64,
                    detail: format!(
                        "c={c} fix(c)={fixed} f(c)={} f(fix(c))={}{}",
                        show(&r1),
                        show(&r2),
                        Self::others(&args, arg)
                    ),
                };
                break;
            }
        }
        Ok(self.report(
            "constant-normalization",
            format!("{}#{arg}", subj.label()),
            seed,
            constants.len() as u64,
            outcome,
            start,
        ))
    }

    /// All values of depth at most `depth` (atoms at depth 1) over
    /// [`enumeration_atoms`] plus the tags reachable from `ty`.
    pub fn enumerate(&self, ty: TypeId, depth: u64) -> Result<Vec<Value>, LawError> {
        let mut atoms = enumeration_atoms();
        for id in self.schema.reachable(ty) {
            if let Shape::Sum { variants, .. } = self.schema.shape(id) {
                for v in variants {
                    if !atoms.contains(&v.tag) {
                        atoms.push(v.tag.clone());
                    }
                }
            }
        }
        let a = atoms.len() as u128;
        let mut size = a;
        for _ in 1..depth.max(1) {
            size = a.saturating_add(size.saturating_mul(size));
            if size > u128::from(self.enumeration_cap) {
                break;
            }
        }
        if size > u128::from(self.enumeration_cap) {
            return Err(LawError::EnumerationOverflow {
                size,
                cap: self.enumeration_cap,
            });
        }
        let mut level = atoms.clone();
        for _ in 1..depth.max(1) {
            let mut next = atoms.clone();
            next.reserve(level.len() * level.len());
            for h in &level {
                for t in &level {
                    next.push(Value::cons(h.clone(), t.clone()));
                }
            }
            level = next;
        }
        Ok(level)
    }

    /// Bounded check of hypothesis elimination for a one-argument predicate:
    /// first its congruence premise, then `C(x) = C(fix(x))` for every
    /// enumerated `x`, which makes `forall x. C(x)` and
    /// `forall x. typep(x) => C(x)` agree on the bounded universe.
    pub fn check_hypothesis_elimination(
        &self,
        subj: &dyn Subject,
        depth: u64,
        congruence_runs: u64,
        seed: u64,
    ) -> Result<LawReport, LawError> {
        let start = Instant::now();
        let types = subj.arg_types();
        let ty = match types.as_slice() {
            [Some(t)] => *t,
            _ => return Err(LawError::NotUnary(subj.label())),
        };
        let law = "hypothesis-elimination";
        let premise = self.check_congruence(subj, 0, congruence_runs, seed)?;
        if !premise.passed() {
            let why = match premise.outcome {
                Outcome::Counterexample { detail, .. } => format!("congruence premise fails: {detail}"),
                other => format!("congruence premise fails: {other:?}"),
            };
            return Ok(self.report(law, subj.label(), seed, 0, Outcome::Rejected(why), start));
        }
        let universe = self.enumerate(ty, depth)?;
        let mut unconditional = true;
        let mut hypothesized = true;
        let mut typed = 0u64;
        let mut outcome = Outcome::Pass;
        for (run, x) in universe.iter().enumerate() {
            let fixed = self.schema.fix(ty, x);
            let (c, cf) = match (
                subj.apply(std::slice::from_ref(x)),
                subj.apply(std::slice::from_ref(&fixed)),
            ) {
                (Ok(c), Ok(cf)) => (c.truthy(), cf.truthy()),
                (r1, r2) => {
                    outcome = Outcome::Counterexample {
                        run: run as u64,
                        detail: format!("x={x} fix(x)={fixed} C(x)={} C(fix(x))={}", show(&r1), show(&r2)),
                    };
                    break;
                }
            };
            if c != cf {
                outcome = Outcome::Counterexample {
                    run: run as u64,
                    detail: format!(
                        "x={x} fix(x)={fixed} C(x)={} C(fix(x))={}",
                        Value::bool(c),
                        Value::bool(cf)
                    ),
                };
                break;
            }
            unconditional &= c;
            hypothesized &= cf;
            if self.schema.recognize(ty, x) {
                typed += 1;
                hypothesized &= c;
            }
        }
        if outcome == Outcome::Pass && unconditional != hypothesized {
            outcome = Outcome::Counterexample {
                run: universe.len() as u64,
                detail: format!("unconditional={unconditional} hypothesized={hypothesized}"),
            };
        }
        let mut r = self.report(law, subj.label(), seed, universe.len() as u64, outcome, start);
        r.note = Some(format!(
            "enumerated={} typed={typed} depth={depth} holds={}",
            universe.len(),
            Value::bool(unconditional)
        ));
        Ok(r)
    }

    /// Transparency, congruence and constant normalization for every typed
    /// argument of every subject.
    pub fn deffixequiv(&self, subjects: &[&dyn Subject], runs: u64, seed: u64) -> Vec<LawReport> {
        let constants = self.default_constants();
        let mut out = Vec::new();
        for subj in subjects {
            for (i, t) in subj.arg_types().iter().enumerate() {
                if t.is_none() {
                    continue;
                }
                out.extend(self.check_transparency(*subj, i, runs, seed));
                out.extend(self.check_congruence(*subj, i, runs, seed));
                out.extend(self.check_constant_normalization(*subj, i, &constants, seed));
            }
        }
        out
    }

    fn per_run(
        &self,
        law: &str,
        subject: String,
        runs: u64,
        seed: u64,
        mut check: impl FnMut(&mut ChaCha8Rng) -> Option<String>,
    ) -> LawReport {
        let start = Instant::now();
        let mut outcome = Outcome::Pass;
        for run in 0..runs {
            let mut rng = Self::run_rng(seed, run);
            if let Some(detail) = check(&mut rng) {
                outcome = Outcome::Counterexample { run, detail };
                break;
            }
        }
        self.report(law, subject, seed, runs, outcome, start)
    }

    /// Fixing-function and equivalence laws for one type.
    pub fn fix_laws(&self, ty: TypeId, runs: u64, seed: u64) -> Vec<LawReport> {
        FixLaw::ALL
            .iter()
            .filter(|l| l.applies(self.schema, ty))
            .map(|l| self.fix_law(*l, ty, runs, seed))
            .collect()
    }

    fn triple(&self, ty: TypeId, rng: &mut ChaCha8Rng) -> (Value, Value, Value) {
        let a = self.untyped(Some(ty), rng);
        let b = if rng.random_bool(0.5) {
            self.equivalent(ty, &a, rng)
        } else {
            self.untyped(Some(ty), rng)
        };
        let c = if rng.random_bool(0.5) {
            self.equivalent(ty, &b, rng)
        } else {
            self.untyped(Some(ty), rng)
        };
        (a, b, c)
    }

    pub fn fix_law(&self, law: FixLaw, ty: TypeId, runs: u64, seed: u64) -> LawReport {
        let s = self.schema;
        let name = s.name(ty).to_string();
        let runs = if law == FixLaw::DefaultRecognized { 1 } else { runs };
        self.per_run(law.name(), name, runs, seed, |rng| match law {
            FixLaw::Recognized => {
                let x = self.untyped(Some(ty), rng);
                let f = s.fix(ty, &x);
                (!s.recognize(ty, &f)).then(|| format!("x={x} fix(x)={f}"))
            }
            FixLaw::Identity => {
                let v = self.typed(ty, rng);
                let f = s.fix(ty, &v);
                (!s.recognize(ty, &v) || f != v).then(|| format!("v={v} fix(v)={f}"))
            }
            FixLaw::Idempotent => {
                let x = self.untyped(Some(ty), rng);
                let f = s.fix(ty, &x);
                let ff = s.fix(ty, &f);
                (ff != f).then(|| format!("x={x} fix(x)={f} fix(fix(x))={ff}"))
            }
            FixLaw::DefaultRecognized => {
                let d = s.default_witness(ty);
                (!s.recognize(ty, d)).then(|| format!("default={d}"))
            }
            FixLaw::EquivReflexive => {
                let a = self.untyped(Some(ty), rng);
                (!s.equiv(ty, &a, &a)).then(|| format!("a={a}"))
            }
            FixLaw::EquivSymmetric => {
                let (a, b, _) = self.triple(ty, rng);
                (s.equiv(ty, &a, &b) != s.equiv(ty, &b, &a)).then(|| format!("a={a} b={b}"))
            }
            FixLaw::EquivTransitive => {
                let (a, b, c) = self.triple(ty, rng);
                let bad = s.equiv(ty, &a, &b) && s.equiv(ty, &b, &c) && !s.equiv(ty, &a, &c);
                bad.then(|| format!("a={a} b={b} c={c}"))
            }
            FixLaw::EquivCanonical => {
                let (a, b, _) = self.triple(ty, rng);
                let (fa, fb) = (s.fix(ty, &a), s.fix(ty, &b));
                let bad = s.equiv(ty, &a, &b) != (fa == fb) || !s.equiv(ty, &a, &fa);
                bad.then(|| format!("a={a} b={b} fix(a)={fa} fix(b)={fb}"))
            }
            FixLaw::CountFix => {
                let x = self.untyped(Some(ty), rng);
                let f = s.fix(ty, &x);
                let (cx, cf) = (s.count(ty, &x), s.count(ty, &f));
                (cx != cf || cf != s.count_fixed(ty, &f)).then(|| format!("x={x} count(x)={cx} count(fix(x))={cf}"))
            }
            FixLaw::Measure => {
                let v = self.typed(ty, rng);
                measure_violation(s, ty, &v)
            }
            FixLaw::ConstructAccess => {
                let v = self.typed(ty, rng);
                let variant = match s.shape(ty) {
                    Shape::Sum { .. } => Some(s.kind_index(ty, &v).expect("sum")),
                    _ => None,
                };
                let n = s.field_list(ty, variant).len();
                let fields: Vec<Value> = (0..n).map(|i| s.access_at(ty, variant, i, &v)).collect();
                match s.construct_at(ty, variant, &fields) {
                    Ok(rebuilt) if rebuilt == v => None,
                    Ok(rebuilt) => Some(format!("v={v} rebuilt={rebuilt}")),
                    Err(e) => Some(format!("v={v} error={e}")),
                }
            }
        })
    }

    /// On well-typed arguments, logic and guarded evaluation agree, and
    /// logic evaluation stays within the depth limit.
    pub fn check_mode_agreement(&self, program: &Program, id: FnId, runs: u64, seed: u64) -> LawReport {
        let f = program.get(id);
        self.per_run("mode-agreement", f.name.clone(), runs, seed, |rng| {
            let args: Vec<Value> = f
                .formals
                .iter()
                .map(|x| match x.ty {
                    Some(t) => self.typed(t, rng),
                    None => self.raw.generate(self.size, rng),
                })
                .collect();
            let logic = Machine::new(self.schema, program, Mode::Logic).call(id, args.clone());
            let guarded = Machine::new(self.schema, program, Mode::Guarded).call(id, args.clone());
            match (&logic, &guarded) {
                (Ok(a), Ok(b)) if a == b => None,
                _ => Some(format!(
                    "args=({}) logic={} guarded={}",
                    args.iter().map(Value::to_string).collect::<Vec<_>>().join(" "),
                    show(&logic.map_err(|e| e.to_string())),
                    show(&guarded.map_err(|e| e.to_string()))
                )),
            }
        })
    }

    /// Guarded evaluation on arguments with one ill-typed formal reports a
    /// guard violation naming that formal.
    pub fn check_guard_planted(&self, program: &Program, id: FnId, runs: u64, seed: u64) -> Option<LawReport> {
        let f = program.get(id);
        let typed: Vec<usize> = (0..f.formals.len()).filter(|i| f.formals[*i].ty.is_some()).collect();
        if typed.is_empty() {
            return None;
        }
        Some(self.per_run("guard-violation", f.name.clone(), runs, seed, |rng| {
            let mut args: Vec<Value> = f
                .formals
                .iter()
                .map(|x| match x.ty {
                    Some(t) => self.typed(t, rng),
                    None => self.raw.generate(self.size, rng),
                })
                .collect();
            let target = typed[rng.random_range(0..typed.len())];
            let ty = f.formals[target].ty.expect("typed");
            let bad = (0..64)
                .map(|_| self.untyped(Some(ty), rng))
                .find(|x| !self.schema.recognize(ty, x))
                .unwrap_or_else(|| Value::sym(":planted"));
            if self.schema.recognize(ty, &bad) {
                return None;
            }
            args[target] = bad.clone();
            match Machine::new(self.schema, program, Mode::Guarded).call(id, args) {
                Err(EvalError::Guard { function, formal, .. })
                    if function == f.name && formal == f.formals[target].name =>
                {
                    None
                }
                other => Some(format!(
                    "planted {}={bad} got {}",
                    f.formals[target].name,
                    show(&other.map_err(|e| e.to_string()))
                )),
            }
        }))
    }

    /// Logic-mode results are recognized at the declared return type, on
    /// arbitrary arguments.
    pub fn check_returns(&self, program: &Program, id: FnId, runs: u64, seed: u64) -> Option<LawReport> {
        let f = program.get(id);
        let ret = f.returns?;
        let subj = FnSubject::logic(self.schema, program, id);
        Some(self.per_run("returns", f.name.clone(), runs, seed, |rng| {
            let args = self.draw_args(&subj, rng);
            match subj.apply(&args) {
                Ok(v) if self.schema.recognize(ret, &v) => None,
                r => {
                    let mut d = String::new();
                    let _ = write!(
                        d,
                        "args=({}) result={} expected {}",
                        args.iter().map(Value::to_string).collect::<Vec<_>>().join(" "),
                        show(&r),
                        self.schema.name(ret)
                    );
                    Some(d)
                }
            }
        }))
    }
}

/// Checks that every non-base child of a typed value has a strictly
/// smaller count, and so does the tail of a non-empty list or alist.
pub fn measure_violation(s: &Schema, ty: TypeId, v: &Value) -> Option<String> {
    let parent = s.count_fixed(ty, v);
    let mut children: Vec<(TypeId, Value)> = Vec::new();
    match s.shape(ty) {
        Shape::Base(_) => return None,
        Shape::Prod(fields) => children.extend(fields.iter().zip(v.iter()).map(|(f, x)| (f.ty, x.clone()))),
        Shape::Sum { .. } => {
            let vi = s.kind_index(ty, v).ok()?;
            let (_, rest) = v.as_pair()?;
            children.extend(
                s.field_list(ty, Some(vi))
                    .iter()
                    .zip(rest.iter())
                    .map(|(f, x)| (f.ty, x.clone())),
            );
        }
        Shape::List(e) => {
            if let Some((head, tail)) = v.as_pair() {
                children.push((*e, head.clone()));
                children.push((ty, tail.clone()));
            }
        }
        Shape::Alist(k, x) => {
            if let Some((entry, tail)) = v.as_pair() {
                let (key, val) = entry.as_pair()?;
                children.push((*k, key.clone()));
                children.push((*x, val.clone()));
                children.push((ty, tail.clone()));
            }
        }
        Shape::Option(inner) => {
            if !v.is_nil() {
                children.push((*inner, v.clone()));
            }
        }
    }
    for (cty, c) in children {
        if s.is_base(cty) {
            continue;
        }
        let cc = s.count_fixed(cty, &c);
        if cc >= parent {
            return Some(format!("v={v} count={parent} child={c} count(child)={cc}"));
        }
        if let Some(d) = measure_violation(s, cty, &c) {
            return Some(d);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{parse_events, validate, EventKind};

    const SRC: &str = "
        (deftypes arithmetic-terms
          (deftagsum aterm (:num ((val int))) (:sum ((args atermlist))) (:minus ((arg aterm))))
          (deflist atermlist :elt-type aterm))
        (defines aterm-eval
          (define aterm-eval ((x aterm))
            (aterm-case x :num x.val :sum (terms-total x.args) :minus (- (aterm-eval x.arg))))
          (define terms-total ((x atermlist)) (if (atom x) 0 (+ (aterm-eval (car x)) (terms-total (cdr x))))))
        (define bad-id ((x nat :raw)) x)
        (define nat-small ((x nat)) (< x 2))
        (define nat-atom ((x nat :raw)) (atom? x))
        (define always ((x aterm)) t)";

    fn setup() -> (Schema, Program) {
        let events = parse_events(SRC).unwrap();
        let schema = validate(&events).unwrap();
        let mut program = Program::new();
        for ev in &events {
            if let EventKind::Define(g) = &ev.kind {
                program.add_group(&schema, g).unwrap();
            }
        }
        (schema, program)
    }

    fn subject<'a>(s: &'a Schema, p: &'a Program, name: &str) -> FnSubject<'a> {
        FnSubject::logic(s, p, p.lookup(name).unwrap())
    }

    #[test]
    fn disciplined_functions_pass() {
        let (s, p) = setup();
        let h = Harness::new(&s);
        let eval = subject(&s, &p, "aterm-eval");
        for r in h.deffixequiv(&[&eval], 300, 5) {
            assert!(r.passed(), "{}", r.line());
        }
        assert_eq!(h.deffixequiv(&[&eval], 300, 5).len(), 3);
    }

    #[test]
    fn bad_id_fails_reproducibly() {
        let (s, p) = setup();
        let h = Harness::new(&s);
        let bad = subject(&s, &p, "bad-id");
        let r1 = h.check_congruence(&bad, 0, 100, 11).unwrap();
        let r2 = h.check_congruence(&bad, 0, 100, 11).unwrap();
        assert!(!r1.passed());
        assert_eq!(r1.line(), r2.line());
        let c = h.check_constant_normalization(&bad, 0, &[Value::str("s")], 0).unwrap();
        assert!(
            c.line().contains("c=\"s\" fix(c)=0 f(c)=\"s\" f(fix(c))=0"),
            "{}",
            c.line()
        );
    }

    #[test]
    fn zero_runs_pass_vacuously() {
        let (s, p) = setup();
        let h = Harness::new(&s);
        let bad = subject(&s, &p, "bad-id");
        assert!(h.check_transparency(&bad, 0, 0, 1).unwrap().passed());
        assert!(h.check_congruence(&bad, 0, 0, 1).unwrap().passed());
    }

    #[test]
    fn untyped_positions_are_rejected() {
        let (s, p) = setup();
        let h = Harness::new(&s);
        let eval = subject(&s, &p, "aterm-eval");
        assert!(matches!(
            h.check_transparency(&eval, 1, 1, 1),
            Err(LawError::UntypedArgument(..))
        ));
    }

    #[test]
    fn hypothesis_elimination() {
        let (s, p) = setup();
        let h = Harness::new(&s);
        let small = h
            .check_hypothesis_elimination(&subject(&s, &p, "nat-small"), 3, 100, 1)
            .unwrap();
        assert!(small.passed(), "{}", small.line());
        assert_eq!(small.runs, 17435);
        let always = h
            .check_hypothesis_elimination(&subject(&s, &p, "always"), 3, 100, 1)
            .unwrap();
        assert!(always.passed());
        assert!(always.note.as_deref().unwrap().contains("holds=t"));
        assert_eq!(always.runs, 44114);
        let atom = h
            .check_hypothesis_elimination(&subject(&s, &p, "nat-atom"), 3, 100, 1)
            .unwrap();
        assert!(matches!(atom.outcome, Outcome::Rejected(_)), "{}", atom.line());
    }

    #[test]
    fn enumeration_sizes_and_cap() {
        let (s, _) = setup();
        let mut h = Harness::new(&s);
        let nat = s.lookup("nat").unwrap();
        assert_eq!(h.enumerate(nat, 1).unwrap().len(), 11);
        assert_eq!(h.enumerate(nat, 2).unwrap().len(), 11 + 121);
        h.enumeration_cap = 1000;
        assert!(matches!(
            h.enumerate(nat, 3),
            Err(LawError::EnumerationOverflow { size: 17435, cap: 1000 })
        ));
        assert!(h.enumerate(nat, 40).is_err());
    }

    #[test]
    fn fix_laws_hold_for_the_clique() {
        let (s, _) = setup();
        let h = Harness::new(&s);
        for ty in s.ids() {
            for r in h.fix_laws(ty, 200, 9) {
                assert!(r.passed(), "{}", r.line());
            }
        }
    }

    #[test]
    fn derived_operations_are_congruent() {
        let (s, _) = setup();
        let h = Harness::new(&s);
        let ops: Vec<OpSubject> = DerivedOp::all_for(&s)
            .into_iter()
            .map(|op| OpSubject { schema: &s, op })
            .collect();
        let dyns: Vec<&dyn Subject> = ops.iter().map(|o| o as &dyn Subject).collect();
        for r in h.deffixequiv(&dyns, 100, 2) {
            assert!(r.passed(), "{}", r.line());
        }
    }

    #[test]
    fn mode_agreement_and_planted_guards() {
        let (s, p) = setup();
        let h = Harness::new(&s);
        for (id, _) in p.fns() {
            let r = h.check_mode_agreement(&p, id, 200, 4);
            assert!(r.passed(), "{}", r.line());
            let g = h.check_guard_planted(&p, id, 50, 4).unwrap();
            assert!(g.passed(), "{}", g.line());
        }
    }

    #[test]
    fn measure_violations_are_found() {
        let (s, _) = setup();
        let aterm = s.lookup("aterm").unwrap();
        let v = crate::values::read_value("(:sum ((:minus (:num 1)) (:num 2)))").unwrap();
        assert_eq!(measure_violation(&s, aterm, &v), None);
    }
}
