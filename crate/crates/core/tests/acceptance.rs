// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria, one report line each. Runs without the libtest
//! harness so the lines are always printed.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use fixkit::kernel::generate_typed;
use fixkit::lang::{
    DerivedOp, EvalError, FixLaw, FnSubject, Harness, LawReport, Machine, Mode, OpSubject, Outcome, Subject,
};
use fixkit::schema::TypeId;
use fixkit::{read_value, Session};

const TYPED_CORPUS: [&str; 5] = ["base", "student", "aterm", "stress", "option_alist"];

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(format!("{name}.fty"))
}

fn load(name: &str) -> Session {
    Session::load_file(corpus(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn all_pass(reports: &[LawReport]) -> Result<usize, String> {
    match reports.iter().find(|r| !r.passed()) {
        Some(r) => Err(r.line()),
        None => Ok(reports.len()),
    }
}

fn fix_suite(laws: &[FixLaw], runs: u64, seed: u64) -> Result<(usize, usize), String> {
    let mut checks = 0;
    let mut types = 0;
    for name in TYPED_CORPUS {
        let s = load(name);
        let h = Harness::new(&s.schema);
        for ty in s.schema.ids() {
            types += 1;
            let reports: Vec<LawReport> = laws
                .iter()
                .filter(|l| l.applies(&s.schema, ty))
                .map(|l| h.fix_law(*l, ty, runs, seed))
                .collect();
            checks += all_pass(&reports).map_err(|e| format!("{name}: {e}"))?;
        }
    }
    Ok((types, checks))
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let (types, checks) = fix_suite(&[FixLaw::Recognized, FixLaw::Identity], 10_000, 1)?;
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        return Err(format!("took {elapsed:.1?}"));
    }
    Ok(format!("{types} types, {checks} checks x 10000 runs in {elapsed:.1?}"))
}

fn criterion_2() -> Verdict {
    let laws = [
        FixLaw::EquivReflexive,
        FixLaw::EquivSymmetric,
        FixLaw::EquivTransitive,
        FixLaw::EquivCanonical,
    ];
    let (types, checks) = fix_suite(&laws, 10_000, 2)?;
    Ok(format!("{types} types, {checks} checks x 10000 runs"))
}

fn criterion_3() -> Verdict {
    let mut checks = 0;
    for name in TYPED_CORPUS {
        let s = load(name);
        let h = Harness::new(&s.schema);
        let ops: Vec<OpSubject> = DerivedOp::all_for(&s.schema)
            .into_iter()
            .map(|op| OpSubject { schema: &s.schema, op })
            .collect();
        let dyns: Vec<&dyn Subject> = ops.iter().map(|o| o as &dyn Subject).collect();
        checks += all_pass(&h.deffixequiv(&dyns, 1000, 3)).map_err(|e| format!("{name}: {e}"))?;
    }
    let s = load("aterm");
    let group = s
        .program
        .groups()
        .iter()
        .position(|g| g.name == "aterm-eval")
        .ok_or("aterm-eval group missing")?;
    let reports = s.deffixequiv(group, 1000, 3);
    if reports.len() != 6 {
        return Err(format!("expected 6 aterm-eval group reports, got {}", reports.len()));
    }
    checks += all_pass(&reports)?;

    let bad = load("bad");
    let h = Harness::new(&bad.schema);
    let subj = FnSubject::logic(
        &bad.schema,
        &bad.program,
        bad.program.lookup("bad-id").ok_or("no bad-id")?,
    );
    let seed = 3;
    let first = h.check_congruence(&subj, 0, 1000, seed).map_err(|e| e.to_string())?;
    let again = h.check_congruence(&subj, 0, 1000, seed).map_err(|e| e.to_string())?;
    let Outcome::Counterexample { run, .. } = &first.outcome else {
        return Err(format!("bad-id did not fail: {}", first.line()));
    };
    if first.line() != again.line() {
        return Err("bad-id counterexample is not reproducible".into());
    }
    // replaying only the failing run's stream reproduces the same failure
    let replay = h.check_congruence(&subj, 0, run + 1, seed).map_err(|e| e.to_string())?;
    if replay.outcome != first.outcome {
        return Err("replaying the failing run differs".into());
    }
    Ok(format!(
        "{checks} passing checks; bad-id fails at run {run} with seed {seed}"
    ))
}

fn criterion_4() -> Verdict {
    let s = load("aterm");
    let h = Harness::new(&s.schema);
    let preds = s.predicates();
    let mut over: BTreeSet<String> = BTreeSet::new();
    let mut lines = Vec::new();
    for id in &preds {
        let subj = FnSubject::logic(&s.schema, &s.program, *id);
        let r = h
            .check_hypothesis_elimination(&subj, 3, 1000, 4)
            .map_err(|e| e.to_string())?;
        if !r.passed() {
            return Err(r.line());
        }
        if r.runs <= 10_000 {
            return Err(format!("{} enumerated only {}", r.subject, r.runs));
        }
        let ty = s.program.get(*id).formals[0].ty.expect("typed");
        over.insert(s.schema.name(ty).to_string());
        lines.push(format!("{}={}", r.subject, r.runs));
    }
    if preds.len() < 3 || !over.contains("nat") || !over.contains("aterm") {
        return Err(format!("not enough predicates: {lines:?}"));
    }
    let bad = load("bad");
    let h = Harness::new(&bad.schema);
    let subj = FnSubject::logic(
        &bad.schema,
        &bad.program,
        bad.program.lookup("nat-atom").ok_or("no nat-atom")?,
    );
    let r = h
        .check_hypothesis_elimination(&subj, 3, 1000, 4)
        .map_err(|e| e.to_string())?;
    if !matches!(r.outcome, Outcome::Rejected(_)) {
        return Err(format!("nat-atom was not rejected: {}", r.line()));
    }
    Ok(format!("{}; nat-atom rejected", lines.join(" ")))
}

fn criterion_5() -> Verdict {
    let s = load("aterm");
    let cases = [
        ("aterm", "(aterm-eval (:sum ((:num 1) (:num 2))))", "3"),
        ("aterm", "(aterm-eval (:minus (:num 5)))", "-5"),
        (
            "student",
            "(student->name (make-student :name 6 :age \"Calista\"))",
            "\"\"",
        ),
    ];
    let student = load("student");
    let mut got = Vec::new();
    for (file, call, want) in cases {
        let session = if file == "aterm" { &s } else { &student };
        let v = session.eval_text(call, Mode::Logic).map_err(|e| e.to_string())?;
        if v.to_string() != want {
            return Err(format!("{call} gave {v}, expected {want}"));
        }
        got.push(format!("{call} = {v}"));
    }
    Ok(got.join("; "))
}

fn recursive_types(s: &Session) -> Vec<TypeId> {
    s.schema
        .user_ids()
        .filter(|t| {
            s.schema
                .shape(*t)
                .children()
                .iter()
                .any(|c| s.schema.reachable(*c).contains(t))
        })
        .collect()
}

fn criterion_6() -> Verdict {
    let mut types = Vec::new();
    let mut calls = 0u64;
    for name in TYPED_CORPUS {
        let s = load(name);
        let h = Harness::new(&s.schema);
        for ty in recursive_types(&s) {
            let r = h.fix_law(FixLaw::Measure, ty, 1000, 6);
            if !r.passed() {
                return Err(r.line());
            }
            types.push(s.schema.name(ty).to_string());
        }
        for (id, f) in s.program.fns() {
            for run in 0..1000 {
                let mut rng = Harness::run_rng(6, run);
                let args = f
                    .formals
                    .iter()
                    .map(|x| generate_typed(&s.schema, x.ty.expect("corpus formals are typed"), 24, &mut rng))
                    .collect();
                match Machine::new(&s.schema, &s.program, Mode::Logic).call(id, args) {
                    Err(e @ EvalError::Depth(_)) => return Err(format!("{}: {e}", f.name)),
                    _ => calls += 1,
                }
            }
        }
    }
    Ok(format!(
        "recursive types {}; {calls} logic-mode calls within the depth limit",
        types.join(",")
    ))
}

fn criterion_7() -> Verdict {
    let mut fns = 0;
    let mut planted = 0;
    for name in TYPED_CORPUS.iter().chain(&["bad"]) {
        let s = load(name);
        let h = Harness::new(&s.schema);
        for (id, _) in s.program.fns() {
            let r = h.check_mode_agreement(&s.program, id, 1000, 7);
            if !r.passed() {
                return Err(r.line());
            }
            fns += 1;
            if let Some(g) = h.check_guard_planted(&s.program, id, 100, 7) {
                if !g.passed() {
                    return Err(g.line());
                }
                planted += g.runs;
            }
        }
    }
    Ok(format!(
        "{fns} functions agree over 1000 typed inputs; {planted} planted violations named"
    ))
}

fn criterion_8() -> Verdict {
    let mut checks = 0;
    for name in ["aterm", "stress"] {
        let s = load(name);
        for spec in &s.visitors {
            checks += all_pass(&fixkit::visitor::visitor_laws(&s.schema, &s.program, spec, 1000, 8))?;
        }
    }
    let s = load("aterm");
    let input = read_value("(:sum ((:num 1) (:minus (:num 2))))").map_err(|e| e.to_string())?;
    let collected = s.visit("collect-nums", &input).map_err(|e| e.to_string())?.to_string();
    let negated = s.visit("negate-nums", &input).map_err(|e| e.to_string())?.to_string();
    if collected != "(1 2)" {
        return Err(format!("collect gave {collected}"));
    }
    if negated != "(:sum ((:num -1) (:minus (:num -2))))" {
        return Err(format!("transform gave {negated}"));
    }
    Ok(format!("{checks} visitor checks; goldens {collected} and {negated}"))
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fixkit"))
        .args(args)
        .env_remove("FIXKIT_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}", out.status));
    }
    Ok(out.stdout)
}

fn criterion_9() -> Verdict {
    let aterm = corpus("aterm");
    let file = aterm.to_str().ok_or("non-UTF-8 corpus path")?;
    let test = ["test", file, "--seed", "7"];
    let gen = ["gen", file, "aterm", "-n", "50", "--seed", "1"];
    let (t1, t2) = (cli(&test)?, cli(&test)?);
    let (g1, g2) = (cli(&gen)?, cli(&gen)?);
    if t1 != t2 {
        return Err("test reports differ".into());
    }
    if g1 != g2 {
        return Err("generated values differ".into());
    }
    Ok(format!(
        "test report {} bytes, gen output {} bytes, both byte-identical",
        t1.len(),
        g1.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 fixing-function laws", criterion_1),
        ("2 equivalence laws", criterion_2),
        ("3 congruence suite", criterion_3),
        ("4 hypothesis elimination", criterion_4),
        ("5 worked examples", criterion_5),
        ("6 measure suite", criterion_6),
        ("7 mode agreement", criterion_7),
        ("8 visitor suite", criterion_8),
        ("9 determinism", criterion_9),
    ];
    // sequential, so criterion 1's timing is not shared with the others
    let results: Vec<(&str, Verdict)> = criteria.iter().map(|(name, f)| (*name, f())).collect();
    let mut failed = 0;
    for (name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
