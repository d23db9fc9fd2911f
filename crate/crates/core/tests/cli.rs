// SPDX-License-Identifier: Apache-2.0

use fixkit::cli::run;

fn corpus(name: &str) -> String {
    format!("{}/corpus/{name}.fty", env!("CARGO_MANIFEST_DIR"))
}

fn fixkit(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fixkit").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn stdout_of(args: &[&str]) -> String {
    let (code, out, err) = fixkit(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

#[test]
fn check_summarizes_types() {
    let out = stdout_of(&["check", &corpus("aterm")]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("aterm\ttagsum\t1\t(:num 0)"));
    assert_eq!(lines.next(), Some("atermlist\tlist\t0\tnil"));
    // the file's deffixequiv-mutual request
    assert_eq!(out.lines().filter(|l| l.contains("\tPASS\t")).count(), 6);
    let stress = stdout_of(&["check", &corpus("stress")]);
    assert!(stress.contains("stmt\tprod\t2\t(nil (:var nil) nil)"), "{stress}");
}

#[test]
fn check_errors() {
    let (code, _, err) = fixkit(&["check", &corpus("loop")]);
    assert_eq!(code, 1);
    assert!(err.contains("ungrounded"), "{err}");
    assert!(err.contains("3:1"), "{err}");
    let (code, _, err) = fixkit(&["check", &corpus("maybe-sym")]);
    assert_eq!(code, 1);
    assert!(err.contains("ambiguous"), "{err}");
    let (code, _, _) = fixkit(&["check", &corpus("missing")]);
    assert_eq!(code, 2);
    let (code, _, _) = fixkit(&["check"]);
    assert_eq!(code, 2);
}

#[test]
fn fix_command() {
    assert_eq!(stdout_of(&["fix", &corpus("aterm"), "aterm", "\"junk\""]), "(:num 0)\n");
    assert_eq!(stdout_of(&["fix", &corpus("base"), "string", "7"]), "\"\"\n");
    assert_eq!(stdout_of(&["fix", &corpus("base"), "nat", "5"]), "5\n");
    assert_eq!(stdout_of(&["fix", &corpus("base"), "natural", "-5"]), "0\n");
    assert_eq!(
        stdout_of(&["fix", &corpus("student"), "student", "(6 \"Calista\")"]),
        "(\"\" 0)\n"
    );
    assert_eq!(fixkit(&["fix", &corpus("base"), "nope", "5"]).0, 1);
    assert_eq!(fixkit(&["fix", &corpus("base"), "nat", "(5"]).0, 2);
    assert_eq!(fixkit(&["fix", &corpus("base"), "nat", "5 6"]).0, 2);
}

#[test]
fn fix_reads_values_from_files() {
    let path = std::env::temp_dir().join(format!("fixkit-cli-{}.val", std::process::id()));
    std::fs::write(&path, "(:minus 7) ; trailing comment\n").unwrap();
    let arg = format!("@{}", path.display());
    assert_eq!(
        stdout_of(&["fix", &corpus("aterm"), "aterm", &arg]),
        "(:minus (:num 0))\n"
    );
    std::fs::remove_file(&path).unwrap();
    assert_eq!(fixkit(&["fix", &corpus("aterm"), "aterm", &arg]).0, 2);
}

#[test]
fn eval_command() {
    let file = corpus("aterm");
    let call = "(aterm-eval (:sum ((:num 1) (:num 2))))";
    assert_eq!(stdout_of(&["eval", &file, call]), "3\n");
    assert_eq!(stdout_of(&["eval", &file, call, "--mode", "guarded"]), "3\n");
    assert_eq!(stdout_of(&["eval", &file, "(aterm-eval (:minus (:num 5)))"]), "-5\n");
    let (code, _, err) = fixkit(&["eval", &file, "(aterm-eval \"junk\")", "--mode", "guarded"]);
    assert_eq!(code, 1);
    assert!(
        err.contains("guard violation: aterm-eval x expects aterm, got \"junk\""),
        "{err}"
    );
    assert_eq!(stdout_of(&["eval", &file, "(aterm-eval \"junk\")"]), "0\n");
    assert_eq!(fixkit(&["eval", &file, "(no-such-fn 1)"]).0, 1);
    assert_eq!(fixkit(&["eval", &file, "(aterm-eval 1", "--mode", "guarded"]).0, 2);
    assert_eq!(fixkit(&["eval", &file, "(aterm-eval 1)", "--mode", "fast"]).0, 2);
    let student = corpus("student");
    let made = "(student->name (make-student :name 6 :age \"Calista\"))";
    assert_eq!(stdout_of(&["eval", &student, made]), "\"\"\n");
}

#[test]
fn test_command() {
    let (code, out, _) = fixkit(&[
        "test",
        &corpus("aterm"),
        "--laws",
        "all",
        "--runs",
        "200",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0, "{out}");
    for line in out.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 6, "{line}");
        assert_eq!(cols[3], "PASS", "{line}");
        assert_eq!(cols[4], "7", "{line}");
    }
    let (code, out, _) = fixkit(&["test", &corpus("bad"), "--laws", "fixequiv", "--seed", "7"]);
    assert_eq!(code, 1);
    let fail = out
        .lines()
        .find(|l| l.starts_with("congruence\tbad-id#0\t"))
        .expect("bad-id congruence line");
    assert!(fail.contains("\tFAIL\t7\trun="), "{fail}");
    let (again_code, again, _) = fixkit(&["test", &corpus("bad"), "--laws", "fixequiv", "--seed", "7"]);
    assert_eq!((again_code, again.as_str()), (1, out.as_str()));
}

#[test]
fn zero_runs_pass_vacuously() {
    let (code, out, _) = fixkit(&["test", &corpus("bad"), "--laws", "fixequiv", "--runs", "0"]);
    // constant normalization does not depend on the run count
    assert_eq!(code, 1);
    assert!(out
        .lines()
        .filter(|l| !l.starts_with("constant-normalization"))
        .all(|l| l.contains("\tPASS\t")));
    let (code, _, _) = fixkit(&["test", &corpus("aterm"), "--runs", "0"]);
    assert_eq!(code, 0);
}

#[test]
fn seed_comes_from_the_environment() {
    // FIXKIT_SEED is read by clap; set it only in a child process
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_fixkit"))
        .args(["gen", &corpus("aterm"), "aterm", "-n", "4"])
        .env("FIXKIT_SEED", "1")
        .output()
        .unwrap();
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        stdout_of(&["gen", &corpus("aterm"), "aterm", "-n", "4", "--seed", "1"])
    );
}

#[test]
fn gen_command() {
    let file = corpus("aterm");
    let a = stdout_of(&["gen", &file, "aterm", "-n", "3", "--seed", "1"]);
    assert_eq!(a, stdout_of(&["gen", &file, "aterm", "-n", "3", "--seed", "1"]));
    assert_eq!(a.lines().count(), 3);
    for line in a.lines() {
        assert_eq!(stdout_of(&["fix", &file, "aterm", line]).trim_end(), line);
    }
    let minimal = stdout_of(&["gen", &file, "aterm", "-n", "3", "--size", "0"]);
    assert!(minimal.lines().all(|l| l.starts_with("(:num ")), "{minimal}");
    assert_eq!(fixkit(&["gen", &file, "nope"]).0, 1);
}

#[test]
fn visit_command() {
    let file = corpus("aterm");
    let v = "(:sum ((:num 1) (:minus (:num 2))))";
    assert_eq!(stdout_of(&["visit", &file, "collect-nums", v]), "(1 2)\n");
    assert_eq!(
        stdout_of(&["visit", &file, "negate-nums", v]),
        "(:sum ((:num -1) (:minus (:num -2))))\n"
    );
    assert_eq!(
        stdout_of(&["visit", &file, "identity-terms", "(:sum 7)"]),
        "(:sum nil)\n"
    );
    assert_eq!(stdout_of(&["visit", &file, "collect-nums", "(:sum nil)"]), "nil\n");
    assert_eq!(fixkit(&["visit", &file, "nope", v]).0, 1);
}

#[test]
fn help_and_version_succeed() {
    let (code, out, _) = fixkit(&["--help"]);
    assert_eq!(code, 0);
    for cmd in ["check", "fix", "eval", "test", "gen", "visit"] {
        assert!(out.contains(cmd), "{out}");
    }
    assert_eq!(fixkit(&["--version"]).0, 0);
}
