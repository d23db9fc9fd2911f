// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_bigint::BigInt;
use proptest::prelude::*;

use fixkit::kernel::generate_typed;
use fixkit::visitor::reachable_types;
use fixkit::{print_value, read_value, Session, Value};

const CORPUS: [&str; 5] = ["base", "student", "aterm", "stress", "option_alist"];

fn sessions() -> &'static [Session] {
    static CELL: OnceLock<Vec<Session>> = OnceLock::new();
    CELL.get_or_init(|| {
        CORPUS
            .iter()
            .map(|n| {
                let path = format!("{}/corpus/{n}.fty", env!("CARGO_MANIFEST_DIR"));
                Session::load_file(&path).unwrap_or_else(|e| panic!("{n}: {e}"))
            })
            .collect()
    })
}

fn leaf() -> impl Strategy<Value = Value> {
    let syms = [
        "nil", "t", "foo", "x", ":num", ":sum", ":minus", ":var", ":lit", ":add", ":let", ":assign", ":some",
    ];
    prop_oneof![
        any::<i64>().prop_map(Value::int),
        any::<[u8; 12]>().prop_map(|b| Value::int(BigInt::from_signed_bytes_le(&b))),
        any::<u8>().prop_map(Value::Char),
        proptest::collection::vec(any::<u8>(), 0..6).prop_map(|b| Value::bytes(&b)),
        proptest::sample::select(syms.to_vec()).prop_map(Value::sym),
    ]
}

fn value() -> impl Strategy<Value = Value> {
    leaf().prop_recursive(6, 64, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| Value::cons(a, b))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_read_round_trip(v in value()) {
        let text = print_value(&v);
        prop_assert_eq!(read_value(&text).unwrap(), v);
    }

    #[test]
    fn equality_is_an_equivalence(a in value(), b in value()) {
        prop_assert_eq!(&a, &a.clone());
        prop_assert_eq!(a == b, b == a);
        prop_assert_eq!(a == b, print_value(&a) == print_value(&b));
    }

    #[test]
    fn reader_never_panics(text in "\\PC{0,40}") {
        let _ = read_value(&text);
    }

    #[test]
    fn reader_never_panics_on_sexp_soup(text in "[()\"#\\\\ :a-z0-9.;'-]{0,40}") {
        if let Ok(v) = read_value(&text) {
            prop_assert_eq!(read_value(&print_value(&v)).unwrap(), v);
        }
    }

    #[test]
    fn fixing_laws_hold_on_arbitrary_values(x in value(), y in value()) {
        for s in sessions() {
            let k = &s.schema;
            for ty in k.ids() {
                let f = k.fix(ty, &x);
                prop_assert!(k.recognize(ty, &f), "{} fix({}) = {}", k.name(ty), x, f);
                prop_assert_eq!(&k.fix(ty, &f), &f);
                if k.recognize(ty, &x) {
                    prop_assert_eq!(&f, &x);
                }
                prop_assert!(k.equiv(ty, &x, &f));
                prop_assert_eq!(k.equiv(ty, &x, &y), k.equiv(ty, &y, &x));
                prop_assert_eq!(k.equiv(ty, &x, &y), f == k.fix(ty, &y));
                prop_assert!(k.recognize(ty, k.default_witness(ty)));
            }
        }
    }

    #[test]
    fn count_is_invariant_under_fix(x in value()) {
        for s in sessions() {
            let k = &s.schema;
            for ty in k.user_ids() {
                prop_assert_eq!(k.count(ty, &x), k.count(ty, &k.fix(ty, &x)), "{} at {}", k.name(ty), x);
            }
        }
    }

    #[test]
    fn generated_values_are_recognized(seed in any::<u64>(), size in 0u64..32) {
        let mut rng = fixkit::kernel::seeded_rng(seed);
        for s in sessions() {
            for ty in s.schema.ids() {
                let v = generate_typed(&s.schema, ty, size, &mut rng);
                prop_assert!(s.schema.recognize(ty, &v), "{} generated {}", s.schema.name(ty), v);
            }
        }
    }

    #[test]
    fn transform_visitors_return_typed_values(seed in any::<u64>()) {
        let mut rng = fixkit::kernel::seeded_rng(seed);
        let s = &sessions()[2];
        let aterm = s.schema.type_id("aterm").unwrap();
        let v = generate_typed(&s.schema, aterm, 16, &mut rng);
        for name in ["negate-nums", "identity-terms"] {
            let out = s.visit(name, &v).unwrap();
            prop_assert!(s.schema.recognize(aterm, &out));
        }
        prop_assert_eq!(s.visit("identity-terms", &v).unwrap(), v);
    }
}

fn names(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn reachable_type_closures() {
    let aterm = &sessions()[2].schema;
    assert_eq!(
        reachable_types(aterm, "aterm").unwrap(),
        names(&["aterm", "atermlist", "int"])
    );
    assert_eq!(reachable_types(aterm, "nat").unwrap(), names(&["nat"]));
    let student = &sessions()[1].schema;
    assert_eq!(
        reachable_types(student, "student").unwrap(),
        names(&["nat", "string", "student"])
    );
    assert!(reachable_types(student, "nope").is_err());
}

#[test]
fn very_deep_values_are_handled_without_recursion() {
    let n = 1_000_000;
    let deep = (0..n).fold(Value::nil(), |acc, _| Value::cons(acc, Value::nil()));
    let copy = deep.clone();
    assert_eq!(deep, copy);
    drop(copy);
    let long = Value::list((0..n).map(Value::int));
    let s = &sessions()[0];
    let nat = s.schema.type_id("nat").unwrap();
    assert!(!s.schema.recognize(nat, &long));
}
