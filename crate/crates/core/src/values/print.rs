// SPDX-License-Identifier: Apache-2.0

use super::read::{is_delimiter, is_integer_token};
use super::Value;

/// Canonical text for `v`; [`read_value`](super::read_value) inverts it.
pub fn print_value(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Int(i) => out.push_str(&i.to_string()),
        Value::Char(c) => write_char(out, *c),
        Value::Str(s) => {
            out.push('"');
            for &b in s.iter() {
                if b == b'"' || b == b'\\' {
                    out.push('\\');
                }
                out.push(char::from(b));
            }
            out.push('"');
        }
        Value::Sym(name) => write_symbol(out, name),
        Value::Pair(_) => stacker::maybe_grow(32 * 1024, 1024 * 1024, || write_list(out, v)),
    }
}

fn write_list(out: &mut String, v: &Value) {
    out.push('(');
    let mut it = v.iter();
    let mut first = true;
    for item in it.by_ref() {
        if !first {
            out.push(' ');
        }
        first = false;
        write_value(out, item);
    }
    let rest = it.rest();
    if !rest.is_nil() {
        out.push_str(" . ");
        write_value(out, rest);
    }
    out.push(')');
}

fn write_char(out: &mut String, c: u8) {
    out.push_str("#\\");
    match c {
        0 => out.push_str("Nul"),
        b' ' => out.push_str("Space"),
        b'\n' => out.push_str("Newline"),
        _ => out.push(char::from(c)),
    }
}

fn needs_bars(name: &str) -> bool {
    name == "."
        || name.starts_with('|')
        || name.starts_with('#')
        || is_integer_token(name)
        || name
            .chars()
            .any(|c| is_delimiter(c) || c.is_whitespace() || c.is_control())
}

fn write_symbol(out: &mut String, name: &str) {
    if !needs_bars(name) {
        out.push_str(name);
        return;
    }
    out.push('|');
    for c in name.chars() {
        if c == '|' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('|');
}

#[cfg(test)]
mod tests {
    use super::super::read_value;
    use super::*;

    #[test]
    fn list_notation() {
        assert_eq!(print_value(&Value::list([Value::int(1)])), "(1)");
        assert_eq!(print_value(&Value::nil()), "nil");
        assert_eq!(print_value(&Value::cons(Value::int(1), Value::int(2))), "(1 . 2)");
        let v = read_value("( 1   (2 3) . x )").unwrap();
        assert_eq!(print_value(&v), "(1 (2 3) . x)");
    }

    #[test]
    fn atoms() {
        assert_eq!(print_value(&Value::str("a\"b")), r#""a\"b""#);
        assert_eq!(print_value(&Value::Char(0)), "#\\Nul");
        assert_eq!(print_value(&Value::Char(b'x')), "#\\x");
        assert_eq!(print_value(&Value::sym(":num")), ":num");
    }

    #[test]
    fn awkward_symbols_are_barred() {
        for name in ["-5", ".", "a b", "(", "|x", "#q", "semi;colon", "tab\there"] {
            let text = print_value(&Value::sym(name));
            assert!(text.starts_with('|'), "{name} printed as {text}");
            assert_eq!(read_value(&text).unwrap(), Value::sym(name));
        }
    }

    #[test]
    fn every_character_round_trips() {
        for code in 0..=255u8 {
            let v = Value::list([Value::Char(code), Value::bytes(&[code])]);
            assert_eq!(read_value(&print_value(&v)).unwrap(), v, "code {code}");
        }
    }
}
