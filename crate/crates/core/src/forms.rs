// SPDX-License-Identifier: Apache-2.0

//! Helpers for picking apart definition forms read from `.fty` text.

use std::collections::BTreeMap;

use crate::values::Value;

pub(crate) type FormResult<T> = Result<T, String>;

pub(crate) fn items<'a>(v: &'a Value, what: &str) -> FormResult<Vec<&'a Value>> {
    v.proper_list()
        .ok_or_else(|| format!("{what} must be a proper list, got {v}"))
}

pub(crate) fn symbol<'a>(v: &'a Value, what: &str) -> FormResult<&'a str> {
    match v.as_symbol() {
        Some(s) if !s.starts_with(':') => Ok(s),
        _ => Err(format!("{what} must be a symbol, got {v}")),
    }
}

pub(crate) fn keyword<'a>(v: &'a Value, what: &str) -> FormResult<&'a str> {
    match v.as_symbol() {
        Some(s) if s.starts_with(':') && s.len() > 1 => Ok(s),
        _ => Err(format!("{what} must be a keyword, got {v}")),
    }
}

/// Parses `:key value` pairs, rejecting keys outside `allowed` and repeats.
pub(crate) fn options<'a>(rest: &[&'a Value], allowed: &[&str], what: &str) -> FormResult<BTreeMap<String, &'a Value>> {
    let mut out = BTreeMap::new();
    let mut it = rest.iter();
    while let Some(k) = it.next() {
        let key = keyword(k, &format!("option name in {what}"))?;
        if !allowed.contains(&key) {
            return Err(format!("unknown option {key} in {what}"));
        }
        let val = it
            .next()
            .ok_or_else(|| format!("option {key} in {what} is missing its value"))?;
        if out.insert(key.to_string(), *val).is_some() {
            return Err(format!("option {key} given twice in {what}"));
        }
    }
    Ok(out)
}

pub(crate) fn required<'a>(opts: &BTreeMap<String, &'a Value>, key: &str, what: &str) -> FormResult<&'a Value> {
    opts.get(key).copied().ok_or_else(|| format!("{what} requires {key}"))
}

pub(crate) fn natural(v: &Value, what: &str) -> FormResult<u64> {
    v.as_int()
        .and_then(|i| u64::try_from(i).ok())
        .ok_or_else(|| format!("{what} must be a natural number, got {v}"))
}
