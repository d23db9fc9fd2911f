// SPDX-License-Identifier: Apache-2.0

//! Surface syntax of `define` and `defines`.
//!
//! ```text
//! (define name ((x type) (y type :raw) (z :raw))
//!   [:returns type | :returns (name type)] [:measure expr] [:verify-guards flag]
//!   body)
//! (defines group-name (define ...) (define ...) [/// anything])
//! ```

use crate::forms::{self, FormResult};
use crate::values::{Pos, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSource {
    pub name: String,
    /// `None` for untyped formals, which range over the whole universe.
    pub ty: Option<String>,
    /// Suppresses fixing on entry in logic mode.
    pub raw: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnSource {
    pub name: String,
    pub formals: Vec<FormalSource>,
    pub returns: Option<String>,
    pub measure: Option<Value>,
    pub body: Value,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSource {
    pub name: String,
    pub members: Vec<FnSource>,
    pub mutual: bool,
    pub pos: Pos,
}

impl GroupSource {
    pub fn single(f: FnSource) -> GroupSource {
        GroupSource {
            name: f.name.clone(),
            pos: f.pos,
            members: vec![f],
            mutual: false,
        }
    }
}

fn parse_formal(v: &Value, fname: &str) -> FormResult<FormalSource> {
    if v.is_symbol() {
        return Ok(FormalSource {
            name: forms::symbol(v, "formal name")?.to_string(),
            ty: None,
            raw: true,
        });
    }
    let parts = forms::items(v, &format!("formal of {fname}"))?;
    let name = match parts.first() {
        Some(n) => forms::symbol(n, "formal name")?.to_string(),
        None => return Err(format!("empty formal in {fname}")),
    };
    let mut ty = None;
    let mut raw = false;
    for p in &parts[1..] {
        match p.as_symbol() {
            Some(":raw") if !raw => raw = true,
            Some(s) if !s.starts_with(':') && ty.is_none() && !raw => ty = Some(s.to_string()),
            _ => return Err(format!("malformed formal {v} in {fname}")),
        }
    }
    if ty.is_none() && !raw {
        return Err(format!("formal {name} of {fname} needs a type or :raw"));
    }
    let raw = raw || ty.is_none();
    Ok(FormalSource { name, ty, raw })
}

/// Parses the arguments of a `define` form (everything after the head).
pub fn parse_define(rest: &[&Value], pos: Pos) -> FormResult<FnSource> {
    let (name, rest) = rest.split_first().ok_or_else(|| "define needs a name".to_string())?;
    let name = forms::symbol(name, "define name")?.to_string();
    let (formals, rest) = rest
        .split_first()
        .ok_or_else(|| format!("define {name} needs a formals list"))?;
    let formals = forms::items(formals, &format!("formals of {name}"))?
        .into_iter()
        .map(|f| parse_formal(f, &name))
        .collect::<FormResult<Vec<_>>>()?;
    let mut seen = std::collections::BTreeSet::new();
    for f in &formals {
        if !seen.insert(f.name.as_str()) {
            return Err(format!("duplicate formal {} in {name}", f.name));
        }
    }
    let (body, opts) = rest.split_last().ok_or_else(|| format!("define {name} has no body"))?;
    let opts = forms::options(
        opts,
        &[":returns", ":measure", ":verify-guards"],
        &format!("define {name}"),
    )?;
    let returns = match opts.get(":returns") {
        None => None,
        Some(r) if r.is_symbol() => Some(forms::symbol(r, "return type")?.to_string()),
        Some(r) => match forms::items(r, "return declaration")?.as_slice() {
            [_, ty] => Some(forms::symbol(ty, "return type")?.to_string()),
            _ => return Err(format!(":returns of {name} must be a type or (name type)")),
        },
    };
    Ok(FnSource {
        name,
        formals,
        returns,
        measure: opts.get(":measure").map(|m| (*m).clone()),
        body: (*body).clone(),
        pos,
    })
}

/// Parses the arguments of a `defines` form.
pub fn parse_defines(rest: &[&Value], pos: Pos) -> FormResult<GroupSource> {
    let (name, rest) = rest.split_first().ok_or_else(|| "defines needs a name".to_string())?;
    let name = forms::symbol(name, "defines name")?.to_string();
    let mut members = Vec::new();
    for form in rest {
        if form.as_symbol() == Some("///") {
            break;
        }
        let items = forms::items(form, &format!("member of defines {name}"))?;
        match items.split_first() {
            Some((h, r)) if h.as_symbol() == Some("define") => members.push(parse_define(r, pos)?),
            _ => return Err(format!("defines {name} may only contain define forms, got {form}")),
        }
    }
    if members.is_empty() {
        return Err(format!("defines {name} has no members"));
    }
    Ok(GroupSource {
        name,
        members,
        mutual: true,
        pos,
    })
}
