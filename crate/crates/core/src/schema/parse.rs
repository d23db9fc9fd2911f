// SPDX-License-Identifier: Apache-2.0

use crate::forms::{self, FormResult};
use crate::lang::{parse_define, parse_defines, GroupSource, LawOptions};
use crate::values::{read_all, Pos, Value};
use crate::visitor::{parse_defvisitor, VisitorDecl};

use super::{BaseKind, Clique, FieldDecl, SchemaError, TypeBody, TypeDef, VariantDecl};

#[derive(Clone, Debug)]
pub struct Event {
    pub pos: Pos,
    pub kind: EventKind,
}

#[derive(Clone, Debug)]
pub enum EventKind {
    /// Any type-defining form; standalone definitions are singleton cliques.
    Types(Clique),
    /// `define` (a singleton group) or `defines`.
    Define(GroupSource),
    Visitor(VisitorDecl),
    /// `(set-fixequiv-hook t)`: check the discipline after every later define.
    FixequivHook {
        enabled: bool,
        options: LawOptions,
    },
    /// `(deffixequiv f)` / `(deffixequiv-mutual group)`.
    Fixequiv {
        target: String,
        mutual: bool,
        options: LawOptions,
    },
}

/// Reads `.fty` text into its events, in source order. Names are not
/// resolved here.
pub fn parse_events(text: &str) -> Result<Vec<Event>, SchemaError> {
    let forms = read_all(text).map_err(|e| SchemaError {
        pos: Some(Pos {
            line: e.line,
            column: e.column,
        }),
        message: format!("parse error: {}", e.reason),
    })?;
    forms
        .iter()
        .map(|f| {
            parse_event(&f.value, f.pos)
                .map(|kind| Event { pos: f.pos, kind })
                .map_err(|m| SchemaError::at(f.pos, m))
        })
        .collect()
}

fn head_of(form: &Value) -> FormResult<(&str, Vec<&Value>)> {
    let items = forms::items(form, "a top-level form")?;
    let (head, rest) = items.split_first().ok_or_else(|| "empty top-level form".to_string())?;
    let head = forms::symbol(head, "form head")?;
    Ok((head, rest.to_vec()))
}

fn parse_event(form: &Value, pos: Pos) -> FormResult<EventKind> {
    let (head, rest) = head_of(form)?;
    match head {
        "defprod" | "deftagsum" | "deflist" | "defalist" | "defoption" | "deffixtype" => {
            let def = parse_typedef(head, &rest, pos)?;
            Ok(EventKind::Types(Clique {
                name: def.name.clone(),
                members: vec![def],
            }))
        }
        "deftypes" => {
            let (name, members) = rest.split_first().ok_or_else(|| "deftypes needs a name".to_string())?;
            let name = forms::symbol(name, "deftypes name")?.to_string();
            if members.is_empty() {
                return Err(format!("deftypes {name} has no members"));
            }
            let members = members
                .iter()
                .map(|m| {
                    let (h, r) = head_of(m)?;
                    if h == "deftypes" || h == "deffixtype" {
                        return Err(format!("{h} cannot appear inside deftypes"));
                    }
                    parse_typedef(h, &r, pos)
                })
                .collect::<FormResult<Vec<_>>>()?;
            Ok(EventKind::Types(Clique { name, members }))
        }
        "define" => Ok(EventKind::Define(GroupSource::single(parse_define(&rest, pos)?))),
        "defines" => Ok(EventKind::Define(parse_defines(&rest, pos)?)),
        "defvisitor" => Ok(EventKind::Visitor(parse_defvisitor(&rest, pos)?)),
        "set-fixequiv-hook" => {
            let (flag, opts) = rest
                .split_first()
                .ok_or_else(|| "set-fixequiv-hook needs t or nil".to_string())?;
            if !flag.is_t() && !flag.is_nil() {
                return Err(format!("set-fixequiv-hook expects t or nil, got {flag}"));
            }
            Ok(EventKind::FixequivHook {
                enabled: flag.is_t(),
                options: LawOptions::parse(opts, head)?,
            })
        }
        "deffixequiv" | "deffixequiv-mutual" => {
            let (target, opts) = rest
                .split_first()
                .ok_or_else(|| format!("{head} needs a function name"))?;
            Ok(EventKind::Fixequiv {
                target: forms::symbol(target, "function name")?.to_string(),
                mutual: head == "deffixequiv-mutual",
                options: LawOptions::parse(opts, head)?,
            })
        }
        other => Err(format!("unknown event {other}")),
    }
}

fn parse_fields(v: &Value, owner: &str) -> FormResult<Vec<FieldDecl>> {
    forms::items(v, &format!("field list of {owner}"))?
        .into_iter()
        .map(|f| {
            let parts = forms::items(f, &format!("field of {owner}"))?;
            match parts.as_slice() {
                [name, ty] => Ok(FieldDecl {
                    name: forms::symbol(name, "field name")?.to_string(),
                    ty: forms::symbol(ty, "field type")?.to_string(),
                }),
                _ => Err(format!("field of {owner} must be (name type), got {f}")),
            }
        })
        .collect()
}

fn parse_typedef(head: &str, rest: &[&Value], pos: Pos) -> FormResult<TypeDef> {
    let (name, args) = rest.split_first().ok_or_else(|| format!("{head} needs a name"))?;
    let name = forms::symbol(name, &format!("{head} name"))?.to_string();
    let what = format!("{head} {name}");
    let body = match head {
        "defprod" => match args {
            [fields] => TypeBody::Prod(parse_fields(fields, &name)?),
            _ => return Err(format!("{what} expects a single field list")),
        },
        "deftagsum" => {
            let variants = args
                .iter()
                .map(|v| {
                    let parts = forms::items(v, &format!("variant of {name}"))?;
                    match parts.as_slice() {
                        [tag, fields] => {
                            let tag = forms::keyword(tag, "variant tag")?;
                            Ok(VariantDecl {
                                tag: tag.to_string(),
                                fields: parse_fields(fields, &format!("{name} {tag}"))?,
                            })
                        }
                        _ => Err(format!("variant of {name} must be (:tag (fields...)), got {v}")),
                    }
                })
                .collect::<FormResult<Vec<_>>>()?;
            TypeBody::TagSum(variants)
        }
        "deflist" => {
            let o = forms::options(args, &[":elt-type"], &what)?;
            TypeBody::List(forms::symbol(forms::required(&o, ":elt-type", &what)?, "element type")?.to_string())
        }
        "defalist" => {
            let o = forms::options(args, &[":key-type", ":val-type"], &what)?;
            TypeBody::Alist(
                forms::symbol(forms::required(&o, ":key-type", &what)?, "key type")?.to_string(),
                forms::symbol(forms::required(&o, ":val-type", &what)?, "value type")?.to_string(),
            )
        }
        "defoption" => match args {
            [inner] => TypeBody::Option(forms::symbol(inner, "option type")?.to_string()),
            _ => return Err(format!("{what} expects exactly one type")),
        },
        "deffixtype" => {
            let o = forms::options(args, &[":pred", ":fix", ":equiv"], &what)?;
            let pred = forms::symbol(forms::required(&o, ":pred", &what)?, "predicate")?;
            let fix = forms::symbol(forms::required(&o, ":fix", &what)?, "fixing function")?;
            let kind = BaseKind::from_predicate(pred).ok_or_else(|| {
                format!("{what}: {pred} is not a builtin recognizer (natp, integerp, stringp, booleanp, characterp, symbolp)")
            })?;
            if BaseKind::from_fixer(fix) != Some(kind) {
                return Err(format!(
                    "{what}: {fix} is not the fixing function for {pred} (expected {})",
                    kind.fixer()
                ));
            }
            TypeBody::Base(kind)
        }
        _ => unreachable!("caller checked the head"),
    };
    Ok(TypeDef { name, body, pos })
}
