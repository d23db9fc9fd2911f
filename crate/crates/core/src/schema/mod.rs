// SPDX-License-Identifier: Apache-2.0

//! Type definitions and the validated type registry.
//!
//! A `.fty` file is a sequence of events. Type events (`defprod`,
//! `deftagsum`, `deflist`, `defalist`, `defoption`, `deftypes`,
//! `deffixtype`) are validated in order into a [`Schema`], which records for
//! every type its resolved shape, its grounded rank and its default witness.
//!
//! Representations:
//!
//! * product: proper list of field values in declaration order
//! * tagged sum: `(tag . fields)` where `fields` is as for a product
//! * list: proper list of elements
//! * alist: proper list of `(key . value)` pairs
//! * option: `nil`, or a value of the inner type

mod builtin;
mod ground;
mod parse;

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::values::{Pos, Value};

pub use builtin::BaseKind;
pub use parse::{parse_events, Event, EventKind};

/// Index of a type inside its [`Schema`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub(crate) u32);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantDecl {
    pub tag: String,
    pub fields: Vec<FieldDecl>,
}

/// A type definition as written, before name resolution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeBody {
    Base(BaseKind),
    Prod(Vec<FieldDecl>),
    TagSum(Vec<VariantDecl>),
    List(String),
    Alist(String, String),
    Option(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDef {
    pub name: String,
    pub body: TypeBody,
    pub pos: Pos,
}

/// Types defined together; members may refer to each other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clique {
    pub name: String,
    pub members: Vec<TypeDef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    pub name: String,
    pub ty: TypeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variant {
    /// The keyword symbol, e.g. `:num`.
    pub tag: Value,
    pub fields: Vec<Field>,
    /// `(tag . field-defaults)`.
    pub default: Value,
}

impl Variant {
    pub fn tag_name(&self) -> &str {
        self.tag.as_symbol().unwrap_or_default()
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }
}

/// A resolved type body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Base(BaseKind),
    Prod(Vec<Field>),
    Sum {
        variants: Vec<Variant>,
        /// Variant used for values without a known tag.
        default_variant: usize,
    },
    List(TypeId),
    Alist(TypeId, TypeId),
    Option(TypeId),
}

impl Shape {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Shape::Base(_) => "base",
            Shape::Prod(_) => "prod",
            Shape::Sum { .. } => "tagsum",
            Shape::List(_) => "list",
            Shape::Alist(..) => "alist",
            Shape::Option(_) => "option",
        }
    }

    /// Types referenced directly by this shape, in traversal order.
    pub fn children(&self) -> Vec<TypeId> {
        match self {
            Shape::Base(_) => vec![],
            Shape::Prod(fields) => fields.iter().map(|f| f.ty).collect(),
            Shape::Sum { variants, .. } => variants.iter().flat_map(|v| v.fields.iter().map(|f| f.ty)).collect(),
            Shape::List(e) | Shape::Option(e) => vec![*e],
            Shape::Alist(k, v) => vec![*k, *v],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeEntry {
    pub name: String,
    pub shape: Shape,
    pub rank: u64,
    pub default: Value,
    /// Smallest count measure of any value of the type.
    pub min_count: u64,
    pub builtin: bool,
    pub pos: Option<Pos>,
}

impl TypeEntry {
    pub fn is_base(&self) -> bool {
        matches!(self.shape, Shape::Base(_))
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct SchemaError {
    pub pos: Option<Pos>,
    pub message: String,
}

impl SchemaError {
    pub(crate) fn at(pos: Pos, message: impl Into<String>) -> Self {
        SchemaError {
            pos: Some(pos),
            message: message.into(),
        }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{p}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// The validated registry of types. Append-only while loading; immutable
/// once handed out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    entries: Vec<TypeEntry>,
    by_name: HashMap<String, TypeId>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema::new()
    }
}

impl Schema {
    /// A schema holding only the builtin base types.
    pub fn new() -> Schema {
        let mut s = Schema {
            entries: Vec::new(),
            by_name: HashMap::new(),
        };
        for kind in BaseKind::ALL {
            s.push(TypeEntry {
                name: kind.type_name().to_string(),
                shape: Shape::Base(kind),
                rank: 0,
                default: kind.default_value(),
                min_count: 0,
                builtin: true,
                pos: None,
            });
        }
        s
    }

    fn push(&mut self, entry: TypeEntry) -> TypeId {
        let id = TypeId(self.entries.len() as u32);
        self.by_name.insert(entry.name.clone(), id);
        self.entries.push(entry);
        id
    }

    pub fn lookup(&self, name: &str) -> Option<TypeId> {
        self.by_name.get(name).copied()
    }

    /// Like [`Schema::lookup`], also accepting recognizer names such as
    /// `aterm-p`, `studentp` or `integerp`.
    pub fn resolve(&self, name: &str) -> Option<TypeId> {
        if let Some(id) = self.lookup(name) {
            return Some(id);
        }
        if let Some(kind) = BaseKind::from_predicate(name) {
            return self.lookup(kind.type_name());
        }
        name.strip_suffix("-p")
            .and_then(|n| self.lookup(n))
            .or_else(|| name.strip_suffix('p').and_then(|n| self.lookup(n)))
    }

    pub fn entry(&self, id: TypeId) -> &TypeEntry {
        &self.entries[id.index()]
    }

    pub fn name(&self, id: TypeId) -> &str {
        &self.entries[id.index()].name
    }

    pub fn shape(&self, id: TypeId) -> &Shape {
        &self.entries[id.index()].shape
    }

    pub fn default_witness(&self, id: TypeId) -> &Value {
        &self.entries[id.index()].default
    }

    pub fn is_base(&self, id: TypeId) -> bool {
        self.entry(id).is_base()
    }

    /// All types in definition order, builtins first.
    pub fn ids(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.entries.len() as u32).map(TypeId)
    }

    pub fn user_ids(&self) -> impl Iterator<Item = TypeId> + '_ {
        self.ids().filter(|id| !self.entry(*id).builtin)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Types reachable from `root` through fields, elements, keys, values
    /// and option payloads, including `root` itself.
    pub fn reachable(&self, root: TypeId) -> BTreeSet<TypeId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if seen.insert(id) {
                stack.extend(self.shape(id).children());
            }
        }
        seen
    }

    /// One line per type: name, kind, grounded rank, minimal count, default.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for id in self.ids() {
            let e = self.entry(id);
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                e.name,
                e.shape.kind_name(),
                e.rank,
                e.min_count,
                e.default
            );
        }
        out
    }

    /// Adds one clique, checking names, shapes and groundedness.
    pub fn add_clique(&mut self, clique: &Clique) -> Result<Vec<TypeId>, SchemaError> {
        let mut names = BTreeSet::new();
        for m in &clique.members {
            if self.lookup(&m.name).is_some() {
                return Err(SchemaError::at(m.pos, format!("redefinition of type {}", m.name)));
            }
            if !names.insert(m.name.as_str()) {
                return Err(SchemaError::at(
                    m.pos,
                    format!("type {} defined twice in {}", m.name, clique.name),
                ));
            }
        }
        let base = self.entries.len() as u32;
        let local: HashMap<&str, TypeId> = clique
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| (m.name.as_str(), TypeId(base + i as u32)))
            .collect();
        let resolve = |name: &str, pos: Pos| -> Result<TypeId, SchemaError> {
            if let Some(id) = local.get(name) {
                return Ok(*id);
            }
            let stripped = name
                .strip_suffix("-p")
                .or_else(|| name.strip_suffix('p'))
                .and_then(|n| local.get(n).copied());
            stripped
                .or_else(|| self.resolve(name))
                .ok_or_else(|| SchemaError::at(pos, format!("unresolved type name {name}")))
        };

        let mut shapes = Vec::with_capacity(clique.members.len());
        for m in &clique.members {
            let resolve_fields = |fields: &[FieldDecl], owner: &str| {
                let mut seen = BTreeSet::new();
                fields
                    .iter()
                    .map(|f| {
                        if !seen.insert(f.name.as_str()) {
                            return Err(SchemaError::at(m.pos, format!("duplicate field {} in {owner}", f.name)));
                        }
                        Ok(Field {
                            name: f.name.clone(),
                            ty: resolve(&f.ty, m.pos)?,
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            };
            let shape = match &m.body {
                TypeBody::Base(k) => Shape::Base(*k),
                TypeBody::Prod(fields) => Shape::Prod(resolve_fields(fields, &m.name)?),
                TypeBody::TagSum(variants) => {
                    if variants.is_empty() {
                        return Err(SchemaError::at(m.pos, format!("tagged sum {} has no variants", m.name)));
                    }
                    let mut tags = BTreeSet::new();
                    let mut out = Vec::new();
                    for v in variants {
                        if !tags.insert(v.tag.as_str()) {
                            return Err(SchemaError::at(m.pos, format!("duplicate tag {} in {}", v.tag, m.name)));
                        }
                        out.push(Variant {
                            tag: Value::sym(&v.tag),
                            fields: resolve_fields(&v.fields, &format!("{} {}", m.name, v.tag))?,
                            default: Value::nil(),
                        });
                    }
                    Shape::Sum {
                        variants: out,
                        default_variant: 0,
                    }
                }
                TypeBody::List(e) => Shape::List(resolve(e, m.pos)?),
                TypeBody::Alist(k, v) => Shape::Alist(resolve(k, m.pos)?, resolve(v, m.pos)?),
                TypeBody::Option(t) => Shape::Option(resolve(t, m.pos)?),
            };
            shapes.push(shape);
        }

        // An option over a type that already admits nil cannot tell "none"
        // apart from a payload.
        for (m, shape) in clique.members.iter().zip(&shapes) {
            if let Shape::Option(inner) = shape {
                let inner_shape = if inner.0 >= base {
                    &shapes[(inner.0 - base) as usize]
                } else {
                    self.shape(*inner)
                };
                if self.shape_admits_nil(inner_shape) {
                    return Err(SchemaError::at(
                        m.pos,
                        format!(
                            "option {} is ambiguous: nil is already a valid {}",
                            m.name,
                            name_of(self, &clique.members, base, *inner)
                        ),
                    ));
                }
            }
        }

        let grounded = ground::ground_clique(self, base, &mut shapes).map_err(|ungrounded| {
            let first = &clique.members[ungrounded[0]];
            let names: Vec<&str> = ungrounded.iter().map(|i| clique.members[*i].name.as_str()).collect();
            SchemaError::at(
                first.pos,
                format!(
                    "ungrounded types in {}: {} (no base case)",
                    clique.name,
                    names.join(", ")
                ),
            )
        })?;

        let mut ids = Vec::new();
        for ((m, shape), (rank, default)) in clique.members.iter().zip(shapes).zip(grounded) {
            ids.push(self.push(TypeEntry {
                name: m.name.clone(),
                shape,
                rank,
                default,
                min_count: u64::MAX,
                builtin: false,
                pos: Some(m.pos),
            }));
        }
        ground::fill_variant_defaults(self, &ids);
        ground::min_counts(self, &ids);
        Ok(ids)
    }

    fn shape_admits_nil(&self, shape: &Shape) -> bool {
        match shape {
            Shape::Base(k) => k.admits_nil(),
            Shape::Prod(fields) => fields.is_empty(),
            Shape::Sum { .. } => false,
            Shape::List(_) | Shape::Alist(..) | Shape::Option(_) => true,
        }
    }
}

fn name_of(schema: &Schema, members: &[TypeDef], base: u32, id: TypeId) -> String {
    if id.0 >= base {
        members[(id.0 - base) as usize].name.clone()
    } else {
        schema.name(id).to_string()
    }
}

/// Validates the type events of `events`, in order.
pub fn validate(events: &[Event]) -> Result<Schema, SchemaError> {
    let mut schema = Schema::new();
    for ev in events {
        if let EventKind::Types(clique) = &ev.kind {
            schema.add_clique(clique)?;
        }
    }
    Ok(schema)
}
