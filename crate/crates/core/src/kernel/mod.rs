// SPDX-License-Identifier: Apache-2.0

//! Derived operations for every type in a [`Schema`]: recognizer, fixing
//! function, induced equivalence, count measure, constructors, accessors and
//! kind dispatch.
//!
//! Every operation other than the recognizer treats its input through the
//! type's fixing function, so equivalent inputs always give equal results.

mod gen;

use thiserror::Error;

use crate::schema::{Schema, Shape, TypeId};
use crate::values::Value;

pub use gen::{generate_raw, generate_typed, junkify, seeded_rng, RawGenerator};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("unknown type {0}")]
    UnknownType(String),
    #[error("type {ty} has no variant {tag}")]
    UnknownTag { ty: String, tag: String },
    #[error("type {ty} has no field {field}")]
    UnknownField { ty: String, field: String },
    #[error("type {0} is not a tagged sum")]
    NotASum(String),
    #[error("type {0} is not a product or tagged sum")]
    NotConstructible(String),
    #[error("type {0} is a tagged sum; a tag is required")]
    TagRequired(String),
    #[error("type {0} is not a tagged sum; no tag is expected")]
    TagNotAllowed(String),
    #[error("{what} expects {expected} field values, got {got}")]
    Arity { what: String, expected: usize, got: usize },
}

const RED_ZONE: usize = 64 * 1024;
const STACK_CHUNK: usize = 2 * 1024 * 1024;

fn grow<R>(f: impl FnOnce() -> R) -> R {
    stacker::maybe_grow(RED_ZONE, STACK_CHUNK, f)
}

/// The operations derived for one type.
#[derive(Clone, Copy, Debug)]
pub struct DerivedOps<'a> {
    pub schema: &'a Schema,
    pub ty: TypeId,
}

impl<'a> DerivedOps<'a> {
    pub fn recognize(&self, v: &Value) -> bool {
        self.schema.recognize(self.ty, v)
    }

    pub fn fix(&self, v: &Value) -> Value {
        self.schema.fix(self.ty, v)
    }

    pub fn equiv(&self, a: &Value, b: &Value) -> bool {
        self.schema.equiv(self.ty, a, b)
    }

    pub fn count(&self, v: &Value) -> u64 {
        self.schema.count(self.ty, v)
    }

    pub fn default(&self) -> &'a Value {
        self.schema.default_witness(self.ty)
    }

    pub fn construct(&self, tag: Option<&str>, fields: &[Value]) -> Result<Value, KernelError> {
        self.schema.construct(self.ty, tag, fields)
    }

    pub fn access(&self, tag: Option<&str>, field: &str, v: &Value) -> Result<Value, KernelError> {
        self.schema.access(self.ty, tag, field, v)
    }

    pub fn kind_of(&self, v: &Value) -> Result<Value, KernelError> {
        self.schema.kind_of(self.ty, v)
    }
}

impl Schema {
    /// Looks a type up by name (or recognizer name).
    pub fn type_id(&self, name: &str) -> Result<TypeId, KernelError> {
        self.resolve(name)
            .ok_or_else(|| KernelError::UnknownType(name.to_string()))
    }

    pub fn ops(&self, name: &str) -> Result<DerivedOps<'_>, KernelError> {
        Ok(DerivedOps {
            schema: self,
            ty: self.type_id(name)?,
        })
    }

    /// Index of the variant of sum `ty` tagged `tag`.
    pub fn variant_index(&self, ty: TypeId, tag: &Value) -> Option<usize> {
        match self.shape(ty) {
            Shape::Sum { variants, .. } => variants.iter().position(|v| &v.tag == tag),
            _ => None,
        }
    }

    pub fn recognize(&self, ty: TypeId, v: &Value) -> bool {
        grow(|| match self.shape(ty) {
            Shape::Base(k) => k.recognize(v),
            Shape::Prod(fields) => match v.proper_list_of_len(fields.len()) {
                Some(items) => fields.iter().zip(items).all(|(f, x)| self.recognize(f.ty, x)),
                None => false,
            },
            Shape::Sum { variants, .. } => {
                let Some((tag, rest)) = v.as_pair() else {
                    return false;
                };
                let Some(var) = variants.iter().find(|var| &var.tag == tag) else {
                    return false;
                };
                match rest.proper_list_of_len(var.fields.len()) {
                    Some(items) => var.fields.iter().zip(items).all(|(f, x)| self.recognize(f.ty, x)),
                    None => false,
                }
            }
            Shape::List(elem) => {
                let mut it = v.iter();
                it.by_ref().all(|x| self.recognize(*elem, x)) && it.rest().is_nil()
            }
            Shape::Alist(key, val) => {
                let mut it = v.iter();
                it.by_ref().all(|entry| match entry.as_pair() {
                    Some((k, x)) => self.recognize(*key, k) && self.recognize(*val, x),
                    None => false,
                }) && it.rest().is_nil()
            }
            Shape::Option(inner) => v.is_nil() || self.recognize(*inner, v),
        })
    }

    /// The fixing function: always returns a value of `ty`, and returns `v`
    /// itself when `v` already is one.
    pub fn fix(&self, ty: TypeId, v: &Value) -> Value {
        self.fix_changed(ty, v).unwrap_or_else(|| v.clone())
    }

    /// `None` when `v` is already of type `ty`, else the fixed value.
    fn fix_changed(&self, ty: TypeId, v: &Value) -> Option<Value> {
        grow(|| match self.shape(ty) {
            Shape::Base(k) => (!k.recognize(v)).then(|| k.fix(v)),
            Shape::Prod(fields) => match v.proper_list_of_len(fields.len()) {
                Some(items) => self.fix_spine(fields.iter().map(|f| f.ty), &items).map(Value::list),
                None => Some(self.default_witness(ty).clone()),
            },
            Shape::Sum {
                variants,
                default_variant,
            } => {
                let found = v
                    .as_pair()
                    .and_then(|(tag, rest)| variants.iter().find(|var| &var.tag == tag).map(|var| (var, rest)));
                match found {
                    Some((var, rest)) => match rest.proper_list_of_len(var.fields.len()) {
                        Some(items) => self
                            .fix_spine(var.fields.iter().map(|f| f.ty), &items)
                            .map(|fixed| Value::cons(var.tag.clone(), Value::list(fixed))),
                        None => Some(var.default.clone()),
                    },
                    None => Some(variants[*default_variant].default.clone()),
                }
            }
            Shape::List(elem) => {
                let mut changed = false;
                let mut out = Vec::new();
                let mut it = v.iter();
                for x in it.by_ref() {
                    match self.fix_changed(*elem, x) {
                        Some(f) => {
                            changed = true;
                            out.push(f);
                        }
                        None => out.push(x.clone()),
                    }
                }
                (changed || !it.rest().is_nil()).then(|| Value::list(out))
            }
            Shape::Alist(key, val) => {
                let mut changed = false;
                let mut out = Vec::new();
                let mut it = v.iter();
                for entry in it.by_ref() {
                    let Some((k, x)) = entry.as_pair() else {
                        changed = true;
                        continue;
                    };
                    match (self.fix_changed(*key, k), self.fix_changed(*val, x)) {
                        (None, None) => out.push(entry.clone()),
                        (fk, fx) => {
                            changed = true;
                            out.push(Value::cons(
                                fk.unwrap_or_else(|| k.clone()),
                                fx.unwrap_or_else(|| x.clone()),
                            ));
                        }
                    }
                }
                (changed || !it.rest().is_nil()).then(|| Value::list(out))
            }
            Shape::Option(inner) => {
                if v.is_nil() {
                    None
                } else {
                    self.fix_changed(*inner, v)
                }
            }
        })
    }

    fn fix_spine(&self, tys: impl Iterator<Item = TypeId>, items: &[&Value]) -> Option<Vec<Value>> {
        let fixed: Vec<Option<Value>> = tys.zip(items).map(|(t, x)| self.fix_changed(t, x)).collect();
        if fixed.iter().all(Option::is_none) {
            return None;
        }
        Some(
            fixed
                .into_iter()
                .zip(items)
                .map(|(f, x)| f.unwrap_or_else(|| (*x).clone()))
                .collect(),
        )
    }

    /// The induced equivalence: equal after fixing.
    pub fn equiv(&self, ty: TypeId, a: &Value, b: &Value) -> bool {
        self.fix(ty, a) == self.fix(ty, b)
    }

    /// Structural size of `fix(ty, v)`, used to order recursion.
    ///
    /// Base values count 0; a product or sum node counts 1 plus its fields;
    /// a list or alist counts 1 for the terminator plus, per entry, 1 for the
    /// pair and the counts of its contents; an option counts 0 when `nil`,
    /// else 1 plus its payload.
    pub fn count(&self, ty: TypeId, v: &Value) -> u64 {
        self.count_fixed(ty, &self.fix(ty, v))
    }

    /// [`Schema::count`] for a value already known to be of type `ty`.
    pub fn count_fixed(&self, ty: TypeId, v: &Value) -> u64 {
        grow(|| match self.shape(ty) {
            Shape::Base(_) => 0,
            Shape::Prod(fields) => fields
                .iter()
                .zip(v.iter())
                .fold(1u64, |acc, (f, x)| acc.saturating_add(self.count_fixed(f.ty, x))),
            Shape::Sum { variants, .. } => {
                let (tag, rest) = v.as_pair().expect("sum value is a pair");
                let var = variants.iter().find(|var| &var.tag == tag).expect("known tag");
                var.fields
                    .iter()
                    .zip(rest.iter())
                    .fold(1u64, |acc, (f, x)| acc.saturating_add(self.count_fixed(f.ty, x)))
            }
            Shape::List(elem) => v.iter().fold(1u64, |acc, x| {
                acc.saturating_add(1).saturating_add(self.count_fixed(*elem, x))
            }),
            Shape::Alist(key, val) => v.iter().fold(1u64, |acc, entry| {
                let (k, x) = entry.as_pair().expect("alist entry is a pair");
                acc.saturating_add(1)
                    .saturating_add(self.count_fixed(*key, k))
                    .saturating_add(self.count_fixed(*val, x))
            }),
            Shape::Option(inner) => {
                if v.is_nil() {
                    0
                } else {
                    1u64.saturating_add(self.count_fixed(*inner, v))
                }
            }
        })
    }

    /// Builds a product, or the `tag` variant of a sum, fixing each field at
    /// its declared type first.
    pub fn construct(&self, ty: TypeId, tag: Option<&str>, fields: &[Value]) -> Result<Value, KernelError> {
        let variant = self.variant_for(ty, tag)?;
        self.construct_at(ty, variant, fields)
    }

    /// Resolves an optional tag to a variant index (`None` for products).
    pub fn variant_for(&self, ty: TypeId, tag: Option<&str>) -> Result<Option<usize>, KernelError> {
        let name = || self.name(ty).to_string();
        match (self.shape(ty), tag) {
            (Shape::Prod(_), None) => Ok(None),
            (Shape::Prod(_), Some(_)) => Err(KernelError::TagNotAllowed(name())),
            (Shape::Sum { .. }, None) => Err(KernelError::TagRequired(name())),
            (Shape::Sum { variants, .. }, Some(t)) => {
                let t = t.strip_prefix(':').unwrap_or(t);
                variants
                    .iter()
                    .position(|v| v.tag_name().strip_prefix(':') == Some(t))
                    .map(Some)
                    .ok_or_else(|| KernelError::UnknownTag {
                        ty: name(),
                        tag: format!(":{t}"),
                    })
            }
            _ => Err(KernelError::NotConstructible(name())),
        }
    }

    /// Field types of a product, or of one variant of a sum.
    pub fn field_list(&self, ty: TypeId, variant: Option<usize>) -> &[crate::schema::Field] {
        match (self.shape(ty), variant) {
            (Shape::Prod(fields), _) => fields,
            (Shape::Sum { variants, .. }, Some(i)) => &variants[i].fields,
            _ => &[],
        }
    }

    pub fn construct_at(&self, ty: TypeId, variant: Option<usize>, fields: &[Value]) -> Result<Value, KernelError> {
        let decl = self.field_list(ty, variant);
        if decl.len() != fields.len() {
            return Err(KernelError::Arity {
                what: match variant {
                    Some(i) => format!("{} {}", self.name(ty), self.variant_tag(ty, i)),
                    None => self.name(ty).to_string(),
                },
                expected: decl.len(),
                got: fields.len(),
            });
        }
        let fixed: Vec<Value> = decl.iter().zip(fields).map(|(f, x)| self.fix(f.ty, x)).collect();
        Ok(match variant {
            Some(i) => Value::cons(self.variant_tag(ty, i).clone(), Value::list(fixed)),
            None => Value::list(fixed),
        })
    }

    fn variant_tag(&self, ty: TypeId, i: usize) -> &Value {
        match self.shape(ty) {
            Shape::Sum { variants, .. } => &variants[i].tag,
            _ => unreachable!("variant index on a non-sum"),
        }
    }

    /// Projects `field` out of `fix(ty, v)`. For a sum whose kind differs
    /// from `tag`, projects from that variant's default instead.
    pub fn access(&self, ty: TypeId, tag: Option<&str>, field: &str, v: &Value) -> Result<Value, KernelError> {
        let variant = self.variant_for(ty, tag)?;
        let idx = self
            .field_list(ty, variant)
            .iter()
            .position(|f| f.name == field)
            .ok_or_else(|| KernelError::UnknownField {
                ty: self.name(ty).to_string(),
                field: field.to_string(),
            })?;
        Ok(self.access_at(ty, variant, idx, v))
    }

    pub fn access_at(&self, ty: TypeId, variant: Option<usize>, idx: usize, v: &Value) -> Value {
        let decl = self.field_list(ty, variant);
        let field_ty = decl[idx].ty;
        let spine = match variant {
            None => Some(v),
            Some(i) => v
                .as_pair()
                .filter(|(tag, _)| *tag == self.variant_tag(ty, i))
                .map(|(_, rest)| rest),
        };
        // A matching, well-shaped spine is fixed field-wise; anything else
        // fixes to a witness whose fields are all defaults.
        match spine.and_then(|s| s.proper_list_of_len(decl.len())) {
            Some(items) => self.fix(field_ty, items[idx]),
            None => self.default_witness(field_ty).clone(),
        }
    }

    /// Index of the variant of `fix(ty, v)`.
    pub fn kind_index(&self, ty: TypeId, v: &Value) -> Result<usize, KernelError> {
        match self.shape(ty) {
            Shape::Sum {
                variants,
                default_variant,
            } => Ok(v
                .as_pair()
                .and_then(|(tag, _)| variants.iter().position(|var| &var.tag == tag))
                .unwrap_or(*default_variant)),
            _ => Err(KernelError::NotASum(self.name(ty).to_string())),
        }
    }

    /// The tag of `fix(ty, v)`.
    pub fn kind_of(&self, ty: TypeId, v: &Value) -> Result<Value, KernelError> {
        let i = self.kind_index(ty, v)?;
        Ok(self.variant_tag(ty, i).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{parse_events, validate};
    use crate::values::read_value;

    fn corpus() -> Schema {
        validate(
            &parse_events(
                "(deftypes arithmetic-terms
                   (deftagsum aterm (:num ((val int))) (:sum ((args atermlist))) (:minus ((arg aterm))))
                   (deflist atermlist :elt-type aterm))
                 (defprod student ((name string) (age nat)))
                 (defalist ages :key-type string :val-type nat)
                 (defoption maybe-student student)",
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn rd(s: &str) -> Value {
        read_value(s).unwrap()
    }

    #[test]
    fn recognize_examples() {
        let s = corpus();
        assert!(s.ops("student").unwrap().recognize(&rd("(\"Calista\" 6)")));
        assert!(s.ops("aterm").unwrap().recognize(&rd("(:num 5)")));
        assert!(!s.ops("nat").unwrap().recognize(&rd("-3")));
        assert!(!s.ops("aterm").unwrap().recognize(&rd("(:num 5 6)")));
        assert!(!s.ops("atermlist").unwrap().recognize(&rd("((:num 1) . 7)")));
        assert!(s.ops("ages").unwrap().recognize(&rd("((\"a\" . 1))")));
        assert!(s.ops("maybe-student").unwrap().recognize(&rd("nil")));
    }

    #[test]
    fn fix_examples() {
        let s = corpus();
        assert_eq!(s.ops("string").unwrap().fix(&rd("7")), rd("\"\""));
        assert_eq!(s.ops("aterm").unwrap().fix(&rd("\"junk\"")), rd("(:num 0)"));
        assert_eq!(s.ops("atermlist").unwrap().fix(&rd("((:num 1) . 7)")), rd("((:num 1))"));
        assert_eq!(
            s.ops("aterm").unwrap().fix(&rd("(:minus 1 2)")),
            rd("(:minus (:num 0))")
        );
        assert_eq!(
            s.ops("aterm").unwrap().fix(&rd("(:sum ((:num -1) x))")),
            rd("(:sum ((:num -1) (:num 0)))")
        );
        assert_eq!(
            s.ops("ages").unwrap().fix(&rd("((\"a\" . -1) 5 (x . 2) . 3)")),
            rd("((\"a\" . 0) (\"\" . 2))")
        );
        assert_eq!(s.ops("maybe-student").unwrap().fix(&rd("7")), rd("(\"\" 0)"));
        assert_eq!(s.ops("maybe-student").unwrap().fix(&rd("nil")), rd("nil"));
    }

    #[test]
    fn equiv_examples() {
        let s = corpus();
        let nat = s.ops("nat").unwrap();
        assert!(nat.equiv(&rd("-3"), &rd("\"x\"")));
        assert!(nat.equiv(&rd("5"), &rd("5")));
        assert!(!s.ops("string").unwrap().equiv(&rd("\"a\""), &rd("\"b\"")));
    }

    #[test]
    fn count_examples() {
        let s = corpus();
        let aterm = s.ops("aterm").unwrap();
        assert_eq!(aterm.count(&rd("(:num 5)")), 1);
        assert_eq!(aterm.count(&rd("(:minus (:num 5))")), 2);
        assert_eq!(s.ops("atermlist").unwrap().count(&rd("nil")), 1);
        assert_eq!(s.ops("nat").unwrap().count(&rd("9")), 0);
    }

    #[test]
    fn construct_examples() {
        let s = corpus();
        let student = s.ops("student").unwrap();
        assert_eq!(
            student.construct(None, &[rd("6"), rd("\"Calista\"")]).unwrap(),
            rd("(\"\" 0)")
        );
        assert_eq!(
            student.construct(None, &[rd("\"Calista\""), rd("6")]).unwrap(),
            rd("(\"Calista\" 6)")
        );
        let aterm = s.ops("aterm").unwrap();
        assert_eq!(
            aterm.construct(Some(":minus"), &[rd("(:num 3)")]).unwrap(),
            rd("(:minus (:num 3))")
        );
        assert_eq!(
            aterm.construct(Some("minus"), &[rd("(:num 3)")]).unwrap(),
            rd("(:minus (:num 3))")
        );
        assert!(matches!(
            student.construct(None, &[rd("1")]),
            Err(KernelError::Arity { .. })
        ));
        assert!(matches!(
            aterm.construct(None, &[rd("1")]),
            Err(KernelError::TagRequired(_))
        ));
        assert!(matches!(
            aterm.construct(Some(":times"), &[]),
            Err(KernelError::UnknownTag { .. })
        ));
        assert!(matches!(
            student.construct(Some(":x"), &[]),
            Err(KernelError::TagNotAllowed(_))
        ));
    }

    #[test]
    fn access_examples() {
        let s = corpus();
        let student = s.ops("student").unwrap();
        let made = student.construct(None, &[rd("6"), rd("\"Calista\"")]).unwrap();
        assert_eq!(student.access(None, "name", &made).unwrap(), rd("\"\""));
        let aterm = s.ops("aterm").unwrap();
        assert_eq!(aterm.access(Some(":num"), "val", &rd("(:num 5)")).unwrap(), rd("5"));
        assert_eq!(aterm.access(Some(":num"), "val", &rd("\"junk\"")).unwrap(), rd("0"));
        assert_eq!(
            aterm.access(Some(":minus"), "arg", &rd("(:num 5)")).unwrap(),
            rd("(:num 0)")
        );
        assert!(matches!(
            aterm.access(Some(":num"), "nope", &rd("1")),
            Err(KernelError::UnknownField { .. })
        ));
    }

    #[test]
    fn kind_examples() {
        let s = corpus();
        let aterm = s.ops("aterm").unwrap();
        assert_eq!(aterm.kind_of(&rd("(:sum nil)")).unwrap(), rd(":sum"));
        assert_eq!(aterm.kind_of(&rd("42")).unwrap(), rd(":num"));
        assert_eq!(aterm.kind_of(&rd("(:minus (:num 1))")).unwrap(), rd(":minus"));
        assert!(matches!(
            s.ops("student").unwrap().kind_of(&rd("1")),
            Err(KernelError::NotASum(_))
        ));
    }

    #[test]
    fn unknown_type() {
        assert_eq!(
            corpus().ops("widget").unwrap_err(),
            KernelError::UnknownType("widget".into())
        );
    }

    #[test]
    fn fix_shares_valid_input() {
        let s = corpus();
        let v = rd("(:sum ((:num 1) (:num 2)))");
        let fixed = s.ops("aterm").unwrap().fix(&v);
        match (&v, &fixed) {
            (Value::Pair(a), Value::Pair(b)) => assert!(std::sync::Arc::ptr_eq(a, b)),
            _ => panic!(),
        }
    }

    #[test]
    fn fix_terminates_on_deep_ill_typed_input() {
        let s = corpus();
        let aterm = s.ops("aterm").unwrap();
        let mut v = rd("junk");
        for _ in 0..50_000 {
            v = Value::list([rd(":minus"), v]);
        }
        let fixed = aterm.fix(&v);
        assert!(aterm.recognize(&fixed));
        assert_eq!(aterm.count(&fixed), 50_001);
    }
}
