// SPDX-License-Identifier: Apache-2.0

//! Seeded value generators.
//!
//! `generate_typed` draws values of a schema type whose count measure stays
//! within a size budget: a product spends one unit on itself and shares the
//! rest among its fields; a sum picks uniformly among variants whose minimal
//! count fits the budget, or among the cheapest variants when none does.
//! `generate_raw` draws arbitrary values from the whole universe, and
//! `junkify` produces ill-typed values that fix back to a given typed value.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::schema::{BaseKind, Schema, Shape, TypeId};
use crate::values::Value;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const WORDS: [&str; 8] = ["a", "b", "foo", "bar", "x", "nil", "t", "quux"];

fn random_int<R: Rng>(rng: &mut R) -> BigInt {
    match rng.random_range(0..10) {
        0..=5 => BigInt::from(rng.random_range(-5i64..=20)),
        6..=8 => BigInt::from(rng.random_range(-1000i64..=1000)),
        _ => {
            let big = BigInt::from(rng.random::<u64>()) * BigInt::from(rng.random::<u64>());
            if rng.random_bool(0.5) {
                -big
            } else {
                big
            }
        }
    }
}

fn random_byte<R: Rng>(rng: &mut R) -> u8 {
    match rng.random_range(0..4) {
        0 => rng.random(),
        1 => *b" \"\\;()|#\n".get(rng.random_range(0..9)).unwrap_or(&b' '),
        _ => rng.random_range(b'a'..=b'z'),
    }
}

fn random_string<R: Rng>(rng: &mut R) -> Value {
    let len = rng.random_range(0..5);
    let bytes: Vec<u8> = (0..len).map(|_| random_byte(rng)).collect();
    Value::bytes(&bytes)
}

fn random_base<R: Rng>(kind: BaseKind, rng: &mut R) -> Value {
    match kind {
        BaseKind::Nat => {
            let i = random_int(rng);
            Value::Int(if i < BigInt::from(0) { -i } else { i })
        }
        BaseKind::Int => Value::Int(random_int(rng)),
        BaseKind::String => random_string(rng),
        BaseKind::Bool => Value::bool(rng.random_bool(0.5)),
        BaseKind::Char => Value::Char(random_byte(rng)),
        BaseKind::Sym => {
            let w = WORDS[rng.random_range(0..WORDS.len())];
            if rng.random_bool(0.2) {
                Value::sym(&format!(":{w}"))
            } else {
                Value::sym(w)
            }
        }
    }
}

/// A value of `ty` with count at most `max(budget, min_count(ty))`.
pub fn generate_typed<R: Rng>(schema: &Schema, ty: TypeId, budget: u64, rng: &mut R) -> Value {
    stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || gen_typed(schema, ty, budget, rng))
}

fn gen_fields<R: Rng>(schema: &Schema, fields: &[crate::schema::Field], budget: u64, rng: &mut R) -> Vec<Value> {
    let mins: u64 = fields.iter().map(|f| schema.entry(f.ty).min_count).sum();
    let mut extra = budget.saturating_sub(1).saturating_sub(mins);
    let last = fields.len().saturating_sub(1);
    fields
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let min = schema.entry(f.ty).min_count;
            let share = if i == last || extra == 0 {
                extra
            } else {
                rng.random_range(0..=extra)
            };
            let v = generate_typed(schema, f.ty, min + share, rng);
            extra -= schema.count_fixed(f.ty, &v).saturating_sub(min).min(extra);
            v
        })
        .collect()
}

fn gen_typed<R: Rng>(schema: &Schema, ty: TypeId, budget: u64, rng: &mut R) -> Value {
    match schema.shape(ty) {
        Shape::Base(kind) => random_base(*kind, rng),
        Shape::Prod(fields) => Value::list(gen_fields(schema, fields, budget, rng)),
        Shape::Sum { variants, .. } => {
            let cost = |v: &crate::schema::Variant| {
                v.fields
                    .iter()
                    .fold(1u64, |a, f| a.saturating_add(schema.entry(f.ty).min_count))
            };
            let mut fitting: Vec<usize> = (0..variants.len()).filter(|i| cost(&variants[*i]) <= budget).collect();
            if fitting.is_empty() {
                let cheapest = variants.iter().map(cost).min().unwrap_or(0);
                fitting = (0..variants.len())
                    .filter(|i| cost(&variants[*i]) == cheapest)
                    .collect();
            }
            let var = &variants[fitting[rng.random_range(0..fitting.len())]];
            Value::cons(
                var.tag.clone(),
                Value::list(gen_fields(schema, &var.fields, budget, rng)),
            )
        }
        Shape::List(elem) => {
            let min = schema.entry(*elem).min_count;
            let mut left = budget.saturating_sub(1);
            let mut items = Vec::new();
            while left > min && rng.random_range(0..4) != 0 {
                let b = rng.random_range(min..left);
                let v = generate_typed(schema, *elem, b, rng);
                left = left.saturating_sub(1 + schema.count_fixed(*elem, &v));
                items.push(v);
            }
            Value::list(items)
        }
        Shape::Alist(key, val) => {
            let (kmin, vmin) = (schema.entry(*key).min_count, schema.entry(*val).min_count);
            let mut left = budget.saturating_sub(1);
            let mut items = Vec::new();
            while left > kmin + vmin && rng.random_range(0..4) != 0 {
                let share = left - 1 - kmin - vmin;
                let kb = kmin + rng.random_range(0..=share);
                let k = generate_typed(schema, *key, kb, rng);
                let kc = schema.count_fixed(*key, &k);
                let vb = (left - 1).saturating_sub(kc).max(vmin);
                let v = generate_typed(schema, *val, rng.random_range(vmin..=vb), rng);
                left = left.saturating_sub(1 + kc + schema.count_fixed(*val, &v));
                items.push(Value::cons(k, v));
            }
            Value::list(items)
        }
        Shape::Option(inner) => {
            let min = schema.entry(*inner).min_count;
            if budget > min && rng.random_range(0..4) != 0 {
                generate_typed(schema, *inner, budget - 1, rng)
            } else {
                Value::nil()
            }
        }
    }
}

/// Draws arbitrary values; `budget` bounds the number of pairs.
#[derive(Clone, Debug)]
pub struct RawGenerator {
    symbols: Vec<Value>,
}

impl Default for RawGenerator {
    fn default() -> Self {
        let mut symbols: Vec<Value> = WORDS.iter().map(|w| Value::sym(w)).collect();
        symbols.push(Value::sym(":k"));
        RawGenerator { symbols }
    }
}

impl RawGenerator {
    /// Also draws the schema's variant tags, so raw values often look like
    /// near-misses of sum values.
    pub fn for_schema(schema: &Schema) -> RawGenerator {
        let mut g = RawGenerator::default();
        for id in schema.ids() {
            if let Shape::Sum { variants, .. } = schema.shape(id) {
                for v in variants {
                    if !g.symbols.contains(&v.tag) {
                        g.symbols.push(v.tag.clone());
                    }
                }
            }
        }
        g
    }

    pub fn atom<R: Rng>(&self, rng: &mut R) -> Value {
        match rng.random_range(0..10) {
            0..=2 => Value::Int(random_int(rng)),
            3 => Value::Char(random_byte(rng)),
            4 | 5 => random_string(rng),
            6 => Value::nil(),
            _ => self.symbols[rng.random_range(0..self.symbols.len())].clone(),
        }
    }

    pub fn generate<R: Rng>(&self, budget: u64, rng: &mut R) -> Value {
        if budget == 0 || rng.random_range(0..3) == 0 {
            return self.atom(rng);
        }
        // Mostly proper lists, since every compound type is list-shaped.
        if rng.random_bool(0.6) {
            let mut left = budget;
            let mut items = Vec::new();
            while left > 0 && rng.random_range(0..4) != 0 {
                left -= 1;
                let b = rng.random_range(0..=left);
                let item = self.generate(b, rng);
                left = left.saturating_sub(item.pair_count() as u64);
                items.push(item);
            }
            let tail = if rng.random_range(0..6) == 0 {
                self.atom(rng)
            } else {
                Value::nil()
            };
            return Value::list_with_tail(items, tail);
        }
        let left = budget - 1;
        let b = rng.random_range(0..=left);
        let head = self.generate(b, rng);
        let tail = self.generate(left - b, rng);
        Value::cons(head, tail)
    }
}

/// An arbitrary value with at most `budget` pairs, determined by `seed`.
pub fn generate_raw(budget: u64, seed: u64) -> Value {
    RawGenerator::default().generate(budget, &mut seeded_rng(seed))
}

/// Returns a value `u` with `fix(ty, u) == v`, for `v` of type `ty`, with
/// ill-typed material planted wherever fixing would erase it.
pub fn junkify<R: Rng>(schema: &Schema, ty: TypeId, v: &Value, raw: &RawGenerator, rng: &mut R) -> Value {
    let u = stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || junk(schema, ty, v, raw, rng));
    if schema.fix(ty, &u) == *v {
        u
    } else {
        v.clone()
    }
}

fn junk_atom<R: Rng>(raw: &RawGenerator, rng: &mut R, ok: impl Fn(&Value) -> bool) -> Option<Value> {
    (0..8).map(|_| raw.atom(rng)).find(|a| ok(a))
}

fn junk<R: Rng>(schema: &Schema, ty: TypeId, v: &Value, raw: &RawGenerator, rng: &mut R) -> Value {
    let plant = rng.random_bool(0.5);
    match schema.shape(ty) {
        Shape::Base(kind) => {
            let erasable = match kind {
                BaseKind::Bool => v.is_t(),
                _ => *v == kind.default_value(),
            };
            if erasable && plant {
                let bad = |a: &Value| !kind.recognize(a) && !(*kind == BaseKind::Bool && a.is_nil());
                junk_atom(raw, rng, bad).unwrap_or_else(|| v.clone())
            } else {
                v.clone()
            }
        }
        Shape::Prod(fields) => {
            if v == schema.default_witness(ty) && plant {
                let n = fields.len();
                let wrong = move |a: &Value| a.proper_list_of_len(n).is_none();
                if let Some(a) = junk_atom(raw, rng, wrong) {
                    return a;
                }
            }
            let items: Vec<&Value> = v.iter().collect();
            Value::list(
                fields
                    .iter()
                    .zip(items)
                    .map(|(f, x)| junkify(schema, f.ty, x, raw, rng))
                    .collect::<Vec<_>>(),
            )
        }
        Shape::Sum {
            variants,
            default_variant,
        } => {
            let (tag, rest) = v.as_pair().expect("sum value");
            let var = variants.iter().find(|var| &var.tag == tag).expect("known tag");
            if plant && *v == variants[*default_variant].default {
                // anything without a known tag
                let unknown = |a: &Value| !a.as_pair().is_some_and(|(t, _)| variants.iter().any(|x| &x.tag == t));
                if let Some(a) = junk_atom(raw, rng, unknown) {
                    return a;
                }
            }
            if plant && *v == var.default && rng.random_bool(0.5) {
                let n = var.fields.len();
                let spine = junk_atom(raw, rng, |a| !a.is_nil()).unwrap_or_else(|| Value::int(7));
                let bad = if rng.random_bool(0.5) || n == 0 {
                    spine
                } else {
                    Value::list((0..=n).map(|_| raw.atom(rng)).collect::<Vec<_>>())
                };
                return Value::cons(tag.clone(), bad);
            }
            let fields: Vec<Value> = var
                .fields
                .iter()
                .zip(rest.iter())
                .map(|(f, x)| junkify(schema, f.ty, x, raw, rng))
                .collect();
            Value::cons(tag.clone(), Value::list(fields))
        }
        Shape::List(elem) => {
            let items: Vec<Value> = v.iter().map(|x| junkify(schema, *elem, x, raw, rng)).collect();
            let tail = if plant {
                junk_atom(raw, rng, |a| !a.is_nil()).unwrap_or_else(Value::nil)
            } else {
                Value::nil()
            };
            Value::list_with_tail(items, tail)
        }
        Shape::Alist(key, val) => {
            let mut items = Vec::new();
            for entry in v.iter() {
                if plant && rng.random_bool(0.3) {
                    items.push(raw.atom(rng));
                }
                let (k, x) = entry.as_pair().expect("alist entry");
                items.push(Value::cons(
                    junkify(schema, *key, k, raw, rng),
                    junkify(schema, *val, x, raw, rng),
                ));
            }
            if plant && rng.random_bool(0.3) {
                items.push(raw.atom(rng));
            }
            let tail = if plant && rng.random_bool(0.5) {
                junk_atom(raw, rng, |a| !a.is_nil()).unwrap_or_else(Value::nil)
            } else {
                Value::nil()
            };
            Value::list_with_tail(items, tail)
        }
        Shape::Option(inner) => {
            if v.is_nil() {
                return Value::nil();
            }
            let u = junkify(schema, *inner, v, raw, rng);
            if u.is_nil() {
                v.clone()
            } else {
                u
            }
        }
    }
}
