// SPDX-License-Identifier: Apache-2.0

//! Groundedness of a clique, computed as a least fixed point.
//!
//! Rounds are synchronous: a member grounds in round `k` only from facts
//! established before round `k`, so the outcome does not depend on member
//! order. Lists, alists and options ground immediately with default `nil`.
//! A product grounds once all of its fields have; a sum grounds once some
//! variant has, choosing the first such variant in declaration order.

use super::{Field, Schema, Shape, TypeId, Value};

type Grounding = Option<(u64, Value)>;

fn lookup<'a>(schema: &'a Schema, base: u32, local: &'a [Grounding], id: TypeId) -> Option<(u64, &'a Value)> {
    if id.0 < base {
        let e = schema.entry(id);
        Some((e.rank, &e.default))
    } else {
        local[(id.0 - base) as usize].as_ref().map(|(r, d)| (*r, d))
    }
}

fn try_fields(schema: &Schema, base: u32, local: &[Grounding], fields: &[Field]) -> Option<(u64, Vec<Value>)> {
    let mut rank = 0;
    let mut defaults = Vec::with_capacity(fields.len());
    for f in fields {
        let (r, d) = lookup(schema, base, local, f.ty)?;
        rank = rank.max(r);
        defaults.push(d.clone());
    }
    Some((rank + 1, defaults))
}

/// Returns each member's `(rank, default)` or the indices left ungrounded.
pub(super) fn ground_clique(schema: &Schema, base: u32, shapes: &mut [Shape]) -> Result<Vec<(u64, Value)>, Vec<usize>> {
    let mut state: Vec<Grounding> = vec![None; shapes.len()];
    for (i, shape) in shapes.iter().enumerate() {
        state[i] = match shape {
            Shape::Base(k) => Some((0, k.default_value())),
            Shape::List(_) | Shape::Alist(..) | Shape::Option(_) => Some((0, Value::nil())),
            _ => None,
        };
    }
    loop {
        let before = state.clone();
        let mut changed = false;
        for (i, shape) in shapes.iter_mut().enumerate() {
            if before[i].is_some() {
                continue;
            }
            match shape {
                Shape::Prod(fields) => {
                    if let Some((rank, defaults)) = try_fields(schema, base, &before, fields) {
                        state[i] = Some((rank, Value::list(defaults)));
                        changed = true;
                    }
                }
                Shape::Sum {
                    variants,
                    default_variant,
                } => {
                    let found = variants
                        .iter()
                        .enumerate()
                        .find_map(|(vi, v)| try_fields(schema, base, &before, &v.fields).map(|g| (vi, g)));
                    if let Some((vi, (rank, defaults))) = found {
                        *default_variant = vi;
                        let tag = variants[vi].tag.clone();
                        state[i] = Some((rank, Value::cons(tag, Value::list(defaults))));
                        changed = true;
                    }
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    let ungrounded: Vec<usize> = (0..state.len()).filter(|i| state[*i].is_none()).collect();
    if !ungrounded.is_empty() {
        return Err(ungrounded);
    }
    Ok(state.into_iter().map(|g| g.expect("grounded")).collect())
}

/// Stores `(tag . field-defaults)` on every variant of the new sums.
pub(super) fn fill_variant_defaults(schema: &mut Schema, ids: &[TypeId]) {
    for id in ids {
        let defaults: Option<Vec<Value>> = match &schema.entry(*id).shape {
            Shape::Sum { variants, .. } => Some(
                variants
                    .iter()
                    .map(|v| {
                        let fields = v.fields.iter().map(|f| schema.default_witness(f.ty).clone());
                        Value::cons(v.tag.clone(), Value::list(fields.collect::<Vec<_>>()))
                    })
                    .collect(),
            ),
            _ => None,
        };
        if let (Some(defaults), Shape::Sum { variants, .. }) = (defaults, &mut schema.entries[id.index()].shape) {
            for (v, d) in variants.iter_mut().zip(defaults) {
                v.default = d;
            }
        }
    }
}

fn fields_min(schema: &Schema, fields: &[Field]) -> u64 {
    fields
        .iter()
        .fold(1u64, |acc, f| acc.saturating_add(schema.entry(f.ty).min_count))
}

/// Minimal count measure per new type, by relaxation to a fixed point.
pub(super) fn min_counts(schema: &mut Schema, ids: &[TypeId]) {
    loop {
        let mut changed = false;
        for id in ids {
            let new = match &schema.entry(*id).shape {
                Shape::Base(_) | Shape::Option(_) => 0,
                Shape::List(_) | Shape::Alist(..) => 1,
                Shape::Prod(fields) => fields_min(schema, fields),
                Shape::Sum { variants, .. } => variants
                    .iter()
                    .map(|v| fields_min(schema, &v.fields))
                    .min()
                    .unwrap_or(u64::MAX),
            };
            let entry = &mut schema.entries[id.index()];
            if new < entry.min_count {
                entry.min_count = new;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}
