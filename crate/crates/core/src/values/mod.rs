// SPDX-License-Identifier: Apache-2.0

//! The untyped value universe.
//!
//! Every datum handled by fixkit is a [`Value`]: an integer, an 8-bit
//! character, a string of such characters, a symbol, or a pair. Lists are
//! built from pairs and terminated by the symbol `nil`.
//!
//! Values are immutable and cheaply clonable; sub-structure is shared through
//! reference counting. Equality is structural and is the only equality.

mod print;
mod read;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

pub use print::print_value;
pub use read::{read_all, read_value, Located, Pos, ReadError};

/// An S-expression datum.
#[derive(Clone)]
pub enum Value {
    Int(BigInt),
    /// Character code in `0..=255`.
    Char(u8),
    Str(Arc<[u8]>),
    Sym(Arc<str>),
    Pair(Arc<(Value, Value)>),
}

impl Value {
    pub fn nil() -> Value {
        Value::Sym(Arc::from("nil"))
    }

    pub fn t() -> Value {
        Value::Sym(Arc::from("t"))
    }

    pub fn bool(b: bool) -> Value {
        if b {
            Value::t()
        } else {
            Value::nil()
        }
    }

    pub fn int(i: impl Into<BigInt>) -> Value {
        Value::Int(i.into())
    }

    /// Builds a symbol. Panics on an empty name, which no symbol may have.
    pub fn sym(name: &str) -> Value {
        assert!(!name.is_empty(), "symbol names must be non-empty");
        Value::Sym(Arc::from(name))
    }

    /// Builds a string from text whose characters all have codes below 256.
    ///
    /// Panics if a wider character is present; use [`Value::try_str`] for
    /// untrusted text.
    pub fn str(s: &str) -> Value {
        Value::try_str(s).expect("string characters must have codes 0..=255")
    }

    pub fn try_str(s: &str) -> Option<Value> {
        let bytes = s
            .chars()
            .map(|c| u8::try_from(u32::from(c)).ok())
            .collect::<Option<Vec<u8>>>()?;
        Some(Value::Str(Arc::from(bytes)))
    }

    pub fn bytes(b: &[u8]) -> Value {
        Value::Str(Arc::from(b))
    }

    pub fn cons(head: Value, tail: Value) -> Value {
        Value::Pair(Arc::new((head, tail)))
    }

    /// A proper list of `items`.
    pub fn list<I>(items: I) -> Value
    where
        I: IntoIterator<Item = Value>,
        I::IntoIter: DoubleEndedIterator,
    {
        Value::list_with_tail(items, Value::nil())
    }

    pub fn list_with_tail<I>(items: I, tail: Value) -> Value
    where
        I: IntoIterator<Item = Value>,
        I::IntoIter: DoubleEndedIterator,
    {
        items.into_iter().rev().fold(tail, |acc, item| Value::cons(item, acc))
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Value::Sym(s) if &**s == "nil")
    }

    pub fn is_t(&self) -> bool {
        matches!(self, Value::Sym(s) if &**s == "t")
    }

    /// Anything other than `nil` counts as true.
    pub fn truthy(&self) -> bool {
        !self.is_nil()
    }

    pub fn is_pair(&self) -> bool {
        matches!(self, Value::Pair(_))
    }

    pub fn is_atom(&self) -> bool {
        !self.is_pair()
    }

    pub fn is_int(&self) -> bool {
        matches!(self, Value::Int(_))
    }

    pub fn is_nat(&self) -> bool {
        matches!(self, Value::Int(i) if !i.is_negative())
    }

    pub fn is_symbol(&self) -> bool {
        matches!(self, Value::Sym(_))
    }

    pub fn is_keyword(&self) -> bool {
        matches!(self, Value::Sym(s) if s.starts_with(':'))
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(p) => Some((&p.0, &p.1)),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Value::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Value::Int(i) if i.is_zero())
    }

    /// `car`, with atoms treated as `nil`.
    pub fn head(&self) -> Value {
        match self {
            Value::Pair(p) => p.0.clone(),
            _ => Value::nil(),
        }
    }

    /// `cdr`, with atoms treated as `nil`.
    pub fn tail(&self) -> Value {
        match self {
            Value::Pair(p) => p.1.clone(),
            _ => Value::nil(),
        }
    }

    /// Iterates over the heads of successive pairs. The terminating atom is
    /// available from [`ListIter::rest`] once iteration stops.
    pub fn iter(&self) -> ListIter<'_> {
        ListIter { cur: self }
    }

    /// The elements of a proper list, or `None` for anything else.
    pub fn proper_list(&self) -> Option<Vec<&Value>> {
        let mut it = self.iter();
        let items: Vec<&Value> = it.by_ref().collect();
        it.rest().is_nil().then_some(items)
    }

    /// The elements of a proper list of exactly `n` elements.
    pub fn proper_list_of_len(&self, n: usize) -> Option<Vec<&Value>> {
        let mut it = self.iter();
        let items: Vec<&Value> = it.by_ref().take(n + 1).collect();
        (items.len() == n && it.rest().is_nil()).then_some(items)
    }

    pub fn is_proper_list(&self) -> bool {
        let mut it = self.iter();
        it.by_ref().for_each(drop);
        it.rest().is_nil()
    }

    /// Number of pairs in the value (a crude size).
    pub fn pair_count(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![self];
        while let Some(v) = stack.pop() {
            if let Value::Pair(p) = v {
                n += 1;
                stack.push(&p.0);
                stack.push(&p.1);
            }
        }
        n
    }

    /// Nesting depth with atoms at depth 1.
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(self, 1usize)];
        while let Some((v, d)) = stack.pop() {
            max = max.max(d);
            if let Value::Pair(p) = v {
                stack.push((&p.0, d + 1));
                stack.push((&p.1, d + 1));
            }
        }
        max
    }
}

/// Structural equality.
pub fn values_equal(a: &Value, b: &Value) -> bool {
    a == b
}

pub struct ListIter<'a> {
    cur: &'a Value,
}

impl<'a> ListIter<'a> {
    /// The value remaining after the last pair visited.
    pub fn rest(&self) -> &'a Value {
        self.cur
    }
}

impl<'a> Iterator for ListIter<'a> {
    type Item = &'a Value;

    fn next(&mut self) -> Option<&'a Value> {
        match self.cur {
            Value::Pair(p) => {
                self.cur = &p.1;
                Some(&p.0)
            }
            _ => None,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        let mut stack = vec![(self, other)];
        while let Some((a, b)) = stack.pop() {
            let same = match (a, b) {
                (Value::Int(x), Value::Int(y)) => x == y,
                (Value::Char(x), Value::Char(y)) => x == y,
                (Value::Str(x), Value::Str(y)) => x == y,
                (Value::Sym(x), Value::Sym(y)) => x == y,
                (Value::Pair(x), Value::Pair(y)) => {
                    if !Arc::ptr_eq(x, y) {
                        stack.push((&x.1, &y.1));
                        stack.push((&x.0, &y.0));
                    }
                    true
                }
                _ => false,
            };
            if !same {
                return false;
            }
        }
        true
    }
}

impl Eq for Value {}

// Long lists are right-nested pairs; the default recursive drop would use
// stack proportional to list length.
impl Drop for Value {
    fn drop(&mut self) {
        let mut stack: Vec<Value> = Vec::new();
        take_children(self, &mut stack);
        while let Some(mut v) = stack.pop() {
            take_children(&mut v, &mut stack);
        }
    }
}

/// Moves the children of a uniquely owned pair onto `stack`, leaving
/// atoms in their place.
fn take_children(v: &mut Value, stack: &mut Vec<Value>) {
    if let Value::Pair(p) = v {
        if let Some(cell) = Arc::get_mut(p) {
            for c in [&mut cell.0, &mut cell.1] {
                if matches!(c, Value::Pair(_)) {
                    stack.push(std::mem::replace(c, Value::Char(0)));
                }
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_value(self))
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_value(self))
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Value {
        Value::int(i)
    }
}
