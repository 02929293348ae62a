//! Finite algebras given by operation tables.
//!
//! The carrier of an algebra of size `n` is `{0, .., n-1}`. An operation of
//! arity `k` is stored as a flat row-major table of `n^k` entries: the value
//! at arguments `(a_0, .., a_{k-1})` lives at index `sum a_i * n^(k-1-i)`.

use std::fmt;

use crate::congruence::Congruence;
use crate::error::{Error, Result};

/// A named operation table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operation {
    name: String,
    arity: usize,
    table: Vec<usize>,
}

impl Operation {
    /// Builds an operation, validating the table against a carrier of `size` elements.
    pub fn new(name: impl Into<String>, arity: usize, table: Vec<usize>, size: usize) -> Result<Self> {
        let name = name.into();
        let expected = table_len(size, arity)?;
        if table.len() != expected {
            return Err(Error::InvalidAlgebra(format!(
                "operation `{name}` of arity {arity} needs {expected} entries, got {}",
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&v| v >= size) {
            return Err(Error::InvalidAlgebra(format!(
                "operation `{name}` has entry {bad} outside carrier of size {size}"
            )));
        }
        Ok(Operation { name, arity, table })
    }

    /// Tabulates `f` over every argument tuple.
    pub fn from_fn(
        name: impl Into<String>,
        arity: usize,
        size: usize,
        mut f: impl FnMut(&[usize]) -> usize,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(table_len(size, arity)?);
        for_each_tuple(size, arity, |args| table.push(f(args)));
        Operation::new(name, arity, table, size)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }
}

/// Number of table entries for an operation, guarding against overflow.
pub(crate) fn table_len(size: usize, arity: usize) -> Result<usize> {
    u32::try_from(arity)
        .ok()
        .and_then(|a| size.checked_pow(a))
        .filter(|&len| len <= 1 << 28)
        .ok_or_else(|| Error::InvalidAlgebra(format!("table for size {size}, arity {arity} is too large")))
}

/// Row-major index of an argument tuple.
#[inline]
pub(crate) fn tuple_index(size: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &a| acc * size + a)
}

/// Calls `f` on every tuple of length `arity` over `{0..size}` in row-major order.
pub fn for_each_tuple(size: usize, arity: usize, mut f: impl FnMut(&[usize])) {
    let mut args = vec![0usize; arity];
    if arity > 0 && size == 0 {
        return;
    }
    loop {
        f(&args);
        if !advance(&mut args, |_| size) {
            return;
        }
    }
}

/// Odometer step with per-position bounds; returns false after the last tuple.
fn advance(args: &mut [usize], bound: impl Fn(usize) -> usize) -> bool {
    for pos in (0..args.len()).rev() {
        args[pos] += 1;
        if args[pos] < bound(pos) {
            return true;
        }
        args[pos] = 0;
    }
    false
}

/// Enumerates the index tuples over `0..len` that contain at least one index
/// in `old..len`, each exactly once. Used by semi-naive closure loops.
pub(crate) fn for_each_new_tuple(old: usize, len: usize, arity: usize, mut f: impl FnMut(&[usize])) {
    if old >= len || arity == 0 {
        return;
    }
    let mut args = vec![0usize; arity];
    for first_new in 0..arity {
        // positions before `first_new` are old, `first_new` is new, the rest are free
        let lower = |pos: usize| if pos == first_new { old } else { 0 };
        let upper = |pos: usize| {
            if pos < first_new {
                old
            } else {
                len
            }
        };
        if (0..first_new).any(|_| old == 0) {
            continue;
        }
        for (pos, slot) in args.iter_mut().enumerate() {
            *slot = lower(pos);
        }
        'tuples: loop {
            f(&args);
            for pos in (0..arity).rev() {
                args[pos] += 1;
                if args[pos] < upper(pos) {
                    continue 'tuples;
                }
                args[pos] = lower(pos);
            }
            break;
        }
    }
}

/// A finite algebra: a carrier `{0..size}` plus named operation tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAlgebra {
    size: usize,
    ops: Vec<Operation>,
}

impl FiniteAlgebra {
    pub fn new(size: usize, ops: Vec<Operation>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidAlgebra("carrier must be non-empty".into()));
        }
        for (i, op) in ops.iter().enumerate() {
            if ops[..i].iter().any(|o| o.name == op.name) {
                return Err(Error::InvalidAlgebra(format!("duplicate operation name `{}`", op.name)));
            }
            if op.table.len() != table_len(size, op.arity)? || op.table.iter().any(|&v| v >= size) {
                return Err(Error::InvalidAlgebra(format!(
                    "operation `{}` does not fit carrier of size {size}",
                    op.name
                )));
            }
        }
        Ok(FiniteAlgebra { size, ops })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }

    /// Ordered `(name, arity)` list.
    pub fn signature(&self) -> Vec<(&str, usize)> {
        self.ops.iter().map(|o| (o.name.as_str(), o.arity)).collect()
    }

    pub fn same_signature(&self, other: &FiniteAlgebra) -> bool {
        self.signature() == other.signature()
    }

    #[inline]
    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        let op = &self.ops[op];
        debug_assert_eq!(op.arity, args.len());
        op.table[tuple_index(self.size, args)]
    }

    /// The algebra with the same operations on a one-element carrier.
    pub fn trivial_like(&self) -> FiniteAlgebra {
        let ops = self
            .ops
            .iter()
            .map(|o| Operation {
                name: o.name.clone(),
                arity: o.arity,
                table: vec![0],
            })
            .collect();
        FiniteAlgebra { size: 1, ops }
    }

    /// Whether `set` (a membership mask) is closed under every operation.
    pub fn is_closed(&self, set: &[bool]) -> bool {
        let members: Vec<usize> = (0..self.size).filter(|&a| set[a]).collect();
        self.ops.iter().enumerate().all(|(oi, op)| {
            let mut closed = true;
            for_each_tuple(members.len(), op.arity, |idx| {
                if closed {
                    let args: Vec<usize> = idx.iter().map(|&i| members[i]).collect();
                    closed = set[self.apply(oi, &args)];
                }
            });
            closed
        })
    }
}

impl fmt::Display for FiniteAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "algebra of size {} with ops [", self.size)?;
        for (i, op) in self.ops.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}/{}", op.name, op.arity)?;
        }
        write!(f, "]")
    }
}

/// A map between carriers, optionally certified as a homomorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementMap {
    values: Vec<usize>,
    target_size: usize,
    homomorphism: bool,
}

impl ElementMap {
    /// An uncertified map; `values[a]` is the image of `a`.
    pub fn new(values: Vec<usize>, target_size: usize) -> Result<Self> {
        if let Some(bad) = values.iter().find(|&&v| v >= target_size) {
            return Err(Error::InvalidArgument(format!("image {bad} outside target of size {target_size}")));
        }
        Ok(ElementMap {
            values,
            target_size,
            homomorphism: false,
        })
    }

    /// A map checked exhaustively to commute with every operation.
    pub fn homomorphism(source: &FiniteAlgebra, target: &FiniteAlgebra, values: Vec<usize>) -> Result<Self> {
        if values.len() != source.size() {
            return Err(Error::DimensionMismatch(format!(
                "map has {} values for a source of size {}",
                values.len(),
                source.size()
            )));
        }
        if !source.same_signature(target) {
            return Err(signature_error(source, target));
        }
        let mut map = ElementMap::new(values, target.size())?;
        if let Some(msg) = map.homomorphism_violation(source, target) {
            return Err(Error::NotHomomorphism(msg));
        }
        map.homomorphism = true;
        Ok(map)
    }

    fn homomorphism_violation(&self, source: &FiniteAlgebra, target: &FiniteAlgebra) -> Option<String> {
        let mut mapped = Vec::new();
        for (oi, op) in source.ops().iter().enumerate() {
            let mut bad = None;
            for_each_tuple(source.size(), op.arity(), |args| {
                if bad.is_some() {
                    return;
                }
                mapped.clear();
                mapped.extend(args.iter().map(|&a| self.values[a]));
                let lhs = self.values[source.apply(oi, args)];
                let rhs = target.apply(oi, &mapped);
                if lhs != rhs {
                    bad = Some(format!("{}{:?} maps to {lhs} but {}{:?} = {rhs}", op.name(), args, op.name(), mapped));
                }
            });
            if bad.is_some() {
                return bad;
            }
        }
        None
    }

    pub fn apply(&self, a: usize) -> usize {
        self.values[a]
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn source_size(&self) -> usize {
        self.values.len()
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }

    pub fn is_homomorphism(&self) -> bool {
        self.homomorphism
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target_size];
        for &v in &self.values {
            hit[v] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn is_injective(&self) -> bool {
        let mut hit = vec![false; self.target_size];
        self.values.iter().all(|&v| !std::mem::replace(&mut hit[v], true))
    }
}

fn signature_error(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Error {
    let show = |alg: &FiniteAlgebra| {
        alg.signature()
            .iter()
            .map(|(n, k)| format!("{n}/{k}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    Error::SignatureMismatch {
        left: format!("[{}]", show(a)),
        right: format!("[{}]", show(b)),
    }
}

/// The direct product `A x B`, with the pair `(a, b)` encoded as `a * |B| + b`,
/// together with both projections.
pub fn product(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Result<(FiniteAlgebra, ElementMap, ElementMap)> {
    if !a.same_signature(b) {
        return Err(signature_error(a, b));
    }
    let nb = b.size();
    let size = a.size() * nb;
    let mut ops = Vec::with_capacity(a.ops().len());
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (oi, op) in a.ops().iter().enumerate() {
        let built = Operation::from_fn(op.name(), op.arity(), size, |args| {
            left.clear();
            right.clear();
            for &p in args {
                left.push(p / nb);
                right.push(p % nb);
            }
            a.apply(oi, &left) * nb + b.apply(oi, &right)
        })?;
        ops.push(built);
    }
    let prod = FiniteAlgebra::new(size, ops)?;
    let p1 = ElementMap::homomorphism(&prod, a, (0..size).map(|p| p / nb).collect())?;
    let p2 = ElementMap::homomorphism(&prod, b, (0..size).map(|p| p % nb).collect())?;
    Ok((prod, p1, p2))
}

/// `A^k` for `k >= 1`, built by repeated products.
pub fn power(a: &FiniteAlgebra, k: usize) -> Result<FiniteAlgebra> {
    if k == 0 {
        return Err(Error::InvalidArgument("power exponent must be at least 1".into()));
    }
    let mut acc = a.clone();
    for _ in 1..k {
        acc = product(&acc, a)?.0;
    }
    Ok(acc)
}

/// The quotient `A/θ` on block representatives (each block is represented by
/// its least element; blocks are numbered in increasing order of those
/// representatives) and the canonical surjection.
pub fn quotient(a: &FiniteAlgebra, theta: &Congruence) -> Result<(FiniteAlgebra, ElementMap)> {
    if theta.size() != a.size() {
        return Err(Error::DimensionMismatch(format!(
            "congruence on {} elements for algebra of size {}",
            theta.size(),
            a.size()
        )));
    }
    if let Some(msg) = theta.compatibility_violation(a) {
        return Err(Error::NotCompatible(msg));
    }
    let reps = theta.representatives();
    let mut index = vec![usize::MAX; a.size()];
    for (i, &r) in reps.iter().enumerate() {
        index[r] = i;
    }
    let class = |x: usize| index[theta.representative(x)];
    let size = reps.len();
    let mut ops = Vec::with_capacity(a.ops().len());
    let mut lifted = Vec::new();
    for (oi, op) in a.ops().iter().enumerate() {
        let built = Operation::from_fn(op.name(), op.arity(), size, |args| {
            lifted.clear();
            lifted.extend(args.iter().map(|&i| reps[i]));
            class(a.apply(oi, &lifted))
        })?;
        ops.push(built);
    }
    let q = FiniteAlgebra::new(size, ops)?;
    let map = ElementMap::homomorphism(a, &q, (0..a.size()).map(class).collect())?;
    Ok((q, map))
}

/// The least subuniverse containing `seeds` (and every nullary constant), as
/// a sorted list of elements.
pub fn generate_subuniverse(a: &FiniteAlgebra, seeds: &[usize]) -> Result<Vec<usize>> {
    let mut member = vec![false; a.size()];
    let mut members = Vec::new();
    fn add(x: usize, member: &mut [bool], members: &mut Vec<usize>) {
        if !member[x] {
            member[x] = true;
            members.push(x);
        }
    }
    for &s in seeds {
        if s >= a.size() {
            return Err(Error::InvalidArgument(format!("seed {s} outside carrier of size {}", a.size())));
        }
        add(s, &mut member, &mut members);
    }
    for (oi, op) in a.ops().iter().enumerate() {
        if op.arity() == 0 {
            add(a.apply(oi, &[]), &mut member, &mut members);
        }
    }
    let mut old = 0;
    let mut args = Vec::new();
    while old < members.len() {
        let len = members.len();
        for (oi, op) in a.ops().iter().enumerate() {
            let mut found = Vec::new();
            for_each_new_tuple(old, len, op.arity(), |idx| {
                args.clear();
                args.extend(idx.iter().map(|&i| members[i]));
                found.push(a.apply(oi, &args));
            });
            for x in found {
                add(x, &mut member, &mut members);
            }
        }
        old = len;
    }
    members.sort_unstable();
    Ok(members)
}

/// The subalgebra on a closed subset, with elements renumbered in increasing
/// order, and the inclusion map.
pub fn subalgebra(a: &FiniteAlgebra, universe: &[usize]) -> Result<(FiniteAlgebra, ElementMap)> {
    let mut sorted = universe.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() {
        return Err(Error::InvalidArgument("empty subuniverse".into()));
    }
    let mut index = vec![usize::MAX; a.size()];
    for (i, &x) in sorted.iter().enumerate() {
        if x >= a.size() {
            return Err(Error::InvalidArgument(format!("element {x} outside carrier")));
        }
        index[x] = i;
    }
    let size = sorted.len();
    let mut ops = Vec::with_capacity(a.ops().len());
    let mut lifted = Vec::new();
    let mut escaped = None;
    for (oi, op) in a.ops().iter().enumerate() {
        let built = Operation::from_fn(op.name(), op.arity(), size, |args| {
            lifted.clear();
            lifted.extend(args.iter().map(|&i| sorted[i]));
            let v = a.apply(oi, &lifted);
            if index[v] == usize::MAX {
                escaped = Some(v);
                0
            } else {
                index[v]
            }
        })?;
        ops.push(built);
    }
    if let Some(v) = escaped {
        return Err(Error::NotCompatible(format!("subset is not closed: produces {v}")));
    }
    let sub = FiniteAlgebra::new(size, ops)?;
    let incl = ElementMap::homomorphism(&sub, a, sorted)?;
    Ok((sub, incl))
}

/// The kernel `{(a, b) | f(a) = f(b)}` of a certified homomorphism.
pub fn kernel_congruence(f: &ElementMap) -> Result<Congruence> {
    if !f.is_homomorphism() {
        return Err(Error::NotHomomorphism("kernel requires a certified homomorphism".into()));
    }
    Ok(Congruence::from_labels(f.values()))
}
