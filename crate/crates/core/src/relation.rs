//! Binary relations between finite carriers as bit-packed boolean matrices,
//! and the relational calculus over them.
//!
//! Over finite sets, membership "through a regular epimorphism" collapses to
//! plain tuple membership, so composition is the usual
//! `x (R;S) z  <=>  exists y. x R y and y S z`.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::congruence::Congruence;
use crate::error::{Error, Result};

const WORD: usize = 64;

/// A relation from `{0..rows}` to `{0..cols}`; row `x` holds the set `{y | x R y}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryRelation {
    rows: usize,
    cols: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl BinaryRelation {
    pub fn empty(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(WORD).max(1);
        BinaryRelation {
            rows,
            cols,
            stride,
            bits: vec![0; rows * stride],
        }
    }

    /// The diagonal relation on `n` elements.
    pub fn diagonal(n: usize) -> Self {
        let mut r = Self::empty(n, n);
        for x in 0..n {
            r.insert(x, x);
        }
        r
    }

    /// The full relation on `n` elements.
    pub fn full(n: usize) -> Self {
        Self::full_between(n, n)
    }

    pub fn full_between(rows: usize, cols: usize) -> Self {
        let mut r = Self::empty(rows, cols);
        for x in 0..rows {
            for w in 0..r.stride {
                r.bits[x * r.stride + w] = r.word_mask(w);
            }
        }
        r
    }

    pub fn from_pairs(rows: usize, cols: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut r = Self::empty(rows, cols);
        for (x, y) in pairs {
            if x >= rows || y >= cols {
                return Err(Error::DimensionMismatch(format!(
                    "pair ({x}, {y}) outside {rows}x{cols} relation"
                )));
            }
            r.insert(x, y);
        }
        Ok(r)
    }

    /// Builds the relation `{(x, y) | f(x, y)}`.
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut r = Self::empty(rows, cols);
        for x in 0..rows {
            for y in 0..cols {
                if f(x, y) {
                    r.insert(x, y);
                }
            }
        }
        r
    }

    fn word_mask(&self, w: usize) -> u64 {
        let used = self.cols.saturating_sub(w * WORD).min(WORD);
        if used == WORD {
            u64::MAX
        } else {
            (1u64 << used) - 1
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.bits[x * self.stride + y / WORD] >> (y % WORD) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, x: usize, y: usize) {
        self.bits[x * self.stride + y / WORD] |= 1 << (y % WORD);
    }

    pub fn remove(&mut self, x: usize, y: usize) {
        self.bits[x * self.stride + y / WORD] &= !(1 << (y % WORD));
    }

    fn row(&self, x: usize) -> &[u64] {
        &self.bits[x * self.stride..(x + 1) * self.stride]
    }

    /// The elements related to `x`, in increasing order.
    pub fn successors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(x).iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let bit = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(w * WORD + bit)
                }
            })
        })
    }

    /// All pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |x| self.successors(x).map(move |y| (x, y)))
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{what} of {}x{} and {}x{} relations",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Relational composition `self ; other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::empty(self.rows, other.cols);
        let stride = out.stride;
        for x in 0..self.rows {
            let (start, end) = (x * stride, (x + 1) * stride);
            for y in self.successors(x) {
                for (dst, src) in out.bits[start..end].iter_mut().zip(other.row(y)) {
                    *dst |= src;
                }
            }
        }
        out
    }

    /// Entrywise conjunction.
    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "meet")?;
        Ok(self.meet_unchecked(other))
    }

    pub(crate) fn meet_unchecked(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
        out
    }

    /// Entrywise disjunction.
    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "union")?;
        let mut out = self.clone();
        for (a, b) in out.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(out)
    }

    /// The transpose.
    pub fn opposite(&self) -> Self {
        let mut out = Self::empty(self.cols, self.rows);
        for (x, y) in self.pairs() {
            out.insert(y, x);
        }
        out
    }

    /// Entrywise implication: every pair of `self` is in `other`.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.check_same_shape(other, "inclusion test")?;
        Ok(self.leq_unchecked(other))
    }

    pub(crate) fn leq_unchecked(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// The lexicographically least pair of `self` missing from `other`.
    pub fn first_excess(&self, other: &Self) -> Option<(usize, usize)> {
        debug_assert!(self.rows == other.rows && self.cols == other.cols);
        for x in 0..self.rows {
            for (w, (a, b)) in self.row(x).iter().zip(other.row(x)).enumerate() {
                let diff = a & !b;
                if diff != 0 {
                    return Some((x, w * WORD + diff.trailing_zeros() as usize));
                }
            }
        }
        None
    }

    pub fn is_reflexive(&self) -> bool {
        self.is_square() && (0..self.rows).all(|x| self.contains(x, x))
    }

    pub fn closure_properties(&self) -> Result<ClosureProperties> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "closure properties need a square relation, got {}x{}",
                self.rows, self.cols
            )));
        }
        let reflexive = BinaryRelation::diagonal(self.rows).leq_unchecked(self);
        let symmetric = self.opposite().leq_unchecked(self);
        let transitive = self.compose_unchecked(self).leq_unchecked(self);
        Ok(ClosureProperties {
            reflexive,
            symmetric,
            transitive,
            equivalence: reflexive && symmetric && transitive,
        })
    }

    /// Least `y` with `x R y` and `y S z`.
    pub fn middle_witness(&self, other: &Self, x: usize, z: usize) -> Option<usize> {
        self.successors(x).find(|&y| other.contains(y, z))
    }
}

impl fmt::Debug for BinaryRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryRelation({}x{}, {{", self.rows, self.cols)?;
        for (i, (x, y)) in self.pairs().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({x},{y})")?;
        }
        write!(f, "}})")
    }
}

impl fmt::Display for BinaryRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in 0..self.rows {
            for y in 0..self.cols {
                f.write_str(if self.contains(x, y) { "1" } else { "." })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureProperties {
    pub reflexive: bool,
    pub symmetric: bool,
    pub transitive: bool,
    pub equivalence: bool,
}

/// `R ; S ; R ; ...` with `n` alternating factors; zero factors give the diagonal.
pub fn alternating_composite(r: &BinaryRelation, s: &BinaryRelation, n: usize) -> Result<BinaryRelation> {
    if !r.is_square() || r.rows != s.rows || r.cols != s.cols {
        return Err(Error::DimensionMismatch(format!(
            "alternating composite needs two relations on one carrier, got {}x{} and {}x{}",
            r.rows, r.cols, s.rows, s.cols
        )));
    }
    Ok(alternating_unchecked(r, s, n))
}

pub(crate) fn alternating_unchecked(r: &BinaryRelation, s: &BinaryRelation, n: usize) -> BinaryRelation {
    let mut acc = BinaryRelation::diagonal(r.rows);
    for i in 0..n {
        acc = acc.compose_unchecked(if i % 2 == 0 { r } else { s });
    }
    acc
}

/// Checks `(R;S) & T <= (R & (T;S^op)) ; S` and returns the least violating
/// pair, if any. Over finite sets this always holds.
pub fn check_freyd(r: &BinaryRelation, s: &BinaryRelation, t: &BinaryRelation) -> Result<Option<(usize, usize)>> {
    if r.cols != s.rows || t.rows != r.rows || t.cols != s.cols {
        return Err(Error::DimensionMismatch(format!(
            "Freyd's law needs R: X->Y, S: Y->Z, T: X->Z; got {}x{}, {}x{}, {}x{}",
            r.rows, r.cols, s.rows, s.cols, t.rows, t.cols
        )));
    }
    let lhs = r.compose_unchecked(s).meet_unchecked(t);
    let rhs = r.meet_unchecked(&t.compose_unchecked(&s.opposite())).compose_unchecked(s);
    Ok(lhs.first_excess(&rhs))
}

/// A ternary relation stored as a sorted set of triples.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TernaryRelation {
    size: usize,
    members: BTreeSet<[usize; 3]>,
}

impl TernaryRelation {
    pub fn new(size: usize) -> Self {
        TernaryRelation {
            size,
            members: BTreeSet::new(),
        }
    }

    pub fn insert(&mut self, triple: [usize; 3]) -> Result<()> {
        if triple.iter().any(|&c| c >= self.size) {
            return Err(Error::DimensionMismatch(format!("triple {triple:?} outside carrier of size {}", self.size)));
        }
        self.members.insert(triple);
        Ok(())
    }

    pub fn contains(&self, triple: [usize; 3]) -> bool {
        self.members.contains(&triple)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize; 3]> {
        self.members.iter()
    }
}

/// The ternary relation `D` used to pass from Jonsson inclusions on
/// equivalence relations to reflexive ones:
/// `(x, y, z) in D  <=>  x R z  and  exists v. y R v, x S v, v T z`.
///
/// The three coordinate kernels are equivalence relations on `D` itself,
/// whose elements are numbered in lexicographic order of the triples.
#[derive(Clone, Debug)]
pub struct ProofRelation {
    relation: TernaryRelation,
    triples: Vec<[usize; 3]>,
}

impl ProofRelation {
    pub fn relation(&self) -> &TernaryRelation {
        &self.relation
    }

    /// Triples of `D` in the numbering used by the kernels.
    pub fn triples(&self) -> &[[usize; 3]] {
        &self.triples
    }

    pub fn index_of(&self, triple: [usize; 3]) -> Option<usize> {
        self.triples.binary_search(&triple).ok()
    }

    /// Kernel of the projection onto coordinate `coord` (0, 1 or 2).
    pub fn kernel(&self, coord: usize) -> Congruence {
        assert!(coord < 3, "coordinate out of range");
        let labels: Vec<usize> = self.triples.iter().map(|t| t[coord]).collect();
        Congruence::from_labels(&labels)
    }
}

pub fn build_proof_relation(r: &BinaryRelation, s: &BinaryRelation, t: &BinaryRelation) -> Result<ProofRelation> {
    let n = r.rows;
    for (name, rel) in [("R", r), ("S", s), ("T", t)] {
        if rel.rows != n || rel.cols != n {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {n}x{n}",
                rel.rows, rel.cols
            )));
        }
    }
    let mut relation = TernaryRelation::new(n);
    for (x, z) in r.pairs() {
        for y in 0..n {
            if r.successors(y).any(|v| s.contains(x, v) && t.contains(v, z)) {
                relation.members.insert([x, y, z]);
            }
        }
    }
    let triples = relation.members.iter().copied().collect();
    Ok(ProofRelation { relation, triples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(n: usize, pairs: &[(usize, usize)]) -> BinaryRelation {
        BinaryRelation::from_pairs(n, n, pairs.iter().copied()).unwrap()
    }

    /// Triple loop over all witnesses.
    fn compose_oracle(r: &BinaryRelation, s: &BinaryRelation) -> BinaryRelation {
        BinaryRelation::from_fn(r.rows(), s.cols(), |x, z| (0..r.cols()).any(|y| r.contains(x, y) && s.contains(y, z)))
    }

    fn arb_relation(rows: usize, cols: usize) -> impl Strategy<Value = BinaryRelation> {
        proptest::collection::vec(any::<bool>(), rows * cols)
            .prop_map(move |bits| BinaryRelation::from_fn(rows, cols, |x, y| bits[x * cols + y]))
    }

    #[test]
    fn composition_example() {
        let r = rel(3, &[(0, 1), (1, 2)]);
        let s = rel(3, &[(1, 1), (2, 0)]);
        let c = r.compose(&s).unwrap();
        assert_eq!(c, rel(3, &[(0, 1), (1, 0)]));
        assert_eq!(c, compose_oracle(&r, &s));
    }

    #[test]
    fn diagonal_is_a_unit() {
        let r = rel(3, &[(0, 1), (2, 2), (1, 0)]);
        let d = BinaryRelation::diagonal(3);
        assert_eq!(d.compose(&r).unwrap(), r);
        assert_eq!(r.compose(&d).unwrap(), r);
    }

    #[test]
    fn compose_dimension_mismatch() {
        let r = BinaryRelation::empty(2, 3);
        let s = BinaryRelation::empty(2, 2);
        assert!(matches!(r.compose(&s), Err(Error::DimensionMismatch(_))));
        assert!(r.meet(&s).is_err());
        assert!(r.leq(&s).is_err());
    }

    #[test]
    fn wide_relations_span_words() {
        let n = 130;
        let full = BinaryRelation::full(n);
        assert_eq!(full.len(), n * n);
        let mut r = BinaryRelation::empty(n, n);
        r.insert(3, 129);
        r.insert(129, 64);
        let c = r.compose(&r).unwrap();
        assert_eq!(c.pairs().collect::<Vec<_>>(), vec![(3, 64)]);
        assert_eq!(full.compose(&full).unwrap(), full);
        assert_eq!(BinaryRelation::diagonal(n).compose(&full).unwrap(), full);
    }

    #[test]
    fn meet_opposite_and_leq() {
        let r = rel(3, &[(0, 1), (1, 2), (2, 2)]);
        assert_eq!(r.meet(&BinaryRelation::full(3)).unwrap(), r);
        assert_eq!(r.opposite().opposite(), r);
        assert!(!BinaryRelation::diagonal(3).leq(&r).unwrap());
        let refl = r.union(&BinaryRelation::diagonal(3)).unwrap();
        assert!(BinaryRelation::diagonal(3).leq(&refl).unwrap());
        assert!(refl.is_reflexive());
    }

    #[test]
    fn alternating_composites() {
        let r = rel(3, &[(0, 1), (1, 1)]);
        let s = rel(3, &[(1, 2)]);
        assert_eq!(alternating_composite(&r, &s, 0).unwrap(), BinaryRelation::diagonal(3));
        assert_eq!(alternating_composite(&r, &s, 1).unwrap(), r);
        let rs = r.compose(&s).unwrap();
        assert_eq!(alternating_composite(&r, &s, 2).unwrap(), rs);
        assert_eq!(alternating_composite(&r, &s, 3).unwrap(), rs.compose(&r).unwrap());
        assert!(alternating_composite(&r, &BinaryRelation::empty(2, 2), 1).is_err());
    }

    #[test]
    fn closure_property_examples() {
        let all_true = ClosureProperties {
            reflexive: true,
            symmetric: true,
            transitive: true,
            equivalence: true,
        };
        assert_eq!(BinaryRelation::diagonal(3).closure_properties().unwrap(), all_true);
        assert_eq!(BinaryRelation::full(3).closure_properties().unwrap(), all_true);
        let p = rel(2, &[(0, 1)]).closure_properties().unwrap();
        assert_eq!(
            p,
            ClosureProperties {
                reflexive: false,
                symmetric: false,
                transitive: true,
                equivalence: false
            }
        );
        assert!(BinaryRelation::empty(2, 3).closure_properties().is_err());
    }

    #[test]
    fn freyd_degenerate_cases() {
        let e = BinaryRelation::empty(3, 3);
        assert_eq!(check_freyd(&e, &e, &e).unwrap(), None);
        let f = BinaryRelation::full(3);
        assert_eq!(check_freyd(&f, &f, &f).unwrap(), None);
        assert!(check_freyd(&f, &BinaryRelation::empty(2, 2), &f).is_err());
    }

    #[test]
    fn proof_relation_contains_the_three_anchor_triples() {
        // R = {0,2 | 1}, S, T arbitrary reflexive relations with 0 S 1 T 2
        let r = Congruence::from_labels(&[0, 1, 0]).to_relation();
        let mut s = BinaryRelation::diagonal(3);
        s.insert(0, 1);
        let mut t = BinaryRelation::diagonal(3);
        t.insert(1, 2);
        let d = build_proof_relation(&r, &s, &t).unwrap();
        for triple in [[0, 0, 0], [0, 1, 2], [2, 0, 2]] {
            assert!(d.relation().contains(triple), "{triple:?}");
        }
        // the two kernel pairs used in the inclusion argument
        let (aaa, abc, cac) = (
            d.index_of([0, 0, 0]).unwrap(),
            d.index_of([0, 1, 2]).unwrap(),
            d.index_of([2, 0, 2]).unwrap(),
        );
        assert!(d.kernel(1).related(aaa, cac));
        assert!(d.kernel(0).related(aaa, abc));
        assert!(d.kernel(2).related(abc, cac));
    }

    #[test]
    fn proof_relation_membership_matches_definition() {
        let r = Congruence::from_labels(&[0, 0, 2, 2]).to_relation();
        let s = rel(4, &[(0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (2, 1)]);
        let t = rel(4, &[(0, 0), (1, 1), (2, 2), (3, 3), (3, 1), (1, 0)]);
        let d = build_proof_relation(&r, &s, &t).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    let expected =
                        r.contains(x, z) && (0..4).any(|v| r.contains(y, v) && s.contains(x, v) && t.contains(v, z));
                    assert_eq!(d.relation().contains([x, y, z]), expected);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn compose_agrees_with_oracle(r in arb_relation(4, 5), s in arb_relation(5, 3)) {
            prop_assert_eq!(r.compose(&s).unwrap(), compose_oracle(&r, &s));
        }

        #[test]
        fn composition_is_associative(r in arb_relation(4, 4), s in arb_relation(4, 4), t in arb_relation(4, 4)) {
            let left = r.compose(&s).unwrap().compose(&t).unwrap();
            let right = r.compose(&s.compose(&t).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn opposite_reverses_composition(r in arb_relation(3, 4), s in arb_relation(4, 5)) {
            let lhs = r.compose(&s).unwrap().opposite();
            let rhs = s.opposite().compose(&r.opposite()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn composition_is_monotone(r in arb_relation(4, 4), s in arb_relation(4, 4),
                                   r2 in arb_relation(4, 4), s2 in arb_relation(4, 4)) {
            let big_r = r.union(&r2).unwrap();
            let big_s = s.union(&s2).unwrap();
            prop_assert!(r.compose(&s).unwrap().leq(&big_r.compose(&big_s).unwrap()).unwrap());
        }

        #[test]
        fn freyd_holds(r in arb_relation(3, 4), s in arb_relation(4, 5), t in arb_relation(3, 5)) {
            prop_assert_eq!(check_freyd(&r, &s, &t).unwrap(), None);
        }

        #[test]
        fn reflexive_alternating_composites_grow(r in arb_relation(5, 5), s in arb_relation(5, 5), n in 0usize..6) {
            let d = BinaryRelation::diagonal(5);
            let r = r.union(&d).unwrap();
            let s = s.union(&d).unwrap();
            let small = alternating_composite(&r, &s, n).unwrap();
            let big = alternating_composite(&r, &s, n + 1).unwrap();
            prop_assert!(small.leq(&big).unwrap());
        }

        #[test]
        fn transitive_relations_absorb_self_composition(bits in proptest::collection::vec(any::<bool>(), 16)) {
            // transitive closure of a random relation
            let mut r = BinaryRelation::from_fn(4, 4, |x, y| bits[x * 4 + y]);
            loop {
                let next = r.union(&r.compose(&r).unwrap()).unwrap();
                if next == r { break; }
                r = next;
            }
            prop_assert!(r.compose(&r).unwrap().leq(&r).unwrap());
        }
    }
}
