//! Congruences and the congruence lattice `Con(A)`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::algebra::{for_each_tuple, product, quotient, ElementMap, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::relation::{alternating_unchecked, BinaryRelation};
use crate::verdict::{Counterexample, Verdict, SCHEMA_VERSION};

/// Default bound on the carrier size accepted by [`congruence_lattice`].
pub const DEFAULT_MAX_SIZE: usize = 12;

/// Largest carrier for which [`congruences_by_enumeration`] runs.
pub const ENUMERATION_MAX_SIZE: usize = 8;

/// An equivalence relation stored as a partition vector: `blocks[a]` is the
/// least element of the block containing `a`.
///
/// The type does not carry its algebra; compatibility is checked against an
/// algebra with [`Congruence::is_compatible`], and every constructor in this
/// crate that produces congruences of an algebra verifies it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Congruence {
    blocks: Vec<usize>,
}

impl Congruence {
    /// Canonical partition from arbitrary block labels.
    pub fn from_labels<T: Eq + std::hash::Hash + Copy>(labels: &[T]) -> Self {
        let mut first = HashMap::new();
        let blocks = labels
            .iter()
            .enumerate()
            .map(|(i, l)| *first.entry(*l).or_insert(i))
            .collect();
        Congruence { blocks }
    }

    /// The equivalence relation given by an equivalence `BinaryRelation`.
    pub fn from_relation(rel: &BinaryRelation) -> Result<Self> {
        if !rel.closure_properties()?.equivalence {
            return Err(Error::InvalidArgument("relation is not an equivalence".into()));
        }
        let labels: Vec<usize> = (0..rel.rows())
            .map(|x| rel.successors(x).next().unwrap_or(x))
            .collect();
        Ok(Congruence::from_labels(&labels))
    }

    pub fn identity(n: usize) -> Self {
        Congruence { blocks: (0..n).collect() }
    }

    pub fn total(n: usize) -> Self {
        Congruence { blocks: vec![0; n] }
    }

    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    /// The partition vector.
    pub fn as_slice(&self) -> &[usize] {
        &self.blocks
    }

    #[inline]
    pub fn representative(&self, a: usize) -> usize {
        self.blocks[a]
    }

    #[inline]
    pub fn related(&self, a: usize, b: usize) -> bool {
        self.blocks[a] == self.blocks[b]
    }

    /// Block representatives in increasing order.
    pub fn representatives(&self) -> Vec<usize> {
        (0..self.size()).filter(|&a| self.blocks[a] == a).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.iter().enumerate().filter(|&(a, &r)| a == r).count()
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.iter().enumerate().all(|(a, &r)| a == r)
    }

    pub fn is_total(&self) -> bool {
        self.blocks.iter().all(|&r| r == 0)
    }

    /// Blocks as sorted lists, ordered by representative.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.size()];
        for (a, &r) in self.blocks.iter().enumerate() {
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(a);
        }
        out
    }

    pub fn to_relation(&self) -> BinaryRelation {
        let n = self.size();
        let mut rel = BinaryRelation::empty(n, n);
        for block in self.blocks() {
            for &a in &block {
                for &b in &block {
                    rel.insert(a, b);
                }
            }
        }
        rel
    }

    pub fn leq(&self, other: &Congruence) -> bool {
        self.size() == other.size() && (0..self.size()).all(|a| other.related(a, self.blocks[a]))
    }

    pub fn meet(&self, other: &Congruence) -> Result<Congruence> {
        self.check_size(other)?;
        let labels: Vec<(usize, usize)> = (0..self.size()).map(|a| (self.blocks[a], other.blocks[a])).collect();
        Ok(Congruence::from_labels(&labels))
    }

    /// Transitive closure of the union.
    pub fn join(&self, other: &Congruence) -> Result<Congruence> {
        self.check_size(other)?;
        let mut uf = UnionFind::new(self.size());
        for a in 0..self.size() {
            uf.union(a, self.blocks[a]);
            uf.union(a, other.blocks[a]);
        }
        Ok(uf.into_congruence())
    }

    fn check_size(&self, other: &Congruence) -> Result<()> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch(format!(
                "congruences on {} and {} elements",
                self.size(),
                other.size()
            )));
        }
        Ok(())
    }

    pub fn is_compatible(&self, alg: &FiniteAlgebra) -> bool {
        self.compatibility_violation(alg).is_none()
    }

    /// Checks every unary translation: for each operation, argument position
    /// and related pair `a ~ b` in that position, the results are related.
    /// By transitivity this is equivalent to full compatibility.
    pub(crate) fn compatibility_violation(&self, alg: &FiniteAlgebra) -> Option<String> {
        if self.size() != alg.size() {
            return Some(format!("partition on {} elements, algebra of size {}", self.size(), alg.size()));
        }
        let n = alg.size();
        let mut args = Vec::new();
        for (oi, op) in alg.ops().iter().enumerate() {
            let k = op.arity();
            for pos in 0..k {
                let mut bad = None;
                for_each_tuple(n, k - 1, |rest| {
                    if bad.is_some() {
                        return;
                    }
                    for a in 0..n {
                        let b = self.blocks[a];
                        if a == b {
                            continue;
                        }
                        args.clear();
                        args.extend_from_slice(&rest[..pos]);
                        args.push(a);
                        args.extend_from_slice(&rest[pos..]);
                        let u = alg.apply(oi, &args);
                        args[pos] = b;
                        let v = alg.apply(oi, &args);
                        if !self.related(u, v) {
                            bad = Some(format!("{}: {a} ~ {b} in position {pos} gives {u} !~ {v}", op.name()));
                            return;
                        }
                    }
                });
                if bad.is_some() {
                    return bad;
                }
            }
        }
        None
    }
}

impl fmt::Debug for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Congruence({self})")
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks = self.blocks();
        for (i, block) in blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            let items: Vec<String> = block.iter().map(|a| a.to_string()).collect();
            f.write_str(&items.join(","))?;
        }
        Ok(())
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if two different classes were merged.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // keep the smaller root so roots stay block minima
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    fn into_congruence(mut self) -> Congruence {
        let labels: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Congruence::from_labels(&labels)
    }
}

/// The least congruence containing all `pairs`.
///
/// Union-find with a worklist of merged pairs: every pair that causes a merge
/// is pushed through all unary translations `w(c_1, .., x, .., c_k)`.
pub fn generate_congruence(alg: &FiniteAlgebra, pairs: &[(usize, usize)]) -> Result<Congruence> {
    let n = alg.size();
    let mut uf = UnionFind::new(n);
    let mut work = VecDeque::new();
    for &(a, b) in pairs {
        if a >= n || b >= n {
            return Err(Error::InvalidArgument(format!("pair ({a}, {b}) outside carrier of size {n}")));
        }
        if uf.union(a, b) {
            work.push_back((a, b));
        }
    }
    let mut args = Vec::new();
    while let Some((c, d)) = work.pop_front() {
        for (oi, op) in alg.ops().iter().enumerate() {
            let k = op.arity();
            for pos in 0..k {
                for_each_tuple(n, k - 1, |rest| {
                    args.clear();
                    args.extend_from_slice(&rest[..pos]);
                    args.push(c);
                    args.extend_from_slice(&rest[pos..]);
                    let u = alg.apply(oi, &args);
                    args[pos] = d;
                    let v = alg.apply(oi, &args);
                    if uf.union(u, v) {
                        work.push_back((u, v));
                    }
                });
            }
        }
    }
    Ok(uf.into_congruence())
}

/// `Cg(a, b)`, the least congruence identifying `a` and `b`.
pub fn principal_congruence(alg: &FiniteAlgebra, a: usize, b: usize) -> Result<Congruence> {
    generate_congruence(alg, &[(a, b)])
}

pub fn meet_con(theta: &Congruence, psi: &Congruence) -> Result<Congruence> {
    theta.meet(psi)
}

pub fn join_con(theta: &Congruence, psi: &Congruence) -> Result<Congruence> {
    theta.join(psi)
}

/// `Con(A)` with its order, meet and join tables. Elements are sorted by
/// partition vector, which fixes the index of every congruence.
#[derive(Clone, Debug)]
pub struct CongruenceLattice {
    carrier: usize,
    elements: Vec<Congruence>,
    relations: Vec<BinaryRelation>,
    index: HashMap<Congruence, usize>,
    leq: Vec<bool>,
    meet: Vec<usize>,
    join: Vec<usize>,
    bottom: usize,
    top: usize,
}

impl CongruenceLattice {
    /// Builds the lattice from a meet- and join-closed family containing Δ and ∇.
    pub fn from_elements(carrier: usize, mut elements: Vec<Congruence>) -> Result<Self> {
        elements.sort();
        elements.dedup();
        let k = elements.len();
        let index: HashMap<Congruence, usize> = elements.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let find = |c: &Congruence| {
            index
                .get(c)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("family is not a lattice: {c} missing")))
        };
        let bottom = find(&Congruence::identity(carrier))?;
        let top = find(&Congruence::total(carrier))?;
        let mut leq = vec![false; k * k];
        let mut meet = vec![0; k * k];
        let mut join = vec![0; k * k];
        for i in 0..k {
            for j in 0..k {
                leq[i * k + j] = elements[i].leq(&elements[j]);
                meet[i * k + j] = find(&elements[i].meet(&elements[j])?)?;
                join[i * k + j] = find(&elements[i].join(&elements[j])?)?;
            }
        }
        let relations = elements.iter().map(Congruence::to_relation).collect();
        Ok(CongruenceLattice {
            carrier,
            elements,
            relations,
            index,
            leq,
            meet,
            join,
            bottom,
            top,
        })
    }

    /// Size of the underlying carrier.
    pub fn carrier(&self) -> usize {
        self.carrier
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Congruence] {
        &self.elements
    }

    pub fn get(&self, i: usize) -> &Congruence {
        &self.elements[i]
    }

    /// Congruence `i` as a relation matrix.
    pub fn relation(&self, i: usize) -> &BinaryRelation {
        &self.relations[i]
    }

    pub fn index_of(&self, c: &Congruence) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.len() + j]
    }

    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.meet[i * self.len() + j]
    }

    pub fn join(&self, i: usize, j: usize) -> usize {
        self.join[i * self.len() + j]
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    /// Covering pairs `(i, j)` with `i < j` in the lattice order.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let k = self.len();
        let mut out = Vec::new();
        for i in 0..k {
            for j in 0..k {
                if i != j
                    && self.leq(i, j)
                    && !(0..k).any(|m| m != i && m != j && self.leq(i, m) && self.leq(m, j))
                {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Hasse diagram in Graphviz DOT.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"Con({name})\" {{\n  rankdir=BT;\n  node [shape=box];\n");
        for (i, c) in self.elements.iter().enumerate() {
            let mut label = c.to_string();
            if i == self.bottom {
                label.push_str("\\n(bottom)");
            } else if i == self.top {
                label.push_str("\\n(top)");
            }
            out.push_str(&format!("  c{i} [label=\"{i}: {label}\"];\n"));
        }
        for (i, j) in self.covers() {
            out.push_str(&format!("  c{i} -> c{j} [dir=none];\n"));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self, name: &str) -> serde_json::Value {
        let k = self.len();
        let table = |t: &[usize]| (0..k).map(|i| t[i * k..(i + 1) * k].to_vec()).collect::<Vec<_>>();
        let doc = LatticeJson {
            schema: SCHEMA_VERSION,
            algebra: name,
            carrier: self.carrier,
            elements: self.elements.iter().map(|c| c.as_slice().to_vec()).collect(),
            bottom: self.bottom,
            top: self.top,
            meet: table(&self.meet),
            join: table(&self.join),
        };
        serde_json::to_value(doc).expect("lattice serializes")
    }
}

#[derive(Serialize)]
struct LatticeJson<'a> {
    schema: u32,
    algebra: &'a str,
    carrier: usize,
    elements: Vec<Vec<usize>>,
    bottom: usize,
    top: usize,
    meet: Vec<Vec<usize>>,
    join: Vec<Vec<usize>>,
}

/// `Con(A)` as the join closure of Δ and all principal congruences.
pub fn congruence_lattice(alg: &FiniteAlgebra, max_size: usize) -> Result<CongruenceLattice> {
    Ok(congruence_lattice_bounded(alg, max_size, usize::MAX)?.expect("unbounded lattice"))
}

/// As [`congruence_lattice`], but gives up with `None` once more than
/// `max_congruences` congruences have been found.
pub fn congruence_lattice_bounded(
    alg: &FiniteAlgebra,
    max_size: usize,
    max_congruences: usize,
) -> Result<Option<CongruenceLattice>> {
    let n = alg.size();
    if n > max_size {
        return Err(Error::SizeBound { size: n, bound: max_size });
    }
    let mut principals = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            principals.insert(principal_congruence(alg, a, b)?);
        }
    }
    let principals: Vec<Congruence> = principals.into_iter().collect();
    let mut seen: BTreeSet<Congruence> = principals.iter().cloned().collect();
    seen.insert(Congruence::identity(n));
    let mut queue: VecDeque<Congruence> = seen.iter().cloned().collect();
    while let Some(theta) = queue.pop_front() {
        for p in &principals {
            let j = theta.join(p)?;
            if seen.insert(j.clone()) {
                if seen.len() > max_congruences {
                    return Ok(None);
                }
                queue.push_back(j);
            }
        }
    }
    CongruenceLattice::from_elements(n, seen.into_iter().collect()).map(Some)
}

/// All congruences found by filtering every set partition for compatibility.
/// An independent cross-check of [`congruence_lattice`] for small carriers.
pub fn congruences_by_enumeration(alg: &FiniteAlgebra) -> Result<Vec<Congruence>> {
    let n = alg.size();
    if n > ENUMERATION_MAX_SIZE {
        return Err(Error::SizeBound {
            size: n,
            bound: ENUMERATION_MAX_SIZE,
        });
    }
    let mut out = Vec::new();
    // restricted growth strings
    let mut rgs = vec![0usize; n];
    loop {
        let c = Congruence::from_labels(&rgs);
        if c.is_compatible(alg) {
            out.push(c);
        }
        let mut pos = n;
        loop {
            if pos <= 1 {
                out.sort();
                return Ok(out);
            }
            pos -= 1;
            let max_prefix = rgs[..pos].iter().copied().max().unwrap_or(0);
            if rgs[pos] <= max_prefix {
                rgs[pos] += 1;
                for slot in rgs.iter_mut().skip(pos + 1) {
                    *slot = 0;
                }
                break;
            }
        }
    }
}

/// Exhaustive distributivity test `x ∧ (y ∨ z) = (x ∧ y) ∨ (x ∧ z)`; the
/// reported triple is the lexicographically least failure.
pub fn is_distributive(lat: &CongruenceLattice) -> Verdict {
    let k = lat.len();
    for x in 0..k {
        for y in 0..k {
            for z in 0..k {
                let lhs = lat.meet(x, lat.join(y, z));
                let rhs = lat.join(lat.meet(x, y), lat.meet(x, z));
                if lhs != rhs {
                    let checked = x * k * k + y * k + z + 1;
                    return Verdict::fail("distributive", Counterexample::indices(vec![x, y, z]), checked, 0);
                }
            }
        }
    }
    Verdict::pass("distributive", k * k * k, 0)
}

/// Exhaustive modularity test: `x ≤ z` implies `x ∨ (y ∧ z) = (x ∨ y) ∧ z`.
pub fn is_modular(lat: &CongruenceLattice) -> Verdict {
    let k = lat.len();
    let mut checked = 0;
    let mut vacuous = 0;
    for x in 0..k {
        for y in 0..k {
            for z in 0..k {
                if !lat.leq(x, z) {
                    vacuous += 1;
                    continue;
                }
                checked += 1;
                if lat.join(x, lat.meet(y, z)) != lat.meet(lat.join(x, y), z) {
                    return Verdict::fail("modular", Counterexample::indices(vec![x, y, z]), checked, vacuous);
                }
            }
        }
    }
    Verdict::pass("modular", checked, vacuous)
}

/// Result of an n-permutability test.
#[derive(Clone, Debug)]
pub struct PermutabilityReport {
    pub n: usize,
    pub permutable: Verdict,
    /// When permutable: whether `R ∨ S = (R, S)_n` for all pairs.
    pub join_formula: Option<Verdict>,
}

/// Checks `(R,S)_n = (S,R)_n` for every pair of congruences and, on success,
/// the join formula `R ∨ S = (R,S)_n`.
#[allow(clippy::needless_range_loop)] // compares composites[i][j] with composites[j][i]
pub fn is_n_permutable(lat: &CongruenceLattice, n: usize) -> Result<PermutabilityReport> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("permutability order must be at least 2, got {n}")));
    }
    let k = lat.len();
    let composites: Vec<Vec<BinaryRelation>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| alternating_unchecked(lat.relation(i), lat.relation(j), n))
                .collect()
        })
        .collect();
    let mut checked = 0;
    for i in 0..k {
        for j in i + 1..k {
            checked += 1;
            let (rs, sr) = (&composites[i][j], &composites[j][i]);
            if rs != sr {
                let pair = rs.first_excess(sr).or_else(|| sr.first_excess(rs)).expect("relations differ");
                let cx = Counterexample::indices(vec![i, j]).with_pair(pair, vec![]);
                return Ok(PermutabilityReport {
                    n,
                    permutable: Verdict::fail(format!("{n}-permutable"), cx, checked, 0),
                    join_formula: None,
                });
            }
        }
    }
    let mut join_verdict = Verdict::pass("join-formula", k * k, 0);
    'outer: for i in 0..k {
        for j in 0..k {
            let joined = lat.relation(lat.join(i, j));
            if joined != &composites[i][j] {
                let pair = joined.first_excess(&composites[i][j]).or_else(|| composites[i][j].first_excess(joined));
                let cx = Counterexample::indices(vec![i, j]).with_pair(pair.expect("relations differ"), vec![]);
                join_verdict = Verdict::fail("join-formula", cx, i * k + j + 1, 0);
                break 'outer;
            }
        }
    }
    Ok(PermutabilityReport {
        n,
        permutable: Verdict::pass(format!("{n}-permutable"), checked, 0),
        join_formula: Some(join_verdict),
    })
}

/// Least `n` in `2..=max_n` for which the lattice is n-permutable.
pub fn minimal_permutability(lat: &CongruenceLattice, max_n: usize) -> Option<usize> {
    (2..=max_n).find(|&n| is_n_permutable(lat, n).map(|r| r.permutable.holds).unwrap_or(false))
}

/// A complementary pair of factor relations, as lattice indices with `first <= second`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FactorPair {
    pub first: usize,
    pub second: usize,
}

/// All unordered pairs `(F, F')` with `F ∧ F' = Δ` and `F ; F' = F' ; F = ∇`.
/// Each pair is certified by building the isomorphism `A -> A/F x A/F'`.
pub fn factor_relations(alg: &FiniteAlgebra, lat: &CongruenceLattice) -> Result<Vec<FactorPair>> {
    check_lattice_matches(alg, lat)?;
    let k = lat.len();
    let full = BinaryRelation::full(alg.size());
    let mut out = Vec::new();
    for i in 0..k {
        for j in i..k {
            if lat.meet(i, j) != lat.bottom() {
                continue;
            }
            let (f, g) = (lat.relation(i), lat.relation(j));
            if f.compose_unchecked(g) != full || g.compose_unchecked(f) != full {
                continue;
            }
            certify_factor_pair(alg, lat.get(i), lat.get(j))?;
            out.push(FactorPair { first: i, second: j });
        }
    }
    Ok(out)
}

/// Verifies `a ↦ (a/F, a/F')` is an isomorphism onto `A/F x A/F'`, and that
/// the kernels of the two composite projections are `F` and `F'`.
fn certify_factor_pair(alg: &FiniteAlgebra, f: &Congruence, g: &Congruence) -> Result<ElementMap> {
    let (qf, mf) = quotient(alg, f)?;
    let (qg, mg) = quotient(alg, g)?;
    let (prod, p1, p2) = product(&qf, &qg)?;
    let values = (0..alg.size()).map(|a| mf.apply(a) * qg.size() + mg.apply(a)).collect();
    let iso = ElementMap::homomorphism(alg, &prod, values)?;
    if !(iso.is_injective() && iso.is_surjective()) {
        return Err(Error::InvalidArgument(format!("{f} and {g} do not decompose the algebra")));
    }
    let k1 = Congruence::from_labels(&(0..alg.size()).map(|a| p1.apply(iso.apply(a))).collect::<Vec<_>>());
    let k2 = Congruence::from_labels(&(0..alg.size()).map(|a| p2.apply(iso.apply(a))).collect::<Vec<_>>());
    if &k1 != f || &k2 != g {
        return Err(Error::InvalidArgument("projection kernels do not match the factor pair".into()));
    }
    Ok(iso)
}

/// The set of lattice indices occurring in some factor pair.
pub fn factor_set(pairs: &[FactorPair]) -> BTreeSet<usize> {
    pairs.iter().flat_map(|p| [p.first, p.second]).collect()
}

/// `E ; F = F ; E` for every congruence `E` and factor relation `F`.
pub fn check_factor_permutability(alg: &FiniteAlgebra, lat: &CongruenceLattice) -> Result<Verdict> {
    let factors = factor_set(&factor_relations(alg, lat)?);
    let mut checked = 0;
    for e in 0..lat.len() {
        for &f in &factors {
            checked += 1;
            let ef = lat.relation(e).compose_unchecked(lat.relation(f));
            let fe = lat.relation(f).compose_unchecked(lat.relation(e));
            if ef != fe {
                let pair = ef.first_excess(&fe).or_else(|| fe.first_excess(&ef)).expect("relations differ");
                let cx = Counterexample::indices(vec![e, f]).with_pair(pair, vec![]);
                return Ok(Verdict::fail("factor-permutable", cx, checked, 0));
            }
        }
    }
    Ok(Verdict::pass("factor-permutable", checked, 0))
}

pub(crate) fn check_lattice_matches(alg: &FiniteAlgebra, lat: &CongruenceLattice) -> Result<()> {
    if alg.size() != lat.carrier() {
        return Err(Error::DimensionMismatch(format!(
            "lattice of an algebra of size {} used with one of size {}",
            lat.carrier(),
            alg.size()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{kernel_congruence, power, product};
    use crate::corpus;

    fn lattice(alg: &FiniteAlgebra) -> CongruenceLattice {
        congruence_lattice(alg, DEFAULT_MAX_SIZE).unwrap()
    }

    /// Closure oracle: saturate the pair set under translations and
    /// transitivity by brute-force fixpoint iteration on a relation matrix.
    fn principal_oracle(alg: &FiniteAlgebra, a: usize, b: usize) -> Congruence {
        let n = alg.size();
        let mut rel = BinaryRelation::diagonal(n);
        rel.insert(a, b);
        rel.insert(b, a);
        loop {
            let mut next = rel.union(&rel.compose(&rel).unwrap()).unwrap();
            for (oi, op) in alg.ops().iter().enumerate() {
                for_each_tuple(n, op.arity(), |xs| {
                    for_each_tuple(n, op.arity(), |ys| {
                        if xs.iter().zip(ys).all(|(&x, &y)| rel.contains(x, y)) {
                            next.insert(alg.apply(oi, xs), alg.apply(oi, ys));
                        }
                    })
                });
            }
            if next == rel {
                return Congruence::from_relation(&rel).unwrap();
            }
            rel = next;
        }
    }

    #[test]
    fn partition_vectors_are_canonical() {
        let c = Congruence::from_labels(&['b', 'a', 'b', 'c']);
        assert_eq!(c.as_slice(), &[0, 1, 0, 3]);
        assert_eq!(c.blocks(), vec![vec![0, 2], vec![1], vec![3]]);
        assert_eq!(c.num_blocks(), 3);
        assert_eq!(c.to_string(), "0,2|1|3");
        assert_eq!(Congruence::from_relation(&c.to_relation()).unwrap(), c);
    }

    #[test]
    fn principal_congruence_examples() {
        let z = corpus::z2_squared();
        assert_eq!(principal_congruence(&z, 2, 2).unwrap(), Congruence::identity(4));
        let l2 = corpus::lattice_2();
        assert_eq!(principal_congruence(&l2, 0, 1).unwrap(), Congruence::total(2));
        // (0,0) = 0 and (1,0) = 2
        let cg = principal_congruence(&z, 0, 2).unwrap();
        assert_eq!(cg.blocks(), vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(cg, principal_oracle(&z, 0, 2));
    }

    #[test]
    fn principal_congruences_match_oracle_on_corpus() {
        for entry in corpus::builtin_corpus() {
            let alg = &entry.algebra;
            for a in 0..alg.size() {
                for b in 0..alg.size() {
                    let got = principal_congruence(alg, a, b).unwrap();
                    assert!(got.is_compatible(alg));
                    assert_eq!(got, principal_oracle(alg, a, b), "{} Cg({a},{b})", entry.name);
                }
            }
        }
    }

    #[test]
    fn two_element_lattice_is_simple() {
        let lat = lattice(&corpus::lattice_2());
        assert_eq!(lat.len(), 2);
        assert!(is_distributive(&lat).holds);
    }

    #[test]
    fn z2_squared_has_m3() {
        let lat = lattice(&corpus::z2_squared());
        assert_eq!(lat.len(), 5);
        let atoms: Vec<usize> = (0..5).filter(|&i| i != lat.bottom() && i != lat.top()).collect();
        assert_eq!(atoms.len(), 3);
        for &x in &atoms {
            for &y in &atoms {
                if x != y {
                    assert_eq!(lat.meet(x, y), lat.bottom());
                    assert_eq!(lat.join(x, y), lat.top());
                }
            }
        }
        let oracle = congruences_by_enumeration(&corpus::z2_squared()).unwrap();
        assert_eq!(oracle, lat.elements());
        let v = is_distributive(&lat);
        assert!(!v.holds);
        let [x, y, z]: [usize; 3] = v.counterexample.unwrap().indices.try_into().unwrap();
        assert_ne!(lat.meet(x, lat.join(y, z)), lat.join(lat.meet(x, y), lat.meet(x, z)));
        assert!(is_modular(&lat).holds);
    }

    #[test]
    fn boolean_square() {
        let l2 = corpus::lattice_2();
        let sq = product(&l2, &l2).unwrap().0;
        let lat = lattice(&sq);
        assert_eq!(lat.len(), 4);
        assert_eq!(congruences_by_enumeration(&sq).unwrap(), lat.elements());
        assert!(is_distributive(&lat).holds);
    }

    #[test]
    fn pentagon_is_not_modular_as_a_lattice_of_congruences() {
        // N5 is a lattice, so Con(N5) is distributive
        let lat = lattice(&corpus::n5());
        assert!(is_distributive(&lat).holds);
        assert!(is_modular(&lat).holds);
    }

    #[test]
    fn chain_lattices_are_distributive() {
        let chain = vec![
            Congruence::identity(4),
            Congruence::from_labels(&[0, 0, 2, 3]),
            Congruence::from_labels(&[0, 0, 0, 3]),
            Congruence::total(4),
        ];
        let lat = CongruenceLattice::from_elements(4, chain).unwrap();
        assert!(is_chain(&lat));
        assert!(is_distributive(&lat).holds);
        assert!(is_chain(&lattice(&corpus::lattice_2())));
    }

    fn is_chain(lat: &CongruenceLattice) -> bool {
        (0..lat.len()).all(|i| (0..lat.len()).all(|j| lat.leq(i, j) || lat.leq(j, i)))
    }

    #[test]
    fn meet_and_join_basics() {
        let z = corpus::z2_squared();
        let (a, p1, p2) = {
            let z2 = corpus::z2();
            product(&z2, &z2).unwrap()
        };
        assert_eq!(a, z);
        let k1 = kernel_congruence(&p1).unwrap();
        let k2 = kernel_congruence(&p2).unwrap();
        assert_eq!(join_con(&k1, &k2).unwrap(), Congruence::total(4));
        assert_eq!(meet_con(&k1, &k2).unwrap(), Congruence::identity(4));
        assert_eq!(join_con(&k1, &Congruence::identity(4)).unwrap(), k1);
        assert_eq!(meet_con(&k1, &Congruence::total(4)).unwrap(), k1);
        assert!(meet_con(&k1, &Congruence::identity(3)).is_err());
    }

    #[test]
    fn lattice_axioms_hold_on_corpus() {
        for entry in corpus::builtin_corpus() {
            let lat = lattice(&entry.algebra);
            let k = lat.len();
            for x in 0..k {
                assert_eq!(lat.meet(x, x), x);
                assert_eq!(lat.join(x, x), x);
                for y in 0..k {
                    assert_eq!(lat.meet(x, y), lat.meet(y, x));
                    assert_eq!(lat.join(x, y), lat.join(y, x));
                    assert_eq!(lat.meet(x, lat.join(x, y)), x);
                    assert_eq!(lat.join(x, lat.meet(x, y)), x);
                    for z in 0..k {
                        assert_eq!(lat.meet(x, lat.meet(y, z)), lat.meet(lat.meet(x, y), z));
                        assert_eq!(lat.join(x, lat.join(y, z)), lat.join(lat.join(x, y), z));
                    }
                }
                assert!(lat.get(x).is_compatible(&entry.algebra));
            }
        }
    }

    #[test]
    fn size_bound_is_enforced() {
        let big = power(&corpus::lattice_2(), 4).unwrap();
        assert!(matches!(congruence_lattice(&big, 12), Err(Error::SizeBound { size: 16, bound: 12 })));
        assert_eq!(congruence_lattice(&big, 16).unwrap().len(), 16);
    }

    #[test]
    fn groups_are_two_permutable() {
        let lat = lattice(&corpus::z2_squared());
        let report = is_n_permutable(&lat, 2).unwrap();
        assert!(report.permutable.holds);
        assert!(report.join_formula.unwrap().holds);
        assert!(is_n_permutable(&lat, 1).is_err());
        assert_eq!(minimal_permutability(&lat, 5), Some(2));
    }

    #[test]
    fn three_chain_lattice_is_not_two_permutable() {
        let lat = lattice(&corpus::chain_lattice_3());
        let report = is_n_permutable(&lat, 2).unwrap();
        assert!(!report.permutable.holds);
        assert_eq!(minimal_permutability(&lat, 5), Some(3));
    }

    #[test]
    fn factor_pairs() {
        let l2 = corpus::lattice_2();
        let lat = lattice(&l2);
        assert_eq!(
            factor_relations(&l2, &lat).unwrap(),
            vec![FactorPair {
                first: lat.top().min(lat.bottom()),
                second: lat.top().max(lat.bottom())
            }]
        );

        let (sq, p1, p2) = product(&l2, &l2).unwrap();
        let lat = lattice(&sq);
        let pairs = factor_relations(&sq, &lat).unwrap();
        let k1 = lat.index_of(&kernel_congruence(&p1).unwrap()).unwrap();
        let k2 = lat.index_of(&kernel_congruence(&p2).unwrap()).unwrap();
        assert!(pairs.contains(&FactorPair {
            first: k1.min(k2),
            second: k1.max(k2)
        }));
        assert_eq!(pairs.len(), 2);

        let z = corpus::z2_squared();
        let lat = lattice(&z);
        let pairs = factor_relations(&z, &lat).unwrap();
        let nontrivial: Vec<_> = pairs
            .iter()
            .filter(|p| ![p.first, p.second].contains(&lat.bottom()))
            .collect();
        assert_eq!(nontrivial.len(), 3);
    }

    #[test]
    fn factor_permutability() {
        let l2 = corpus::lattice_2();
        assert!(check_factor_permutability(&l2, &lattice(&l2)).unwrap().holds);
        let sq = product(&l2, &l2).unwrap().0;
        let v = check_factor_permutability(&sq, &lattice(&sq)).unwrap();
        assert!(v.holds);
        assert_eq!(v.triples_checked, 4 * 4);
    }

    #[test]
    fn dot_and_json_exports() {
        let lat = lattice(&corpus::z2_squared());
        let dot = lat.to_dot("z2z2");
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("->").count(), 6);
        let json = lat.to_json("z2z2");
        assert_eq!(json["elements"].as_array().unwrap().len(), 5);
        assert_eq!(json["meet"][1][1], 1);
        assert_eq!(json["schema"], 1);
    }
}
