//! Term search in finite free algebras.
//!
//! The free algebra on `k` generators in the variety generated by `A` is the
//! subalgebra of `A^(A^k)` generated by the `k` projections. Each element is
//! stored as its value vector over `A^k` (row-major, first variable most
//! significant) together with a witness: the operation and children it was
//! first produced from. Jonsson chains, majority terms and near-unanimity
//! terms are found by searching these vectors.
//!
//! # Chain parity
//!
//! Put `p_0 = x` and `p_{n+1} = z`. The Jonsson equations then say that
//! consecutive terms `p_i, p_{i+1}` agree on all inputs of shape `(a, a, b)`
//! when `i` is even and on all inputs of shape `(b, a, a)` when `i` is odd.
//! Every `p_i` must also satisfy `p_i(a, b, a) = a`, which both projections
//! do. A chain of order `n` is therefore a walk of `n + 1` edges from `x` to
//! `z` through such elements whose edge types alternate, starting with
//! `(a, a, b)`. For `n = 2` the walk is
//!
//! ```text
//! x --aab-- p1 --baa-- p2 --aab-- z
//! ```
//!
//! which reads `p1(a,a,b) = a`, `p1(b,a,a) = p2(b,a,a)` and `p2(a,a,b) = b`.
//! The search is a breadth-first search over (element, next edge type).

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use crate::algebra::{for_each_new_tuple, FiniteAlgebra, Operation};
use crate::error::{Error, Result};
use crate::lemmas::{check_family, check_jonsson, Family, FamilyOptions};
use crate::verdict::Verdict;

/// Largest `|A|^k` for which a free algebra on `k` generators is built.
pub const DEFAULT_EXPONENT_BOUND: usize = 256;
/// Default bound on the number of elements of a free algebra.
pub const DEFAULT_SIZE_CAP: usize = 2_000_000;

/// How an element of a free algebra was first produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Generator(usize),
    Apply { op: usize, children: Vec<usize> },
}

/// Free algebra on `k` generators in the variety generated by a finite algebra.
#[derive(Clone, Debug)]
pub struct FreeAlgebra {
    base: FiniteAlgebra,
    generators: usize,
    points: usize,
    elements: Vec<Vec<u8>>,
    witnesses: Vec<Witness>,
    index: HashMap<Vec<u8>, usize>,
}

impl FreeAlgebra {
    pub fn build(base: &FiniteAlgebra, generators: usize, size_cap: usize) -> Result<Self> {
        Self::build_with_bound(base, generators, size_cap, DEFAULT_EXPONENT_BOUND)
    }

    pub fn build_with_bound(base: &FiniteAlgebra, generators: usize, size_cap: usize, exponent_bound: usize) -> Result<Self> {
        let n = base.size();
        if generators == 0 {
            return Err(Error::InvalidArgument("a free algebra needs at least one generator".into()));
        }
        if n > 256 {
            return Err(Error::SizeBound { size: n, bound: 256 });
        }
        let points = u32::try_from(generators)
            .ok()
            .and_then(|k| n.checked_pow(k))
            .filter(|&p| p <= exponent_bound)
            .ok_or(Error::SizeBound {
                size: n,
                bound: exponent_bound,
            })?;
        let mut free = FreeAlgebra {
            base: base.clone(),
            generators,
            points,
            elements: Vec::new(),
            witnesses: Vec::new(),
            index: HashMap::new(),
        };
        for g in 0..generators {
            let shift = n.pow((generators - 1 - g) as u32);
            let v: Vec<u8> = (0..points).map(|j| (j / shift % n) as u8).collect();
            free.push(v, Witness::Generator(g), size_cap)?;
        }
        for (oi, op) in base.ops().iter().enumerate() {
            if op.arity() == 0 {
                let c = base.apply(oi, &[]) as u8;
                free.push(vec![c; points], Witness::Apply { op: oi, children: vec![] }, size_cap)?;
            }
        }
        free.close(size_cap)?;
        Ok(free)
    }

    fn push(&mut self, v: Vec<u8>, witness: Witness, cap: usize) -> Result<()> {
        if self.index.contains_key(&v) {
            return Ok(());
        }
        if self.elements.len() >= cap {
            return Err(Error::CapExceeded {
                cap,
                reached: self.elements.len(),
            });
        }
        self.index.insert(v.clone(), self.elements.len());
        self.elements.push(v);
        self.witnesses.push(witness);
        Ok(())
    }

    /// Semi-naive closure: each round applies every operation to the tuples
    /// that involve at least one element found in the previous round.
    fn close(&mut self, cap: usize) -> Result<()> {
        let mut old = 0;
        let mut args = Vec::new();
        while old < self.elements.len() {
            let len = self.elements.len();
            for oi in 0..self.base.ops().len() {
                let arity = self.base.ops()[oi].arity();
                let mut found: Vec<(Vec<u8>, Vec<usize>)> = Vec::new();
                let mut fresh: HashSet<Vec<u8>> = HashSet::new();
                let mut overflow = None;
                for_each_new_tuple(old, len, arity, |idx| {
                    if overflow.is_some() {
                        return;
                    }
                    let v: Vec<u8> = (0..self.points)
                        .map(|j| {
                            args.clear();
                            args.extend(idx.iter().map(|&c| self.elements[c][j] as usize));
                            self.base.apply(oi, &args) as u8
                        })
                        .collect();
                    if !self.index.contains_key(&v) && fresh.insert(v.clone()) {
                        if self.elements.len() + found.len() >= cap {
                            overflow = Some(self.elements.len() + found.len());
                        }
                        found.push((v, idx.to_vec()));
                    }
                });
                if let Some(reached) = overflow {
                    return Err(Error::CapExceeded { cap, reached });
                }
                for (v, children) in found {
                    self.push(v, Witness::Apply { op: oi, children }, cap)?;
                }
            }
            old = len;
        }
        Ok(())
    }

    pub fn base(&self) -> &FiniteAlgebra {
        &self.base
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &[u8] {
        &self.elements[i]
    }

    pub fn witness(&self, i: usize) -> &Witness {
        &self.witnesses[i]
    }

    pub fn index_of(&self, v: &[u8]) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Index of the point `args` of `A^k`.
    pub fn point(&self, args: &[usize]) -> usize {
        let n = self.base.size();
        args.iter().fold(0, |acc, &a| acc * n + a)
    }

    /// Value of element `i` at `args`.
    pub fn value(&self, i: usize, args: &[usize]) -> usize {
        self.elements[i][self.point(args)] as usize
    }

    fn variable_name(&self, g: usize) -> String {
        if self.generators <= 3 {
            ["x", "y", "z"][g].to_string()
        } else {
            format!("x{}", g + 1)
        }
    }

    /// The free algebra as a finite algebra on `0..len()`, with operations
    /// acting pointwise on the stored vectors.
    pub fn to_algebra(&self) -> Result<FiniteAlgebra> {
        let ops = self
            .base
            .ops()
            .iter()
            .enumerate()
            .map(|(oi, op)| {
                let mut args = Vec::with_capacity(op.arity());
                Operation::from_fn(op.name(), op.arity(), self.len(), |idx| {
                    let v: Vec<u8> = (0..self.points)
                        .map(|j| {
                            args.clear();
                            args.extend(idx.iter().map(|&c| self.elements[c][j] as usize));
                            self.base.apply(oi, &args) as u8
                        })
                        .collect();
                    self.index[&v]
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteAlgebra::new(self.len(), ops)
    }

    /// Readable term for element `i`, with operation names and variables.
    pub fn term_string(&self, i: usize) -> String {
        let mut memo = HashMap::new();
        self.render(i, &mut memo)
    }

    fn render(&self, i: usize, memo: &mut HashMap<usize, String>) -> String {
        if let Some(s) = memo.get(&i) {
            return s.clone();
        }
        let s = match &self.witnesses[i] {
            Witness::Generator(g) => self.variable_name(*g),
            Witness::Apply { op, children } => {
                let name = self.base.ops()[*op].name();
                if children.is_empty() {
                    name.to_string()
                } else {
                    let args: Vec<String> = children.iter().map(|&c| self.render(c, memo)).collect();
                    format!("{name}({})", args.join(", "))
                }
            }
        };
        memo.insert(i, s.clone());
        s
    }

    /// Evaluates the witness term of element `i` at `args` by walking the DAG.
    pub fn evaluate_witness(&self, i: usize, args: &[usize]) -> usize {
        match &self.witnesses[i] {
            Witness::Generator(g) => args[*g],
            Witness::Apply { op, children } => {
                let vals: Vec<usize> = children.iter().map(|&c| self.evaluate_witness(c, args)).collect();
                self.base.apply(*op, &vals)
            }
        }
    }

    /// Checks that every witness term evaluates back to its stored vector.
    /// Returns the first element that does not.
    pub fn witness_violation(&self) -> Option<usize> {
        let n = self.base.size();
        let k = self.generators;
        (0..self.len()).find(|&i| {
            let mut args = vec![0; k];
            (0..self.points).any(|j| {
                let mut rest = j;
                for slot in args.iter_mut().rev() {
                    *slot = rest % n;
                    rest /= n;
                }
                self.evaluate_witness(i, &args) != self.elements[i][j] as usize
            })
        })
    }
}

/// Builds the free algebra on three generators.
pub fn build_free_f3(base: &FiniteAlgebra, size_cap: usize) -> Result<FreeAlgebra> {
    FreeAlgebra::build(base, 3, size_cap)
}

/// A term of the free algebra with its readable form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub element: usize,
    pub text: String,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Jonsson terms `p_1, ..., p_n` as ternary term operations of the base algebra.
#[derive(Clone, Debug)]
pub struct JonssonChain {
    pub order: usize,
    pub terms: Vec<Term>,
    /// Value vectors over `A^3`, one per term.
    pub vectors: Vec<Vec<u8>>,
    pub size: usize,
}

impl JonssonChain {
    fn value(&self, i: usize, a: usize, b: usize, c: usize) -> usize {
        self.vectors[i][(a * self.size + b) * self.size + c] as usize
    }

    /// Checks the Jonsson equations on every `(a, b)` and names the first one
    /// that fails.
    pub fn violation(&self) -> Option<String> {
        let n = self.order;
        if n == 0 || self.vectors.len() != n || self.terms.len() != n {
            return Some("chain must have one term per order".into());
        }
        if self.vectors.iter().any(|v| v.len() != self.size.pow(3)) {
            return Some("term vectors have the wrong length".into());
        }
        for a in 0..self.size {
            for b in 0..self.size {
                for i in 0..n {
                    if self.value(i, a, b, a) != a {
                        return Some(format!("p{}({a},{b},{a}) != {a}", i + 1));
                    }
                }
                if self.value(0, a, a, b) != a {
                    return Some(format!("p1({a},{a},{b}) != {a}"));
                }
                for i in 0..n - 1 {
                    // i is zero-based, so p_{i+1} with i+1 odd means i even
                    let (l, r) = if i % 2 == 0 {
                        (self.value(i, b, a, a), self.value(i + 1, b, a, a))
                    } else {
                        (self.value(i, a, a, b), self.value(i + 1, a, a, b))
                    };
                    if l != r {
                        return Some(format!("p{} and p{} disagree at ({a},{b})", i + 1, i + 2));
                    }
                }
                if n.is_multiple_of(2) && self.value(n - 1, a, a, b) != b {
                    return Some(format!("p{n}({a},{a},{b}) != {b}"));
                }
                if n % 2 == 1 && self.value(n - 1, b, a, a) != a {
                    return Some(format!("p{n}({b},{a},{a}) != {a}"));
                }
            }
        }
        None
    }

    pub fn is_valid(&self) -> bool {
        self.violation().is_none()
    }

    /// The same chain at a higher order, padded with the third projection.
    pub fn padded(&self, order: usize, z: &Term) -> Result<JonssonChain> {
        if order < self.order {
            return Err(Error::InvalidArgument(format!(
                "cannot pad a chain of order {} down to {order}",
                self.order
            )));
        }
        let n = self.size;
        let zv: Vec<u8> = (0..n * n * n).map(|j| (j % n) as u8).collect();
        let mut out = self.clone();
        while out.order < order {
            out.terms.push(z.clone());
            out.vectors.push(zv.clone());
            out.order += 1;
        }
        Ok(out)
    }
}

/// Outcome of a chain search.
#[derive(Clone, Debug)]
pub enum ChainSearch {
    Found(JonssonChain),
    /// A chain exists, but its minimal order is above the requested maximum.
    ExceedsMax { minimal_order: usize },
    /// No chain of any order exists in the free algebra.
    NoChain,
}

impl ChainSearch {
    pub fn chain(&self) -> Option<&JonssonChain> {
        match self {
            ChainSearch::Found(c) => Some(c),
            _ => None,
        }
    }

    pub fn minimal_order(&self) -> Option<usize> {
        match self {
            ChainSearch::Found(c) => Some(c.order),
            ChainSearch::ExceedsMax { minimal_order } => Some(*minimal_order),
            ChainSearch::NoChain => None,
        }
    }
}

/// Agreement class keys of every node, for the two edge types.
fn slice_keys(free: &FreeAlgebra, nodes: &[usize]) -> [Vec<Vec<u8>>; 2] {
    let n = free.base.size();
    let key = |p: usize, baa: bool| -> Vec<u8> {
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let args = if baa { [b, a, a] } else { [a, a, b] };
                out.push(free.value(p, &args) as u8);
            }
        }
        out
    };
    [
        nodes.iter().map(|&p| key(p, false)).collect(),
        nodes.iter().map(|&p| key(p, true)).collect(),
    ]
}

/// Minimal Jonsson chain in a prebuilt free algebra on three generators.
pub fn find_jonsson_chain_in(free: &FreeAlgebra, max_n: usize) -> Result<ChainSearch> {
    if free.generators != 3 {
        return Err(Error::InvalidArgument("chain search needs the free algebra on three generators".into()));
    }
    let n = free.base.size();
    let (x, z) = (0, 2);
    if n == 1 {
        // all equations hold trivially: p_1 = x
        let chain = chain_from_path(free, &[x, x, z]);
        return Ok(if max_n >= 1 {
            ChainSearch::Found(chain)
        } else {
            ChainSearch::ExceedsMax { minimal_order: 1 }
        });
    }
    // nodes: elements with p(a, b, a) = a
    let nodes: Vec<usize> = (0..free.len())
        .filter(|&p| (0..n).all(|a| (0..n).all(|b| free.value(p, &[a, b, a]) == a)))
        .collect();
    let pos: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let keys = slice_keys(free, &nodes);
    let mut classes: [HashMap<&[u8], Vec<usize>>; 2] = [HashMap::new(), HashMap::new()];
    for t in 0..2 {
        for (i, k) in keys[t].iter().enumerate() {
            classes[t].entry(k.as_slice()).or_default().push(i);
        }
    }
    let mut expanded: [HashMap<&[u8], bool>; 2] = [HashMap::new(), HashMap::new()];
    // state = node * 2 + type of the next edge (0 = aab, 1 = baa)
    let mut parent: Vec<Option<usize>> = vec![None; nodes.len() * 2];
    let mut seen = vec![false; nodes.len() * 2];
    let start = pos[&x] * 2;
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let target = pos[&z];
    while let Some(state) = queue.pop_front() {
        let (node, t) = (state / 2, state % 2);
        let key = keys[t][node].as_slice();
        if expanded[t].insert(key, true).is_some() {
            continue;
        }
        for &next in &classes[t][key] {
            let ns = next * 2 + (1 - t);
            if seen[ns] {
                continue;
            }
            seen[ns] = true;
            parent[ns] = Some(state);
            if next == target {
                let mut path = vec![nodes[next]];
                let mut cur = ns;
                while let Some(p) = parent[cur] {
                    path.push(nodes[p / 2]);
                    cur = p;
                }
                path.reverse();
                let order = path.len() - 2;
                return Ok(if order <= max_n {
                    ChainSearch::Found(chain_from_path(free, &path))
                } else {
                    ChainSearch::ExceedsMax { minimal_order: order }
                });
            }
            queue.push_back(ns);
        }
    }
    Ok(ChainSearch::NoChain)
}

/// `path` runs from `x` to `z`; the chain is its interior.
fn chain_from_path(free: &FreeAlgebra, path: &[usize]) -> JonssonChain {
    let inner = &path[1..path.len() - 1];
    JonssonChain {
        order: inner.len(),
        terms: inner
            .iter()
            .map(|&e| Term {
                element: e,
                text: free.term_string(e),
            })
            .collect(),
        vectors: inner.iter().map(|&e| free.element(e).to_vec()).collect(),
        size: free.base.size(),
    }
}

/// Builds the free algebra on three generators and searches it for a minimal
/// Jonsson chain. Chains found are checked against the equations before
/// they are returned.
pub fn find_jonsson_chain(alg: &FiniteAlgebra, max_n: usize) -> Result<ChainSearch> {
    let free = build_free_f3(alg, DEFAULT_SIZE_CAP)?;
    let search = find_jonsson_chain_in(&free, max_n)?;
    if let Some(v) = search.chain().and_then(JonssonChain::violation) {
        return Err(Error::InvalidAlgebra(format!("chain search produced an invalid chain: {v}")));
    }
    Ok(search)
}

/// First element (in generation order) of `free` with
/// `u(b,a,...,a) = u(a,b,a,...,a) = ... = u(a,...,a,b) = a`.
pub fn near_unanimity_in(free: &FreeAlgebra) -> Option<Term> {
    let n = free.base.size();
    let k = free.generators;
    let mut args = vec![0; k];
    (0..free.len())
        .find(|&u| {
            (0..n).all(|a| {
                (0..n).all(|b| {
                    (0..k).all(|pos| {
                        args.iter_mut().for_each(|s| *s = a);
                        args[pos] = b;
                        free.value(u, &args) == a
                    })
                })
            })
        })
        .map(|u| Term {
            element: u,
            text: free.term_string(u),
        })
}

/// A majority term, minimal in generation order.
pub fn find_majority_term(alg: &FiniteAlgebra) -> Result<Option<Term>> {
    Ok(near_unanimity_in(&build_free_f3(alg, DEFAULT_SIZE_CAP)?))
}

/// A `k`-ary near-unanimity term, searched in the free algebra on `k` generators.
pub fn find_near_unanimity(alg: &FiniteAlgebra, k: usize) -> Result<Option<Term>> {
    if k < 3 {
        return Err(Error::InvalidArgument("near-unanimity arity must be at least 3".into()));
    }
    Ok(near_unanimity_in(&FreeAlgebra::build(alg, k, DEFAULT_SIZE_CAP)?))
}

/// Jonsson order implied by a `k`-ary near-unanimity term.
pub fn near_unanimity_order_bound(k: usize) -> usize {
    (2 * k).saturating_sub(5).max(1)
}

/// Checks the Jonsson inclusion at the chain's order on every congruence
/// triple of `A`, `A^2` and every quotient of `A`.
pub fn certify_chain_against_relations(alg: &FiniteAlgebra, chain: &JonssonChain) -> Result<Verdict> {
    if chain.size != alg.size() {
        return Err(Error::InvalidArgument("chain belongs to an algebra of a different size".into()));
    }
    if let Some(v) = chain.violation() {
        return Err(Error::InvalidArgument(format!("invalid chain: {v}")));
    }
    let family = Family::build("A", alg, FamilyOptions::deep())?;
    let mut failure = None;
    let verdict = check_family(&family, "jonsson", |m| match check_jonsson(m, chain.order) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            Verdict::pass("jonsson", 0, 0)
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(verdict),
    }
}
