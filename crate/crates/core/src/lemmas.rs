//! Decision procedures for the inclusions around congruence distributivity:
//! trapezoid and shifting lemmas, Jonsson inclusions of order n, the
//! reflexive-relation form of the Jonsson inclusion, factor relations, and
//! the implications between these properties.
//!
//! "A category satisfies X" is evaluated at desk scale: every congruence
//! triple of every algebra in a finite test family satisfies X. The family is
//! the algebra alone, or under `deep` the algebra, its square (when small
//! enough) and all of its proper quotients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::algebra::{for_each_new_tuple, power, quotient, FiniteAlgebra};
use crate::congruence::{
    check_factor_permutability, congruence_lattice, congruence_lattice_bounded, factor_relations, factor_set, is_distributive,
    minimal_permutability, Congruence, CongruenceLattice, FactorPair, DEFAULT_MAX_SIZE,
};
use crate::error::{Error, Result};
use crate::relation::{alternating_unchecked, BinaryRelation};
use crate::terms::FreeAlgebra;
use crate::verdict::{Counterexample, Verdict};

/// Result of one inclusion check on one triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TripleOutcome {
    Holds,
    /// The hypothesis was not met; nothing to check.
    Vacuous,
    Fails {
        pair: (usize, usize),
        witnesses: Vec<usize>,
    },
}

impl TripleOutcome {
    fn into_verdict(self, check: &str, indices: Vec<usize>) -> Verdict {
        match self {
            TripleOutcome::Holds => Verdict::pass(check, 1, 0),
            TripleOutcome::Vacuous => Verdict::pass(check, 0, 1),
            TripleOutcome::Fails { pair, witnesses } => {
                Verdict::fail(check, Counterexample::indices(indices).with_pair(pair, witnesses), 1, 0)
            }
        }
    }
}

/// Least `(u, v)` with `x S u`, `u M v`, `v S y`.
fn sms_witness(s: &BinaryRelation, m: &BinaryRelation, x: usize, y: usize) -> Vec<usize> {
    for u in s.successors(x) {
        for v in m.successors(u) {
            if s.contains(v, y) {
                return vec![u, v];
            }
        }
    }
    Vec::new()
}

fn inclusion(lhs: &BinaryRelation, rhs: &BinaryRelation, witness: impl FnOnce((usize, usize)) -> Vec<usize>) -> TripleOutcome {
    match lhs.first_excess(rhs) {
        None => TripleOutcome::Holds,
        Some(pair) => TripleOutcome::Fails {
            pair,
            witnesses: witness(pair),
        },
    }
}

/// `R ∧ S ≤ T  ⟹  R ∧ (S ; T ; S) ≤ T`.
pub fn trapezoid_outcome(r: &BinaryRelation, s: &BinaryRelation, t: &BinaryRelation) -> TripleOutcome {
    if !r.meet_unchecked(s).leq_unchecked(t) {
        return TripleOutcome::Vacuous;
    }
    let sts = s.compose_unchecked(t).compose_unchecked(s);
    inclusion(&r.meet_unchecked(&sts), t, |(x, y)| sms_witness(s, t, x, y))
}

/// `R ∧ S ≤ T  ⟹  R ∧ (S ; (R ∧ T) ; S) ≤ T`.
pub fn shifting_outcome(r: &BinaryRelation, s: &BinaryRelation, t: &BinaryRelation) -> TripleOutcome {
    if !r.meet_unchecked(s).leq_unchecked(t) {
        return TripleOutcome::Vacuous;
    }
    let rt = r.meet_unchecked(t);
    let middle = s.compose_unchecked(&rt).compose_unchecked(s);
    inclusion(&r.meet_unchecked(&middle), t, |(x, y)| sms_witness(s, &rt, x, y))
}

/// `R ∧ (S ; T) ≤ (R ∧ S, R ∧ T)_{n+1}`.
pub fn jonsson_outcome(r: &BinaryRelation, s: &BinaryRelation, t: &BinaryRelation, n: usize) -> TripleOutcome {
    let lhs = r.meet_unchecked(&s.compose_unchecked(t));
    let rhs = alternating_unchecked(&r.meet_unchecked(s), &r.meet_unchecked(t), n + 1);
    inclusion(&lhs, &rhs, |(x, y)| s.middle_witness(t, x, y).into_iter().collect())
}

/// `R ∧ (S ; T) ≤ ((R ∧ S°) ; (R ∧ S), (R ∧ T) ; (R ∧ T°))_{n+1}` where `°` is the opposite.
pub fn theorem_ii_outcome(r: &BinaryRelation, s: &BinaryRelation, t: &BinaryRelation, n: usize) -> TripleOutcome {
    let rs = r.meet_unchecked(s);
    let rt = r.meet_unchecked(t);
    let left = r.meet_unchecked(&s.opposite()).compose_unchecked(&rs);
    let right = rt.compose_unchecked(&r.meet_unchecked(&t.opposite()));
    let lhs = r.meet_unchecked(&s.compose_unchecked(t));
    let rhs = alternating_unchecked(&left, &right, n + 1);
    inclusion(&lhs, &rhs, |(x, y)| s.middle_witness(t, x, y).into_iter().collect())
}

/// `S ; T ≤ R ; S` and `R ∧ S ≤ T`  ⟹  `S ; T = T ; S`.
pub fn permutes_outcome(r: &BinaryRelation, s: &BinaryRelation, t: &BinaryRelation) -> TripleOutcome {
    let st = s.compose_unchecked(t);
    if !st.leq_unchecked(&r.compose_unchecked(s)) || !r.meet_unchecked(s).leq_unchecked(t) {
        return TripleOutcome::Vacuous;
    }
    let ts = t.compose_unchecked(s);
    match st.first_excess(&ts).or_else(|| ts.first_excess(&st)) {
        None => TripleOutcome::Holds,
        Some(pair) => TripleOutcome::Fails {
            pair,
            witnesses: Vec::new(),
        },
    }
}

/// `(F ; S) ∧ (F ; T) = F ; (S ∧ T)`, both inclusions.
pub fn factor_formula_outcome(f: &BinaryRelation, s: &BinaryRelation, t: &BinaryRelation) -> TripleOutcome {
    let lhs = f.compose_unchecked(s).meet_unchecked(&f.compose_unchecked(t));
    let rhs = f.compose_unchecked(&s.meet_unchecked(t));
    match lhs.first_excess(&rhs).or_else(|| rhs.first_excess(&lhs)) {
        None => TripleOutcome::Holds,
        Some(pair) => TripleOutcome::Fails {
            pair,
            witnesses: Vec::new(),
        },
    }
}

fn congruence_triple(r: &Congruence, s: &Congruence, t: &Congruence) -> Result<[BinaryRelation; 3]> {
    if r.size() != s.size() || s.size() != t.size() {
        return Err(Error::DimensionMismatch(format!(
            "congruences on {}, {} and {} elements",
            r.size(),
            s.size(),
            t.size()
        )));
    }
    Ok([r.to_relation(), s.to_relation(), t.to_relation()])
}

pub fn check_trapezoid_triple(r: &Congruence, s: &Congruence, t: &Congruence) -> Result<Verdict> {
    let [r, s, t] = congruence_triple(r, s, t)?;
    Ok(trapezoid_outcome(&r, &s, &t).into_verdict("trapezoid", vec![]))
}

pub fn check_shifting_triple(r: &Congruence, s: &Congruence, t: &Congruence) -> Result<Verdict> {
    let [r, s, t] = congruence_triple(r, s, t)?;
    Ok(shifting_outcome(&r, &s, &t).into_verdict("shifting", vec![]))
}

pub fn check_jonsson_triple(r: &Congruence, s: &Congruence, t: &Congruence, n: usize) -> Result<Verdict> {
    if n < 1 {
        return Err(Error::InvalidArgument("Jonsson order must be at least 1".into()));
    }
    let [r, s, t] = congruence_triple(r, s, t)?;
    Ok(jonsson_outcome(&r, &s, &t, n).into_verdict("jonsson", vec![]))
}

pub fn check_permutes_with(r: &Congruence, s: &Congruence, t: &Congruence) -> Result<Verdict> {
    let [r, s, t] = congruence_triple(r, s, t)?;
    Ok(permutes_outcome(&r, &s, &t).into_verdict("permutes-with", vec![]))
}

/// The reflexive-relation form of the Jonsson inclusion. `R` must be an
/// equivalence relation and `S`, `T` reflexive relations on one carrier.
pub fn check_theorem_ii_triple(r: &BinaryRelation, s: &BinaryRelation, t: &BinaryRelation, n: usize) -> Result<Verdict> {
    if n < 1 {
        return Err(Error::InvalidArgument("Jonsson order must be at least 1".into()));
    }
    let size = r.rows();
    if [r, s, t].iter().any(|x| x.rows() != size || x.cols() != size) {
        return Err(Error::DimensionMismatch("R, S and T must be relations on one carrier".into()));
    }
    if !r.closure_properties()?.equivalence {
        return Err(Error::InvalidArgument("R must be an equivalence relation".into()));
    }
    if !s.is_reflexive() || !t.is_reflexive() {
        return Err(Error::InvalidArgument("S and T must be reflexive".into()));
    }
    Ok(theorem_ii_outcome(r, s, t, n).into_verdict("theorem-ii", vec![]))
}

/// An algebra with its congruence lattice. Composites of congruence pairs are
/// tabulated on first use, so whole-lattice checks cost one meet and a few
/// inclusion tests per triple.
#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub algebra: FiniteAlgebra,
    pub lattice: CongruenceLattice,
    tables: OnceLock<Tables>,
}

#[derive(Clone, Debug)]
struct Tables {
    k: usize,
    /// `S ; T` at `s * k + t`.
    compose: Vec<BinaryRelation>,
    /// `S ; T ; S` at `s * k + t`.
    sts: Vec<BinaryRelation>,
    /// `(X, Y)_1, (X, Y)_2, ...` at `x * k + y`, up to the first point after
    /// which the sequence is constant.
    alternating: Vec<OnceLock<Vec<BinaryRelation>>>,
}

impl Model {
    pub fn new(name: impl Into<String>, algebra: FiniteAlgebra, max_size: usize) -> Result<Self> {
        let lattice = congruence_lattice(&algebra, max_size)?;
        Ok(Self::from_parts(name, algebra, lattice))
    }

    pub fn from_parts(name: impl Into<String>, algebra: FiniteAlgebra, lattice: CongruenceLattice) -> Self {
        Model {
            name: name.into(),
            algebra,
            lattice,
            tables: OnceLock::new(),
        }
    }

    fn rel(&self, i: usize) -> &BinaryRelation {
        self.lattice.relation(i)
    }

    pub fn factor_pairs(&self) -> Result<Vec<FactorPair>> {
        factor_relations(&self.algebra, &self.lattice)
    }

    fn tables(&self) -> &Tables {
        self.tables.get_or_init(|| {
            let k = self.lattice.len();
            let compose: Vec<BinaryRelation> = (0..k * k)
                .into_par_iter()
                .map(|i| self.rel(i / k).compose_unchecked(self.rel(i % k)))
                .collect();
            let sts = (0..k * k)
                .into_par_iter()
                .map(|i| compose[i].compose_unchecked(self.rel(i / k)))
                .collect();
            Tables {
                k,
                compose,
                sts,
                alternating: (0..k * k).map(|_| OnceLock::new()).collect(),
            }
        })
    }

    fn composite(&self, s: usize, t: usize) -> &BinaryRelation {
        let tab = self.tables();
        &tab.compose[s * tab.k + t]
    }

    fn sts(&self, s: usize, t: usize) -> &BinaryRelation {
        let tab = self.tables();
        &tab.sts[s * tab.k + t]
    }

    /// `(X, Y)_m` for `m >= 1`, for congruences `X`, `Y` given by index.
    fn alternating(&self, x: usize, y: usize, m: usize) -> &BinaryRelation {
        let seq = self.alternating_sequence(x, y);
        &seq[(m - 1).min(seq.len() - 1)]
    }

    fn alternating_sequence(&self, x: usize, y: usize) -> &[BinaryRelation] {
        let tab = self.tables();
        tab.alternating[x * tab.k + y].get_or_init(|| {
            // reflexive factors make the sequence grow; once two further
            // factors change nothing it is constant
            let mut seq = vec![self.rel(x).clone()];
            loop {
                let m = seq.len() + 1;
                let next = seq[m - 2].compose_unchecked(self.rel(if m % 2 == 0 { y } else { x }));
                let len = seq.len();
                if len >= 2 && next == seq[len - 1] && next == seq[len - 2] {
                    return seq;
                }
                seq.push(next);
            }
        })
    }

    /// Least `n >= 1` with `R ∧ (S ; T) ≤ (R ∧ S, R ∧ T)_{n+1}`, or `None` if
    /// no order works.
    pub fn triple_order(&self, r: usize, s: usize, t: usize) -> Option<usize> {
        let lat = &self.lattice;
        let lhs = self.rel(r).meet_unchecked(self.composite(s, t));
        let seq = self.alternating_sequence(lat.meet(r, s), lat.meet(r, t));
        seq.iter().position(|a| lhs.leq_unchecked(a)).map(|i| i.max(1))
    }
}

/// Options for building a test family.
#[derive(Clone, Copy, Debug)]
pub struct FamilyOptions {
    pub deep: bool,
    /// Bound on the carrier of the base algebra.
    pub max_size: usize,
    /// The square joins the family only if it has at most this many elements.
    pub max_square: usize,
    /// The free algebra on three generators joins the family only if it has
    /// at most this many elements...
    pub max_free: usize,
    /// ...and at most this many congruences.
    pub max_free_congruences: usize,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions {
            deep: false,
            max_size: DEFAULT_MAX_SIZE,
            max_square: 36,
            max_free: 64,
            max_free_congruences: 128,
        }
    }
}

impl FamilyOptions {
    pub fn deep() -> Self {
        FamilyOptions {
            deep: true,
            ..Self::default()
        }
    }
}

/// A finite stand-in for "every algebra of the category".
///
/// A deep family holds the algebra, its square, its proper quotients and the
/// free algebra on three generators, each subject to the size bounds of
/// [`FamilyOptions`]. The free algebra matters: it is where Jonsson's
/// argument locates the failure of a Jonsson inclusion, and small families
/// without it can satisfy inclusions of lower order than the variety does.
#[derive(Clone, Debug)]
pub struct Family {
    pub members: Vec<Model>,
}

impl Family {
    pub fn build(name: &str, algebra: &FiniteAlgebra, opts: FamilyOptions) -> Result<Self> {
        let base = Model::new(name, algebra.clone(), opts.max_size)?;
        let mut members = Vec::new();
        if opts.deep {
            let n = algebra.size();
            if n * n <= opts.max_square {
                let square = power(algebra, 2)?;
                members.push(Model::new(format!("{name}^2"), square, opts.max_square)?);
            }
            for (i, theta) in base.lattice.elements().iter().enumerate() {
                if theta.is_identity() {
                    continue;
                }
                let (q, _) = quotient(algebra, theta)?;
                members.push(Model::new(format!("{name}/c{i}"), q, opts.max_size)?);
            }
            if let Some(free) = free_member(name, algebra, opts)? {
                members.push(free);
            }
        }
        members.insert(0, base);
        Ok(Family { members })
    }

    pub fn base(&self) -> &Model {
        &self.members[0]
    }

    pub fn describe(&self) -> String {
        let names: Vec<&str> = self.members.iter().map(|m| m.name.as_str()).collect();
        format!("family {{{}}}", names.join(", "))
    }
}

fn free_member(name: &str, algebra: &FiniteAlgebra, opts: FamilyOptions) -> Result<Option<Model>> {
    let free = match FreeAlgebra::build(algebra, 3, opts.max_free) {
        Ok(f) => f,
        Err(Error::CapExceeded { .. } | Error::SizeBound { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if free.len() == 1 {
        return Ok(None);
    }
    let alg = free.to_algebra()?;
    match congruence_lattice_bounded(&alg, opts.max_free, opts.max_free_congruences)? {
        Some(lattice) => Ok(Some(Model::from_parts(format!("{name}/F3"), alg, lattice))),
        None => Ok(None),
    }
}

/// Per-triple predicate used by the whole-lattice checks: `None` when the
/// hypothesis fails, otherwise whether the conclusion holds.
type Quick<'a> = dyn Fn(&Model, usize, usize, usize) -> Option<bool> + Sync + 'a;
/// Recomputes a failing triple from its relations to extract the violating pair.
type Detail<'a> = dyn Fn(&BinaryRelation, &BinaryRelation, &BinaryRelation) -> TripleOutcome + 'a;

/// Runs `quick` on every congruence triple of `model`, in parallel, and
/// reports the lexicographically least failing triple.
fn check_all_triples(model: &Model, check: &str, quick: &Quick<'_>, detail: &Detail<'_>) -> Verdict {
    let k = model.lattice.len();
    let outcomes: Vec<Option<bool>> = (0..k * k * k)
        .into_par_iter()
        .map(|idx| quick(model, idx / (k * k), idx / k % k, idx % k))
        .collect();
    let vacuous = outcomes.iter().filter(|o| o.is_none()).count();
    let checked = outcomes.len() - vacuous;
    match outcomes.iter().position(|o| *o == Some(false)) {
        None => Verdict::pass(check, checked, vacuous),
        Some(idx) => {
            let (r, s, t) = (idx / (k * k), idx / k % k, idx % k);
            let TripleOutcome::Fails { pair, witnesses } = detail(model.rel(r), model.rel(s), model.rel(t)) else {
                unreachable!("tabulated and direct checks disagree on triple {r}, {s}, {t}")
            };
            let cx = Counterexample::indices(vec![r, s, t])
                .with_pair(pair, witnesses)
                .in_member(model.name.clone());
            Verdict::fail(check, cx, checked, vacuous)
        }
    }
}

pub fn check_trapezoid(model: &Model) -> Verdict {
    let quick = |m: &Model, r: usize, s: usize, t: usize| {
        let lat = &m.lattice;
        lat.leq(lat.meet(r, s), t)
            .then(|| m.rel(r).meet_unchecked(m.sts(s, t)).leq_unchecked(m.rel(t)))
    };
    check_all_triples(model, "trapezoid", &quick, &trapezoid_outcome)
}

pub fn check_shifting(model: &Model) -> Verdict {
    let quick = |m: &Model, r: usize, s: usize, t: usize| {
        let lat = &m.lattice;
        lat.leq(lat.meet(r, s), t)
            .then(|| m.rel(r).meet_unchecked(m.sts(s, lat.meet(r, t))).leq_unchecked(m.rel(t)))
    };
    check_all_triples(model, "shifting", &quick, &shifting_outcome)
}

pub fn check_jonsson(model: &Model, n: usize) -> Result<Verdict> {
    if n < 1 {
        return Err(Error::InvalidArgument("Jonsson order must be at least 1".into()));
    }
    let quick = |m: &Model, r: usize, s: usize, t: usize| {
        let lat = &m.lattice;
        let lhs = m.rel(r).meet_unchecked(m.composite(s, t));
        Some(lhs.leq_unchecked(m.alternating(lat.meet(r, s), lat.meet(r, t), n + 1)))
    };
    let detail = |r: &BinaryRelation, s: &BinaryRelation, t: &BinaryRelation| jonsson_outcome(r, s, t, n);
    Ok(check_all_triples(model, "jonsson", &quick, &detail))
}

pub fn check_permutes(model: &Model) -> Verdict {
    let quick = |m: &Model, r: usize, s: usize, t: usize| {
        let st = m.composite(s, t);
        let hyp = st.leq_unchecked(m.composite(r, s)) && m.lattice.leq(m.lattice.meet(r, s), t);
        hyp.then(|| st == m.composite(t, s))
    };
    check_all_triples(model, "permutes-with", &quick, &permutes_outcome)
}

pub fn check_family<F>(family: &Family, check: &str, f: F) -> Verdict
where
    F: FnMut(&Model) -> Verdict,
{
    Verdict::merge(check, family.members.iter().map(f))
}

/// Checks the factor formula for one factor relation `F` (given by lattice
/// index) and congruences `S`, `T`.
pub fn check_factor_formula_triple(model: &Model, f: usize, s: usize, t: usize) -> Result<Verdict> {
    let factors = factor_set(&model.factor_pairs()?);
    if !factors.contains(&f) {
        return Err(Error::InvalidArgument(format!("congruence {f} is not a factor relation")));
    }
    let k = model.lattice.len();
    if s >= k || t >= k {
        return Err(Error::InvalidArgument("congruence index out of range".into()));
    }
    Ok(factor_formula_outcome(model.rel(f), model.rel(s), model.rel(t)).into_verdict("factor-formula", vec![f, s, t]))
}

/// The factor formula for every factor relation and every pair of congruences.
pub fn check_factor_formula(model: &Model) -> Result<Verdict> {
    let factors: Vec<usize> = factor_set(&model.factor_pairs()?).into_iter().collect();
    let k = model.lattice.len();
    let mut checked = 0;
    for &f in &factors {
        for s in 0..k {
            for t in 0..k {
                checked += 1;
                if let TripleOutcome::Fails { pair, .. } = factor_formula_outcome(model.rel(f), model.rel(s), model.rel(t)) {
                    let cx = Counterexample::indices(vec![f, s, t])
                        .with_pair(pair, vec![])
                        .in_member(model.name.clone());
                    return Ok(Verdict::fail("factor-formula", cx, checked, 0));
                }
            }
        }
    }
    Ok(Verdict::pass("factor-formula", checked, 0))
}

/// The factor relations of an algebra, checked to form a Boolean algebra
/// under `∧` and `;`.
#[derive(Clone, Debug)]
pub struct BooleanFactors {
    pub verdict: Verdict,
    /// Lattice indices of the factor relations.
    pub factors: Vec<usize>,
}

impl BooleanFactors {
    pub fn size(&self) -> usize {
        self.factors.len()
    }
}

pub fn check_boolean_factors(model: &Model) -> Result<BooleanFactors> {
    let pairs = model.factor_pairs()?;
    let factors: Vec<usize> = factor_set(&pairs).into_iter().collect();
    let lat = &model.lattice;
    let is_factor = |i: usize| factors.binary_search(&i).is_ok();
    let complements = |i: usize| -> Vec<usize> {
        pairs
            .iter()
            .filter_map(|p| {
                if p.first == i {
                    Some(p.second)
                } else if p.second == i {
                    Some(p.first)
                } else {
                    None
                }
            })
            .collect()
    };
    let complementary = |a: usize, b: usize| {
        pairs.contains(&FactorPair {
            first: a.min(b),
            second: a.max(b),
        })
    };
    let fail = |indices: Vec<usize>, checked: usize| {
        Ok(BooleanFactors {
            verdict: Verdict::fail(
                "boolean-factors",
                Counterexample::indices(indices).in_member(model.name.clone()),
                checked,
                0,
            ),
            factors: factors.clone(),
        })
    };
    let mut checked = 0;
    for &f in &factors {
        if complements(f).len() != 1 {
            return fail(vec![f], checked);
        }
    }
    for &f in &factors {
        for &g in &factors {
            checked += 1;
            let meet = lat.meet(f, g);
            let composite = model.rel(f).compose_unchecked(model.rel(g));
            let join = lat.join(f, g);
            if !is_factor(meet) || !is_factor(join) || &composite != model.rel(join) {
                return fail(vec![f, g], checked);
            }
            // (F ∧ G)' = F' ; G'
            let (fc, gc) = (complements(f)[0], complements(g)[0]);
            let comp = model.rel(fc).compose_unchecked(model.rel(gc));
            match lat.index_of(&Congruence::from_relation(&comp).unwrap_or_else(|_| Congruence::identity(0))) {
                Some(c) if complementary(meet, c) => {}
                _ => return fail(vec![f, g], checked),
            }
            for &h in &factors {
                if lat.meet(f, lat.join(g, h)) != lat.join(lat.meet(f, g), lat.meet(f, h)) {
                    return fail(vec![f, g, h], checked);
                }
            }
        }
    }
    if !factors.len().is_power_of_two() {
        return fail(factors.clone(), checked);
    }
    Ok(BooleanFactors {
        verdict: Verdict::pass("boolean-factors", checked, 0),
        factors,
    })
}

/// `R ∧ (S, T)_j ≤ (R ∧ S) ∨ (R ∧ T)` for all triples and `1 ≤ j ≤ j_max`.
pub fn check_distributive_inequality(model: &Model, j_max: usize) -> Result<Verdict> {
    if j_max < 1 {
        return Err(Error::InvalidArgument("j_max must be at least 1".into()));
    }
    let lat = &model.lattice;
    let k = lat.len();
    let first_failure = |idx: usize| -> Option<(usize, (usize, usize))> {
        let (r, s, t) = (idx / (k * k), idx / k % k, idx % k);
        let bound = model.rel(lat.join(lat.meet(r, s), lat.meet(r, t)));
        (1..=j_max).find_map(|j| {
            let lhs = model.rel(r).meet_unchecked(model.alternating(s, t, j));
            lhs.first_excess(bound).map(|pair| (j, pair))
        })
    };
    let failures: Vec<Option<(usize, (usize, usize))>> = (0..k * k * k).into_par_iter().map(first_failure).collect();
    let checked = k * k * k;
    Ok(match failures.into_iter().enumerate().find_map(|(idx, f)| f.map(|f| (idx, f))) {
        None => Verdict::pass("distributive-inequality", checked, 0),
        Some((idx, (j, pair))) => {
            let cx = Counterexample::indices(vec![idx / (k * k), idx / k % k, idx % k])
                .with_pair(pair, vec![])
                .at_order(j)
                .in_member(model.name.clone());
            Verdict::fail("distributive-inequality", cx, checked, 0)
        }
    })
}

/// Minimal relational Jonsson order over a family, with one verdict per order.
#[derive(Clone, Debug)]
pub struct OrderReport {
    pub minimal_order: Option<usize>,
    /// `verdicts[i]` is the verdict at order `i + 1`.
    pub verdicts: Vec<Verdict>,
    pub bound: usize,
    /// No order exists at all: for some triple the alternating composites
    /// stabilise without covering the left-hand side.
    pub definitely_none: bool,
    /// Least order that works for every triple, even when above `bound`.
    pub exact_order: Option<usize>,
    pub family: String,
}

impl OrderReport {
    pub fn is_monotone(&self) -> bool {
        self.verdicts.windows(2).all(|w| !w[0].holds || w[1].holds)
    }
}

pub fn jonsson_order_relational(family: &Family, bound: usize) -> Result<OrderReport> {
    if bound < 1 {
        return Err(Error::InvalidArgument("bound must be at least 1".into()));
    }
    // per member: triple orders, `None` meaning no order at all
    let orders: Vec<Vec<Option<usize>>> = family
        .members
        .iter()
        .map(|m| {
            let k = m.lattice.len();
            (0..k * k * k)
                .into_par_iter()
                .map(|idx| m.triple_order(idx / (k * k), idx / k % k, idx % k))
                .collect()
        })
        .collect();
    let total: usize = orders.iter().map(Vec::len).sum();
    let definitely_none = orders.iter().flatten().any(Option::is_none);
    let exact_order = if definitely_none {
        None
    } else {
        orders.iter().flatten().flatten().copied().max()
    };
    let mut verdicts = Vec::with_capacity(bound);
    for n in 1..=bound {
        let failing = orders.iter().enumerate().find_map(|(mi, per)| {
            per.iter()
                .position(|o| o.is_none_or(|m| m > n))
                .map(|idx| (mi, idx))
        });
        verdicts.push(match failing {
            None => Verdict::pass("jonsson", total, 0),
            Some((mi, idx)) => {
                let model = &family.members[mi];
                let k = model.lattice.len();
                let (r, s, t) = (idx / (k * k), idx / k % k, idx % k);
                let TripleOutcome::Fails { pair, witnesses } = jonsson_outcome(model.rel(r), model.rel(s), model.rel(t), n)
                else {
                    unreachable!("triple order and direct check disagree")
                };
                let cx = Counterexample::indices(vec![r, s, t])
                    .with_pair(pair, witnesses)
                    .at_order(n)
                    .in_member(model.name.clone());
                Verdict::fail("jonsson", cx, total, 0)
            }
        });
    }
    let minimal_order = verdicts.iter().position(|v| v.holds).map(|i| i + 1);
    Ok(OrderReport {
        minimal_order,
        verdicts,
        bound,
        definitely_none,
        exact_order,
        family: family.describe(),
    })
}

/// Seeded sampler for random relations.
pub struct RelationSampler {
    rng: ChaCha8Rng,
    density: f64,
}

impl RelationSampler {
    pub const DEFAULT_DENSITY: f64 = 0.3;

    pub fn new(seed: u64) -> Self {
        Self::with_density(seed, Self::DEFAULT_DENSITY)
    }

    pub fn with_density(seed: u64, density: f64) -> Self {
        RelationSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            density,
        }
    }

    pub fn relation(&mut self, rows: usize, cols: usize) -> BinaryRelation {
        let mut rel = BinaryRelation::empty(rows, cols);
        for x in 0..rows {
            for y in 0..cols {
                if self.rng.random_bool(self.density) {
                    rel.insert(x, y);
                }
            }
        }
        rel
    }

    /// Reflexive closure of a random relation.
    pub fn reflexive(&mut self, n: usize) -> BinaryRelation {
        let mut rel = self.relation(n, n);
        for x in 0..n {
            rel.insert(x, x);
        }
        rel
    }

    /// A reflexive relation compatible with the operations of `alg`: the
    /// subalgebra of `A x A` generated by a random reflexive relation.
    pub fn compatible_reflexive(&mut self, alg: &FiniteAlgebra) -> BinaryRelation {
        let seed = self.reflexive(alg.size());
        compatible_closure(alg, &seed)
    }

    pub fn index(&mut self, bound: usize) -> usize {
        self.rng.random_range(0..bound)
    }
}

/// The least relation containing `rel` that is closed under every operation
/// applied componentwise.
pub fn compatible_closure(alg: &FiniteAlgebra, rel: &BinaryRelation) -> BinaryRelation {
    let mut out = rel.clone();
    let mut pairs: Vec<(usize, usize)> = rel.pairs().collect();
    for (oi, op) in alg.ops().iter().enumerate() {
        if op.arity() == 0 {
            let c = alg.apply(oi, &[]);
            if !out.contains(c, c) {
                out.insert(c, c);
                pairs.push((c, c));
            }
        }
    }
    let mut old = 0;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    while old < pairs.len() {
        let len = pairs.len();
        for (oi, op) in alg.ops().iter().enumerate() {
            let mut found = Vec::new();
            for_each_new_tuple(old, len, op.arity(), |idx| {
                xs.clear();
                ys.clear();
                for &i in idx {
                    xs.push(pairs[i].0);
                    ys.push(pairs[i].1);
                }
                found.push((alg.apply(oi, &xs), alg.apply(oi, &ys)));
            });
            for (x, y) in found {
                if !out.contains(x, y) {
                    out.insert(x, y);
                    pairs.push((x, y));
                }
            }
        }
        old = len;
    }
    out
}

/// The reflexive-relation Jonsson inclusion at order `n` on `samples` seeded
/// random triples: `R` a congruence, `S` and `T` compatible reflexive relations.
pub fn check_theorem_ii_sampled(model: &Model, n: usize, samples: usize, seed: u64) -> Result<Verdict> {
    if n < 1 {
        return Err(Error::InvalidArgument("Jonsson order must be at least 1".into()));
    }
    let mut sampler = RelationSampler::new(seed);
    let triples: Vec<(usize, BinaryRelation, BinaryRelation)> = (0..samples)
        .map(|_| {
            let r = sampler.index(model.lattice.len());
            let s = sampler.compatible_reflexive(&model.algebra);
            let t = sampler.compatible_reflexive(&model.algebra);
            (r, s, t)
        })
        .collect();
    let outcomes: Vec<TripleOutcome> = triples
        .par_iter()
        .map(|(r, s, t)| theorem_ii_outcome(model.rel(*r), s, t, n))
        .collect();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        if let TripleOutcome::Fails { pair, witnesses } = outcome {
            let cx = Counterexample::indices(vec![triples[i].0, i])
                .with_pair(pair, witnesses)
                .at_order(n)
                .in_member(model.name.clone());
            return Ok(Verdict::fail("theorem-ii", cx, i + 1, 0));
        }
    }
    Ok(Verdict::pass("theorem-ii", samples, 0))
}

/// Family-level properties and the implications between them.
#[derive(Clone, Debug)]
pub struct ImplicationReport {
    pub name: String,
    pub family: String,
    pub distributive: bool,
    pub trapezoid: bool,
    pub shifting: bool,
    pub factor_permutable: bool,
    /// Least n (up to the permutability bound) with every member n-permutable.
    pub permutability: Option<usize>,
    /// Least Jonsson order valid on the whole family, if any.
    pub relational_order: Option<usize>,
    pub order_monotone: bool,
    /// Violated implications, by label.
    pub violations: Vec<String>,
}

pub const PERMUTABILITY_BOUND: usize = 4;

/// Evaluates the family-level implications:
/// (a) distributive ⟹ trapezoid; (b) relational Jonsson order ⟹ trapezoid;
/// (c) trapezoid ⟹ factor permutable; (d) p-permutable ⟹ (order ≤ p - 1
/// ⟺ distributive), which for p = 2 reads "some order ⟺ distributive";
/// (e) order verdicts monotone in n. Two further consequences are checked:
/// trapezoid ⟹ shifting, and for a p-permutable family with a Jonsson order
/// the distributive inequality `R ∧ (S, T)_j ≤ (R ∧ S) ∨ (R ∧ T)` up to
/// `j = 2p`.
pub fn implication_suite(name: &str, algebra: &FiniteAlgebra, opts: FamilyOptions, order_bound: usize) -> Result<ImplicationReport> {
    let family = Family::build(name, algebra, opts)?;
    let distributive = family.members.iter().all(|m| is_distributive(&m.lattice).holds);
    let trapezoid = check_family(&family, "trapezoid", check_trapezoid).holds;
    let shifting = check_family(&family, "shifting", check_shifting).holds;
    let mut factor_permutable = true;
    for m in &family.members {
        factor_permutable &= check_factor_permutability(&m.algebra, &m.lattice)?.holds;
    }
    let permutability = family
        .members
        .iter()
        .map(|m| minimal_permutability(&m.lattice, PERMUTABILITY_BOUND))
        .try_fold(2, |acc, p| p.map(|p| acc.max(p)));
    let order = jonsson_order_relational(&family, order_bound)?;
    let relational_order = order.exact_order;

    let mut violations = Vec::new();
    let mut require = |ok: bool, label: &str| {
        if !ok {
            violations.push(label.to_string());
        }
    };
    require(!distributive || trapezoid, "(a) distributive => trapezoid");
    require(relational_order.is_none() || trapezoid, "(b) Jonsson order => trapezoid");
    require(!trapezoid || factor_permutable, "(c) trapezoid => factor permutable");
    if let Some(p) = permutability {
        let low_order = order.exact_order.is_some_and(|n| n < p);
        require(low_order == distributive, &format!("(d) {p}-permutable: order <= {} <=> distributive", p - 1));
        if order.exact_order.is_some() {
            let mut holds = true;
            for m in &family.members {
                holds &= check_distributive_inequality(m, 2 * p)?.holds;
            }
            require(holds, "permutable Jonsson family => distributive inequality");
        }
    }
    require(order.is_monotone(), "(e) order monotone");
    require(!trapezoid || shifting, "trapezoid => shifting");
    Ok(ImplicationReport {
        name: name.to_string(),
        family: family.describe(),
        distributive,
        trapezoid,
        shifting,
        factor_permutable,
        permutability,
        relational_order,
        order_monotone: order.is_monotone(),
        violations,
    })
}
