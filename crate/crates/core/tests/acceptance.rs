//! Acceptance run: one PASS/FAIL line per criterion, each with its runtime
//! budget. Exits non-zero if any criterion fails.
//!
//! Where a check has an independent oracle (brute-force relation algebra,
//! lattice shape, direct equation evaluation) the oracle lives here rather
//! than in the library.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use congdist::algebra::FiniteAlgebra;
use congdist::congruence::{
    congruence_lattice, congruences_by_enumeration, is_distributive, is_n_permutable, minimal_permutability,
    CongruenceLattice,
};
use congdist::corpus::{self, ORDER_BOUND};
use congdist::dsl::{eval_str, Env, Value};
use congdist::lemmas::{
    check_boolean_factors, check_factor_formula, check_theorem_ii_sampled, check_trapezoid_triple, implication_suite,
    jonsson_order_relational, Family, FamilyOptions, Model, RelationSampler,
};
use congdist::relation::{alternating_composite, check_freyd, BinaryRelation};
use congdist::terms::{
    build_free_f3, certify_chain_against_relations, find_jonsson_chain, find_majority_term, ChainSearch, DEFAULT_SIZE_CAP,
};

type Outcome = Result<String, String>;

/// Number, title, runtime budget in seconds, and the check itself.
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn lib<T>(r: congdist::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Pairs of a relation, for the brute-force oracles below.
type Pairs = BTreeSet<(usize, usize)>;

fn pairs(r: &BinaryRelation) -> Pairs {
    r.pairs().collect()
}

fn naive_compose(r: &Pairs, s: &Pairs) -> Pairs {
    let mut out = Pairs::new();
    for &(x, y) in r {
        for &(y2, z) in s {
            if y == y2 {
                out.insert((x, z));
            }
        }
    }
    out
}

fn naive_meet(r: &Pairs, s: &Pairs) -> Pairs {
    r.intersection(s).copied().collect()
}

fn naive_opposite(r: &Pairs) -> Pairs {
    r.iter().map(|&(x, y)| (y, x)).collect()
}

fn naive_alt(r: &Pairs, s: &Pairs, n: usize, carrier: usize) -> Pairs {
    let mut acc: Pairs = (0..carrier).map(|x| (x, x)).collect();
    for i in 0..n {
        acc = naive_compose(&acc, if i % 2 == 0 { r } else { s });
    }
    acc
}

/// `{A, A^2, quotients}` without the free algebra.
fn shallow_family(name: &str, alg: &FiniteAlgebra) -> Result<Family, String> {
    let opts = FamilyOptions {
        max_free: 0,
        ..FamilyOptions::deep()
    };
    lib(Family::build(name, alg, opts))
}

fn deep_family(name: &str, alg: &FiniteAlgebra) -> Result<Family, String> {
    lib(Family::build(name, alg, FamilyOptions::deep()))
}

fn criterion_1() -> Outcome {
    let alg = corpus::median_2();
    let search = lib(find_jonsson_chain(&alg, ORDER_BOUND))?;
    let chain = search.chain().ok_or("no chain found for the median algebra")?;
    ensure!(chain.order == 1, "chain order {} (expected 1)", chain.order);
    let cert = lib(certify_chain_against_relations(&alg, chain))?;
    ensure!(cert.holds, "order-1 chain fails relationally: {:?}", cert.counterexample);

    // The majority term, checked by evaluating its equations directly.
    let maj = lib(find_majority_term(&alg))?.ok_or("no majority term")?;
    let free = lib(build_free_f3(&alg, DEFAULT_SIZE_CAP))?;
    for x in 0..2 {
        for y in 0..2 {
            for args in [[x, x, y], [x, y, x], [y, x, x]] {
                ensure!(free.value(maj.element, &args) == x, "{} is not a majority term at {args:?}", maj.text);
            }
        }
    }

    let shallow = lib(jonsson_order_relational(&shallow_family("median", &alg)?, ORDER_BOUND))?;
    ensure!(shallow.minimal_order == Some(1), "relational order on A, A^2, quotients: {:?}", shallow.minimal_order);
    let deep = lib(jonsson_order_relational(&deep_family("median", &alg)?, ORDER_BOUND))?;
    ensure!(deep.minimal_order == Some(1), "relational order with F(3): {:?}", deep.minimal_order);
    Ok(format!("majority term {}; relational order 1 on {}", maj.text, deep.family))
}

/// Independent M3 test: five elements, three atoms, any two atoms meet to the
/// bottom and join to the top.
fn is_m3(lat: &CongruenceLattice) -> bool {
    if lat.len() != 5 {
        return false;
    }
    let (bot, top) = (lat.bottom(), lat.top());
    let atoms: Vec<usize> = (0..5).filter(|&i| i != bot && i != top).collect();
    atoms.iter().all(|&a| {
        atoms.iter().all(|&b| {
            a == b || {
                let (ra, rb) = (pairs(lat.relation(a)), pairs(lat.relation(b)));
                let full: Pairs = (0..lat.carrier()).flat_map(|x| (0..lat.carrier()).map(move |y| (x, y))).collect();
                let diag: Pairs = (0..lat.carrier()).map(|x| (x, x)).collect();
                naive_meet(&ra, &rb) == diag && naive_compose(&ra, &rb) == full
            }
        })
    })
}

fn criterion_2() -> Outcome {
    let alg = corpus::z2_squared();
    let lat = lib(congruence_lattice(&alg, 12))?;
    ensure!(is_m3(&lat), "Con(Z2 x Z2) is not M3");
    ensure!(!is_distributive(&lat).holds, "Con(Z2 x Z2) reported distributive");

    let atoms: Vec<usize> = (0..lat.len()).filter(|&i| i != lat.bottom() && i != lat.top()).collect();
    let c = |i: usize| lat.get(atoms[i]);
    let trap = lib(check_trapezoid_triple(c(0), c(1), c(2)))?;
    ensure!(!trap.holds, "trapezoid holds on the atom triple");

    let family = deep_family("z2z2", &alg)?;
    let report = lib(jonsson_order_relational(&family, 10))?;
    ensure!(report.verdicts.len() == 10, "expected verdicts for n = 1..10");
    ensure!(report.verdicts.iter().all(|v| !v.holds), "some Jonsson inclusion with n <= 10 holds");
    ensure!(report.minimal_order.is_none(), "relational order found");

    let search = lib(find_jonsson_chain(&alg, ORDER_BOUND))?;
    ensure!(matches!(search, ChainSearch::NoChain), "term search did not prove absence: {search:?}");
    let free = lib(build_free_f3(&alg, DEFAULT_SIZE_CAP))?;
    Ok(format!(
        "Con = M3, trapezoid fails on atoms {atoms:?}, n = 1..10 all fail, no chain in F(3) of {} elements",
        free.len()
    ))
}

fn criterion_3() -> Outcome {
    let alg = corpus::implication_2();
    let free = lib(build_free_f3(&alg, DEFAULT_SIZE_CAP))?;
    ensure!(free.len() <= 256, "F(3) has {} elements, more than 2^8", free.len());
    let search = lib(find_jonsson_chain(&alg, ORDER_BOUND))?;
    let chain = search.chain().ok_or("no chain for Imp")?;
    ensure!(chain.order == 2, "minimal chain order {} (expected 2)", chain.order);
    ensure!(chain.is_valid(), "chain fails its equations");

    let deep = deep_family("imp", &alg)?;
    let report = lib(jonsson_order_relational(&deep, ORDER_BOUND))?;
    ensure!(report.minimal_order == Some(2), "relational order {:?} on {}", report.minimal_order, report.family);

    for m in &deep.members {
        let p3 = lib(is_n_permutable(&m.lattice, 3))?;
        ensure!(p3.permutable.holds, "{} is not 3-permutable", m.name);
    }
    let not_mal = deep.members.iter().any(|m| minimal_permutability(&m.lattice, 2).is_none());
    ensure!(not_mal, "every member is 2-permutable, so the family is not properly 3-permutable");

    let shallow = lib(jonsson_order_relational(&shallow_family("imp", &alg)?, ORDER_BOUND))?;
    Ok(format!(
        "F(3) = {} elements, chain order 2; relational order 2 on {} (order {:?} without F(3), see notes); 3-permutable",
        free.len(),
        report.family,
        shallow.minimal_order
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = RelationSampler::with_density(4, 0.4);
    for i in 0..500 {
        let (x, y, z) = (2 + rng.index(5), 2 + rng.index(5), 2 + rng.index(5));
        let (r, s, t) = (rng.relation(x, y), rng.relation(y, z), rng.relation(x, z));
        ensure!(lib(check_freyd(&r, &s, &t))?.is_none(), "triple {i} violates Freyd's law");
        let (pr, ps, pt) = (pairs(&r), pairs(&s), pairs(&t));
        let lhs = naive_meet(&naive_compose(&pr, &ps), &pt);
        let rhs = naive_compose(&naive_meet(&pr, &naive_compose(&pt, &naive_opposite(&ps))), &ps);
        ensure!(lhs.is_subset(&rhs), "oracle: triple {i} violates Freyd's law");
    }
    Ok("500 triples on carriers 2..6, zero failures (library and oracle)".into())
}

fn criterion_5() -> Outcome {
    let entries = corpus::builtin_corpus();
    ensure!(entries.len() >= 9, "corpus has only {} entries", entries.len());
    let mut two_perm = 0;
    for e in &entries {
        let r = lib(implication_suite(e.name, &e.algebra, FamilyOptions::deep(), ORDER_BOUND))?;
        ensure!(r.violations.is_empty(), "{}: {:?}", e.name, r.violations);
        // Re-derive the implications from the raw properties.
        ensure!(!r.distributive || r.trapezoid, "{}: (a)", e.name);
        ensure!(r.relational_order.is_none() || r.trapezoid, "{}: (b)", e.name);
        ensure!(!r.trapezoid || r.factor_permutable, "{}: (c)", e.name);
        if r.permutability == Some(2) {
            two_perm += 1;
            ensure!(r.relational_order.is_some() == r.distributive, "{}: (d)", e.name);
        }
        ensure!(r.order_monotone, "{}: (e)", e.name);
    }
    Ok(format!("{} algebras ({two_perm} of them 2-permutable), zero violations", entries.len()))
}

fn criterion_6() -> Outcome {
    let mut certified = Vec::new();
    let mut samples = 0;
    for e in corpus::builtin_corpus() {
        let Some(chain) = lib(find_jonsson_chain(&e.algebra, ORDER_BOUND))?.chain().cloned() else {
            continue;
        };
        ensure!(lib(certify_chain_against_relations(&e.algebra, &chain))?.holds, "{}: chain not certified", e.name);
        let model = lib(Model::new(e.name, e.algebra.clone(), 12))?;
        let v = lib(check_theorem_ii_sampled(&model, chain.order, 200, 6))?;
        ensure!(v.holds, "{}: (ii) fails at order {}: {:?}", e.name, chain.order, v.counterexample);
        samples += v.triples_checked;
        certified.push(format!("{}:{}", e.name, chain.order));
    }
    Ok(format!(
        "{samples} samples over [{}], zero failures (S, T compatible reflexive, see notes)",
        certified.join(" ")
    ))
}

fn criterion_7() -> Outcome {
    let mut out = Vec::new();
    for (name, alg, expect) in [("L2^2", corpus::lattice_2_squared(), 4), ("L2^3", corpus::lattice_2_cubed(), 8)] {
        let model = lib(Model::new(name, alg, 12))?;
        let formula = lib(check_factor_formula(&model))?;
        ensure!(formula.holds, "{name}: factor formula fails: {:?}", formula.counterexample);
        let factors = lib(check_boolean_factors(&model))?;
        ensure!(factors.verdict.holds, "{name}: factors are not a Boolean algebra");
        ensure!(factors.size() == expect, "{name}: {} factor relations (expected {expect})", factors.size());
        out.push(format!("{name}: formula on {} triples, |F| = {}", formula.triples_checked, factors.size()));
    }
    Ok(out.join("; "))
}

fn criterion_8() -> Outcome {
    let mut members = 0;
    let mut checked = 0;
    for e in corpus::builtin_corpus() {
        for m in &deep_family(e.name, &e.algebra)?.members {
            let report = lib(is_n_permutable(&m.lattice, 2))?;
            if !report.permutable.holds {
                continue;
            }
            members += 1;
            let lat = &m.lattice;
            for i in 0..lat.len() {
                for j in 0..lat.len() {
                    let join = pairs(lat.relation(lat.join(i, j)));
                    let comp = naive_compose(&pairs(lat.relation(i)), &pairs(lat.relation(j)));
                    ensure!(join == comp, "{}: c{i} v c{j} differs from c{i};c{j}", m.name);
                    checked += 1;
                }
            }
            ensure!(report.join_formula.is_some_and(|v| v.holds), "{}: library join formula fails", m.name);
        }
    }
    ensure!(members > 0, "no 2-permutable members");
    Ok(format!("{members} 2-permutable algebras, {checked} pairs"))
}

fn criterion_9() -> Outcome {
    let mut algebras: Vec<(String, FiniteAlgebra)> =
        corpus::builtin_corpus().into_iter().map(|e| (e.name.to_string(), e.algebra)).collect();
    algebras.push(("affine_z2".into(), corpus::affine_z2()));
    algebras.push(("chain_median_3".into(), corpus::chain_median_3()));
    let mut compared = 0;
    for (name, alg) in algebras.iter().filter(|(_, a)| a.size() <= 6) {
        let lat = lib(congruence_lattice(alg, 12))?;
        let closure: BTreeSet<Vec<usize>> = lat.elements().iter().map(|c| c.as_slice().to_vec()).collect();
        let filtered: BTreeSet<Vec<usize>> =
            lib(congruences_by_enumeration(alg))?.iter().map(|c| c.as_slice().to_vec()).collect();
        ensure!(closure == filtered, "{name}: principal-join closure and enumeration disagree");
        compared += 1;
    }

    let mut rng = RelationSampler::new(9);
    for i in 0..1000 {
        let dims: Vec<usize> = (0..4).map(|_| 1 + rng.index(6)).collect();
        let r = rng.relation(dims[0], dims[1]);
        let s = rng.relation(dims[1], dims[2]);
        let t = rng.relation(dims[2], dims[3]);
        let left = lib(lib(r.compose(&s))?.compose(&t))?;
        let right = lib(r.compose(&lib(s.compose(&t))?))?;
        ensure!(left == right, "composition not associative on triple {i}");
        ensure!(
            pairs(&left) == naive_compose(&naive_compose(&pairs(&r), &pairs(&s)), &pairs(&t)),
            "composition disagrees with the oracle on triple {i}"
        );
    }

    for i in 0..100 {
        let n = 2 + rng.index(5);
        let (r, s, t) = (rng.relation(n, n), rng.relation(n, n), rng.relation(n, n));
        let mut env = Env::new(n);
        env.bind("R", r.clone()).bind("S", s.clone()).bind("T", t.clone());
        let (pr, ps, pt) = (pairs(&r), pairs(&s), pairs(&t));
        let rel = |text: &str| -> Result<Pairs, String> {
            match lib(eval_str(text, &env))? {
                Value::Relation(x) => Ok(pairs(&x)),
                Value::Bool(_) => Err(format!("'{text}' evaluated to a boolean")),
            }
        };
        let truth = |text: &str| -> Result<bool, String> {
            match lib(eval_str(text, &env))? {
                Value::Bool(b) => Ok(b),
                Value::Relation(_) => Err(format!("'{text}' evaluated to a relation")),
            }
        };
        ensure!(rel("R ; S & T")? == naive_meet(&naive_compose(&pr, &ps), &pt), "env {i}: R ; S & T");
        ensure!(rel("~(R ; S)")? == naive_opposite(&naive_compose(&pr, &ps)), "env {i}: ~(R ; S)");
        ensure!(rel("R & (S ; T)")? == naive_meet(&pr, &naive_compose(&ps, &pt)), "env {i}: R & (S ; T)");
        let k = rng.index(5);
        ensure!(rel(&format!("alt(R, S, {k})"))? == naive_alt(&pr, &ps, k, n), "env {i}: alt(R, S, {k})");
        ensure!(
            pairs(&lib(alternating_composite(&r, &s, k))?) == naive_alt(&pr, &ps, k, n),
            "env {i}: alternating_composite"
        );
        let lhs = naive_meet(&pr, &naive_compose(&ps, &pt));
        let rhs = naive_compose(&naive_meet(&pr, &ps), &naive_meet(&pr, &pt));
        ensure!(truth("R & (S ; T) <= (R & S) ; (R & T)")? == lhs.is_subset(&rhs), "env {i}: inclusion");
        ensure!(truth("R ; delta = R")?, "env {i}: R ; delta = R");
    }
    Ok(format!("{compared} lattices compared; 1000 associativity triples; 100 DSL environments"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "majority / order 1 (median algebra)", 1, criterion_1),
        (2, "group counterexample (Z2 x Z2)", 5, criterion_2),
        (3, "implication algebra, order 2", 5, criterion_3),
        (4, "Freyd's modular law", 5, criterion_4),
        (5, "implication suite over the corpus", 30, criterion_5),
        (6, "Jonsson (ii) inclusion, sampled", 30, criterion_6),
        (7, "factor relations of L2^2 and L2^3", 5, criterion_7),
        (8, "join formula for 2-permutable algebras", 5, criterion_8),
        (9, "engine oracles", 30, criterion_9),
    ];
    let mut failed = 0;
    for (id, title, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= Duration::from_secs(budget);
        let (ok, detail) = match outcome {
            Ok(d) if in_budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget} s budget")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {id}: {} {title} [{:.2} s / {budget} s] {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
