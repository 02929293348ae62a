//! Command-line driver.
//!
//! Exit status: 0 when the property holds (or the command just reports), 1
//! when a counterexample was found, 2 on usage or input errors.

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use congdist::algebra::FiniteAlgebra;
use congdist::congruence::{
    check_factor_permutability, congruence_lattice, is_distributive, is_modular, minimal_permutability,
    DEFAULT_MAX_SIZE,
};
use congdist::corpus;
use congdist::dsl::{self, Env, Value};
use congdist::io;
use congdist::lemmas::{
    check_family, check_jonsson, check_permutes, check_shifting, check_theorem_ii_sampled, check_trapezoid,
    jonsson_order_relational, Family, FamilyOptions, RelationSampler,
};
use congdist::relation::check_freyd;
use congdist::terms::{
    build_free_f3, certify_chain_against_relations, find_jonsson_chain_in, find_near_unanimity, near_unanimity_in,
    near_unanimity_order_bound, ChainSearch, DEFAULT_SIZE_CAP,
};
use congdist::verdict::{Counterexample, Verdict, SCHEMA_VERSION};
use congdist::{Error, Result};

#[derive(Parser)]
#[command(name = "congdist", version, about = "Decide congruence-distributivity conditions on finite algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Congruence lattice of an algebra.
    Conlat {
        /// Algebra file, or corpus:NAME.
        file: String,
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
    },
    /// Check a property on every congruence triple.
    Check {
        property: Property,
        file: String,
        /// Check the algebra, its square, its quotients and its free algebra F(3).
        #[arg(long)]
        deep: bool,
        #[arg(long)]
        json: bool,
        /// Order for `jonsson` and `theorem-ii`.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Random samples for `freyd` and `theorem-ii`.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
    },
    /// Minimal relational Jonsson order.
    JonssonOrder {
        file: String,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
        #[arg(long)]
        deep: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
    },
    /// Term search in free algebras.
    Terms {
        kind: TermKind,
        file: String,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
        /// Arity for `nu`.
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
        cap: usize,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a relation expression or statement.
    Eval {
        expr: String,
        /// Algebra whose congruences are bound as c0, c1, ... (canonical order).
        #[arg(long)]
        model: String,
        /// Extra relation bindings NAME=FILE, or NAME='rel P on N; a b; ...' inline.
        #[arg(long = "rel", value_name = "NAME=FILE")]
        rels: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
    },
    /// Built-in algebras.
    Corpus {
        action: CorpusAction,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Trapezoid,
    Shifting,
    FactorPerm,
    Freyd,
    Jonsson,
    PermutesWith,
    Distributive,
    Modular,
    TheoremIi,
}

#[derive(Clone, Copy, ValueEnum)]
enum TermKind {
    Jonsson,
    Majority,
    Nu,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusAction {
    List,
    Verify,
}

fn load(spec: &str) -> Result<(String, FiniteAlgebra)> {
    if let Some(name) = spec.strip_prefix("corpus:") {
        let entry = corpus::lookup(name).ok_or_else(|| Error::UnknownCorpus(name.to_string()))?;
        Ok((spec.to_string(), entry.algebra))
    } else {
        Ok((spec.to_string(), io::load_algebra(Path::new(spec))?))
    }
}

fn family(alg: &FiniteAlgebra, name: &str, deep: bool, max_size: usize) -> Result<Family> {
    let opts = FamilyOptions {
        deep,
        max_size,
        ..FamilyOptions::default()
    };
    Family::build(name, alg, opts)
}

fn status(holds: bool) -> ExitCode {
    ExitCode::from(if holds { 0 } else { 1 })
}

fn print_verdict(v: &Verdict, algebra: &str, n: Option<usize>, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(&v.report(algebra, n)).expect("verdict serialises"));
        return;
    }
    let checked = format!("{} checked, {} vacuous", v.triples_checked, v.skipped_vacuous);
    match &v.counterexample {
        None => println!("{}: holds on {algebra} ({checked})", v.check),
        Some(cx) => println!("{}: FAILS on {algebra} ({checked})\n  {}", v.check, describe(cx)),
    }
}

fn describe(cx: &Counterexample) -> String {
    let mut parts = Vec::new();
    if let Some(m) = &cx.member {
        parts.push(format!("in {m}"));
    }
    if !cx.indices.is_empty() {
        parts.push(format!("indices {:?}", cx.indices));
    }
    if let Some((x, y)) = cx.pair {
        parts.push(format!("pair ({x}, {y})"));
    }
    if !cx.witnesses.is_empty() {
        parts.push(format!("witnesses {:?}", cx.witnesses));
    }
    if let Some(n) = cx.order {
        parts.push(format!("at order {n}"));
    }
    parts.join(", ")
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Conlat {
            file,
            dot,
            json,
            max_size,
        } => {
            let (name, alg) = load(&file)?;
            let lat = congruence_lattice(&alg, max_size)?;
            if dot {
                print!("{}", lat.to_dot(&name));
            } else if json {
                println!("{}", serde_json::to_string_pretty(&lat.to_json(&name)).expect("json"));
            } else {
                println!("Con({name}): {} congruences", lat.len());
                for (i, c) in lat.elements().iter().enumerate() {
                    println!("  c{i} = {c}");
                }
                println!("distributive: {}", is_distributive(&lat).holds);
                println!("modular: {}", is_modular(&lat).holds);
                match minimal_permutability(&lat, 6) {
                    Some(p) => println!("permutability: {p}"),
                    None => println!("permutability: none up to 6"),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            property,
            file,
            deep,
            json,
            n,
            samples,
            seed,
            max_size,
        } => {
            let (name, alg) = load(&file)?;
            let fam = family(&alg, &name, deep, max_size)?;
            let (verdict, order) = match property {
                Property::Trapezoid => (check_family(&fam, "trapezoid", check_trapezoid), None),
                Property::Shifting => (check_family(&fam, "shifting", check_shifting), None),
                Property::PermutesWith => (check_family(&fam, "permutes-with", check_permutes), None),
                Property::Jonsson => {
                    let parts = fam.members.iter().map(|m| check_jonsson(m, n)).collect::<Result<Vec<_>>>()?;
                    (Verdict::merge("jonsson", parts), Some(n))
                }
                Property::FactorPerm => {
                    let parts = fam
                        .members
                        .iter()
                        .map(|m| {
                            check_factor_permutability(&m.algebra, &m.lattice).map(|mut v| {
                                if let Some(cx) = v.counterexample.take() {
                                    v.counterexample = Some(cx.in_member(m.name.clone()));
                                }
                                v
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    (Verdict::merge("factor-perm", parts), None)
                }
                Property::Distributive | Property::Modular => {
                    let (label, f): (&str, fn(&_) -> Verdict) = match property {
                        Property::Distributive => ("distributive", is_distributive),
                        _ => ("modular", is_modular),
                    };
                    let parts = fam.members.iter().map(|m| {
                        let mut v = f(&m.lattice);
                        if let Some(cx) = v.counterexample.take() {
                            v.counterexample = Some(cx.in_member(m.name.clone()));
                        }
                        v
                    });
                    (Verdict::merge(label, parts), None)
                }
                Property::Freyd => (freyd(&fam, samples, seed)?, None),
                Property::TheoremIi => {
                    let parts = fam
                        .members
                        .iter()
                        .map(|m| check_theorem_ii_sampled(m, n, samples, seed))
                        .collect::<Result<Vec<_>>>()?;
                    (Verdict::merge("theorem-ii", parts), Some(n))
                }
            };
            print_verdict(&verdict, &name, order, json);
            Ok(status(verdict.holds))
        }
        Command::JonssonOrder {
            file,
            max_n,
            deep,
            json,
            max_size,
        } => {
            let (name, alg) = load(&file)?;
            let fam = family(&alg, &name, deep, max_size)?;
            let report = jonsson_order_relational(&fam, max_n)?;
            if json {
                let doc = json!({
                    "schema": SCHEMA_VERSION,
                    "check": "jonsson-order",
                    "algebra": name,
                    "n": max_n,
                    "holds": report.minimal_order.is_some(),
                    "minimal_order": report.minimal_order,
                    "definitely_none": report.definitely_none,
                    "family": report.family,
                    "verdicts": report.verdicts.iter().enumerate()
                        .map(|(i, v)| v.report(&name, Some(i + 1)))
                        .collect::<Vec<_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            } else {
                println!("{}", report.family);
                match report.minimal_order {
                    Some(o) => println!("minimal Jonsson order: {o}"),
                    None if report.definitely_none => println!("no Jonsson order exists"),
                    None => println!("no Jonsson order up to {max_n}"),
                }
                if let Some(cx) = report.verdicts.iter().rev().find_map(|v| v.counterexample.as_ref()) {
                    println!("  last failure: {}", describe(cx));
                }
            }
            Ok(status(report.minimal_order.is_some()))
        }
        Command::Terms {
            kind,
            file,
            max_n,
            k,
            cap,
            json,
        } => {
            let (name, alg) = load(&file)?;
            terms(kind, &name, &alg, max_n, k, cap, json)
        }
        Command::Eval {
            expr,
            model,
            rels,
            max_size,
        } => {
            let (_, alg) = load(&model)?;
            let lat = congruence_lattice(&alg, max_size)?;
            let mut env = Env::new(alg.size());
            for i in 0..lat.len() {
                env.bind(format!("c{i}"), lat.relation(i).clone());
            }
            for binding in rels {
                let (bname, source) = binding
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidArgument(format!("expected NAME=FILE, got '{binding}'")))?;
                let rel = if source.trim_start().starts_with("rel ") {
                    io::parse_relation(&source.replace(';', "\n"))?
                } else {
                    io::load_relation(Path::new(source))?
                };
                if rel.relation.rows() != alg.size() {
                    return Err(Error::DimensionMismatch(format!(
                        "relation {bname} is on {} elements, the model has {}",
                        rel.relation.rows(),
                        alg.size()
                    )));
                }
                env.bind(bname, rel.relation);
            }
            match dsl::eval_str(&expr, &env)? {
                Value::Bool(b) => {
                    println!("{b}");
                    Ok(status(b))
                }
                Value::Relation(r) => {
                    print!("{}", io::format_relation("result", &r));
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::Corpus { action, json } => corpus_cmd(action, json),
    }
}

/// Freyd's law on all congruence triples of every member, then on seeded
/// random relations over the base carrier.
fn freyd(fam: &Family, samples: usize, seed: u64) -> Result<Verdict> {
    let mut checked = 0;
    for m in &fam.members {
        let k = m.lattice.len();
        for r in 0..k {
            for s in 0..k {
                for t in 0..k {
                    checked += 1;
                    let rel = |i| m.lattice.relation(i);
                    if let Some(pair) = check_freyd(rel(r), rel(s), rel(t))? {
                        let cx = Counterexample::indices(vec![r, s, t])
                            .with_pair(pair, vec![])
                            .in_member(m.name.clone());
                        return Ok(Verdict::fail("freyd", cx, checked, 0));
                    }
                }
            }
        }
    }
    let n = fam.base().algebra.size();
    let mut sampler = RelationSampler::new(seed);
    for i in 0..samples {
        checked += 1;
        let (r, s, t) = (sampler.relation(n, n), sampler.relation(n, n), sampler.relation(n, n));
        if let Some(pair) = check_freyd(&r, &s, &t)? {
            let cx = Counterexample::indices(vec![i]).with_pair(pair, vec![]);
            return Ok(Verdict::fail("freyd", cx, checked, 0));
        }
    }
    Ok(Verdict::pass("freyd", checked, 0))
}

fn terms(kind: TermKind, name: &str, alg: &FiniteAlgebra, max_n: usize, k: usize, cap: usize, json: bool) -> Result<ExitCode> {
    match kind {
        TermKind::Jonsson => {
            let free = build_free_f3(alg, cap)?;
            let search = find_jonsson_chain_in(&free, max_n)?;
            let certified = match search.chain() {
                Some(chain) => Some(certify_chain_against_relations(alg, chain)?.holds),
                None => None,
            };
            if json {
                let doc = json!({
                    "schema": SCHEMA_VERSION,
                    "check": "terms-jonsson",
                    "algebra": name,
                    "n": max_n,
                    "holds": search.chain().is_some(),
                    "free_size": free.len(),
                    "order": search.minimal_order(),
                    "exists": !matches!(search, ChainSearch::NoChain),
                    "terms": search.chain().map(|c| c.terms.iter().map(|t| t.text.clone()).collect::<Vec<_>>()),
                    "certified": certified,
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            } else {
                println!("F(3) of {name}: {} elements", free.len());
                match &search {
                    ChainSearch::Found(chain) => {
                        println!("minimal Jonsson chain order: {}", chain.order);
                        for (i, t) in chain.terms.iter().enumerate() {
                            println!("  p{} = {t}", i + 1);
                        }
                        if let Some(c) = certified {
                            println!("relational certification on A, A^2, quotients, F(3): {}", if c { "pass" } else { "FAIL" });
                        }
                    }
                    ChainSearch::ExceedsMax { minimal_order } => {
                        println!("minimal chain order {minimal_order} exceeds --max-n {max_n}")
                    }
                    ChainSearch::NoChain => println!("no Jonsson chain of any order exists"),
                }
            }
            Ok(status(search.chain().is_some() && certified != Some(false)))
        }
        TermKind::Majority | TermKind::Nu => {
            let arity = if matches!(kind, TermKind::Majority) { 3 } else { k };
            if arity < 3 {
                return Err(Error::InvalidArgument("near-unanimity arity must be at least 3".into()));
            }
            let term = if arity == 3 {
                near_unanimity_in(&build_free_f3(alg, cap)?)
            } else if cap == DEFAULT_SIZE_CAP {
                find_near_unanimity(alg, arity)?
            } else {
                near_unanimity_in(&congdist::terms::FreeAlgebra::build(alg, arity, cap)?)
            };
            if json {
                let doc = json!({
                    "schema": SCHEMA_VERSION,
                    "check": if arity == 3 { "terms-majority" } else { "terms-nu" },
                    "algebra": name,
                    "n": arity,
                    "holds": term.is_some(),
                    "term": term.as_ref().map(|t| t.text.clone()),
                    "order_bound": term.as_ref().map(|_| near_unanimity_order_bound(arity)),
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            } else {
                match &term {
                    Some(t) => println!(
                        "{arity}-ary near-unanimity term: {t}\nimplies Jonsson order <= {}",
                        near_unanimity_order_bound(arity)
                    ),
                    None => println!("no {arity}-ary near-unanimity term"),
                }
            }
            Ok(status(term.is_some()))
        }
    }
}

fn corpus_cmd(action: CorpusAction, json: bool) -> Result<ExitCode> {
    let entries = corpus::builtin_corpus();
    match action {
        CorpusAction::List => {
            if json {
                let doc: Vec<_> = entries
                    .iter()
                    .map(|e| json!({"name": e.name, "description": e.description, "size": e.algebra.size()}))
                    .collect();
                println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            } else {
                for e in &entries {
                    println!("{:8} {:2}  {}", e.name, e.algebra.size(), e.description);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        CorpusAction::Verify => {
            let mut all = true;
            let mut docs = Vec::new();
            for e in &entries {
                let observed = corpus::observe(&e.algebra)?;
                let ok = observed == e.expect;
                all &= ok;
                if json {
                    docs.push(json!({
                        "name": e.name,
                        "holds": ok,
                        "expected": format!("{:?}", e.expect),
                        "observed": format!("{observed:?}"),
                    }));
                } else {
                    println!("{} {:8} {:?}", if ok { "ok  " } else { "FAIL" }, e.name, observed);
                    if !ok {
                        println!("     expected {:?}", e.expect);
                    }
                }
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&json!({"schema": SCHEMA_VERSION, "check": "corpus-verify", "holds": all, "entries": docs})).expect("json"));
            }
            Ok(status(all))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
