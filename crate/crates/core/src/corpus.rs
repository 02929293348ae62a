//! Built-in algebras, addressable from the CLI as `corpus:NAME`.

use crate::algebra::{power, product, FiniteAlgebra, Operation};
use crate::congruence::{is_distributive, minimal_permutability};
use crate::error::Result;
use crate::lemmas::{jonsson_order_relational, Family, FamilyOptions, PERMUTABILITY_BOUND};
use crate::terms::find_jonsson_chain;

/// What the test suite re-verifies for a corpus entry. All properties except
/// `chain_order` are evaluated on the deep family of the entry: the algebra,
/// its square, its quotients and, when small enough, its free algebra on
/// three generators. `chain_order` comes from term search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectations {
    pub distributive: bool,
    /// Least `n` (searched up to 4) for which every family member is n-permutable.
    pub permutability: Option<usize>,
    /// Minimal Jonsson chain order found in the free algebra on three generators.
    pub chain_order: Option<usize>,
    /// Minimal relational Jonsson order on the deep family.
    pub relational_order: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub algebra: FiniteAlgebra,
    pub expect: Expectations,
}

fn op(name: &str, arity: usize, size: usize, f: impl Fn(&[usize]) -> usize) -> Operation {
    Operation::from_fn(name, arity, size, f).expect("corpus operation is well formed")
}

fn alg(size: usize, ops: Vec<Operation>) -> FiniteAlgebra {
    FiniteAlgebra::new(size, ops).expect("corpus algebra is well formed")
}

/// A lattice on `{0..size}` from its order relation.
fn lattice_from_order(size: usize, leq: impl Fn(usize, usize) -> bool) -> FiniteAlgebra {
    let leq = &leq;
    let meet = move |a: usize, b: usize| {
        (0..size)
            .filter(|&z| leq(z, a) && leq(z, b))
            .find(|&z| (0..size).all(|w| !(leq(w, a) && leq(w, b)) || leq(w, z)))
            .expect("order is a lattice")
    };
    let join = move |a: usize, b: usize| {
        (0..size)
            .filter(|&z| leq(a, z) && leq(b, z))
            .find(|&z| (0..size).all(|w| !(leq(a, w) && leq(b, w)) || leq(z, w)))
            .expect("order is a lattice")
    };
    alg(
        size,
        vec![
            op("meet", 2, size, |x| meet(x[0], x[1])),
            op("join", 2, size, |x| join(x[0], x[1])),
        ],
    )
}

/// The two-element lattice.
pub fn lattice_2() -> FiniteAlgebra {
    lattice_from_order(2, |a, b| a <= b)
}

/// The three-element chain as a lattice.
pub fn chain_lattice_3() -> FiniteAlgebra {
    lattice_from_order(3, |a, b| a <= b)
}

pub fn lattice_2_squared() -> FiniteAlgebra {
    power(&lattice_2(), 2).expect("power of a lattice")
}

pub fn lattice_2_cubed() -> FiniteAlgebra {
    power(&lattice_2(), 3).expect("power of a lattice")
}

/// The pentagon: `0 < 1 < 2 < 4` and `0 < 3 < 4`.
pub fn n5() -> FiniteAlgebra {
    lattice_from_order(5, |a, b| a == b || a == 0 || b == 4 || (a == 1 && b == 2))
}

/// The diamond: three atoms `1, 2, 3` between `0` and `4`.
pub fn m3() -> FiniteAlgebra {
    lattice_from_order(5, |a, b| a == b || a == 0 || b == 4)
}

/// The two-element Boolean algebra with meet, join, complement and constants.
pub fn boolean_2() -> FiniteAlgebra {
    alg(
        2,
        vec![
            op("meet", 2, 2, |x| x[0] & x[1]),
            op("join", 2, 2, |x| x[0] | x[1]),
            op("not", 1, 2, |x| 1 - x[0]),
            op("zero", 0, 2, |_| 0),
            op("one", 0, 2, |_| 1),
        ],
    )
}

/// `{0, 1}` with the ternary majority (median) operation.
pub fn median_2() -> FiniteAlgebra {
    alg(2, vec![op("maj", 3, 2, |x| usize::from(x[0] + x[1] + x[2] >= 2))])
}

/// `{0, 1}` with implication `x -> y = (not x) or y`.
pub fn implication_2() -> FiniteAlgebra {
    alg(2, vec![op("imp", 2, 2, |x| usize::from(x[0] == 0 || x[1] == 1))])
}

/// The group `Z2` with addition, negation and zero.
pub fn z2() -> FiniteAlgebra {
    alg(
        2,
        vec![
            op("add", 2, 2, |x| (x[0] + x[1]) % 2),
            op("neg", 1, 2, |x| x[0]),
            op("zero", 0, 2, |_| 0),
        ],
    )
}

pub fn z2_squared() -> FiniteAlgebra {
    product(&z2(), &z2()).expect("same signature").0
}

/// `Z2` as an affine space: only the ternary operation `x + y + z`.
pub fn affine_z2() -> FiniteAlgebra {
    alg(2, vec![op("minority", 3, 2, |x| (x[0] + x[1] + x[2]) % 2)])
}

/// `{0, 1, 2}` with the dual discriminator `d(x, y, z) = x if x = y, else z`,
/// a majority operation.
pub fn majority_3() -> FiniteAlgebra {
    alg(3, vec![op("d", 3, 3, |x| if x[0] == x[1] { x[0] } else { x[2] })])
}

/// The median operation on the three-element chain.
pub fn chain_median_3() -> FiniteAlgebra {
    alg(
        3,
        vec![op("med", 3, 3, |x| {
            let mut v = [x[0], x[1], x[2]];
            v.sort_unstable();
            v[1]
        })],
    )
}

const fn expect(
    distributive: bool,
    permutability: Option<usize>,
    chain_order: Option<usize>,
    relational_order: Option<usize>,
) -> Expectations {
    Expectations {
        distributive,
        permutability,
        chain_order,
        relational_order,
    }
}

/// Every built-in entry, in a fixed order.
pub fn builtin_corpus() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry {
            name: "l2",
            description: "two-element lattice",
            algebra: lattice_2(),
            expect: expect(true, Some(3), Some(1), Some(1)),
        },
        CorpusEntry {
            name: "l2sq",
            description: "square of the two-element lattice",
            algebra: lattice_2_squared(),
            expect: expect(true, Some(3), Some(1), Some(1)),
        },
        CorpusEntry {
            name: "chain3",
            description: "three-element chain lattice",
            algebra: chain_lattice_3(),
            expect: expect(true, Some(3), Some(1), Some(1)),
        },
        CorpusEntry {
            name: "bool2",
            description: "two-element Boolean algebra",
            algebra: boolean_2(),
            expect: expect(true, Some(2), Some(1), Some(1)),
        },
        CorpusEntry {
            name: "median",
            description: "two-element median (majority) algebra",
            algebra: median_2(),
            expect: expect(true, Some(3), Some(1), Some(1)),
        },
        CorpusEntry {
            name: "imp",
            description: "two-element implication algebra",
            algebra: implication_2(),
            expect: expect(true, Some(3), Some(2), Some(2)),
        },
        CorpusEntry {
            name: "z2",
            description: "the group Z2",
            algebra: z2(),
            expect: expect(false, Some(2), None, None),
        },
        CorpusEntry {
            name: "z2z2",
            description: "the group Z2 x Z2",
            algebra: z2_squared(),
            expect: expect(false, Some(2), None, None),
        },
        CorpusEntry {
            name: "n5",
            description: "pentagon lattice N5",
            algebra: n5(),
            expect: expect(true, Some(2), Some(1), Some(1)),
        },
        CorpusEntry {
            name: "m3",
            description: "diamond lattice M3",
            algebra: m3(),
            expect: expect(true, Some(4), Some(1), Some(1)),
        },
        CorpusEntry {
            name: "maj3",
            description: "three-element dual discriminator algebra",
            algebra: majority_3(),
            expect: expect(true, Some(4), Some(1), Some(1)),
        },
    ]
}

pub fn lookup(name: &str) -> Option<CorpusEntry> {
    builtin_corpus().into_iter().find(|e| e.name == name)
}

/// Largest order the corpus checks search for.
pub const ORDER_BOUND: usize = 10;

/// Recomputes the properties recorded in [`Expectations`] for an algebra.
pub fn observe(algebra: &FiniteAlgebra) -> Result<Expectations> {
    let family = Family::build("A", algebra, FamilyOptions::deep())?;
    let distributive = family.members.iter().all(|m| is_distributive(&m.lattice).holds);
    let permutability = family
        .members
        .iter()
        .map(|m| minimal_permutability(&m.lattice, PERMUTABILITY_BOUND))
        .try_fold(2, |acc, p| p.map(|p| acc.max(p)));
    let chain_order = find_jonsson_chain(algebra, ORDER_BOUND)?.minimal_order();
    let relational_order = jonsson_order_relational(&family, ORDER_BOUND)?.exact_order;
    Ok(Expectations {
        distributive,
        permutability,
        chain_order,
        relational_order,
    })
}
