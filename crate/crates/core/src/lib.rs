//! Finite-model toolkit for congruence distributivity.
//!
//! The crate decides, on concrete finite algebras, the relational conditions
//! that characterise congruence distributivity: the trapezoid and shifting
//! lemmas, Jonsson inclusions `R ∧ (S ; T) ≤ (R ∧ S, R ∧ T)_{n+1}`,
//! n-permutability and properties of factor relations. Independently, it
//! searches free algebras on three generators for Jonsson terms, so the two
//! sides of Jonsson's theorem can be compared instance by instance.
//!
//! * [`algebra`]: finite algebras, products, quotients, subalgebras.
//! * [`relation`]: bitset binary relations and the relation calculus.
//! * [`congruence`]: congruence lattices and lattice-level checks.
//! * [`lemmas`]: inclusion checkers over congruence triples and families.
//! * [`terms`]: free algebras and term search.
//! * [`dsl`], [`io`], [`corpus`]: expression language, file formats, built-ins.

pub mod algebra;
pub mod congruence;
pub mod corpus;
pub mod dsl;
pub mod error;
pub mod io;
pub mod lemmas;
pub mod relation;
pub mod terms;
pub mod verdict;

pub use algebra::{FiniteAlgebra, Operation};
pub use congruence::{Congruence, CongruenceLattice};
pub use error::{Error, Result};
pub use relation::BinaryRelation;
pub use verdict::Verdict;
