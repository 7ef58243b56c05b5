//! Exact computations in the q-difference operator algebra `D_q(Cⁿ)` at a
//! root of unity: PBW arithmetic, central fibers as matrix algebras, Γ-graded
//! invariants and fiberwise quantum Hamiltonian reduction.

pub mod expr;
pub mod fiber;
pub mod field;
pub mod gamma;
pub mod lattice;
pub mod linalg;
pub mod pbw;
pub mod quiver_examples;
pub mod suite;

pub use field::{CycField, CycScalar, FieldError};
pub use pbw::{DqAlgebra, Generator, Monomial, PbwElement, TorusEmbedding};
