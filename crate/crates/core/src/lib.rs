//! Discrete exterior calculus (DEC) on oriented manifold simplicial meshes.
//!
//! The building blocks are a combinatorial layer ([`complex`]), a metric layer
//! built on circumcentric duals ([`geometry`]), diagonal Hodge star operators
//! including a permeability-weighted variant ([`hodge`]), a small sparse
//! solver kit ([`linalg`]), a mixed flux/pressure Darcy solver ([`darcy`]),
//! and Whitney-form interpolation with error norms ([`whitney`]).
//!
//! Everything here is `no_std` + `alloc`; file formats and the command line
//! front end live in the companion `dec-darcy` crate.

#![no_std]

extern crate alloc;

pub mod complex;
pub mod darcy;
pub mod geometry;
pub mod hodge;
pub mod linalg;
pub mod whitney;

mod quad;

pub use complex::{Cochain, CochainKind, SimplicialComplex};
pub use darcy::{DarcyProblem, DarcySolution, SolverChoice};
pub use geometry::{CenterRule, DualMeasures};
pub use hodge::DiagonalOperator;
pub use linalg::{Csr, SaddleSystem};
