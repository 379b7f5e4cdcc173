//! Mesh IO, analytic test cases, experiment harness and the command line
//! front end for the `dec-core` Darcy solver.

pub mod cases;
pub mod cli;
pub mod harness;
pub mod meshio;
