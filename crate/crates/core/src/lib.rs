//! Symbolic-numeric engine for nonlinear-connection geometry.

pub mod ansatz5d;
pub mod deformations;
pub mod expr;
pub mod geometry;
pub mod harness;
pub mod random;
pub mod sample;
pub mod solver;
