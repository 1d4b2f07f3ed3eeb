//! Numerical laboratory for the critical biharmonic equation
//! `Δ²u = u^((N+4)/(N-4))` on the unit ball with a small concentric hole,
//! under Navier boundary conditions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod band;
pub mod dimension;
pub mod error;
pub mod expansion;
pub mod fdcheck;
pub mod green;
pub mod grid;
pub mod identities;
pub mod par;
pub mod quadrature;
pub mod reduced;
pub mod scaling;
pub mod solver;

pub use dimension::Dimension;
pub use error::{Error, Result};
