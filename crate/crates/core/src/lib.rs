//! Symmetry reduction, bifurcations, critical values and monodromy of the
//! axially symmetric Hamiltonian 1:1:−2 resonance.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcations;
pub mod cli;
pub mod critical_values;
pub mod error;
pub mod model;
pub mod monodromy;
pub mod ode;
pub mod poly;
pub mod reduced_dynamics;
pub mod reduced_space;
pub mod selfcheck;

pub use error::{Error, Result};
