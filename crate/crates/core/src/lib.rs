//! Numerical laboratory for iterative fixed-point schemes under contractive-type
//! conditions: condition certificates, multistep and S-iteration runs, and
//! coupled audits of the inequalities that tie their convergence together.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod cli;
pub mod conditions;
pub mod convergence;
pub mod equivalence;
pub mod error;
pub mod geometry;
pub mod mapping;
pub mod norm;
pub mod report;
pub mod schemes;

pub use error::{Error, Result};
