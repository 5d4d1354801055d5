//! Region-of-attraction estimation for nodes of networked dynamical systems.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod hjsolver;
pub mod netmodel;
pub mod oracle;
pub mod roa;
pub mod weno;

pub use error::{Error, Result};
