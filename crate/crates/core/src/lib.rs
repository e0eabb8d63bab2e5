#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod complex;
pub mod error;
pub mod manifold;
pub mod operator_identities;
pub mod sparse;
pub mod spectrum;

pub use error::{Error, Result};
