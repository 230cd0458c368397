#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod operators;
pub mod simulate;
pub mod spectral;
pub mod state_space;
pub mod verify;

pub use error::{Error, Result};
