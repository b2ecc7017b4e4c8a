#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod hill;
pub mod lyapunov;
pub mod maps;
pub mod numerics;
pub mod transfer;

pub use error::{Error, Result};
