//! Critical values of eikonal Hamilton-Jacobi equations on embedded networks.
//!
//! The critical value `c` is recovered from the large-time behavior of the
//! evolutive problem `u_t + H(s, u_s) = 0`, discretized with a
//! semi-Lagrangian scheme whose vertex update is clipped by flux limiters.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod benchmarks;
pub mod critical;
pub mod error;
pub mod hamiltonians;
pub mod network;
pub mod optim;
pub mod scheme;

pub use error::{Error, Result};
