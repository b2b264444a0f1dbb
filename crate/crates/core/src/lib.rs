//! Exact arithmetic for lattice sequences, filtrations and skew strata of the
//! unramified unitary group U(2,2) over `Q_p`, with finite verification of
//! Hecke algebra relations at small odd `p`.
// `x - x` is how a zero inherits the prime and precision of `x`.
#![allow(clippy::eq_op)]

pub mod error;
pub mod exec;
pub mod filtration;
pub mod kf;
pub mod cyclo;
pub mod lattice;
pub mod matrix;
pub mod padic;
pub mod hecke;
pub mod strata;
pub mod suites;
pub mod zp_lattice;

pub use error::{Error, Result};
