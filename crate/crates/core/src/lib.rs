//! Trapped-ion simulation of the dynamical Casimir effect.
//!
//! The modules build up from exact quadratic dynamics ([`dynamics`]) to the
//! ideal moving-mirror cavity ([`moore`]), its lattice discretization
//! ([`field`]), the ion-chain realization ([`trap`]) and the experimental
//! backgrounds and readout ([`readout`]).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod field;
pub mod interp;
pub mod linalg;
pub mod moore;
pub mod quad;
pub mod readout;
pub mod trap;

pub use error::{Error, Result};
