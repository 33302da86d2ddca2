//! Riemann problems, delta shocks and fast-slow analysis for a two-equation traffic-type system.

// negated float comparisons are deliberate: they reject NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod delta;
pub mod error;
pub mod gspt;
pub mod io;
pub mod llf;
pub mod model;
pub mod ode;
pub mod riemann;
pub mod roots;
pub mod waves;

pub use error::{Error, Result};
pub use model::{ConservedState, Params, State};
