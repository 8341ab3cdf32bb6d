//! Nørlund and Bühring coefficients, Meijer G-function expansions around
//! z = 1, and a residual-based identity checker.

pub mod bernoulli;
pub mod buhring;
pub mod cli;
pub mod error;
pub mod gfunction;
pub mod hyper;
pub mod identities;
pub mod norlund;
pub mod quad;
pub mod report;
pub mod scalar;
mod series;
pub mod wide;

pub use error::{Error, Result};
pub use norlund::{CoeffTable, Kind, Method, ParamSet};
pub use scalar::{Field, Mode, Scalar, C64};
