//! Cost and external-impact evaluation of urban freight distribution schemes.
//!
//! The [`model`] module holds the continuous-approximation tour model,
//! [`scheme`] composes layers into direct, consolidation-center and hub
//! schemes, [`optimizer`] searches vehicle mixes and [`sensitivity`] runs
//! parameter sweeps.

pub mod error;
pub mod model;
pub mod optimizer;
pub mod scheme;
pub mod sensitivity;

pub use error::{Constraint, Error, Result};
