//! Partial-separability and producibility tests for continuous-variable
//! multimode states, built on sign-matrix uncertainty criteria.

pub mod combin;
pub mod error;
pub mod ghzcert;
mod linalg;
pub mod model;
pub mod oracle;
pub mod reference;
pub mod signcrit;

pub use error::{Error, Result};
pub use linalg::C64;
