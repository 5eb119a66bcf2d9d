//! Hecke eigenforms of level one, certified location and counting of their real zeros,
//! and a Gaussian random-coefficient model for the same statistics.

pub mod arith;
pub mod census;
pub mod error;
pub mod evaluator;
pub mod model;
pub mod modforms;
pub mod signs;

pub use census::Segment;
pub use error::{Error, Result};
pub use modforms::{eigenforms, lambda, verify_hecke, Eigenform, HeckeReport, QExpansion};
