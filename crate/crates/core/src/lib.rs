//! Congruency-constrained integer programs over totally unimodular matrices.

pub mod error;
pub mod baseblock;
pub mod cone;
pub mod exact;
pub mod harness;
pub mod lp;
pub mod model;
pub mod pattern;
pub mod residue;
pub mod seymour;
pub mod structure;

pub use error::{Error, Result};
pub use exact::{IntMatrix, TuMatrix};
pub use model::{Outcome, Polyhedron, RCctufInstance};
