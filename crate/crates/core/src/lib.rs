//! Qudit magic-simplex toolkit.
//!
//! Builds the simplex of n-pair qudit states spanned by Weyl-conjugated
//! vertex states, classifies parametrized families by positivity, partial
//! transposition and entanglement witnesses, and simulates the two-copy
//! distillation protocol.

pub mod criteria;
pub mod distill;
pub mod error;
pub mod linalg;
pub mod scan;
pub mod simplex;
pub mod weyl;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{CMatrix, DensityMatrix, SystemShape};
pub use simplex::{Family, FamilyParams, SimplexPoint};
pub use weyl::WeylIndex;
