//! Schatten-class machinery for operator fields over a sampled base space.
//!
//! Operators over a compact base are represented as matrix fields: one dense
//! complex matrix per grid point. On top of that representation the crate
//! computes pointwise Schatten norms and their sup norms, the algebra-valued
//! trace (both fiberwise and through frame series), Fredholm determinants of
//! `id + T` by three routes, operator zeta functions with angular tail
//! bounds, and the summability data of a small family of example cycles.

pub mod base;
pub mod cycles;
pub mod error;
pub mod frames;
pub mod fredholm;
pub mod gen;
pub mod io;
mod linalg;
pub mod opfield;
pub mod schatten;
pub mod truncation;
pub mod zeta;

/// The fiber scalar type.
pub type C64 = nalgebra::Complex<f64>;

pub use base::{dini_monitor, dini_monitor_with_tail, sup_norm, ConvergenceReport, Grid, ScalarField};
pub use error::{FieldError, Result};
pub use frames::{Frame, ModuleSpec};
pub use opfield::{NormKind, OperatorField, VectorField};
