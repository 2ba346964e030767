//! Sign-changing multi-peak standing waves for the nonlinear Schrödinger
//! equation with a point interaction, −Δ_η u + u = u|u|^{p−2}, built by a
//! Lyapunov–Schmidt reduction onto the one-parameter family of regular
//! polygons of peaks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod closed_forms;
pub mod error;
pub mod estimate_validator;
pub mod field_space;
pub mod grid;
pub mod ground_state;
pub mod krylov;
pub mod ode;
pub mod quadrature;
pub mod reduction;
pub mod rescaling;

pub use error::{Error, Result};
