//! Numerical workbench for Finsler geometry.
//!
//! Exact derivative propagation through truncated Taylor jets drives every
//! tensor in the crate: fundamental and Cartan tensors of a Finsler metric,
//! geodesic sprays and the Cartan connection, hh-curvature and flag curvature,
//! and the induced geometry of immersed submanifolds (second fundamental
//! form, shape operator, mean curvature). A verification harness samples
//! these quantities and checks the identities that characterize constant-
//! curvature spaces and totally umbilical submanifolds, emitting deterministic
//! JSON reports.

pub mod curvature;
pub mod error;
pub mod connection;
pub mod jets;
pub mod linalg;
pub mod harness;
pub mod metric;
pub mod submanifold;

pub use error::{Error, Result};
