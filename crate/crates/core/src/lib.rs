//! Numerical laboratory for g-natural metrics on tangent bundles of surfaces.
//!
//! Starting from a base surface metric `g` and six generator functions of
//! `t = g_x(u, u)`, the crate assembles the bundle metric `G` on `TM`,
//! computes its Levi-Civita connection, curvature tensor and Jacobi
//! operators exactly (truncated Taylor arithmetic, no differencing), and
//! checks the spectral identities and Osserman-type behaviour of the result.

pub mod bundle;
pub mod chart;
pub mod config;
pub mod curvature;
pub mod eigen;
pub mod error;
pub mod expr;
pub mod fd;
pub mod frames;
pub mod generators;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod osserman;
pub mod report;
pub mod runner;

pub use error::{GnatError, Result};
pub use jet::Jet;
