//! Discontinuous Petrov–Galerkin discretisation of 2D convection–diffusion with
//! built-in error estimation and anisotropic metric-based mesh adaptation.

pub mod anisotropy;
pub mod assembly;
pub mod basis;
pub mod cases;
pub mod config;
pub mod continuous;
pub mod error;
pub mod field;
pub mod mesh;
pub mod metric;
pub mod poly;
pub mod quadrature;
pub mod remesh;
pub mod report;
pub mod solve;
pub mod star;
pub mod study;

pub use error::{Error, Result};
