//! Numerical models of CP^n, the Calabi hyper-Kähler metric on its tangent bundle,
//! the associated hyper-Kähler moment map, and finite-difference verifiers for the
//! harmonic-morphism and conformality properties built on them.

pub mod calabi;
pub mod calibration;
pub mod chart;
pub mod conformality;
pub mod error;
pub mod fd;
pub mod gibbons;
pub mod io;
pub mod matkit;
pub mod moment;
pub mod projective;
pub mod report;
pub mod sampling;

pub use error::{GeomError, Result};
pub use report::{CheckReport, Status};
