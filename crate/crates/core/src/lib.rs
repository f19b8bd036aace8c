//! Cavity magnomechanics: nonlinear steady state, probe response, group
//! index and lateral light drag, plus a sweep engine and spectral feature
//! extraction.

pub mod config;
pub mod cubic;
pub mod linalg;
pub mod params;
pub mod presets;
pub mod response;
pub mod steady;
pub mod sweep;

pub use params::{DetuningConvention, DriveSpec, PhysicalConstants, SphereSpec, SystemParams};
pub use response::{DragQuadrature, ProbeResponse, ResponseError};
pub use steady::{Branch, BranchPolicy, SteadyError, SteadyState};
