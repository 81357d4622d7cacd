//! Exterior algebra, truncated jets and lattice fields.

pub mod basis;
pub mod coeff;
pub mod form;
pub mod grid;
pub mod jet;

pub use coeff::{CMat, Coeff, ComplexCoeff, RMat};
pub use form::{ExteriorForm, FrameMetric};
pub use grid::{exterior_derivative, grid_partial, DScheme, GridField, GridSpec};
pub use jet::{Jet, JetSpace};
