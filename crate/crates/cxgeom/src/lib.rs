pub mod curvlab;
pub mod gaugelab;
pub mod dbar;
pub mod error;
pub mod jspace;
pub mod linalg;
pub mod projgeo;
pub mod rng;
pub mod sigma;
pub mod spencer;
pub mod spinor;
pub mod tensor;
pub mod verify;

pub use error::{GeomError, Result};
