pub mod classify;
pub mod error;
pub mod linalg;
pub mod lindblad;
pub mod observables;
pub mod operators;
pub mod response;
pub mod spectra;
pub mod symmetry;
pub mod tolerance;

pub use error::{Error, Result};
