//! Hybrid switching systems and their stationary laws, with spectral heat
//! flows under intermittent boundary conditions.

pub mod closed_form;
pub mod error;
pub mod hybrid;
pub(crate) mod numeric;
pub mod rng;
pub mod spectral;
pub mod switching;
pub mod verify;

pub use error::{Error, Result};
