//! Spectral representations of the heat semigroups with switching boundary
//! data on `[0, L]`.

mod basis;
mod example;
mod field;
mod flows;
mod transfer;

pub use basis::{interior_grid, Basis, BasisKind, GridEvaluator};
pub use example::{coefficient_pair, make_flow_pair, state_basis, zero_state, Example, HeatPair, ModelParams};
pub use field::{project_ramp, ramp_coefficient, truncation_tolerance, RampData, SpectralField};
pub use flows::{decay_flow, ramp_flow, ConjugatedRamp, HeatFlow};
pub use transfer::{basis_transfer, mixed_inner_product, Transfer};
