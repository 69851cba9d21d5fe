//! Switching environments and renewal-theoretic queries.

mod environment;
mod law;

pub use environment::{Environment, TimelinePoint, BLOCK};
pub use law::{GeneralLaw, HoldingLaw, Mode, SwitchLaw};
