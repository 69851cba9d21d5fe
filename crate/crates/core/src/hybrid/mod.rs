//! Generic engine for two flows composed at random switching times.

mod flow;
mod pair;

pub use flow::{Flow, Isometry, Relaxation, State};
pub use pair::{
    Certificate, FlowPair, PullbackOptions, PullbackSample, StationaryDraw, StationaryForm, Target, Variant,
};
