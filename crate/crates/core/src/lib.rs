//! Wave-front tracking for the LWR traffic model with a moving bottleneck.

// `!(a < b)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod error;
pub mod flux;
pub mod fv;
pub mod mesh;
pub mod output;
pub mod profile;
pub mod riemann;
mod roots;
pub mod scenario;
pub mod tracker;

pub use error::{Error, Result};
pub use flux::{BandRelation, BottleneckGeometry, FluxFamily, FluxModel};
pub use mesh::{ControlSignal, Grids, PiecewiseLinearFlux};
pub use profile::StepFunction;
pub use scenario::Scenario;
